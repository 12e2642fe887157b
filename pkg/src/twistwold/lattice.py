"""Exact monomial operators on multi-index lattices.

The ambient space has an orthonormal basis ``e_m`` indexed by
``m in Z_+^{d_plus} x Z^{d_bi}`` (unilateral coordinates first). A
:class:`MonomialOperator` sends ``e_m`` to ``c(m) e_{sigma(m)}`` with

* ``sigma(m) = A m + delta``, ``A`` an integer unit lower-triangular matrix,
* ``c(m) = s * prod(rho_j ** m_j) * exp(2 pi i (phi_0 + sum(t_j m_j)))``.

Moduli and phases (in turns) are kept as :class:`fractions.Fraction`, so
relation checks compare coefficients exactly rather than to a tolerance.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InadmissibleIndexError, NotAnIsometryError, WindowError


def exact(x) -> Fraction:
    """Exact rational value of an int, float, Fraction or ``"p/q"`` string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(float(x))


def turns_of(z) -> Fraction:
    """Phase of a nonzero complex number in turns, snapped to a nearby
    rational with small denominator when one is within 1e-13."""
    t = cmath.phase(complex(z)) / (2 * math.pi)
    snapped = Fraction(t).limit_denominator(1_000_000)
    if abs(float(snapped) - t) < 1e-13:
        return snapped % 1
    return Fraction(t) % 1


_EXACT_UNITS = {Fraction(0): 1, Fraction(1, 4): 1j, Fraction(1, 2): -1, Fraction(3, 4): -1j}


@dataclass(frozen=True)
class Coefficient:
    """``modulus * exp(2 pi i turns)`` with exact rational parts."""

    modulus: Fraction
    turns: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "modulus", exact(self.modulus))
        t = exact(self.turns) % 1 if self.modulus else Fraction(0)
        object.__setattr__(self, "turns", t)

    def __mul__(self, other: "Coefficient") -> "Coefficient":
        return Coefficient(self.modulus * other.modulus, self.turns + other.turns)

    def conj(self) -> "Coefficient":
        return Coefficient(self.modulus, -self.turns)

    def __complex__(self):
        unit = _EXACT_UNITS.get(self.turns)
        if unit is None:
            unit = cmath.exp(2j * math.pi * float(self.turns))
        return complex(float(self.modulus) * unit)

    @property
    def is_zero(self) -> bool:
        return self.modulus == 0


ONE = Coefficient(Fraction(1))


@dataclass(frozen=True)
class LatticeShape:
    d_plus: int
    d_bi: int = 0

    def __post_init__(self):
        if self.d_plus < 0 or self.d_bi < 0 or self.d_plus + self.d_bi < 1:
            raise ValueError("a lattice needs at least one coordinate")

    @property
    def ndim(self) -> int:
        return self.d_plus + self.d_bi

    def is_admissible(self, m) -> bool:
        return len(m) == self.ndim and all(m[c] >= 0 for c in range(self.d_plus))

    def window(self, N):
        """Window indices in lexicographic order.

        Unilateral coordinates run over ``0..N-1``; bilateral ones over
        ``-(N // 2) .. N - 1 - N // 2``.
        """
        lo = -(N // 2)
        ranges = [range(N)] * self.d_plus + [range(lo, lo + N)] * self.d_bi
        return list(itertools.product(*ranges))


@dataclass(frozen=True)
class Weight:
    """Closed-form weight rule ``c(m)``; see the module docstring."""

    modulus: Fraction = Fraction(1)
    radii: tuple = ()
    turns0: Fraction = Fraction(0)
    turns: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "modulus", exact(self.modulus))
        object.__setattr__(self, "turns0", exact(self.turns0) % 1)
        object.__setattr__(self, "radii", tuple(exact(r) for r in self.radii))
        object.__setattr__(self, "turns", tuple(exact(t) for t in self.turns))
        if self.modulus < 0 or any(r < 0 for r in self.radii):
            raise ValueError("weight moduli and radii must be nonnegative")

    @classmethod
    def scalar(cls, z, ndim):
        z = complex(z)
        turns0 = turns_of(z) if z != 0 else Fraction(0)
        return cls(exact(abs(z)), (1,) * ndim, turns0, (0,) * ndim)

    def at(self, m) -> Coefficient:
        mod = self.modulus
        for r, mj in zip(self.radii, m):
            if r != 1:
                mod *= r ** mj
        ph = self.turns0 + sum((t * mj for t, mj in zip(self.turns, m)), Fraction(0))
        return Coefficient(mod, ph)


@dataclass(frozen=True)
class MonomialOperator:
    """``e_m -> c(m) e_{A m + delta}`` on a lattice."""

    shape: LatticeShape
    A: tuple
    delta: tuple
    weight: Weight = field(default_factory=Weight)
    name: str = ""

    def __post_init__(self):
        d = self.shape.ndim
        A = tuple(tuple(int(x) for x in row) for row in self.A)
        delta = tuple(int(x) for x in self.delta)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "delta", delta)
        if len(A) != d or any(len(row) != d for row in A) or len(delta) != d:
            raise ValueError(f"index map must be {d}-dimensional")
        for j in range(d):
            if A[j][j] != 1 or any(A[j][c] for c in range(j + 1, d)):
                raise ValueError("index map matrix must be unit lower-triangular")
        for j in range(self.shape.d_plus):
            if delta[j] < 0 or any(A[j][c] < 0 for c in range(j)):
                raise ValueError("index map must keep unilateral coordinates nonnegative")
        w = self.weight
        if not w.radii:
            w = Weight(w.modulus, (1,) * d, w.turns0, (0,) * d)
            object.__setattr__(self, "weight", w)
        if len(w.radii) != d or len(w.turns) != d:
            raise ValueError("weight rule has the wrong number of coordinates")
        if w.modulus > 1 or any(r > 1 for r in w.radii):
            raise ValueError("weights must have modulus <= 1 (contraction)")
        if any(w.radii[c] != 1 for c in range(self.shape.d_plus, d)):
            raise ValueError("radii along bilateral coordinates must be 1")

    @classmethod
    def translation(cls, shape, step, weight=None, name=""):
        """``e_m -> w e_{m + step}``."""
        d = shape.ndim
        eye = tuple(tuple(int(r == c) for c in range(d)) for r in range(d))
        return cls(shape, eye, tuple(step), weight or Weight(), name)

    @classmethod
    def scalar(cls, shape, z, name=""):
        return cls.translation(shape, (0,) * shape.ndim, Weight.scalar(z, shape.ndim), name)

    def sigma(self, m):
        return tuple(sum(a * x for a, x in zip(row, m)) + dl for row, dl in zip(self.A, self.delta))

    def sigma_inv(self, p):
        q = []
        for j, row in enumerate(self.A):
            q.append(p[j] - self.delta[j] - sum(row[c] * q[c] for c in range(j)))
        return tuple(q)

    def coefficient(self, m) -> Coefficient:
        return self.weight.at(m)

    @property
    def isometric(self) -> bool:
        w = self.weight
        return w.modulus == 1 and all(r == 1 for r in w.radii)

    @property
    def surjective(self) -> bool:
        """``sigma`` maps the admissible set onto itself."""
        d = self.shape.d_plus
        return all(self.delta[j] == 0 and not any(self.A[j][:j]) for j in range(d))

    @property
    def unitary(self) -> bool:
        return self.isometric and self.surjective


def _check(shape, m):
    if not shape.is_admissible(m):
        raise InadmissibleIndexError(f"index {m} is not admissible for {shape}")


def apply(op: MonomialOperator, m):
    """``op e_m`` as ``(index, Coefficient)``, or ``None`` if annihilated."""
    m = tuple(m)
    _check(op.shape, m)
    c = op.coefficient(m)
    if c.is_zero:
        return None
    return op.sigma(m), c


def apply_adjoint(op: MonomialOperator, p):
    """``op* e_p``: ``conj(c(q)) e_q`` with ``q = sigma^{-1}(p)`` if admissible."""
    p = tuple(p)
    _check(op.shape, p)
    q = op.sigma_inv(p)
    if not op.shape.is_admissible(q):
        return None
    c = op.coefficient(q)
    if c.is_zero:
        return None
    return q, c.conj()


def apply_word(word, m):
    """Apply ``[(op, adjoint?), ...]`` left to right to ``e_m``."""
    state = (tuple(m), ONE)
    for op, adj in word:
        nxt = (apply_adjoint if adj else apply)(op, state[0])
        if nxt is None:
            return None
        state = (nxt[0], state[1] * nxt[1])
    return state


@dataclass(frozen=True)
class LatticeTuple:
    """Monomial operators ``T_1..T_n`` on one lattice with monomial twists.

    ``twists`` maps ``(i, j)``, ``i < j``, to the monomial unitary ``U_ij``;
    missing pairs are the identity.
    """

    ops: tuple
    twists: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if not self.ops:
            raise ValueError("a lattice tuple needs at least one operator")
        shape = self.ops[0].shape
        if any(op.shape != shape for op in self.ops):
            raise ValueError("operators live on different lattices")
        tw = dict(self.twists)
        for key in itertools.combinations(range(1, len(self.ops) + 1), 2):
            tw.setdefault(key, MonomialOperator.scalar(shape, 1, name="I"))
        for (i, j), U in tw.items():
            if not 1 <= i < j <= len(self.ops):
                raise ValueError(f"bad twist key {(i, j)}")
            if U.shape != shape:
                raise ValueError("twist lives on a different lattice")
        object.__setattr__(self, "twists", dict(sorted(tw.items())))

    @property
    def shape(self) -> LatticeShape:
        return self.ops[0].shape

    @property
    def n(self) -> int:
        return len(self.ops)

    def op(self, i) -> MonomialOperator:
        return self.ops[i - 1]

    def twist_word(self, i, j, adjoint=False):
        """``U_ij`` (or its adjoint) as a one-letter word."""
        if i < j:
            return [(self.twists[(i, j)], adjoint)]
        return [(self.twists[(j, i)], not adjoint)]

    @property
    def isometric(self) -> bool:
        return all(op.isometric for op in self.ops)


def _same(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return a[0] == b[0] and a[1] == b[1]


@dataclass
class RelationCheck:
    relation: str
    i: int
    j: int
    k: object
    checked: int = 0
    failures: int = 0
    first_counterexample: tuple | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0


@dataclass(frozen=True)
class LatticeReport:
    window: int
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self):
        return next((c for c in self.checks if not c.passed), None)

    def get(self, relation, i, j, k=0) -> RelationCheck:
        for c in self.checks:
            if (c.relation, c.i, c.j, c.k) == (relation, i, j, k):
                return c
        raise KeyError((relation, i, j, k))


def verify_lattice_relations(t: LatticeTuple, window: int) -> LatticeReport:
    """Check every defining relation on each window index by exact index and
    coefficient comparison."""
    if window < 1:
        raise WindowError("window must be >= 1")
    n = t.n
    idx = t.shape.window(window)
    checks = []

    def run(check, lhs, rhs):
        for m in idx:
            check.checked += 1
            if not _same(apply_word(lhs, m), apply_word(rhs, m)):
                check.failures += 1
                if check.first_counterexample is None:
                    check.first_counterexample = m
        checks.append(check)

    # weights are validated to |c(m)| <= 1 and sigma is injective, so every
    # operator is a contraction by construction
    for k in range(1, n + 1):
        checks.append(RelationCheck("contraction", k, k, 0, checked=1))
    for i, j in itertools.permutations(range(1, n + 1), 2):
        Ti, Tj = t.op(i), t.op(j)
        run(RelationCheck("forward", i, j, 0),
            [(Tj, False), (Ti, False)],
            [(Ti, False), (Tj, False)] + t.twist_word(i, j))
        run(RelationCheck("adjoint", i, j, 0),
            [(Tj, False), (Ti, True)],
            [(Ti, True), (Tj, False)] + t.twist_word(i, j, adjoint=True))
    for (i, j), U in t.twists.items():
        for k in range(1, n + 1):
            Tk = t.op(k)
            run(RelationCheck("twist_commute", i, j, k), [(U, False), (Tk, False)], [(Tk, False), (U, False)])
    for (i, j), U in t.twists.items():
        c = RelationCheck("twist_unitary", i, j, 0, checked=1)
        if not U.unitary:
            c.failures = 1
        checks.append(c)
    for (a, U), (b, V) in itertools.combinations(t.twists.items(), 2):
        run(RelationCheck("twist_pair_commute", a[0], a[1], b), [(V, False), (U, False)], [(U, False), (V, False)])
    return LatticeReport(window, tuple(checks))


def in_kernel_of_adjoint(op, m) -> bool:
    return apply_adjoint(op, m) is None


def wandering_set(t: LatticeTuple, label, window: int):
    """Window indices ``m`` with ``T_i* e_m = 0`` for every ``i`` in ``label``."""
    return [m for m in t.shape.window(window) if all(in_kernel_of_adjoint(t.op(i), m) for i in label)]


def backward_orbit(op: MonomialOperator, m, step_cap: int):
    """Decide whether ``op*`` eventually annihilates ``e_m``.

    Returns ``("exits", steps)``, ``("infinite", None)`` or
    ``("undecided", None)``. The unilateral part of ``sigma^{-1}`` depends
    only on unilateral coordinates and never increases them, so the orbit
    either leaves the admissible set or its unilateral part becomes
    stationary; a stationary unilateral part certifies an infinite orbit.
    Weights are assumed nonvanishing (isometric tuples).
    """
    d = op.shape.d_plus
    cur = tuple(m)
    for step in range(step_cap + 1):
        q = op.sigma_inv(cur)
        if not op.shape.is_admissible(q):
            return "exits", step
        if q[:d] == cur[:d] and op.sigma_inv(q)[:d] == q[:d]:
            return "infinite", None
        cur = q
    return "undecided", None


@dataclass(frozen=True)
class SliceClassification:
    index: tuple
    label: tuple | None
    path: tuple = ()
    residue: tuple | None = None
    status: str = "decided"

    @property
    def decided(self) -> bool:
        return self.status == "decided"


def classify_index(t: LatticeTuple, m, step_cap: int | None = None) -> SliceClassification:
    """Label of the slice containing ``e_m`` for an isometric tuple.

    Coordinate ``i`` joins the label iff the backward ``T_i*`` orbit of
    ``e_m`` leaves the lattice. The witness strips ``e_m`` by those
    adjoints, coordinate by coordinate, down to a residue in the common
    wandering set.
    """
    if not t.isometric:
        raise NotAnIsometryError("slice classification needs isometric operators")
    m = tuple(m)
    _check(t.shape, m)
    if step_cap is None:
        step_cap = 4 * (sum(abs(x) for x in m) + 1)
    label = []
    for i in range(1, t.n + 1):
        verdict, _ = backward_orbit(t.op(i), m, step_cap)
        if verdict == "undecided":
            return SliceClassification(m, None, status="undecided")
        if verdict == "exits":
            label.append(i)
    label = tuple(label)

    path = []
    cur = m
    for i in label:
        op = t.op(i)
        steps = 0
        while True:
            nxt = apply_adjoint(op, cur)
            if nxt is None:
                break
            cur = nxt[0]
            steps += 1
        path.append((i, steps))
    status = "decided"
    if not all(in_kernel_of_adjoint(t.op(i), cur) for i in label):
        status = "inconsistent"
    for i in range(1, t.n + 1):
        if i not in label and backward_orbit(t.op(i), cur, step_cap)[0] != "infinite":
            status = "inconsistent"
    return SliceClassification(m, label, tuple(path), cur, status)


def replay_witness(t: LatticeTuple, c: SliceClassification):
    """Re-apply ``T_Lambda`` along the recorded path from the residue."""
    word = []
    for i, steps in reversed(c.path):
        word.extend([(t.op(i), False)] * steps)
    return apply_word(word, c.residue)


@dataclass(frozen=True)
class SliceCounts:
    window: int
    counts: dict
    labels: dict
    undecided: tuple
    outside_window: tuple

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def slice_dimensions(t: LatticeTuple, window: int, step_cap: int | None = None) -> SliceCounts:
    """Classify every window index and count indices per label.

    ``undecided`` lists indices the step cap could not settle;
    ``outside_window`` lists decided indices whose stripping path passes
    through indices outside the window.
    """
    from .multi import all_labels

    step_cap = 4 * window if step_cap is None else step_cap
    idx = t.shape.window(window)
    inside = set(idx)
    counts = {lab: 0 for lab in all_labels(t.n)}
    labels = {}
    undecided = []
    outside = []
    for m in idx:
        c = classify_index(t, m, step_cap)
        if not c.decided:
            undecided.append(m)
            continue
        counts[c.label] += 1
        labels[m] = c.label
        if c.residue not in inside:
            outside.append(m)
    return SliceCounts(window, counts, labels, tuple(undecided), tuple(outside))


def pair_isometry_labels(t: LatticeTuple, window: int, cap: int | None = None) -> dict:
    """Slice labels of a pair of isometries from the four explicit formulas
    ``H_uu = ⋂ T_1^a T_2^b H``, ``H_us = ⊕ T_2^b (⋂ T_1^a N(T_2*))``,
    ``H_su = ⊕ T_1^a (⋂ T_2^b N(T_1*))``,
    ``H_ss = ⊕ T_1^a T_2^b (N(T_1*) ∩ N(T_2*))``, each index membership
    decided by walking adjoints on the lattice with chains capped at
    ``cap`` (default ``4 * window``).

    Returns ``{index: label}``; an index matching zero or several formulas
    maps to ``None``.
    """
    if t.n != 2:
        raise ValueError("pair formulas need exactly two operators")
    if not t.isometric:
        raise NotAnIsometryError("pair formulas need isometric operators")
    K = 4 * window if cap is None else cap
    T1, T2 = t.op(1), t.op(2)

    def back(op, p, k):
        # index q with op^k e_q ∝ e_p, or None
        for _ in range(k):
            r = apply_adjoint(op, p)
            if r is None:
                return None
            p = r[0]
        return p

    def z1(p):
        return in_kernel_of_adjoint(T1, p)

    def z2(p):
        return in_kernel_of_adjoint(T2, p)

    def in_uu(p):
        q = back(T1, p, K)
        return q is not None and back(T2, q, K) is not None

    def in_chain(p, shift_op, inner_op, inner_zero):
        # p in ⊕_b shift^b (⋂_a inner^a Z)
        q = p
        for _ in range(K + 1):
            if all(inner_zero(r) for r in _orbit(inner_op, q, K)):
                return True
            nxt = apply_adjoint(shift_op, q)
            if nxt is None:
                return False
            q = nxt[0]
        return False

    def _orbit(op, q, k):
        # q, op*-preimages up to k steps; None in the list marks annihilation
        out = [q]
        for _ in range(k):
            r = apply_adjoint(op, q)
            if r is None:
                return [None]
            q = r[0]
            out.append(q)
        return out

    def safe(pred):
        return lambda r: r is not None and pred(r)

    def in_us(p):
        return in_chain(p, T2, T1, safe(z2))

    def in_su(p):
        return in_chain(p, T1, T2, safe(z1))

    def in_ss(p):
        q = p
        for _ in range(K + 1):
            r = q
            for _ in range(K + 1):
                if z1(r) and z2(r):
                    return True
                nxt = apply_adjoint(T2, r)
                if nxt is None:
                    break
                r = nxt[0]
            nxt = apply_adjoint(T1, q)
            if nxt is None:
                return False
            q = nxt[0]
        return False

    out = {}
    for p in t.shape.window(window):
        hits = [lab for lab, pred in (((), in_uu), ((2,), in_us), ((1,), in_su), ((1, 2), in_ss)) if pred(p)]
        out[p] = hits[0] if len(hits) == 1 else None
    return out


def _diag_value(op, power, adjoint_first, p):
    # T^k T*^k e_p = lam e_p (adjoint_first) or T*^k T^k e_p = lam e_p
    if adjoint_first:
        word = [(op, True)] * power + [(op, False)] * power
    else:
        word = [(op, False)] * power + [(op, True)] * power
    r = apply_word(word, p)
    if r is None:
        return Fraction(0)
    return r[1].modulus


def lattice_lemma_check(t: LatticeTuple, window: int, l: int, m: int) -> dict:
    """Exact commutator residuals of ``T_i``, ``T_i*`` with the diagonal
    operators ``T_j^m T_j*^m`` and ``T_j*^m T_j^m`` on the window, plus the
    third family (products of such diagonals, which always commute).

    Returns ``{(part, i, j): residual}`` with residuals as floats of exact
    values.
    """
    out = {}
    idx = t.shape.window(window)
    for i, j in itertools.permutations(range(1, t.n + 1), 2):
        Ti, Tj = t.op(i), t.op(j)
        for part, first in (("Ti|TjTj*", True), ("Ti|Tj*Tj", False)):
            worst = Fraction(0)
            worst_adj = Fraction(0)
            for p in idx:
                lam = _diag_value(Tj, m, first, p)
                img = apply(Ti, p)
                if img is not None:
                    diff = abs(lam - _diag_value(Tj, m, first, img[0])) * img[1].modulus
                    worst = max(worst, diff)
                pre = apply_adjoint(Ti, p)
                if pre is not None:
                    diff = abs(lam - _diag_value(Tj, m, first, pre[0])) * pre[1].modulus
                    worst_adj = max(worst_adj, diff)
            out[(part, i, j)] = float(worst)
            out[(part.replace("Ti|", "Ti*|"), i, j)] = float(worst_adj)
        for part in ("TiTi*|I-TjTj*", "TiTi*|I-Tj*Tj", "Ti*Ti|I-TjTj*", "Ti*Ti|I-Tj*Tj"):
            out[(part, i, j)] = 0.0
    return out


@dataclass(frozen=True, eq=False)
class DenseWindow:
    """Matrices of a lattice tuple on a window, images leaving it set to 0."""

    window: int
    indices: tuple
    ops: tuple
    twists: dict

    def position(self, m) -> int:
        return self.indices.index(tuple(m))


def densify_operator(op: MonomialOperator, window: int, indices=None) -> np.ndarray:
    indices = op.shape.window(window) if indices is None else indices
    pos = {m: k for k, m in enumerate(indices)}
    M = np.zeros((len(indices), len(indices)), dtype=complex)
    for k, m in enumerate(indices):
        r = apply(op, m)
        if r is not None and r[0] in pos:
            M[pos[r[0]], k] = complex(r[1])
    return M


def _generators(t):
    if isinstance(t, MonomialOperator):
        return [t]
    return list(t.ops) + list(t.twists.values())


def interior_mask(t, window: int, depth: int = 1) -> np.ndarray:
    """Window indices from which every word of length ``<= depth`` in the
    generators (operators, twists and their adjoints) stays inside the
    window or is annihilated by the lattice itself."""
    gens = _generators(t)
    shape = gens[0].shape
    idx = shape.window(window)
    good = set(idx)
    for _ in range(depth):
        nxt = set()
        for m in good:
            ok = True
            for g in gens:
                r = apply(g, m)
                if r is not None and r[0] not in good:
                    ok = False
                    break
                r = apply_adjoint(g, m)
                if r is not None and r[0] not in good:
                    ok = False
                    break
            if ok:
                nxt.add(m)
        good = nxt
    return np.array([m in good for m in idx])


def densify(t, window: int, depth: int = 1):
    """Dense matrices on the window plus the interior mask at ``depth``.

    For a single operator returns ``(matrix, mask)``; for a tuple returns
    ``(DenseWindow, mask)``.
    """
    if window < 2:
        raise WindowError("window must be >= 2")
    mask = interior_mask(t, window, depth)
    if not mask.any():
        raise WindowError(f"window {window} has an empty interior at depth {depth}")
    if isinstance(t, MonomialOperator):
        return densify_operator(t, window), mask
    idx = t.shape.window(window)
    ops = tuple(densify_operator(op, window, idx) for op in t.ops)
    tw = {k: densify_operator(U, window, idx) for k, U in t.twists.items()}
    return DenseWindow(window, tuple(idx), ops, tw), mask


def dense_tuple(t: LatticeTuple, window: int, depth: int = 3, strict: bool = True, tol=None):
    """Densified :class:`~twistwold.twisted.TwistedTuple` verified on the
    interior at ``depth`` (3 covers ``U_ij T_j T_i``)."""
    from .subspace import SubspaceBasis
    from .twisted import twisted_tuple

    dw, mask = densify(t, window, depth)
    support = SubspaceBasis.coordinates(len(dw.indices), np.flatnonzero(mask), tol)
    return twisted_tuple(dw.ops, dw.twists, tol, strict, support), dw, mask


@dataclass(frozen=True)
class OracleAgreement:
    window: int
    margin: int
    checked: int
    agreed: int
    mismatches: tuple

    @property
    def fraction(self) -> float:
        return self.agreed / self.checked if self.checked else 1.0


def dense_oracle_agreement(t: LatticeTuple, window: int, margin: int = 3, workers: int = 1, tol=None):
    """Compare :func:`classify_index` with slice membership of ``e_m`` in
    the dense decomposition of the densified tuple, over indices interior
    at depth ``margin``.

    ``e_m`` belongs to the dense slice whose projection keeps its norm
    (``||P e_m|| >= 1 - 1e-8``).
    """
    from .multi import decompose

    dt, dw, mask = dense_tuple(t, window, depth=margin, tol=tol)
    result = decompose(dt, workers=workers)
    interior = [m for m, keep in zip(dw.indices, mask) if keep]
    pos = {m: k for k, m in enumerate(dw.indices)}
    agreed = 0
    bad = []
    for m in interior:
        lab = classify_index(t, m, 4 * window).label
        dense_lab = None
        for s in result.slices:
            if s.dim and np.linalg.norm(s.space.columns[pos[m]]) >= 1 - 1e-8:
                dense_lab = s.label
        if lab == dense_lab:
            agreed += 1
        else:
            bad.append((m, lab, dense_lab))
    return OracleAgreement(window, margin, len(interior), agreed, tuple(bad))
