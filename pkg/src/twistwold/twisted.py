"""Tuples of contractions with a twist family of commuting unitaries.

Indices are 1-based throughout, matching the ``(i, j)`` labels used in
reports. ``U_ji`` is the adjoint of ``U_ij`` and ``U_ii = I``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .canonical import canonical_decompose
from .errors import DimensionError, VerificationError
from .operators import as_linear, as_operator, off_residual, opnorm
from .subspace import SubspaceBasis, _resolve


class TwistFamily:
    """Twist unitaries ``U_ij`` for ``1 <= i < j <= n``.

    Missing pairs default to the identity. A scalar entry ``w`` stands for
    ``w * I``.
    """

    def __init__(self, n, dim, units=None):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = int(n)
        self.dim = int(dim)
        self.units = {}
        for (i, j), U in (units or {}).items():
            if not (1 <= i < j <= n):
                raise ValueError(f"twist key {(i, j)} must satisfy 1 <= i < j <= {n}")
            if np.ndim(U) == 0:
                U = complex(U) * np.eye(dim, dtype=complex)
            U = as_operator(U)
            if U.shape[0] != dim:
                raise DimensionError(f"twist U_{i}{j} has dim {U.shape[0]}, expected {dim}")
            self.units[(i, j)] = U
        for pair in itertools.combinations(range(1, n + 1), 2):
            self.units.setdefault(pair, np.eye(dim, dtype=complex))

    @classmethod
    def identity(cls, n, dim):
        return cls(n, dim)

    def unit(self, i, j) -> np.ndarray:
        if i == j:
            return np.eye(self.dim, dtype=complex)
        if i < j:
            return self.units[(i, j)]
        return self.units[(j, i)].conj().T

    @property
    def pairs(self):
        return sorted(self.units)

    def compress(self, B):
        """Twist family of the compressions ``B* U_ij B``."""
        k = B.shape[1]
        return TwistFamily(self.n, k, {p: B.conj().T @ U @ B for p, U in self.units.items()})

    def permuted(self, perm):
        """Relabel so that new position ``p`` carries old index ``perm[p-1]``."""
        n = self.n
        units = {}
        for p, q in itertools.combinations(range(1, n + 1), 2):
            units[(p, q)] = self.unit(perm[p - 1], perm[q - 1])
        return TwistFamily(n, self.dim, units)


class Residual(NamedTuple):
    relation: str
    i: int
    j: int
    k: object
    residual: float


@dataclass(frozen=True)
class TwistReport:
    entries: tuple
    residual_tol: float

    @property
    def passed(self) -> bool:
        return all(e.residual <= self.residual_tol for e in self.entries)

    @property
    def max_residual(self) -> float:
        return max((e.residual for e in self.entries), default=0.0)


def _support_block(support, n):
    if support is None:
        return sp.identity(n, dtype=complex, format="csr")
    cols = support.columns if isinstance(support, SubspaceBasis) else np.asarray(support)
    return as_linear(cols) if cols.shape[0] >= 64 else cols


def _dagger(A):
    return A.conj().T


def validate_twist(f: TwistFamily, tol=None, support=None) -> TwistReport:
    """Unitarity of every ``U_ij`` and pairwise commutation of the family."""
    tol = _resolve(tol)
    S = _support_block(support, f.dim)
    entries = []
    lin = {p: as_linear(U) for p, U in f.units.items()}
    for (i, j) in f.pairs:
        U = lin[(i, j)]
        r = max(opnorm(_dagger(U) @ (U @ S) - S), opnorm(U @ (_dagger(U) @ S) - S))
        entries.append(Residual("twist_unitary", i, j, 0, r))
    for a, b in itertools.combinations(f.pairs, 2):
        A, B = lin[a], lin[b]
        r = opnorm(A @ (B @ S) - B @ (A @ S))
        entries.append(Residual("twist_pair_commute", a[0], a[1], b, r))
    return TwistReport(tuple(entries), tol.residual_tol)


@dataclass(frozen=True)
class RelationReport:
    """Residuals of every defining relation, ordered by ``(i, j)``.

    ``forward``: ``||T_i T_j - U_ij T_j T_i||``; ``adjoint``:
    ``||T_i* T_j - U_ij* T_j T_i*||``; ``twist_commute``:
    ``||T_k U_ij - U_ij T_k||`` (``k`` is stored in the ``k`` field).
    """

    entries: tuple
    residual_tol: float

    @property
    def passed(self) -> bool:
        return self.first_failure is None

    @property
    def first_failure(self):
        for e in self.entries:
            if e.residual > self.residual_tol:
                return e
        return None

    @property
    def max_residual(self) -> float:
        return max((e.residual for e in self.entries), default=0.0)

    def select(self, relation):
        return [e for e in self.entries if e.relation == relation]

    def residual(self, relation, i, j, k=0) -> float:
        for e in self.entries:
            if (e.relation, e.i, e.j, e.k) == (relation, i, j, k):
                return e.residual
        raise KeyError((relation, i, j, k))


def verify_relations(ops, twist: TwistFamily, tol=None, support=None) -> RelationReport:
    """Evaluate all defining relations of a twisted tuple.

    With ``support`` (a :class:`SubspaceBasis` or column array) every
    residual is measured on that subspace only, e.g. the interior of a
    truncated lattice window.
    """
    tol = _resolve(tol)
    n = len(ops)
    dim = ops[0].shape[0]
    S = _support_block(support, dim)
    T = [as_linear(A) for A in ops]
    entries = []
    for i in range(1, n + 1):
        entries.append(Residual("contraction", i, i, 0, max(0.0, opnorm(T[i - 1]) - 1.0)))

    TS = [A @ S for A in T]
    TsS = [_dagger(A) @ S for A in T]
    U = {p: as_linear(u) for p, u in twist.units.items()}

    def unit(i, j):
        return U[(i, j)] if i < j else _dagger(U[(j, i)])

    for i, j in itertools.permutations(range(1, n + 1), 2):
        Ti, Tj, Uij = T[i - 1], T[j - 1], unit(i, j)
        fwd = Ti @ TS[j - 1] - Uij @ (Tj @ TS[i - 1])
        adj = _dagger(Ti) @ TS[j - 1] - _dagger(Uij) @ (Tj @ TsS[i - 1])
        entries.append(Residual("forward", i, j, 0, opnorm(fwd)))
        entries.append(Residual("adjoint", i, j, 0, opnorm(adj)))
    for (i, j) in twist.pairs:
        for k in range(1, n + 1):
            Tk = T[k - 1]
            r = opnorm(Tk @ (U[(i, j)] @ S) - U[(i, j)] @ TS[k - 1])
            entries.append(Residual("twist_commute", i, j, k, r))
    entries.extend(validate_twist(twist, tol, support).entries)
    return RelationReport(tuple(entries), tol.residual_tol)


@dataclass(frozen=True, eq=False)
class TwistedTuple:
    """``n`` contractions on a common space together with their twist.

    Build with :func:`twisted_tuple`, which attaches the verification
    report.
    """

    ops: tuple
    twist: TwistFamily
    tol: object
    support: SubspaceBasis | None
    report: RelationReport

    @property
    def n(self) -> int:
        return len(self.ops)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def op(self, i) -> np.ndarray:
        return self.ops[i - 1]


def twisted_tuple(ops, twist=None, tol=None, strict=True, support=None) -> TwistedTuple:
    """Assemble and verify a twisted tuple.

    ``twist`` may be a :class:`TwistFamily`, a mapping ``{(i, j): U_ij}``
    or ``None`` (doubly commuting). In strict mode a failed verification
    raises :class:`VerificationError`; otherwise the failing report is
    carried on the tuple.
    """
    tol = _resolve(tol)
    ops = tuple(as_operator(A) for A in ops)
    if not ops:
        raise ValueError("a tuple needs at least one operator")
    dim = ops[0].shape[0]
    if any(A.shape[0] != dim for A in ops):
        raise DimensionError("operators have different dimensions")
    if not isinstance(twist, TwistFamily):
        twist = TwistFamily(len(ops), dim, twist or {})
    if twist.n != len(ops) or twist.dim != dim:
        raise DimensionError("twist family does not match the tuple")
    report = verify_relations(ops, twist, tol, support)
    if strict and not report.passed:
        bad = report.first_failure
        raise VerificationError(
            f"{bad.relation} relation fails for (i, j) = ({bad.i}, {bad.j}): residual {bad.residual:.3e}",
            report)
    return TwistedTuple(ops, twist, tol, support, report)


def verify_tuple(t: TwistedTuple) -> RelationReport:
    return verify_relations(t.ops, t.twist, t.tol, t.support)


def permute_tuple(t: TwistedTuple, perm, strict=True) -> TwistedTuple:
    """Reorder so that position ``p`` holds ``T_{perm[p-1]}``."""
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(1, t.n + 1)):
        raise ValueError(f"{perm} is not a permutation of 1..{t.n}")
    ops = [t.ops[p - 1] for p in perm]
    return twisted_tuple(ops, t.twist.permuted(perm), t.tol, strict, t.support)


class LemmaResidual(NamedTuple):
    part: str
    i: int
    j: int
    residual: float


def _pos(T, Ts, m, V):
    # T^m T*^m V
    for _ in range(m):
        V = Ts @ V
    for _ in range(m):
        V = T @ V
    return V


def _neg(T, Ts, m, V):
    # T*^m T^m V
    for _ in range(m):
        V = T @ V
    for _ in range(m):
        V = Ts @ V
    return V


def lemma_commutation_report(t: TwistedTuple, l: int, m: int, support=None):
    """Commutators implied by the twisted relations, for all ``i != j``.

    Parts 1 and 2: ``T_i`` and ``T_i*`` against ``T_j^m T_j*^m`` and
    ``T_j*^m T_j^m``. Part 3: ``T_i^l T_i*^l`` and ``T_i*^l T_i^l`` against
    ``I - T_j^m T_j*^m`` and ``I - T_j*^m T_j^m``. Returns a list of
    :class:`LemmaResidual` ordered by ``(i, j)``.
    """
    support = t.support if support is None else support
    S = _support_block(support, t.dim)
    T = [as_linear(A) for A in t.ops]
    Ts = [_dagger(A) for A in T]
    out = []

    def comm(f, g):
        return opnorm(f(g(S)) - g(f(S)))

    for i, j in itertools.permutations(range(1, t.n + 1), 2):
        a, as_ = T[i - 1], Ts[i - 1]
        b, bs = T[j - 1], Ts[j - 1]
        Pj = lambda V: _pos(b, bs, m, V)
        Qj = lambda V: _neg(b, bs, m, V)
        Ci = lambda V: V - Pj(V)
        Di = lambda V: V - Qj(V)
        Pi = lambda V: _pos(a, as_, l, V)
        Qi = lambda V: _neg(a, as_, l, V)
        out.append(LemmaResidual("Ti|TjTj*", i, j, comm(lambda V: a @ V, Pj)))
        out.append(LemmaResidual("Ti|Tj*Tj", i, j, comm(lambda V: a @ V, Qj)))
        out.append(LemmaResidual("Ti*|TjTj*", i, j, comm(lambda V: as_ @ V, Pj)))
        out.append(LemmaResidual("Ti*|Tj*Tj", i, j, comm(lambda V: as_ @ V, Qj)))
        out.append(LemmaResidual("TiTi*|I-TjTj*", i, j, comm(Pi, Ci)))
        out.append(LemmaResidual("TiTi*|I-Tj*Tj", i, j, comm(Pi, Di)))
        out.append(LemmaResidual("Ti*Ti|I-TjTj*", i, j, comm(Qi, Ci)))
        out.append(LemmaResidual("Ti*Ti|I-Tj*Tj", i, j, comm(Qi, Di)))
    return out


@dataclass(frozen=True, eq=False)
class ReductionReport:
    index: int
    split: object
    residuals: dict
    residual_tol: float

    @property
    def passed(self) -> bool:
        return all(r <= self.residual_tol for r in self.residuals.values())


def reduction_check(t: TwistedTuple, i: int) -> ReductionReport:
    """Check that the canonical split of ``T_i`` reduces every other ``T_j``.

    ``residuals`` maps ``(j, "unitary" | "cnu")`` to the off-diagonal
    residual of ``T_j`` against that part.
    """
    if not 1 <= i <= t.n:
        raise IndexError(f"index {i} out of range 1..{t.n}")
    split = canonical_decompose(t.op(i), t.tol)
    res = {}
    for j in range(1, t.n + 1):
        if j == i:
            continue
        res[(j, "unitary")] = off_residual(t.op(j), split.unitary_space)
        res[(j, "cnu")] = off_residual(t.op(j), split.cnu_space)
    return ReductionReport(i, split, res, t.tol.residual_tol)
