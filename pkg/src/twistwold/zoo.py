"""Constructors for worked instances and planted ground-truth tuples.

Lattice instances come back as :class:`~twistwold.lattice.LatticeTuple`;
use :func:`~twistwold.lattice.dense_tuple` for a verified dense window.
All randomness is driven by explicit integer seeds.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg as sla

from .lattice import (
    LatticeShape,
    LatticeTuple,
    MonomialOperator,
    Weight,
    dense_tuple,
    exact,
    turns_of,
)
from .multi import all_labels
from .operators import haar_unitary
from .subspace import SubspaceBasis, _resolve
from .twisted import TwistedTuple, TwistFamily, twisted_tuple


def _unimodular(r, what="r"):
    r = complex(r)
    if abs(abs(r) - 1) > 1e-12:
        raise ValueError(f"{what} must be unimodular, got |{what}| = {abs(r):.6g}")
    return turns_of(r)


def _polar(z):
    z = complex(z)
    if abs(z) > 1 + 1e-12:
        raise ValueError(f"scalar {z} has modulus > 1")
    if z == 0:
        return Fraction(0), Fraction(0)
    return exact(min(abs(z), 1.0)), turns_of(z)


def unilateral_shift(shape: LatticeShape, coord: int, scale=1, name="") -> MonomialOperator:
    """``scale * M_z`` along unilateral coordinate ``coord`` (1-based)."""
    if not 1 <= coord <= shape.d_plus:
        raise ValueError(f"coordinate {coord} is not unilateral in {shape}")
    step = [0] * shape.ndim
    step[coord - 1] = 1
    mod, t = _polar(scale)
    w = Weight(mod, (1,) * shape.ndim, t, (0,) * shape.ndim)
    return MonomialOperator.translation(shape, step, w, name or f"M_z{coord}")


def bilateral_shift(shape: LatticeShape, coord: int, backward=False, name="") -> MonomialOperator:
    """Bilateral shift ``W`` (or ``W*``) along coordinate ``coord`` (1-based)."""
    if not shape.d_plus < coord <= shape.ndim:
        raise ValueError(f"coordinate {coord} is not bilateral in {shape}")
    step = [0] * shape.ndim
    step[coord - 1] = -1 if backward else 1
    return MonomialOperator.translation(shape, step, name=name or ("W*" if backward else "W"))


def commuting_shifts(d_plus: int, d_bi: int = 0, order=None) -> LatticeTuple:
    """One forward shift per coordinate, identity twists.

    ``order`` lists the coordinates (1-based) in operator order; the default
    is unilateral coordinates first.
    """
    shape = LatticeShape(d_plus, d_bi)
    order = list(range(1, shape.ndim + 1)) if order is None else list(order)
    ops = [unilateral_shift(shape, c) if c <= d_plus else bilateral_shift(shape, c) for c in order]
    return LatticeTuple(ops, name=f"shifts({d_plus},{d_bi})")


@dataclass(frozen=True, eq=False)
class ArPair:
    """Lattice pair, its dense window and the doubled dense tuple."""

    lattice: LatticeTuple
    dense: TwistedTuple
    doubled: TwistedTuple
    mask: np.ndarray


def ar_lattice(r, alpha=1) -> LatticeTuple:
    """``T_1 = A_r ⊗ α M_z`` and ``T_2 = α M_z ⊗ I`` on ``Z_+^2``, twist ``r``.

    ``A_r e_n = (r^n / 2) e_n``.
    """
    tr = _unimodular(r)
    mod, ta = _polar(alpha)
    shape = LatticeShape(2)
    T1 = MonomialOperator.translation(
        shape, (0, 1), Weight(mod / 2, (1, 1), ta, (tr, 0)), "A_r⊗M_z")
    T2 = MonomialOperator.translation(shape, (1, 0), Weight(mod, (1, 1), ta, (0, 0)), "M_z⊗I")
    U = MonomialOperator.scalar(shape, complex(r), "r")
    return LatticeTuple((T1, T2), {(1, 2): U}, name="hardy-ar")


def hardy_pair_Ar(r, alpha=1, N=8, tol=None, depth=3) -> ArPair:
    """The ``A_r`` pair on a window of side ``N`` plus its doubled variant
    ``T_1' = T_1 ⊕ T_2``, ``T_2' = T_2 ⊕ T_1`` with twist ``rI ⊕ r̄I``.

    The support is the set of indices at least ``depth`` steps from the
    truncation edge; words of length up to ``depth`` are exact there.
    """
    lat = ar_lattice(r, alpha)
    dense, dw, mask = dense_tuple(lat, N, depth=depth, tol=tol)
    T1, T2 = dw.ops
    Z = np.zeros_like(T1)
    D1 = np.block([[T1, Z], [Z, T2]])
    D2 = np.block([[T2, Z], [Z, T1]])
    k = T1.shape[0]
    r = complex(r)
    U = np.diag(np.concatenate([np.full(k, r), np.full(k, r.conjugate())]))
    idx = np.flatnonzero(mask)
    support = SubspaceBasis.coordinates(2 * k, np.concatenate([idx, idx + k]), tol)
    doubled = twisted_tuple([D1, D2], {(1, 2): U}, tol, support=support)
    return ArPair(lat, dense, doubled, mask)


def hardy_pair_DU(alpha1=1, alpha2=1, mode="phase", theta=0.0) -> LatticeTuple:
    """``T_1 = α_1 M_{z_1}`` and ``T_2 = α_2 M_{z_2} D[U]``.

    ``mode="phase"``: ``U`` is multiplication by ``e^{iθ}``, so
    ``T_2 e_m = α_2 e^{iθ m_1} e_{m + (0,1)}`` and the twist is the scalar
    ``e^{-iθ}``. ``mode="bilateral"``: ``U`` is the bilateral shift on an
    extra ``Z`` coordinate ``k``, ``T_2 e_{(m_1,m_2,k)} = α_2 e_{(m_1, m_2+1, k+m_1)}``,
    and the twist is ``e_k -> e_{k-1}``.
    """
    m1, t1 = _polar(alpha1)
    m2, t2 = _polar(alpha2)
    if mode == "phase":
        shape = LatticeShape(2)
        th = turns_of(cmath.exp(1j * theta))
        T1 = MonomialOperator.translation(shape, (1, 0), Weight(m1, (1, 1), t1, (0, 0)), "M_z1")
        T2 = MonomialOperator.translation(shape, (0, 1), Weight(m2, (1, 1), t2, (th, 0)), "M_z2 D[U]")
        U = MonomialOperator.translation(shape, (0, 0), Weight(1, (1, 1), -th, (0, 0)), "conj(u)")
        return LatticeTuple((T1, T2), {(1, 2): U}, name="hardy-du-phase")
    if mode == "bilateral":
        shape = LatticeShape(2, 1)
        T1 = MonomialOperator.translation(shape, (1, 0, 0), Weight(m1, (1, 1, 1), t1, (0, 0, 0)), "M_z1")
        T2 = MonomialOperator(
            shape, ((1, 0, 0), (0, 1, 0), (1, 0, 1)), (0, 1, 0),
            Weight(m2, (1, 1, 1), t2, (0, 0, 0)), "M_z2 D[W]")
        U = bilateral_shift(shape, 3, backward=True)
        return LatticeTuple((T1, T2), {(1, 2): U}, name="hardy-du-bilateral")
    raise ValueError(f"mode must be 'phase' or 'bilateral', got {mode!r}")


def counterexample_Br(r=1) -> LatticeTuple:
    """``T_1 = B_r ⊗ M_z``, ``T_2 = M_z ⊗ I`` with twist ``r``, where
    ``B_r e_n = r^{n+1} e_{n+1}``.

    The forward relation holds; the adjoint one does not, so this tuple is
    only constructible for auditing (verification reports the failure).
    """
    tr = _unimodular(r)
    shape = LatticeShape(2)
    T1 = MonomialOperator.translation(shape, (1, 1), Weight(1, (1, 1), tr, (tr, 0)), "B_r⊗M_z")
    T2 = unilateral_shift(shape, 1, name="M_z⊗I")
    U = MonomialOperator.scalar(shape, complex(r), "r")
    return LatticeTuple((T1, T2), {(1, 2): U}, name="counterexample-br")


def clock(d, omega=None) -> np.ndarray:
    omega = np.exp(2j * np.pi / d) if omega is None else complex(omega)
    return np.diag(omega ** np.arange(d))


def shift(d) -> np.ndarray:
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def clock_shift_tuple(d, scales=(1.0, 1.0), omega=None, tol=None) -> TwistedTuple:
    """``T_1 = s_1 C_d``, ``T_2 = s_2 S_d`` with twist ``ω I`` (``C S = ω S C``)."""
    omega = np.exp(2j * np.pi / d) if omega is None else complex(omega)
    if abs(abs(omega) - 1) > 1e-12 or abs(omega ** d - 1) > 1e-9:
        raise ValueError("omega must be a d-th root of unity")
    s1, s2 = (float(s) for s in scales)
    if not (0 < s1 <= 1 and 0 < s2 <= 1):
        raise ValueError("scales must lie in (0, 1]")
    return twisted_tuple([s1 * clock(d, omega), s2 * shift(d)], {(1, 2): omega}, tol)


def direct_sum(*tuples: TwistedTuple, strict=True) -> TwistedTuple:
    """Block-diagonal sum of tuples with the same ``n``."""
    n = tuples[0].n
    if any(t.n != n for t in tuples):
        raise ValueError("direct sum needs tuples of the same length")
    ops = [sla.block_diag(*(t.op(i) for t in tuples)) for i in range(1, n + 1)]
    units = {p: sla.block_diag(*(t.twist.unit(*p) for t in tuples)) for p in tuples[0].twist.pairs}
    return twisted_tuple(ops, units, tuples[0].tol, strict)


@dataclass(frozen=True)
class PlantedSpec:
    """Ground-truth layout for :func:`planted_tuple`.

    ``dims[k]`` is the block dimension of the slice ``all_labels(n)[k]``
    (binary-counter order). Coordinates in a block's label get a strict
    contraction with norm in ``[0.3, max_scale]``; the others a unimodular
    multiple of a unitary.
    """

    n: int
    dims: tuple
    seed: int = 0
    max_scale: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if len(self.dims) != 2 ** self.n:
            raise ValueError(f"need {2 ** self.n} block dims, got {len(self.dims)}")
        if any(d < 0 for d in self.dims) or sum(self.dims) < 1:
            raise ValueError("block dims must be >= 0 with positive total")
        if not 0.3 <= self.max_scale < 1:
            raise ValueError("max_scale must lie in [0.3, 1)")


def _block(d, label, n, rng, max_scale):
    # T_i = s_i C^a S^b on C^d; returns ops and the pairwise twist scalars
    C, S = clock(d), shift(d)
    W = []
    for i in range(1, n + 1):
        a, b = rng.integers(0, d, size=2)
        base = np.linalg.matrix_power(C, int(a)) @ np.linalg.matrix_power(S, int(b))
        if i in label:
            s = rng.uniform(0.3, max_scale)
        else:
            s = np.exp(2j * np.pi * rng.uniform())
        W.append((s, base))
    lam = {}
    for i in range(n):
        for j in range(i + 1, n):
            Wi, Wj = W[i][1], W[j][1]
            lam[(i + 1, j + 1)] = np.trace((Wj @ Wi).conj().T @ (Wi @ Wj)) / d
    return [s * B for s, B in W], lam


def planted_tuple(spec: PlantedSpec, tol=None):
    """Block-diagonal twisted tuple with one block per slice, conjugated by a
    seeded Haar unitary ``Q``.

    Returns ``(tuple, truth)`` with ``truth[label]`` the planted slice
    (``Q`` applied to that block's coordinates).
    """
    tol = _resolve(tol)
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    labels = all_labels(n)
    N = sum(spec.dims)
    ops = [np.zeros((N, N), dtype=complex) for _ in range(n)]
    units = {p: np.zeros((N, N), dtype=complex) for p in _pairs(n)}
    spans = {}
    off = 0
    for label, d in zip(labels, spec.dims):
        sl = slice(off, off + d)
        spans[label] = np.arange(off, off + d)
        off += d
        if d == 0:
            continue
        blk, lam = _block(d, label, n, rng, spec.max_scale)
        for i in range(n):
            ops[i][sl, sl] = blk[i]
        for p in units:
            units[p][sl, sl] = lam[p] * np.eye(d)
    Q = haar_unitary(N, rng)
    ops = [Q @ T @ Q.conj().T for T in ops]
    units = {p: Q @ U @ Q.conj().T for p, U in units.items()}
    t = twisted_tuple(ops, TwistFamily(n, N, units), tol)
    truth = {lab: SubspaceBasis(N, Q[:, idx], tol) for lab, idx in spans.items()}
    return t, truth


def _pairs(n):
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def random_planted_spec(n, seed, max_dim=24, min_block=0) -> PlantedSpec:
    """Random block dims (total ``<= max_dim``) with seed-derived layout."""
    rng = np.random.default_rng([seed, n])
    k = 2 ** n
    top = max(1, max_dim // k)
    dims = rng.integers(min_block, top + 1, size=k)
    if dims.sum() == 0:
        dims[-1] = 1
    return PlantedSpec(n, tuple(int(d) for d in dims), seed)


@dataclass(frozen=True, eq=False)
class PlantedContraction:
    T: np.ndarray
    unitary_space: SubspaceBasis
    cnu_space: SubspaceBasis
    blocks: tuple = field(default_factory=tuple)


def _cnu_block(kind, d, rng):
    if kind == "scaled_unitary":
        return rng.uniform(0.2, 0.9) * haar_unitary(d, rng)
    if kind == "jordan":
        lam = rng.uniform(0, 0.5) * np.exp(2j * np.pi * rng.uniform())
        return lam * np.eye(d) + 0.5 * np.eye(d, k=-1)
    if kind == "truncated_shift":
        w = np.ones(d - 1)
        if d > 2:
            w[rng.integers(0, d - 1)] = rng.uniform(0.3, 0.9)
        return np.diag(w, k=-1).astype(complex)
    if kind == "random":
        A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        return A / np.linalg.norm(A, 2)
    raise ValueError(kind)


CNU_KINDS = ("scaled_unitary", "jordan", "truncated_shift", "random")


def planted_contraction(seed, dim=None) -> PlantedContraction:
    """Unitary block ⊕ one or more c.n.u. blocks, conjugated by a Haar unitary.

    Block kinds: strict multiples of unitaries, Jordan-type blocks, truncated
    (partially weighted) shifts and norm-one random matrices.
    """
    rng = np.random.default_rng(seed)
    N = int(rng.integers(4, 17)) if dim is None else int(dim)
    k = int(rng.integers(0, N + 1))
    blocks = []
    if k:
        blocks.append(("unitary", haar_unitary(k, rng)))
    rest = N - k
    while rest:
        d = int(rng.integers(1, rest + 1))
        kind = CNU_KINDS[int(rng.integers(0, len(CNU_KINDS)))]
        # a 1x1 shift is 0 and a 1x1 norm-one block is unitary
        if kind in ("truncated_shift", "random") and d < 2:
            kind = "scaled_unitary"
        blocks.append((kind, _cnu_block(kind, d, rng)))
        rest -= d
    T0 = sla.block_diag(*(B for _, B in blocks)).astype(complex)
    Q = haar_unitary(N, rng)
    T = Q @ T0 @ Q.conj().T
    return PlantedContraction(
        T,
        SubspaceBasis(N, Q[:, :k]),
        SubspaceBasis(N, Q[:, k:]),
        tuple(kind for kind, _ in blocks),
    )


def lattice_corpus():
    """Named isometric lattice pairs used for the formula cross-checks."""
    return {
        "shifts": commuting_shifts(2),
        "du-phase": hardy_pair_DU(1, 1, "phase", 2 * math.pi / 5),
        "du-bilateral": hardy_pair_DU(1, 1, "bilateral"),
        "shift-bilateral": commuting_shifts(1, 1),
        "bilateral-shift": commuting_shifts(1, 1, order=(2, 1)),
        "bilateral-pair": commuting_shifts(0, 2),
        "du-phase-unimodular": hardy_pair_DU(1j, cmath.exp(0.25j * math.pi), "phase", math.pi / 3),
    }


def dense_corpus(depth=3):
    """Named dense tuples that pass verification: clock/shift pairs, planted
    tuples for ``n`` in 1..3 and the densified ``A_r`` pairs.

    ``depth`` sets the interior margin of the densified pairs; window side is
    ``depth + 4`` so the support keeps a 4x4 patch.
    """
    ar = hardy_pair_Ar(1j, 0.5, N=depth + 4, depth=depth)
    out = {
        "clock-shift-pure": clock_shift_tuple(3, (0.5, 0.7)),
        "clock-shift-unitary": clock_shift_tuple(3, (1, 1)),
        "clock-shift-mixed": direct_sum(clock_shift_tuple(2, (1, 1)), clock_shift_tuple(2, (0.5, 0.5))),
        "clock-shift-d5": clock_shift_tuple(5, (0.9, 1)),
        "hardy-ar": ar.dense,
        "hardy-ar-doubled": ar.doubled,
    }
    for seed, (n, dims) in enumerate([(1, (2, 3)), (2, (2, 3, 1, 2)), (2, (1, 0, 2, 1)),
                                      (2, (0, 2, 2, 0)), (3, (1, 1, 0, 1, 1, 0, 1, 1))]):
        out[f"planted-n{n}-{seed}"] = planted_tuple(PlantedSpec(n, dims, seed))[0]
    return out
