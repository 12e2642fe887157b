"""The ``2^n``-slice decomposition of a twisted tuple of contractions.

A slice label is the sorted tuple of coordinates acting completely
non-unitarily on that slice; the empty tuple is the jointly unitary part.
Slices are kept for every label, including zero-dimensional ones, and are
ordered as a binary counter (``()``, ``(1,)``, ``(2,)``, ``(1, 2)``, ...).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .canonical import canonical_decompose, chain_unitary_part, unitary_part
from .errors import ReductionError, VerificationError
from .operators import off_residual, opnorm
from .subspace import SubspaceBasis, orthonormalize, restricted_kernel, subspace_gap
from .twisted import TwistedTuple, permute_tuple, twisted_tuple, verify_relations


def label_index(label) -> int:
    return sum(1 << (i - 1) for i in label)


def all_labels(n):
    """Every subset of ``{1..n}`` in binary-counter order."""
    return [tuple(i + 1 for i in range(n) if mask >> i & 1) for mask in range(1 << n)]


def label_name(label) -> str:
    return "{" + ",".join(str(i) for i in label) + "}"


@dataclass(frozen=True, eq=False)
class DecompositionSlice:
    label: tuple
    space: SubspaceBasis
    blocks: tuple
    classification: dict
    residuals: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.space.dim


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    n: int
    ambient_dim: int
    slices: tuple
    diagnostics: dict

    def slice(self, label) -> DecompositionSlice:
        label = tuple(sorted(label))
        for s in self.slices:
            if s.label == label:
                return s
        raise KeyError(label)

    @property
    def dims(self) -> dict:
        return {s.label: s.dim for s in self.slices}


def _unitarity(X) -> float:
    k = X.shape[0]
    if k == 0:
        return 0.0
    I = np.eye(k)
    return max(opnorm(X.conj().T @ X - I), opnorm(X @ X.conj().T - I))


def _split(T, B, tol):
    if B.shape[1] == 0:
        return B, B
    split = canonical_decompose(B.conj().T @ T @ B, tol)
    return B @ split.unitary_space.columns, B @ split.cnu_space.columns


def _classify_slice(t, label, space):
    tol = t.tol
    B = space.columns
    blocks = tuple(B.conj().T @ T @ B for T in t.ops)
    cls = {}
    for i, X in enumerate(blocks, start=1):
        if space.dim == 0:
            cls[i] = ("cnu" if i in label else "unitary", 0.0)
        elif i in label:
            cls[i] = ("cnu", float(unitary_part(X, tol).dim))
        else:
            cls[i] = ("unitary", _unitarity(X))
    return blocks, cls


def decompose(t: TwistedTuple, workers: int = 1, strict: bool = True) -> DecompositionResult:
    """Split the space into ``2^n`` joint reducing slices.

    The space is split by the canonical decomposition of ``T_1``, then every
    piece by that of ``T_2`` compressed to it, and so on up to ``T_n``. With
    ``workers > 1`` the pieces of one level are processed concurrently; the
    merge is by label so the result matches the sequential run.
    """
    tol = t.tol
    if strict and not t.report.passed:
        bad = t.report.first_failure
        raise VerificationError(f"tuple fails the {bad.relation} relation for ({bad.i}, {bad.j})", t.report)
    n, N = t.n, t.dim
    limit = 100 * tol.residual_tol
    level = [((), np.eye(N, dtype=complex))]
    for k in range(1, n + 1):
        Tk = t.op(k)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda item: _split(Tk, item[1], tol), level))
        else:
            parts = [_split(Tk, B, tol) for _, B in level]
        nxt = []
        for (label, _), (Bu, Bc) in zip(level, parts):
            nxt.append((label, Bu))
            nxt.append((label + (k,), Bc))
        for label, B in nxt:
            space = SubspaceBasis(N, B, tol)
            for j in range(1, n + 1):
                r = off_residual(t.op(j), space)
                if r > limit:
                    raise ReductionError(
                        f"slice {label_name(label)} stops reducing T_{j} (residual {r:.3e})",
                        label=label, index=j, residual=r)
        level = sorted(nxt, key=lambda item: label_index(item[0]))

    slices = []
    for label, B in level:
        space = SubspaceBasis(N, B, tol)
        blocks, cls = _classify_slice(t, label, space)
        res = {"off_reducing": max(off_residual(T, space) for T in t.ops)}
        if space.dim:
            sub = verify_relations(blocks, t.twist.compress(B), tol)
            res["relations"] = sub.max_residual
            res["twist_off_reducing"] = max(
                (off_residual(U, space) for U in t.twist.units.values()), default=0.0)
        else:
            res["relations"] = 0.0
            res["twist_off_reducing"] = 0.0
        slices.append(DecompositionSlice(label, space, blocks, cls, res))

    allcols = np.hstack([s.space.columns for s in slices])
    owner = np.repeat(np.arange(len(slices)), [s.dim for s in slices])
    gram = np.abs(allcols.conj().T @ allcols)
    cross = float(gram[owner[:, None] != owner[None, :]].max(initial=0.0))
    completeness = opnorm(np.eye(N) - allcols @ allcols.conj().T)
    diagnostics = {
        "dim_sum": int(sum(s.dim for s in slices)),
        "completeness": completeness,
        "orthogonality": cross,
        "off_reducing": max(s.residuals["off_reducing"] for s in slices),
    }
    return DecompositionResult(n, N, tuple(slices), diagnostics)


@dataclass(frozen=True)
class ClassificationReport:
    entries: tuple
    residual_tol: float

    @property
    def passed(self) -> bool:
        return all(ok for *_, ok in self.entries)


def classify_restrictions(r: DecompositionResult, tol=None) -> ClassificationReport:
    """Re-check every nonzero slice: unitary coordinates have unitary blocks,
    labelled coordinates have blocks with trivial unitary part.

    Entries are ``(label, i, kind, value, ok)``.
    """
    entries = []
    for s in r.slices:
        if s.dim == 0:
            continue
        tol_ = tol if tol is not None else s.space.tol
        for i, X in enumerate(s.blocks, start=1):
            if i in s.label:
                d = unitary_part(X, tol_).dim
                entries.append((s.label, i, "cnu", float(d), d == 0))
            else:
                u = _unitarity(X)
                entries.append((s.label, i, "unitary", u, u <= tol_.residual_tol))
    return ClassificationReport(tuple(entries), (tol or r.slices[0].space.tol).residual_tol)


def _defect_span(T, B: SubspaceBasis, tol, m_cap):
    # closed span over m <= m_cap of (I - T*^m T^m) B and (I - T^m T*^m) B;
    # the span lies in span(B), so stop once it fills B
    n = T.shape[0]
    Q = np.zeros((n, 0), dtype=complex)
    if B.dim == 0:
        return SubspaceBasis.zero(n, tol)
    Tm = np.eye(n, dtype=complex)
    for _ in range(m_cap):
        Tm = Tm @ T
        new = np.hstack([B.columns - Tm.conj().T @ (Tm @ B.columns),
                         B.columns - Tm @ (Tm.conj().T @ B.columns)])
        for _ in range(2):
            new = new - Q @ (Q.conj().T @ new)
        add = orthonormalize(new, tol, ambient_dim=n, scale=1.0)
        if add.dim:
            Q = np.hstack([Q, add.columns])
        if Q.shape[1] >= B.dim:
            break
    return orthonormalize(Q, tol, ambient_dim=n, scale=1.0)


def _defect_kernel(T, B: SubspaceBasis, tol, m_cap):
    # vectors of span(B) killed by every I - T*^m T^m and I - T^m T*^m, m <= m_cap
    I = np.eye(T.shape[0])
    Tm = np.eye(T.shape[0], dtype=complex)
    for _ in range(m_cap):
        Tm = Tm @ T
        B = restricted_kernel(I - Tm.conj().T @ Tm, B, tol)
        B = restricted_kernel(I - Tm @ Tm.conj().T, B, tol)
        if B.dim == 0:
            break
    return B


def pair_formula_subspaces(t: TwistedTuple, m_cap=None) -> dict:
    """The four slices of a pair, evaluated by the explicit kernel and span
    formulas with chains truncated at ``m_cap`` (default ``2 * dim``).

    Independent of :func:`decompose`: the c.n.u. part of ``T_1`` is the span
    of its defect ranges rather than a complement. Keys are labels
    ``()``, ``(1,)``, ``(2,)``, ``(1, 2)``.
    """
    if t.n != 2:
        raise ValueError("pair formulas need exactly two operators")
    tol = t.tol
    N = t.dim
    m_cap = 2 * N if m_cap is None else int(m_cap)
    T1, T2 = t.ops
    H = SubspaceBasis.full(N, tol)
    Hu1 = chain_unitary_part(T1, tol, m_cap)
    Hc1 = _defect_span(T1, H, tol, m_cap)
    return {
        (): _defect_kernel(T2, Hu1, tol, m_cap),
        (1,): _defect_kernel(T2, Hc1, tol, m_cap),
        (2,): _defect_span(T2, Hu1, tol, m_cap),
        (1, 2): _defect_span(T2, Hc1, tol, m_cap),
    }


def formula_agreement(t: TwistedTuple, result: DecompositionResult | None = None, m_cap=None) -> float:
    """Largest gap between engine slices and pair-formula slices."""
    result = decompose(t) if result is None else result
    formulas = pair_formula_subspaces(t, m_cap)
    return max(subspace_gap(result.slice(lab).space, formulas[lab]) for lab in formulas)


def permuted_decompose_check(t: TwistedTuple, perm, result: DecompositionResult | None = None) -> dict:
    """Compare slices of ``t`` and of the reordered tuple under relabelling.

    Returns ``{"max_angle": ..., "per_label": {label: angle}}``.
    """
    perm = [int(p) for p in perm]
    pt = permute_tuple(t, perm, strict=False)
    if not pt.report.passed:
        raise VerificationError("permuted tuple fails verification", pt.report)
    base = decompose(t) if result is None else result
    other = decompose(pt)
    per = {}
    for s in other.slices:
        orig = tuple(sorted(perm[p - 1] for p in s.label))
        per[orig] = subspace_gap(base.slice(orig).space, s.space)
    return {"max_angle": max(per.values()), "per_label": per}


def restrict_tuple(t: TwistedTuple, space: SubspaceBasis, strict=True) -> TwistedTuple:
    """Compress the tuple and its twists to a joint reducing subspace."""
    B = space.columns
    ops = [B.conj().T @ T @ B for T in t.ops]
    return twisted_tuple(ops, t.twist.compress(B), t.tol, strict)
