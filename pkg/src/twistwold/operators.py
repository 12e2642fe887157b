"""Dense operator algebra and operator classification.

Operators are plain square complex ``numpy`` arrays. Norms are spectral
norms (largest singular value) throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import DimensionError, NotAContractionError
from .subspace import SubspaceBasis, _resolve


def as_operator(T) -> np.ndarray:
    """Validate ``T`` as a finite square complex matrix."""
    A = np.asarray(T, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionError(f"operator must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("operator has non-finite entries")
    return A


def opnorm(X) -> float:
    """Spectral norm (largest singular value); 0 for empty arrays.

    Sparse inputs are split into the connected components of ``X* X`` and
    each component is solved densely, which is exact and cheap for the
    near-monomial matrices produced by lattice truncations.
    """
    if sp.issparse(X):
        return _sparse_opnorm(X)
    X = np.asarray(X)
    if X.size == 0:
        return 0.0
    return float(np.linalg.svd(X, compute_uv=False)[0])


def _sparse_opnorm(X) -> float:
    X = sp.csc_matrix(X)
    X.eliminate_zeros()
    if X.nnz == 0:
        return 0.0
    cols = np.flatnonzero(np.diff(X.indptr))
    X = X[:, cols]
    pattern = X.copy()
    pattern.data = np.ones(pattern.nnz)
    ncomp, labels = connected_components((pattern.T @ pattern).tocsr(), directed=False)
    best = 0.0
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(ncomp + 1))
    for c in range(ncomp):
        idx = order[bounds[c]:bounds[c + 1]]
        sub = X[:, idx]
        rows = np.unique(sub.indices)
        best = max(best, float(np.linalg.svd(sub[rows].toarray(), compute_uv=False)[0]))
    return best


def as_linear(A):
    """Sparse CSR copy of ``A`` when it is mostly zeros, else a dense array.

    Used where large truncated lattice operators are only ever applied to
    vectors.
    """
    if sp.issparse(A):
        return A.tocsr()
    A = np.asarray(A, dtype=complex)
    if A.ndim == 2 and A.shape[0] >= 64 and np.count_nonzero(A) < 0.05 * A.size:
        return sp.csr_matrix(A)
    return A


def adjoint(T) -> np.ndarray:
    return np.asarray(T).conj().T


def compose(A, B) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"cannot compose shapes {A.shape} and {B.shape}")
    return A @ B


def power(T, m: int) -> np.ndarray:
    """``T^m`` for ``m >= 0`` and ``T*^{|m|}`` for ``m < 0``."""
    T = as_operator(T)
    base = T if m >= 0 else T.conj().T
    return np.linalg.matrix_power(base, abs(int(m)))


def defect_operator(T, which="left", tol=None) -> np.ndarray:
    """Hermitian square root of ``I - T*T`` (``which="left"``) or
    ``I - T T*`` (``which="right"``).

    Eigenvalues in ``[-residual_tol, 0)`` are clipped to zero; anything more
    negative means ``T`` is not a contraction.
    """
    tol = _resolve(tol)
    T = as_operator(T)
    if which == "left":
        G = T.conj().T @ T
    elif which == "right":
        G = T @ T.conj().T
    else:
        raise ValueError(f"which must be 'left' or 'right', got {which!r}")
    D2 = np.eye(T.shape[0]) - G
    D2 = (D2 + D2.conj().T) / 2
    w, V = np.linalg.eigh(D2)
    if w.min() < -tol.residual_tol:
        raise NotAContractionError(
            f"I - T*T has eigenvalue {w.min():.3e} < -{tol.residual_tol:g}; T is not a contraction")
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


class Flag(NamedTuple):
    holds: bool
    residual: float


@dataclass(frozen=True)
class OperatorClass:
    contraction: Flag
    isometry: Flag
    coisometry: Flag
    unitary: Flag
    partial_isometry: Flag
    power_partial_isometry: Flag
    m_max: int
    first_non_partial_power: int | None


def classify(T, tol=None, m_max=None) -> OperatorClass:
    """Classify ``T`` with a residual attached to every flag.

    ``power_partial_isometry`` checks ``||T^k T^{*k} T^k - T^k||`` for
    ``1 <= k <= m_max`` (default ``dim``).
    """
    tol = _resolve(tol)
    T = as_operator(T)
    n = T.shape[0]
    eps = tol.residual_tol
    m_max = n if m_max is None else int(m_max)
    I = np.eye(n)
    Ts = T.conj().T

    contraction = max(0.0, opnorm(T) - 1.0)
    iso = opnorm(Ts @ T - I)
    coiso = opnorm(T @ Ts - I)
    pi = opnorm(T @ Ts @ T - T)

    first_bad = None
    ppi = 0.0
    Tk = np.eye(n, dtype=complex)
    for k in range(1, m_max + 1):
        Tk = Tk @ T
        r = opnorm(Tk @ Tk.conj().T @ Tk - Tk)
        ppi = max(ppi, r)
        if r > eps and first_bad is None:
            first_bad = k

    iso_f = Flag(iso <= eps, iso)
    coiso_f = Flag(coiso <= eps, coiso)
    unitary = max(iso, coiso)
    return OperatorClass(
        contraction=Flag(contraction <= eps or iso_f.holds or coiso_f.holds, contraction),
        isometry=iso_f,
        coisometry=coiso_f,
        unitary=Flag(unitary <= eps, unitary),
        partial_isometry=Flag(pi <= eps or iso_f.holds or coiso_f.holds, pi),
        power_partial_isometry=Flag(first_bad is None or iso_f.holds or coiso_f.holds, ppi),
        m_max=m_max,
        first_non_partial_power=None if (iso_f.holds or coiso_f.holds) else first_bad,
    )


def is_contraction(T, tol=None) -> bool:
    tol = _resolve(tol)
    return opnorm(T) <= 1 + tol.residual_tol


def require_contraction(T, tol=None):
    tol = _resolve(tol)
    nrm = opnorm(T)
    if nrm > 1 + tol.residual_tol:
        raise NotAContractionError(f"operator norm {nrm:.6g} exceeds 1")


def off_residual(T, M: SubspaceBasis) -> float:
    """``max(||(I-P)TP||, ||PT(I-P)||)`` for ``P`` the projection onto ``M``."""
    T = np.asarray(T)
    B = M.columns
    if M.dim == 0 or M.dim == M.ambient_dim:
        return 0.0
    TB = T @ B
    TsB = T.conj().T @ B
    out1 = TB - B @ (B.conj().T @ TB)
    out2 = TsB - B @ (B.conj().T @ TsB)
    return max(opnorm(out1), opnorm(out2))


def restrict_to_reducing(T, M: SubspaceBasis):
    """Compress ``T`` to ``M``.

    Returns ``(B* T B, off_residual)``; ``M`` counts as reducing only when the
    residual is within tolerance.
    """
    T = as_operator(T)
    if T.shape[0] != M.ambient_dim:
        raise DimensionError(f"operator of dim {T.shape[0]} vs subspace in C^{M.ambient_dim}")
    B = M.columns
    return B.conj().T @ T @ B, off_residual(T, M)


def haar_unitary(n, rng) -> np.ndarray:
    """Haar-random unitary from a ``numpy`` generator (QR with phase fix)."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))
