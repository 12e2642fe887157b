"""Rank-revealing subspace arithmetic on finite-dimensional complex spaces.

Every closed subspace is carried as a :class:`SubspaceBasis`, an orthonormal
column family together with the tolerance profile used to build it. All
functions here are pure and return new objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ContainmentError, DimensionError


@dataclass(frozen=True)
class ToleranceProfile:
    """Numerical thresholds shared by every decision the package makes.

    Parameters
    ----------
    rank_rtol : float
        Singular values below ``rank_rtol * max(sigma_max, 1)`` count as zero.
    residual_tol : float
        Largest operator-norm residual accepted as "holds".
    stabilization_window : int
        Consecutive unchanged iterations required before a fixed point is
        declared.
    """

    rank_rtol: float = 1e-10
    residual_tol: float = 1e-8
    stabilization_window: int = 3

    def __post_init__(self):
        if not 0 < self.rank_rtol < 1:
            raise ValueError(f"rank_rtol must lie in (0, 1), got {self.rank_rtol}")
        if not 0 < self.residual_tol < 1:
            raise ValueError(f"residual_tol must lie in (0, 1), got {self.residual_tol}")
        if int(self.stabilization_window) != self.stabilization_window or self.stabilization_window < 1:
            raise ValueError("stabilization_window must be an integer >= 1")


DEFAULT_TOL = ToleranceProfile()


def _resolve(tol):
    return DEFAULT_TOL if tol is None else tol


def _canonical_phase(cols):
    # rotate each column so its largest-modulus entry is real and positive
    if cols.size == 0:
        return cols
    idx = np.argmax(np.abs(cols) > np.abs(cols).max(axis=0) * (1 - 1e-9), axis=0)
    pivots = cols[idx, np.arange(cols.shape[1])]
    phases = pivots / np.abs(pivots)
    return cols * phases.conj()


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """Orthonormal basis of a subspace of ``C^ambient_dim``.

    ``columns`` is an ``ambient_dim x dim`` complex array whose columns are
    orthonormal within ``tol.residual_tol``.
    """

    ambient_dim: int
    columns: np.ndarray
    tol: ToleranceProfile = field(default=DEFAULT_TOL)

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=complex)
        if cols.ndim != 2 or cols.shape[0] != self.ambient_dim:
            raise DimensionError(
                f"basis array of shape {cols.shape} does not live in C^{self.ambient_dim}")
        if cols.shape[1] > self.ambient_dim:
            raise DimensionError("more basis vectors than the ambient dimension")
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)
        if cols.shape[1]:
            err = np.abs(cols.conj().T @ cols - np.eye(cols.shape[1])).max()
            if err > self.tol.residual_tol:
                raise ValueError(f"columns are not orthonormal (max Gram error {err:.3e})")

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    @classmethod
    def full(cls, n, tol=None):
        return cls(n, np.eye(n, dtype=complex), _resolve(tol))

    @classmethod
    def zero(cls, n, tol=None):
        return cls(n, np.zeros((n, 0), dtype=complex), _resolve(tol))

    @classmethod
    def coordinates(cls, n, indices, tol=None):
        """Span of the standard basis vectors ``e_i`` for ``i`` in ``indices``."""
        cols = np.eye(n, dtype=complex)[:, list(indices)]
        return cls(n, cols, _resolve(tol))

    def membership_residual(self, vectors) -> float:
        """Largest distance from a column of ``vectors`` to this subspace."""
        v = np.asarray(vectors, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[1] == 0:
            return 0.0
        r = v - self.columns @ (self.columns.conj().T @ v)
        return float(np.linalg.norm(r, axis=0).max())

    def __repr__(self):
        return f"SubspaceBasis(ambient_dim={self.ambient_dim}, dim={self.dim})"


def _stack(vectors, ambient_dim=None):
    if isinstance(vectors, np.ndarray):
        arr = np.asarray(vectors, dtype=complex)
        if arr.ndim == 1:
            arr = arr[:, None]
        if ambient_dim is not None and arr.shape[0] != ambient_dim:
            raise DimensionError(f"vectors of length {arr.shape[0]}, expected {ambient_dim}")
        return arr
    vectors = [np.asarray(v, dtype=complex).ravel() for v in vectors]
    if not vectors:
        if ambient_dim is None:
            raise DimensionError("cannot infer the ambient dimension of an empty family")
        return np.zeros((ambient_dim, 0), dtype=complex)
    lengths = {v.shape[0] for v in vectors}
    if len(lengths) != 1:
        raise DimensionError(f"vectors have mismatched lengths {sorted(lengths)}")
    n = lengths.pop()
    if ambient_dim is not None and n != ambient_dim:
        raise DimensionError(f"vectors of length {n}, expected {ambient_dim}")
    return np.column_stack(vectors)


def rank_threshold(singular_values, tol, scale=1.0):
    """Cutoff below which a singular value is treated as zero."""
    smax = float(singular_values[0]) if len(singular_values) else 0.0
    return tol.rank_rtol * max(smax, scale)


def orthonormalize(vectors, tol=None, ambient_dim=None, scale=0.0):
    """Orthonormal basis for the span of ``vectors``.

    ``vectors`` is either a list of 1-D arrays or a 2-D array whose columns
    are the vectors. The rank is decided by singular values relative to the
    largest one (or to ``scale`` when that is larger).
    """
    tol = _resolve(tol)
    V = _stack(vectors, ambient_dim)
    n = V.shape[0]
    if V.shape[1] == 0:
        return SubspaceBasis.zero(n, tol)
    U, s, _ = np.linalg.svd(V, full_matrices=False)
    r = int(np.sum(s > rank_threshold(s, tol, scale)))
    return SubspaceBasis(n, _canonical_phase(U[:, :r]), tol)


def null_columns(A, tol=None, scale=1.0):
    """Orthonormal columns spanning the null space of a (possibly
    rectangular) matrix ``A``."""
    tol = _resolve(tol)
    A = np.asarray(A, dtype=complex)
    ncol = A.shape[1]
    if ncol == 0:
        return np.zeros((0, 0), dtype=complex)
    if A.shape[0] == 0:
        return np.eye(ncol, dtype=complex)
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    r = int(np.sum(s > rank_threshold(s, tol, scale)))
    return _canonical_phase(Vh[r:].conj().T)


def _square(A):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    return A


def kernel_of(A, tol=None) -> SubspaceBasis:
    """Basis of ``{h : A h = 0}``."""
    tol = _resolve(tol)
    A = _square(A)
    return SubspaceBasis(A.shape[0], null_columns(A, tol), tol)


def range_of(A, tol=None) -> SubspaceBasis:
    """Basis of the range of ``A`` (the orthogonal complement of ``N(A*)``)."""
    tol = _resolve(tol)
    A = _square(A)
    return orthonormalize(A, tol, scale=1.0)


def _common_ambient(bases):
    if not bases:
        raise DimensionError("at least one subspace is required")
    dims = {b.ambient_dim for b in bases}
    if len(dims) != 1:
        raise DimensionError(f"subspaces live in different ambient spaces {sorted(dims)}")
    return dims.pop()


def projector(b: SubspaceBasis) -> np.ndarray:
    """Orthogonal projection onto ``span(b)``."""
    return b.columns @ b.columns.conj().T


def intersect(bases, tol=None) -> SubspaceBasis:
    """Intersection of subspaces, as the kernel of the stacked ``I - P_k``."""
    bases = list(bases)
    n = _common_ambient(bases)
    tol = _resolve(tol if tol is not None else bases[0].tol)
    if any(b.dim == 0 for b in bases):
        return SubspaceBasis.zero(n, tol)
    eye = np.eye(n, dtype=complex)
    proper = [b for b in bases if b.dim < n]
    if not proper:
        return SubspaceBasis.full(n, tol)
    stacked = np.vstack([eye - projector(b) for b in proper])
    return SubspaceBasis(n, null_columns(stacked, tol), tol)


def complement_in(sub: SubspaceBasis, ambient: SubspaceBasis, tol=None) -> SubspaceBasis:
    """Orthogonal complement of ``sub`` inside ``ambient``."""
    n = _common_ambient([sub, ambient])
    tol = _resolve(tol if tol is not None else ambient.tol)
    res = ambient.membership_residual(sub.columns)
    if res > tol.residual_tol:
        raise ContainmentError(f"subspace is not contained in the ambient subspace (residual {res:.3e})")
    if sub.dim == 0:
        return ambient
    coeffs = null_columns(sub.columns.conj().T @ ambient.columns, tol)
    cols = ambient.columns @ coeffs if coeffs.size else np.zeros((n, 0), dtype=complex)
    out = orthonormalize(cols, tol, ambient_dim=n, scale=1.0)
    if out.dim + sub.dim != ambient.dim:
        raise ContainmentError(
            f"complement dimension {out.dim} + {sub.dim} does not match ambient {ambient.dim}")
    return out


def span_union(bases, tol=None) -> SubspaceBasis:
    """Closed linear span of the union of the given subspaces."""
    bases = list(bases)
    n = _common_ambient(bases)
    tol = _resolve(tol if tol is not None else bases[0].tol)
    cols = np.hstack([b.columns for b in bases])
    return orthonormalize(cols, tol, ambient_dim=n, scale=1.0)


def principal_angles(a: SubspaceBasis, b: SubspaceBasis) -> np.ndarray:
    """Principal angles between two subspaces, ascending, in radians."""
    _common_ambient([a, b])
    if a.dim == 0 or b.dim == 0:
        return np.zeros(0)
    return np.sort(scipy.linalg.subspace_angles(a.columns, b.columns))


def subspace_gap(a: SubspaceBasis, b: SubspaceBasis) -> float:
    """Largest principal angle, or pi/2 when the dimensions differ."""
    if a.dim != b.dim:
        return math.pi / 2
    angles = principal_angles(a, b)
    return float(angles.max()) if angles.size else 0.0


def restricted_kernel(A, basis: SubspaceBasis, tol=None) -> SubspaceBasis:
    """``{h in span(basis) : A h = 0}`` computed in basis coordinates."""
    tol = _resolve(tol if tol is not None else basis.tol)
    if basis.dim == 0:
        return basis
    coeffs = null_columns(np.asarray(A) @ basis.columns, tol)
    if coeffs.shape[1] == 0:
        return SubspaceBasis.zero(basis.ambient_dim, tol)
    return orthonormalize(basis.columns @ coeffs, tol, scale=1.0)
