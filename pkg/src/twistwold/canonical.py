"""Canonical decomposition of a single contraction into unitary and
completely non-unitary parts, with the power-partial-isometry and isometry
(Wold) specialisations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotAnIsometryError, PreconditionError
from .operators import as_operator, classify, opnorm, require_contraction, restrict_to_reducing
from .subspace import (
    SubspaceBasis,
    _resolve,
    complement_in,
    null_columns,
    orthonormalize,
    projector,
    range_of,
    restricted_kernel,
)


def _empty_split(tol):
    z = SubspaceBasis.zero(0, tol)
    empty = np.zeros((0, 0), dtype=complex)
    return CanonicalSplit(z, z, empty, empty, {})


def unitary_part(T, tol=None) -> SubspaceBasis:
    """Largest subspace reducing ``T`` on which ``T`` acts unitarily.

    Starts from ``N(I - T*T) ∩ N(I - TT*)`` and repeatedly keeps the vectors
    whose images under ``T`` and ``T*`` stay in the current subspace, until
    the dimension has been unchanged for ``tol.stabilization_window`` rounds.
    """
    tol = _resolve(tol)
    T = as_operator(T)
    require_contraction(T, tol)
    n = T.shape[0]
    Ts = T.conj().T
    I = np.eye(n)
    start = null_columns(np.vstack([I - Ts @ T, I - T @ Ts]), tol)
    B = orthonormalize(start, tol, ambient_dim=n, scale=1.0).columns

    stable = 0
    for _ in range(n + tol.stabilization_window + 1):
        if B.shape[1] == 0:
            break
        TB, TsB = T @ B, Ts @ B
        escape = np.vstack([TB - B @ (B.conj().T @ TB), TsB - B @ (B.conj().T @ TsB)])
        coeffs = null_columns(escape, tol)
        nxt = orthonormalize(B @ coeffs, tol, ambient_dim=n, scale=1.0).columns
        stable = stable + 1 if nxt.shape[1] == B.shape[1] else 0
        B = nxt
        if stable >= tol.stabilization_window:
            break
    return SubspaceBasis(n, B, tol)


@dataclass(frozen=True, eq=False)
class CanonicalSplit:
    unitary_space: SubspaceBasis
    cnu_space: SubspaceBasis
    unitary_block: np.ndarray
    cnu_block: np.ndarray
    residuals: dict = field(default_factory=dict)


def canonical_decompose(T, tol=None) -> CanonicalSplit:
    """Split ``C^n = H_u ⊕ H_cnu`` for a contraction ``T``."""
    tol = _resolve(tol)
    if np.asarray(T).size == 0:
        return _empty_split(tol)
    T = as_operator(T)
    Hu = unitary_part(T, tol)
    Hc = complement_in(Hu, SubspaceBasis.full(T.shape[0], tol), tol)
    U, off_u = restrict_to_reducing(T, Hu)
    C, off_c = restrict_to_reducing(T, Hc)
    k = U.shape[0]
    unit = max(opnorm(U.conj().T @ U - np.eye(k)), opnorm(U @ U.conj().T - np.eye(k))) if k else 0.0
    return CanonicalSplit(Hu, Hc, U, C, {
        "off_unitary": off_u,
        "off_cnu": off_c,
        "unitarity": unit,
    })


def chain_unitary_part(T, tol=None, m_cap=None) -> SubspaceBasis:
    """``⋂_{m <= m_cap} N(I - T*^m T^m) ∩ N(I - T^m T*^m)``.

    Independent of :func:`unitary_part`; ``m_cap`` defaults to ``2 * dim``.
    """
    tol = _resolve(tol)
    T = as_operator(T)
    require_contraction(T, tol)
    n = T.shape[0]
    m_cap = 2 * n if m_cap is None else int(m_cap)
    if m_cap < 1:
        raise ValueError("m_cap must be >= 1")
    I = np.eye(n)
    B = SubspaceBasis.full(n, tol)
    Tm = np.eye(n, dtype=complex)
    for _ in range(m_cap):
        Tm = Tm @ T
        B = restricted_kernel(I - Tm.conj().T @ Tm, B, tol)
        B = restricted_kernel(I - Tm @ Tm.conj().T, B, tol)
        if B.dim == 0:
            break
    return B


def ppi_unitary_part(T, tol=None, m_cap=None) -> SubspaceBasis:
    """``⋂_{n <= m_cap} (T*^n H ∩ T^n H)`` for a power partial isometry."""
    tol = _resolve(tol)
    T = as_operator(T)
    require_contraction(T, tol)
    n = T.shape[0]
    m_cap = 2 * n if m_cap is None else int(m_cap)
    cls = classify(T, tol, m_max=m_cap)
    if not cls.power_partial_isometry.holds:
        k = cls.first_non_partial_power
        raise PreconditionError(f"T^{k} is not a partial isometry", power=k)
    I = np.eye(n)
    B = SubspaceBasis.full(n, tol)
    Tm = np.eye(n, dtype=complex)
    for _ in range(m_cap):
        Tm = Tm @ T
        for R in (range_of(Tm, tol), range_of(Tm.conj().T, tol)):
            B = restricted_kernel(I - projector(R), B, tol)
        if B.dim == 0:
            break
    return B


@dataclass(frozen=True, eq=False)
class WoldSplit:
    unitary_space: SubspaceBasis
    wandering: SubspaceBasis
    levels: list


def wold_split_isometry(T, tol=None, domain: SubspaceBasis | None = None) -> WoldSplit:
    """Wold decomposition of an isometry.

    ``wandering`` is ``N(T*)`` and ``levels[k] = T^k wandering``. A finite
    isometry is unitary, so the interesting case passes ``domain``: a subspace
    on which a truncated operator is still isometric (an interior window).
    Then ``wandering = N(T*) ∩ domain`` and the levels run until ``T^k``
    annihilates them.
    """
    tol = _resolve(tol)
    T = as_operator(T)
    n = T.shape[0]
    D = SubspaceBasis.full(n, tol) if domain is None else domain
    DB = D.columns
    iso = opnorm((T.conj().T @ T - np.eye(n)) @ DB) if D.dim else 0.0
    if iso > tol.residual_tol:
        raise NotAnIsometryError(f"T is not isometric on the domain (residual {iso:.3e})")

    wandering = restricted_kernel(T.conj().T, D, tol)
    levels = []
    cur = wandering.columns
    for _ in range(n):
        if cur.shape[1] == 0:
            break
        lvl = orthonormalize(cur, tol, ambient_dim=n, scale=1.0)
        if lvl.dim == 0:
            break
        levels.append(lvl)
        cur = T @ cur

    U = D
    Tm = np.eye(n, dtype=complex)
    for _ in range(n):
        Tm = Tm @ T
        R = orthonormalize(Tm @ DB, tol, ambient_dim=n, scale=1.0)
        U = restricted_kernel(np.eye(n) - projector(R), U, tol)
        if U.dim == 0:
            break
    return WoldSplit(U, wandering, levels)
