import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import crandn
from twistwold.errors import ContainmentError, DimensionError
from twistwold.subspace import (
    SubspaceBasis,
    ToleranceProfile,
    complement_in,
    intersect,
    kernel_of,
    orthonormalize,
    principal_angles,
    projector,
    range_of,
    span_union,
    subspace_gap,
)


def e(n, *idx):
    return SubspaceBasis.coordinates(n, list(idx))


def test_tolerance_profile_validates():
    with pytest.raises(ValueError):
        ToleranceProfile(rank_rtol=0)
    with pytest.raises(ValueError):
        ToleranceProfile(residual_tol=1.5)
    with pytest.raises(ValueError):
        ToleranceProfile(stabilization_window=0)


def test_orthonormalize_collinear_and_empty():
    b = orthonormalize(np.array([[1, 2], [0, 0]], dtype=complex))
    assert b.dim == 1
    assert np.allclose(np.abs(b.columns[:, 0]), [1, 0])
    assert orthonormalize(np.zeros((3, 0)), ambient_dim=3).dim == 0


def test_orthonormalize_random_matches_qr_rank(rng):
    V = crandn(rng, 8, 5)
    b = orthonormalize(V)
    assert b.dim == np.linalg.matrix_rank(V) == 5
    assert b.membership_residual(V) < 1e-12


def test_orthonormalize_dimension_mismatch():
    with pytest.raises(DimensionError):
        orthonormalize([np.ones(3), np.ones(4)])


def test_kernel_examples(rng):
    assert kernel_of(np.zeros((4, 4))).dim == 4
    T = np.diag([1, 0.5])
    k = kernel_of(np.eye(2) - T.conj().T @ T)
    assert subspace_gap(k, e(2, 0)) < 1e-12
    A = crandn(rng, 8, 3) @ crandn(rng, 3, 8)
    K = kernel_of(A)
    assert K.dim == 8 - np.linalg.matrix_rank(A) == 5
    assert np.linalg.norm(A @ K.columns, 2) < 1e-8


def test_range_examples(rng):
    assert range_of(np.eye(3)).dim == 3
    u, v = crandn(rng, 4), crandn(rng, 4)
    r = range_of(np.outer(u, v.conj()))
    assert r.dim == 1 and r.membership_residual(u[:, None]) < 1e-12
    A = crandn(rng, 8, 3) @ crandn(rng, 3, 8)
    assert range_of(A).dim == 3


def test_intersect_examples(rng):
    X = orthonormalize(crandn(rng, 6, 3))
    assert subspace_gap(intersect([X, SubspaceBasis.full(6)]), X) < 1e-10
    assert subspace_gap(intersect([e(3, 0, 1), e(3, 1, 2)]), e(3, 1)) < 1e-12


def test_intersect_random_against_membership_solve(rng):
    a = orthonormalize(crandn(rng, 8, 5))
    b = orthonormalize(crandn(rng, 8, 5))
    c = intersect([a, b])
    assert c.dim == 2
    # independent oracle: solve A x = B y, i.e. null space of [A, -B]
    M = np.hstack([a.columns, -b.columns])
    _, s, Vh = np.linalg.svd(M)
    null = Vh[np.sum(s > 1e-10):].conj().T
    oracle = orthonormalize(a.columns @ null[:5])
    assert subspace_gap(c, oracle) < 1e-8
    assert a.membership_residual(c.columns) < 1e-8 and b.membership_residual(c.columns) < 1e-8


def test_intersect_ambient_mismatch():
    with pytest.raises(DimensionError):
        intersect([e(3, 0), e(4, 0)])


def test_complement_examples(rng):
    assert complement_in(SubspaceBasis.zero(4), SubspaceBasis.full(4)).dim == 4
    assert subspace_gap(complement_in(e(2, 0), e(2, 0, 1)), e(2, 1)) < 1e-12
    S = orthonormalize(crandn(rng, 7, 3))
    C = complement_in(S, SubspaceBasis.full(7))
    assert C.dim == 4
    assert np.abs(S.columns.conj().T @ C.columns).max() < 1e-12


def test_complement_requires_containment():
    with pytest.raises(ContainmentError):
        complement_in(e(3, 2), e(3, 0, 1))


def test_span_union_examples(rng):
    X = orthonormalize(crandn(rng, 5, 2))
    assert subspace_gap(span_union([X, SubspaceBasis.zero(5)]), X) < 1e-12
    assert subspace_gap(span_union([e(2, 0), e(2, 1)]), SubspaceBasis.full(2)) < 1e-12
    parts = [orthonormalize(crandn(rng, 6, 2)) for _ in range(3)]
    u = span_union(parts)
    assert u.dim == np.linalg.matrix_rank(np.hstack([p.columns for p in parts]))


def test_principal_angles_examples():
    x = e(3, 0, 1)
    assert np.allclose(principal_angles(x, x), 0)
    assert np.allclose(principal_angles(e(2, 0), e(2, 1)), [np.pi / 2])
    diag = SubspaceBasis(2, np.array([[1], [1]]) / np.sqrt(2))
    assert np.allclose(principal_angles(e(2, 0), diag), [np.pi / 4])


def test_projector_examples():
    assert np.allclose(projector(SubspaceBasis.full(3)), np.eye(3))
    assert np.allclose(projector(SubspaceBasis.zero(3)), 0)
    diag = SubspaceBasis(2, np.array([[1], [1]]) / np.sqrt(2))
    assert np.allclose(projector(diag), 0.5)


def test_basis_rejects_non_orthonormal_columns():
    with pytest.raises(ValueError):
        SubspaceBasis(2, np.array([[1, 1], [0, 1]], dtype=complex))


def test_basis_columns_are_read_only():
    b = SubspaceBasis.full(2)
    with pytest.raises(ValueError):
        b.columns[0, 0] = 3


subspaces = st.builds(
    lambda seed, n, k: orthonormalize(crandn(np.random.default_rng(seed), n, min(k, n))),
    st.integers(0, 2**32 - 1), st.just(6), st.integers(0, 6))


@given(subspaces, subspaces)
def test_intersect_commutative_and_idempotent(a, b):
    assert subspace_gap(intersect([a, b]), intersect([b, a])) <= 1e-8
    assert subspace_gap(intersect([a, a]), a) <= 1e-8


@given(subspaces)
def test_basis_orthonormal_and_complement_dims(a):
    B = a.columns
    assert np.linalg.norm(B.conj().T @ B - np.eye(a.dim), 2) <= 1e-8 if a.dim else True
    assert complement_in(a, SubspaceBasis.full(6)).dim + a.dim == 6


@given(subspaces, subspaces)
def test_span_union_dominates_projector(a, b):
    diff = projector(span_union([a, b])) - projector(a)
    assert np.linalg.eigvalsh((diff + diff.conj().T) / 2).min() >= -1e-8


@given(st.integers(0, 2**32 - 1), st.integers(0, 6))
def test_rank_nullity(seed, r):
    g = np.random.default_rng(seed)
    A = crandn(g, 6, r) @ crandn(g, r, 6) if r else np.zeros((6, 6))
    assert kernel_of(A).dim + range_of(A).dim == 6
