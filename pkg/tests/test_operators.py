import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from conftest import crandn
from twistwold.errors import DimensionError, NotAContractionError
from twistwold.operators import (
    adjoint,
    as_operator,
    classify,
    compose,
    defect_operator,
    haar_unitary,
    opnorm,
    power,
    restrict_to_reducing,
)
from twistwold.subspace import SubspaceBasis


def jordan(d):
    return np.eye(d, k=-1, dtype=complex)


def test_as_operator_rejects_bad_input():
    with pytest.raises(DimensionError):
        as_operator(np.ones((2, 3)))
    with pytest.raises(ValueError):
        as_operator(np.array([[np.nan]]))


def test_power_adjoint_compose(rng):
    T = crandn(rng, 4, 4)
    assert np.allclose(power(T, 0), np.eye(4))
    assert np.array_equal(adjoint(adjoint(T)), T)
    assert np.allclose(power(jordan(3), 3), 0)
    assert np.allclose(power(T, -2), T.conj().T @ T.conj().T)
    with pytest.raises(DimensionError):
        compose(np.eye(2), np.eye(3))


def test_defect_operator_examples(rng):
    assert np.allclose(defect_operator(haar_unitary(4, rng)), 0, atol=1e-7)
    assert np.allclose(defect_operator(np.diag([1, 0.6])), np.diag([0, 0.8]))
    G = crandn(rng, 6, 6)
    T = 0.9 * G / np.linalg.norm(G, 2)
    D = defect_operator(T)
    w = np.linalg.eigvalsh(D)
    assert w.min() >= np.sqrt(1 - 0.81) - 1e-10 and w.max() <= 1 + 1e-10
    assert np.linalg.norm(D @ D - (np.eye(6) - T.conj().T @ T), 2) <= 1e-8
    Dr = defect_operator(T, "right")
    assert np.linalg.norm(Dr @ Dr - (np.eye(6) - T @ T.conj().T), 2) <= 1e-8


def test_defect_operator_rejects_non_contraction():
    with pytest.raises(NotAContractionError):
        defect_operator(np.diag([1.5, 0.2]))


def test_classify_examples(rng):
    c = classify(jordan(4))
    assert c.partial_isometry.holds and not c.isometry.holds
    c = classify(np.array([[0.5]]))
    assert c.contraction.holds and not c.partial_isometry.holds
    T = sla.block_diag(jordan(3), haar_unitary(2, rng))
    c = classify(T)
    assert c.power_partial_isometry.holds and c.m_max == 5
    for k in range(1, 6):
        Tk = np.linalg.matrix_power(T, k)
        assert np.linalg.norm(Tk @ Tk.conj().T @ Tk - Tk, 2) <= 1e-12


def test_classify_first_non_partial_power():
    # T = weighted shift with weights (1, 0.5): T is not a partial isometry
    T = np.diag([1, 0.5], k=-1).astype(complex)
    c = classify(T)
    assert not c.power_partial_isometry.holds
    assert c.first_non_partial_power == 1


def test_classify_unitary_flags(rng):
    c = classify(haar_unitary(7, rng))
    assert c.unitary.holds and c.unitary.residual <= 1e-12
    assert c.isometry.holds and c.coisometry.holds and c.contraction.holds


def test_restrict_to_reducing_examples(rng):
    A, B = crandn(rng, 2, 2), crandn(rng, 3, 3)
    T = sla.block_diag(A, B)
    blk, off = restrict_to_reducing(T, SubspaceBasis.full(5))
    assert np.allclose(blk, T) and off == 0
    blk, off = restrict_to_reducing(T, SubspaceBasis.coordinates(5, [0, 1]))
    assert np.allclose(blk, A) and off == 0
    Q = haar_unitary(5, rng)
    _, off = restrict_to_reducing(Q @ T @ Q.conj().T, SubspaceBasis(5, Q[:, :2]))
    assert off <= 1e-12
    with pytest.raises(DimensionError):
        restrict_to_reducing(T, SubspaceBasis.full(4))


def test_sparse_opnorm_matches_dense(rng):
    import scipy.sparse as sp

    M = sp.random(80, 80, density=0.02, random_state=3, dtype=complex) + sp.eye(80) * 0.1
    assert abs(opnorm(M) - np.linalg.norm(M.toarray(), 2)) < 1e-12


matrices = st.builds(lambda seed, n: crandn(np.random.default_rng(seed), n, n),
                     st.integers(0, 2**32 - 1), st.integers(1, 6))


@given(matrices)
def test_gram_is_hermitian_psd(T):
    G = compose(adjoint(T), T)
    assert np.linalg.norm(G - G.conj().T, 2) <= 1e-8
    assert np.linalg.eigvalsh(G).min() >= -1e-8 * max(1, np.linalg.norm(G, 2))


@given(matrices, st.integers(0, 4), st.integers(0, 4))
def test_power_additivity(T, m, k):
    T = T / max(1, np.linalg.norm(T, 2))
    assert np.linalg.norm(power(T, m + k) - compose(power(T, m), power(T, k)), 2) <= 1e-8 * T.shape[0]


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.booleans())
def test_defect_zero_iff_isometry(seed, n, iso):
    g = np.random.default_rng(seed)
    T = haar_unitary(n, g) if iso else 0.9 * haar_unitary(n, g)
    small = opnorm(defect_operator(T)) <= 1e-8 * 10
    assert small == classify(T).isometry.holds == iso
