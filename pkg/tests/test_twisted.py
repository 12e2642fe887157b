import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import crandn
from twistwold.errors import DimensionError, VerificationError
from twistwold.lattice import dense_tuple
from twistwold.twisted import (
    TwistFamily,
    lemma_commutation_report,
    permute_tuple,
    reduction_check,
    twisted_tuple,
    validate_twist,
    verify_tuple,
)
from twistwold.zoo import (
    PlantedSpec,
    clock_shift_tuple,
    counterexample_Br,
    hardy_pair_Ar,
    planted_tuple,
)


def test_validate_twist_examples(rng):
    rep = validate_twist(TwistFamily(3, 4))
    assert rep.passed and rep.max_residual == 0
    assert validate_twist(TwistFamily(2, 3, {(1, 2): np.exp(0.7j)})).passed
    H = crandn(rng, 3, 3)
    H = H + H.conj().T
    rep = validate_twist(TwistFamily(2, 3, {(1, 2): H}))
    assert not rep.passed
    assert max(e.residual for e in rep.entries if e.relation == "twist_unitary") > 0.1


def test_twist_family_conventions():
    f = TwistFamily(3, 2, {(1, 3): 1j})
    assert np.allclose(f.unit(3, 1), -1j * np.eye(2))
    assert np.allclose(f.unit(2, 2), np.eye(2))
    assert f.pairs == [(1, 2), (1, 3), (2, 3)]
    with pytest.raises(ValueError):
        TwistFamily(2, 2, {(2, 1): 1})
    with pytest.raises(DimensionError):
        TwistFamily(2, 2, {(1, 2): np.eye(3)})


def test_non_commuting_twists_fail(rng):
    from twistwold.operators import haar_unitary

    f = TwistFamily(3, 3, {(1, 2): haar_unitary(3, rng), (1, 3): haar_unitary(3, rng)})
    rep = validate_twist(f)
    assert not rep.passed
    assert any(e.relation == "twist_pair_commute" and e.residual > 1e-3 for e in rep.entries)


def test_verify_ar_pair_interior():
    p = hardy_pair_Ar(1j, 0.5, N=8)
    rep = verify_tuple(p.dense)
    for rel in ("forward", "adjoint"):
        assert max(e.residual for e in rep.select(rel)) <= 1e-10


def test_verify_counterexample_br_dense():
    dt = dense_tuple(counterexample_Br(1j), 8, strict=False)[0]
    rep = dt.report
    assert not rep.passed
    assert rep.residual("forward", 1, 2) <= 1e-12
    assert rep.residual("adjoint", 1, 2) >= 0.5
    with pytest.raises(VerificationError):
        dense_tuple(counterexample_Br(1j), 8)


def test_verify_commuting_diagonals():
    t = twisted_tuple([np.diag([0.5, 1.0]), np.diag([0.3, -1.0])])
    assert t.report.passed


def test_report_order_and_first_failure():
    t = twisted_tuple([np.array([[0, 0], [1, 0]], dtype=complex), np.diag([1, -1]).astype(complex)],
                      strict=False)
    rels = [(e.relation, e.i, e.j) for e in t.report.entries][:6]
    assert rels == [("contraction", 1, 1), ("contraction", 2, 2), ("forward", 1, 2),
                    ("adjoint", 1, 2), ("forward", 2, 1), ("adjoint", 2, 1)]
    assert t.report.first_failure.relation == "forward"


def test_lemma_examples():
    cs = clock_shift_tuple(4, (0.8, 0.6))
    for r in lemma_commutation_report(cs, 2, 0):
        assert r.residual == 0
    assert max(r.residual for r in lemma_commutation_report(cs, 2, 2)) <= 1e-12
    br = dense_tuple(counterexample_Br(1), 10, strict=False)[0]
    res = lemma_commutation_report(br, 1, 1)
    assert max(r.residual for r in res) > 1e-8


def test_reduction_check_examples():
    t = twisted_tuple([np.diag([1, 0.5]).astype(complex)])
    assert reduction_check(t, 1).passed
    cs = clock_shift_tuple(3, (0.5, 0.7))
    assert all(reduction_check(cs, i).passed for i in (1, 2))
    pt, _ = planted_tuple(PlantedSpec(2, (2, 1, 2, 1), seed=4))
    assert all(reduction_check(pt, i).passed for i in (1, 2))
    with pytest.raises(IndexError):
        reduction_check(cs, 3)


def test_both_relations_checked_independently():
    # T1 an isometry-free swap where forward holds but adjoint does not
    T1 = np.array([[0, 0], [1, 0]], dtype=complex)
    T2 = np.array([[0, 0], [1, 0]], dtype=complex)
    t = twisted_tuple([T1, T2], strict=False)
    assert t.report.residual("forward", 1, 2) == 0
    assert t.report.residual("adjoint", 1, 2) > 0.5


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
def test_permutation_preserves_verification(seed, n):
    rng = np.random.default_rng(seed)
    dims = tuple(int(d) for d in rng.integers(0, 3, size=2 ** n))
    if sum(dims) == 0:
        dims = (1,) + dims[1:]
    t, _ = planted_tuple(PlantedSpec(n, dims, seed))
    for perm in itertools.permutations(range(1, n + 1)):
        assert permute_tuple(t, list(perm), strict=False).report.passed == t.report.passed


@given(st.integers(0, 2**32 - 1))
def test_lemma_residuals_small_on_planted(seed):
    t, _ = planted_tuple(PlantedSpec(2, (1, 2, 1, 2), seed))
    for l, m in itertools.product(range(3), repeat=2):
        assert max(r.residual for r in lemma_commutation_report(t, l, m)) <= 1e-8


@given(st.integers(0, 2**32 - 1))
def test_reduction_on_planted(seed):
    t, _ = planted_tuple(PlantedSpec(3, (1, 1, 0, 1, 1, 0, 1, 1), seed))
    for i in (1, 2, 3):
        assert reduction_check(t, i).passed
