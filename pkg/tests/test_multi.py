import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistwold.canonical import canonical_decompose, unitary_part
from twistwold.errors import VerificationError
from twistwold.multi import (
    all_labels,
    classify_restrictions,
    decompose,
    formula_agreement,
    label_index,
    pair_formula_subspaces,
    permuted_decompose_check,
    restrict_tuple,
)
from twistwold.operators import haar_unitary, off_residual
from twistwold.subspace import SubspaceBasis, subspace_gap
from twistwold.twisted import twisted_tuple
from twistwold.zoo import PlantedSpec, clock_shift_tuple, direct_sum, planted_tuple


def test_labels_binary_counter():
    assert all_labels(2) == [(), (1,), (2,), (1, 2)]
    assert [label_index(lab) for lab in all_labels(3)] == list(range(8))


def test_n1_reproduces_canonical(rng):
    T = np.diag([np.exp(0.2j), 0.4, 1.0]).astype(complex)
    r = decompose(twisted_tuple([T]))
    s = canonical_decompose(T)
    assert subspace_gap(r.slice(()).space, s.unitary_space) < 1e-12
    assert subspace_gap(r.slice((1,)).space, s.cnu_space) < 1e-12


def test_clock_shift_pure_pair():
    t = clock_shift_tuple(3, (0.5, 0.7))
    r = decompose(t)
    assert r.dims == {(): 0, (1,): 0, (2,): 0, (1, 2): 3}
    cr = classify_restrictions(r)
    assert cr.passed and {(e[0], e[1]) for e in cr.entries} == {((1, 2), 1), ((1, 2), 2)}


def test_clock_shift_unitary_and_mixed():
    u = clock_shift_tuple(3, (1, 1))
    assert decompose(u).dims[()] == 3
    mixed = direct_sum(u, clock_shift_tuple(3, (0.5, 0.7)))
    dims = decompose(mixed).dims
    assert dims == {(): 3, (1,): 0, (2,): 0, (1, 2): 3}


def test_planted_pair_recovers_blocks():
    t, truth = planted_tuple(PlantedSpec(2, (2, 3, 1, 2), seed=11))
    r = decompose(t)
    assert [s.dim for s in r.slices] == [2, 3, 1, 2]
    for lab, basis in truth.items():
        assert subspace_gap(r.slice(lab).space, basis) <= 1e-8


def test_planted_triple_classified():
    t, truth = planted_tuple(PlantedSpec(3, (1, 2, 1, 1, 2, 1, 1, 2), seed=5))
    r = decompose(t)
    assert classify_restrictions(r).passed
    for lab, basis in truth.items():
        assert subspace_gap(r.slice(lab).space, basis) <= 1e-8


def test_unitary_n1_classification(rng):
    r = decompose(twisted_tuple([haar_unitary(3, rng)]))
    cr = classify_restrictions(r)
    assert cr.passed and [e[2] for e in cr.entries] == ["unitary"]


def test_strict_mode_rejects_failing_tuple():
    bad = twisted_tuple([np.array([[0, 0], [1, 0]], dtype=complex)] * 2, strict=False)
    with pytest.raises(VerificationError):
        decompose(bad)


def test_pair_formulas_examples(rng):
    U = twisted_tuple([haar_unitary(3, rng), np.eye(3)])
    f = pair_formula_subspaces(U)
    assert f[()].dim == 3 and all(f[k].dim == 0 for k in [(1,), (2,), (1, 2)])
    f = pair_formula_subspaces(clock_shift_tuple(3, (0.5, 0.7)))
    assert f[(1, 2)].dim == 3
    t, _ = planted_tuple(PlantedSpec(2, (2, 1, 2, 2), seed=2))
    assert formula_agreement(t) <= 1e-8


def test_permuted_check_examples():
    cs = clock_shift_tuple(3, (0.5, 0.7))
    assert permuted_decompose_check(cs, [1, 2])["max_angle"] == 0
    assert permuted_decompose_check(cs, [2, 1])["max_angle"] == 0
    t, _ = planted_tuple(PlantedSpec(2, (1, 2, 2, 1), seed=9))
    assert permuted_decompose_check(t, [2, 1])["max_angle"] <= 1e-8


def test_parallel_matches_sequential():
    t, _ = planted_tuple(PlantedSpec(3, (1, 2, 0, 1, 2, 1, 1, 2), seed=21))
    a, b = decompose(t), decompose(t, workers=4)
    for sa, sb in zip(a.slices, b.slices):
        assert sa.label == sb.label
        assert np.array_equal(sa.space.columns, sb.space.columns)


def test_restrict_idempotence():
    t, _ = planted_tuple(PlantedSpec(2, (2, 1, 1, 2), seed=3))
    r = decompose(t)
    for s in r.slices:
        if s.dim == 0:
            continue
        sub = decompose(restrict_tuple(t, s.space))
        assert {lab for lab, d in sub.dims.items() if d} == {s.label}


@st.composite
def spec_strategy(draw):
    n = draw(st.sampled_from([1, 2, 3]))
    dims = draw(st.lists(st.integers(0, 2), min_size=2 ** n, max_size=2 ** n).filter(any))
    return PlantedSpec(n, tuple(dims), draw(st.integers(0, 2**32 - 1)))


@given(spec_strategy())
def test_decomposition_invariants(spec):
    t, truth = planted_tuple(spec)
    r = decompose(t)
    assert r.diagnostics["dim_sum"] == t.dim
    assert r.diagnostics["orthogonality"] <= 1e-8
    assert r.diagnostics["completeness"] <= 1e-8
    for s in r.slices:
        for T in t.ops:
            assert off_residual(T, s.space) <= 1e-8
        for i, X in enumerate(s.blocks, start=1):
            if i in s.label and s.dim:
                assert unitary_part(X).dim == 0
        assert subspace_gap(s.space, truth[s.label]) <= 1e-8


@given(st.integers(0, 2**32 - 1))
def test_engine_formula_agreement_on_planted_pairs(seed):
    rng = np.random.default_rng(seed)
    dims = tuple(int(d) for d in rng.integers(0, 3, 4))
    if sum(dims) == 0:
        dims = (0, 0, 0, 1)
    t, _ = planted_tuple(PlantedSpec(2, dims, seed))
    assert formula_agreement(t) <= 1e-8


@given(st.integers(0, 2**32 - 1))
def test_swap_equivariance_on_planted(seed):
    t, _ = planted_tuple(PlantedSpec(2, (1, 1, 2, 1), seed))
    assert permuted_decompose_check(t, [2, 1])["max_angle"] <= 1e-8


def test_zero_slices_kept():
    t = twisted_tuple([np.eye(2, dtype=complex), np.eye(2, dtype=complex)])
    r = decompose(t)
    assert len(r.slices) == 4 and r.dims[()] == 2
    assert all(isinstance(s.space, SubspaceBasis) for s in r.slices)
