from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dclab.lattice import N, Z, LatticeMismatch, SupportVector, distance_squared, finite, norm_squared
from dclab.operators import (
    BackwardShift,
    DirectSum,
    ForwardShift,
    IdentityOp,
    ScalarOp,
    SignSplit,
    Table,
    apply_power,
)
from dclab.scalar import ExactComplex
from dclab.subspaces import (
    Axis,
    Ball,
    CoordinateSpan,
    IndexMask,
    TrivialSubspace,
    allowed_in_window,
    contains,
    head_phase,
    invariance_check,
    is_trivial,
    project,
    sample_balls,
    sample_targets,
    subspace_from_json,
    subspace_to_json,
)

from conftest import e, fe

coeffs = st.builds(ExactComplex, st.integers(-5, 5), st.integers(-5, 5))
z_vectors = st.dictionaries(st.integers(-8, 8), coeffs, max_size=5).map(lambda d: SupportVector(Z, d))
masks = (
    st.tuples(st.integers(2, 5), st.sets(st.integers(0, 4), min_size=1, max_size=3))
    .map(lambda t: (t[0], frozenset(a % t[0] for a in t[1])))
    .filter(lambda t: len(t[1]) < t[0])
    .map(lambda t: IndexMask(Z, *t))
)
shift_ops = st.builds(
    lambda cls, a, b: cls(Z, SignSplit(a, b)),
    st.sampled_from([ForwardShift, BackwardShift]),
    st.integers(1, 4),
    st.integers(1, 4),
)


def test_contains_examples(M):
    assert contains(M, e(1))
    assert not contains(M, e(2))
    assert contains(Axis(3, 0), fe(3, 0, 5))


def test_project_examples(M):
    assert project(M, e(1) + e(2)) == e(1)
    assert project(M, e(2)).is_zero()
    assert project(M, e(1)) == e(1)


def test_membership_lattice_mismatch(M):
    with pytest.raises(LatticeMismatch):
        contains(M, fe(3))


def test_trivial_subspaces_rejected():
    with pytest.raises(TrivialSubspace):
        IndexMask(Z, 2, frozenset({0, 1}))
    with pytest.raises(TrivialSubspace):
        IndexMask(Z, 3, frozenset())
    with pytest.raises(TrivialSubspace):
        Axis(1, 0)
    with pytest.raises(TrivialSubspace):
        CoordinateSpan(finite(2), frozenset({0, 1}))
    assert is_trivial(Axis(1, 0, allow_trivial=True))
    assert not is_trivial(Axis(2, 0))


def test_invariance_examples(F, M):
    ok = invariance_check(F, M, 2, (-10, 10))
    assert ok.holds and ok.scope == "global"
    bad = invariance_check(F, M, 1, (-10, 10))
    assert not bad.holds and bad.scope == "global"
    assert bad.witness == 1
    assert bad.image == e(2, 3)
    for n in range(0, 4):
        v = invariance_check(IdentityOp(finite(3)), Axis(3, 0), n, (0, 2))
        assert v.holds and v.scope == "global"
        assert invariance_check(IdentityOp(Z), M, n, (-3, 3)).holds


def test_invariance_far_witness():
    # window only holds index 2 (fine); the violation sits at index 1
    S = ForwardShift(Z, SignSplit(1, 1))
    sub = IndexMask(Z, 3, frozenset({1, 2}))
    v = invariance_check(S, sub, 1, (2, 2))
    assert not v.holds and v.scope == "global"
    assert not contains(sub, v.image)


def test_invariance_with_zero_weight_is_window_scoped():
    S = ForwardShift(Z, Table(((1, 0),), 2))
    v = invariance_check(S, IndexMask(Z, 2, frozenset({1})), 1, (1, 1))
    assert v.holds and v.scope == "window"


def test_invariance_finite_direct_sum():
    S = DirectSum(((ScalarOp(1, 2), 0), (IdentityOp(finite(2)), 1)))
    v = invariance_check(S, Axis(3, 0), 5, (0, 2))
    assert v.holds and v.scope == "global"


def test_sample_targets_examples(M):
    A = Axis(2, 0)
    ts = sample_targets(A, 10, 4, (0, 1), 42)
    assert len(ts) == 4
    assert ts[0].is_zero()
    assert ts[1] == fe(2, 0, 10)
    for t in ts:
        assert contains(A, t) and norm_squared(t) <= 100
    ts = sample_targets(M, 1, 3, (-3, 3), 1)
    assert len(ts) == 3
    for t in ts:
        assert set(t.support) <= {-3, -1, 1, 3}
        assert norm_squared(t) <= 1
    assert sample_targets(Axis(3, 1), 5, 1, (0, 2), 7) == [SupportVector.zero(finite(3))]


def test_head_phase_is_unimodular():
    for j in range(50):
        assert head_phase(j).abs2() == 1
    assert head_phase(0) == ExactComplex(1)


def test_sample_targets_errors(M):
    with pytest.raises(ValueError):
        sample_targets(M, 1, 3, (2, 2), 0)
    with pytest.raises(ValueError):
        sample_targets(M, 0, 3, (-3, 3), 0)


def test_sample_balls_in_subspace(M):
    pairs = sample_balls(M, 2, 10, (-5, 5), 3)
    assert pairs == sample_balls(M, 2, 10, (-5, 5), 3)
    for U, V in pairs:
        U.check_in(M)
        V.check_in(M)
        assert Fraction(1, 10) <= U.radius <= 1


def test_ball_membership_and_json(M):
    b = Ball(e(1), Fraction(1, 2))
    assert b.holds(e(1, Fraction(3, 2) - Fraction(1, 10**9)))
    assert not b.holds(e(1, Fraction(3, 2)))
    assert Ball.from_json(b.to_json()) == b
    with pytest.raises(ValueError):
        Ball(e(1), 0)
    with pytest.raises(ValueError):
        Ball(e(2), 1).check_in(M)


def test_subspace_json():
    for sub in (
        IndexMask(Z, 2, frozenset({1})),
        IndexMask(N, 3, frozenset({0, 2})),
        CoordinateSpan(Z, frozenset({-2, 5})),
        Axis(3, 1),
        Axis(1, 0, allow_trivial=True),
    ):
        assert subspace_from_json(subspace_to_json(sub)) == sub
    assert subspace_to_json(IndexMask(Z, 2, frozenset({1}))) == {
        "kind": "index_mask",
        "lattice": "Z",
        "modulus": 2,
        "allowed": [1],
    }
    with pytest.raises(ValueError):
        subspace_from_json({"kind": "graph"})


@given(masks, z_vectors)
def test_project_idempotent_and_membership(sub, v):
    p = project(sub, v)
    assert project(sub, p) == p
    assert contains(sub, p)
    assert contains(sub, v) == (distance_squared(v, p) == 0)


@given(shift_ops, masks, st.integers(0, 7))
def test_window_never_contradicts_global(op, sub, n):
    verdict = invariance_check(op, sub, n, (-12, 12))
    oracle = all(
        contains(sub, apply_power(op, SupportVector.basis(Z, i), n)) for i in allowed_in_window(sub, (-12, 12))
    )
    assert verdict.scope == "global"
    assert verdict.holds == oracle
    if not verdict.holds:
        assert sub.allows(verdict.witness)
        assert not contains(sub, verdict.image)


@given(masks, st.integers(1, 20), st.integers(0, 2**32))
def test_sampling_reproducible_and_inside(sub, count, seed):
    a = sample_targets(sub, Fraction(7, 2), count, (-6, 6), seed)
    assert a == sample_targets(sub, Fraction(7, 2), count, (-6, 6), seed)
    assert len(a) == count
    for t in a:
        assert contains(sub, t)
        assert norm_squared(t) <= Fraction(49, 4)
        assert all(-6 <= i <= 6 for i in t.support)
