from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dclab.lattice import SupportVector, Z, finite, norm_squared
from dclab.operators import ForwardShift, IdentityOp, ScalarOp, SignSplit, apply_power
from dclab.orbits import (
    Orbit,
    boundedness_certificate,
    clamp_to_disk,
    cone_orbit_witness,
    coverage_report,
    disk_orbit_witness,
    growth_certificate,
)
from dclab.scalar import ExactComplex
from dclab.subspaces import Axis, IndexMask, sample_targets

from conftest import e, fe

A2 = Axis(2, 0)
A3 = Axis(3, 0)


def test_disk_witness_scalar_example():
    w = disk_orbit_witness(ScalarOp(2, 2), fe(2), fe(2, 0, 5), A2, 10)
    assert w.found
    assert w.n == 3
    assert w.alpha.value == ExactComplex(Fraction(5, 8))
    assert w.residual_squared == 0 and w.exact
    assert w.recheck(ScalarOp(2, 2), fe(2), fe(2, 0, 5))


def test_identity_cannot_reach_beyond_unit_norm():
    r = disk_orbit_witness(IdentityOp(finite(2)), fe(2), fe(2, 0, 2), A2, 10)
    assert not r.found
    assert r.best_residual_squared == 1
    assert r.best_n == 0
    assert r.best_scalar == ExactComplex(1)


def test_zero_target_hits_at_zero():
    w = disk_orbit_witness(IdentityOp(finite(2)), fe(2), SupportVector.zero(finite(2)), A2, 10)
    assert w.found and w.n == 0 and w.alpha.value.is_zero()


def test_disk_witness_rejects_bad_input():
    with pytest.raises(ValueError):
        disk_orbit_witness(ScalarOp(2, 2), SupportVector.zero(finite(2)), fe(2), A2, 5)
    with pytest.raises(ValueError):
        disk_orbit_witness(ScalarOp(2, 2), fe(2), fe(2, 1), A2, 5)


def test_cone_examples():
    w = cone_orbit_witness(IdentityOp(finite(2)), fe(2), fe(2, 0, 7))
    assert w.found and w.n == 0 and w.beta == ExactComplex(7)
    w = cone_orbit_witness(ScalarOp(2, 2), fe(2), fe(2, 0, 5))
    assert w.found and w.n == 0 and w.beta == ExactComplex(5)
    r = cone_orbit_witness(IdentityOp(finite(2)), fe(2), fe(2, 1))
    assert not r.found and r.best_residual_squared == 1


def test_flagship_orbit_points(F):
    o = Orbit(F, e(0))
    assert o.point(3) == e(3, 27)
    assert o.norm2(3) == 729


def test_clamp_to_disk():
    assert clamp_to_disk(ExactComplex(Fraction(1, 2))) == (ExactComplex(Fraction(1, 2)), True)
    assert clamp_to_disk(ExactComplex(3, 4)) == (ExactComplex(Fraction(3, 5), Fraction(4, 5)), True)
    c, exact = clamp_to_disk(ExactComplex(1, 1))
    assert not exact and c.abs2() <= 1


def test_scalar_coverage_all_hit():
    targets = sample_targets(A2, 10, 200, (0, 1), 42)
    rep = coverage_report(ScalarOp(2, 2), fe(2), A2, targets, 80)
    assert rep.targets == 200 and rep.hits == 200 and rep.passed
    assert [r["index"] for r in rep.to_json()["rows"]] == list(range(200))


def test_halving_coverage_misses_outside_unit_ball():
    op, x = ScalarOp(2, Fraction(1, 2)), fe(2)
    targets = sample_targets(A2, 2, 50, (0, 1), 42)
    rep = coverage_report(op, x, A2, targets, 80)
    assert not rep.passed
    for i, res in rep.misses:
        t2 = norm_squared(targets[i])
        floor = boundedness_certificate(op, x, 80).residual_floor_squared(t2)
        assert t2 > 1
        if floor is not None:
            assert res == floor


def test_identity_coverage_inside_unit_ball():
    targets = [fe(3, 0, Fraction(k, 7)) for k in range(-7, 8)]
    rep = coverage_report(IdentityOp(finite(3)), fe(3), A3, targets, 5)
    assert rep.passed and rep.exact


def test_coverage_target_outside_subspace_rejected():
    with pytest.raises(ValueError):
        coverage_report(ScalarOp(2, 2), fe(2), A2, [fe(2, 1)], 5)


def test_boundedness_examples(F):
    c = boundedness_certificate(ScalarOp(2, Fraction(1, 2)), fe(2), 20)
    assert c.analytic and c.bound == 1
    x = SupportVector(finite(3), {0: 1, 1: 2})
    c = boundedness_certificate(IdentityOp(finite(3)), x, 20)
    assert c.analytic and c.bound_squared == 5
    c = boundedness_certificate(F, e(1), 10)
    assert not c.analytic
    assert c.bound == 3**10 and c.argmax_n == 10


def test_growth_examples(F, B):
    g = growth_certificate(F, e(1), (1, 20))
    assert g.certified and g.rate == 3
    assert g.norms_squared == tuple((n, Fraction(9) ** n) for n in range(1, 21))
    assert not growth_certificate(IdentityOp(finite(3)), fe(3), (1, 20)).certified
    g = growth_certificate(B, e(1), (1, 20))
    assert not g.certified
    assert not g.strictly_increasing
    norms = [v for _, v in g.norms_squared]
    assert all(a > b for a, b in zip(norms, norms[1:]))


def test_growth_threshold(F):
    g = growth_certificate(F, e(1), (1, 10), bound=Fraction(100))
    assert g.threshold == 5


@given(st.integers(1, 6), st.integers(-20, 20), st.integers(-20, 20))
def test_disk_hit_implies_cone_hit(k, a, b):
    op = ScalarOp(2, k)
    t = SupportVector(finite(2), {0: ExactComplex(a, b)})
    d = disk_orbit_witness(op, fe(2), t, A2, 12)
    c = cone_orbit_witness(op, fe(2), t, max_n=12)
    if d.found:
        assert c.found and c.n <= d.n
        assert d.recheck(op, fe(2), t)
    assert c.found


@given(st.integers(0, 8), st.integers(-3, 3))
def test_more_steps_never_hurt(n, i):
    F = ForwardShift(Z, SignSplit(3, 4))
    M = IndexMask(Z, 2, frozenset({1}))
    x = e(-7) + e(-5, 2)
    t = e(2 * i + 1)
    a = disk_orbit_witness(F, x, t, M, n)
    b = disk_orbit_witness(F, x, t, M, n + 3)
    if a.found:
        assert b.found and b.n == a.n
    elif not b.found:
        assert b.best_residual_squared <= a.best_residual_squared


@settings(max_examples=50)
@given(st.integers(0, 2**32))
def test_witnesses_recheck_on_flagship_like_orbit(seed):
    F = ForwardShift(Z, SignSplit(3, 4))
    M = IndexMask(Z, 2, frozenset({1}))
    x = e(-9) + e(-7) + e(-5) + e(-3)
    for t in sample_targets(M, 1, 3, (-3, 3), seed):
        w = disk_orbit_witness(F, x, t, M, 12)
        if w.found:
            assert w.recheck(F, x, t)
            assert w.point == apply_power(F, x, w.n).scale(w.alpha.value)
