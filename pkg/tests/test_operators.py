from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dclab.lattice import N, Z, SupportVector, axpy, finite, norm_squared
from dclab.operators import (
    BackwardShift,
    DirectSum,
    ForwardShift,
    IdentityOp,
    NotInvertible,
    ScalarOp,
    SignSplit,
    Table,
    UnsupportedOperation,
    adjoint,
    apply,
    apply_power,
    describe,
    invert,
    is_invertible,
    operator_from_json,
    operator_to_json,
    weight_product,
)
from dclab.scalar import ExactComplex

from conftest import e, fe

small_q = st.builds(Fraction, st.integers(-9, 9).filter(bool), st.integers(1, 4))
weights = st.builds(ExactComplex, small_q, st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(-1)]))
sign_split = st.builds(SignSplit, weights, weights, st.integers(-3, 3))
table = st.builds(
    Table,
    st.dictionaries(st.integers(-4, 4), weights, max_size=4).map(lambda d: tuple(d.items())),
    weights,
)
rules = st.one_of(sign_split, table)
shifts = st.builds(
    lambda cls, rule: cls(Z, rule), st.sampled_from([ForwardShift, BackwardShift]), rules
)
coeffs = st.builds(ExactComplex, st.integers(-5, 5), st.integers(-5, 5))
z_vectors = st.dictionaries(st.integers(-6, 6), coeffs, max_size=4).map(lambda d: SupportVector(Z, d))


def naive_power(op, v, n):
    """Oracle: n single steps straight from the definition of the weights."""
    entries = dict(v.items())
    for _ in range(n):
        nxt = {}
        for i, z in entries.items():
            if isinstance(op, ForwardShift):
                j, w = i + 1, op.rule.weight(i)
            else:
                if not op.lattice.admits(i - 1):
                    continue
                j, w = i - 1, op.rule.weight(i)
            nxt[j] = nxt.get(j, ExactComplex(0)) + z * w
        entries = {i: z for i, z in nxt.items() if not z.is_zero()}
    return SupportVector(v.lattice, entries)


def test_flagship_weights(F):
    assert apply(F, e(0)) == e(1, 3)
    assert apply(F, e(-2)) == e(-1, 4)


def test_identity_apply():
    v = fe(3, 2, ExactComplex(1, -4))
    assert apply(IdentityOp(finite(3)), v) == v


def test_power_examples(F, B):
    assert apply_power(F, e(1), 4) == e(5, 81)
    assert apply_power(F, e(1), 4) == naive_power(F, e(1), 4)
    assert apply_power(B, e(7, 2), 0) == e(7, 2)
    for k in range(1, 8):
        v = apply_power(B, e(1), 2 * k)
        assert v.support == (1 - 2 * k,)
        # 1/3 from z_1, then 2k - 1 factors 1/4
        assert v[1 - 2 * k] == ExactComplex(Fraction(1, 3) * Fraction(1, 4) ** (2 * k - 1))


def test_weight_product_examples(F, B):
    for k in range(1, 10):
        assert weight_product(F, 1, 2 * k) == ExactComplex(3 ** (2 * k))
        coeff = apply_power(B, e(1), 2 * k)[1 - 2 * k]
        assert weight_product(B, 1, 2 * k) == coeff
    assert weight_product(F, 5, 0) == ExactComplex(1)
    assert weight_product(B, -2, 0) == ExactComplex(1)


def test_weight_product_errors():
    S = BackwardShift(N, SignSplit(2, 2))
    with pytest.raises(ValueError):
        weight_product(S, 1, 2)
    with pytest.raises(UnsupportedOperation):
        weight_product(ScalarOp(2, 2), 0, 1)


def test_flagship_weight_product_growth(F):
    mags = [weight_product(F, 1, n).abs2() for n in range(0, 30)]
    assert mags == [Fraction(9) ** n for n in range(30)]
    assert all(a < b for a, b in zip(mags, mags[1:]))


def test_invert_examples(F):
    B = invert(F)
    assert isinstance(B, BackwardShift)
    assert B.rule.weight(1) == ExactComplex(Fraction(1, 3))
    assert B.rule.weight(5) == ExactComplex(Fraction(1, 3))
    assert B.rule.weight(0) == ExactComplex(Fraction(1, 4))
    assert B.rule.weight(-7) == ExactComplex(Fraction(1, 4))
    assert invert(ScalarOp(2, 2)) == ScalarOp(2, Fraction(1, 2))
    I = IdentityOp(finite(4))
    assert invert(I) == I
    assert invert(B) == F


def test_invert_errors():
    with pytest.raises(NotInvertible):
        invert(BackwardShift(N, SignSplit(1, 1)))
    with pytest.raises(NotInvertible):
        invert(ForwardShift(Z, Table(((3, 0),), 2)))
    with pytest.raises(NotInvertible):
        invert(ScalarOp(2, 0))
    with pytest.raises(NotInvertible):
        ForwardShift(Z, SignSplit(0, 1), declared_invertible=True)


def test_unilateral_backward_kills_e0():
    S = BackwardShift(N, SignSplit(2, 2))
    assert apply(S, SupportVector.basis(N, 0)).is_zero()
    assert apply_power(S, SupportVector.basis(N, 2), 3).is_zero()
    assert not is_invertible(S)


def test_adjoint_examples():
    assert adjoint(ScalarOp(2, 2)) == ScalarOp(2, 2)
    assert adjoint(ScalarOp(2, ExactComplex(1, 1))).k == ExactComplex(1, -1)
    assert adjoint(ScalarOp(1, ExactComplex(0, 1))).k == ExactComplex(0, -1)
    with pytest.raises(UnsupportedOperation):
        adjoint(ForwardShift(Z, SignSplit(3, 4)))


def test_direct_sum_blocks():
    S = DirectSum(((ScalarOp(1, 2), 0), (IdentityOp(finite(2)), 1)))
    assert S.lattice == finite(3)
    v = apply_power(S, fe(3, 0, 5), 3)
    assert v == fe(3, 0, 40)
    w = SupportVector(finite(3), {0: 1, 2: 7})
    assert apply(S, w) == SupportVector(finite(3), {0: 2, 2: 7})


def test_direct_sum_layout_errors():
    with pytest.raises(ValueError):
        DirectSum(((ScalarOp(1, 2), 1), (IdentityOp(finite(2)), 2)))
    with pytest.raises(ValueError):
        DirectSum(((ScalarOp(2, 2), 0), (IdentityOp(finite(2)), 1)))
    with pytest.raises(ValueError):
        DirectSum(((ForwardShift(Z, SignSplit(1, 1)), 0),))


def test_shift_on_finite_lattice_rejected():
    with pytest.raises(ValueError):
        ForwardShift(finite(3), SignSplit(1, 1))


def test_serialization_format(F):
    assert operator_to_json(F) == {
        "kind": "forward_shift",
        "lattice": "Z",
        "weights": {"nonneg": "3", "neg": "4"},
        "invertible": True,
    }
    assert operator_to_json(ScalarOp(2, 2)) == {"kind": "scalar", "dim": 2, "k": "2"}
    S = DirectSum(((ScalarOp(1, ExactComplex(1, 1)), 0), (IdentityOp(finite(2)), 1)))
    assert operator_from_json(operator_to_json(S)) == S
    T = BackwardShift(Z, Table(((0, ExactComplex(1, 2)), (4, 3)), Fraction(1, 5)))
    assert operator_from_json(operator_to_json(T)) == T
    with pytest.raises(ValueError):
        operator_from_json({"kind": "matrix"})
    assert "forward shift" in describe(F)


@given(shifts, z_vectors, st.integers(0, 12))
def test_closed_form_matches_repeated_steps(op, v, n):
    assert apply_power(op, v, n) == naive_power(op, v, n)


@given(shifts, z_vectors, st.integers(0, 20), st.integers(0, 20))
def test_power_composition(op, v, m, n):
    assert apply_power(op, v, m + n) == apply_power(op, apply_power(op, v, m), n)


@given(shifts, coeffs, z_vectors, z_vectors)
def test_linearity(op, a, x, y):
    assert apply(op, axpy(a, x, y)) == axpy(a, apply(op, x), apply(op, y))


@given(shifts, z_vectors)
def test_invert_round_trip(op, v):
    if is_invertible(op):
        inv = invert(op)
        assert apply(inv, apply(op, v)) == v
        assert apply(op, apply(inv, v)) == v


@given(st.builds(ScalarOp, st.integers(1, 4), coeffs), st.integers(0, 10))
def test_scalar_power_scales_norm(op, n):
    v = SupportVector.basis(op.lattice, 0, 3)
    assert norm_squared(apply_power(op, v, n)) == 9 * op.k.abs2() ** n
    if is_invertible(op):
        assert apply(invert(op), apply(op, v)) == v


@given(st.integers(-5, 5), st.integers(0, 15))
def test_unilateral_backward_matches_oracle(i, n):
    S = BackwardShift(N, SignSplit(ExactComplex(1, 1), 2, 3))
    v = SupportVector.basis(N, abs(i), 2)
    assert apply_power(S, v, n) == naive_power(S, v, n)
