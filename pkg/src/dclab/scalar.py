"""Exact Gaussian-rational scalars.

Every scalar that the rest of the package treats as exact (weights, weight
products, disk scalars, lambda choices) is an :class:`ExactComplex`: a pair of
:class:`fractions.Fraction` objects. Fractions are always in lowest terms with
a positive denominator, so equality and hashing are structural.

Magnitudes are compared through their squares, which keeps disk membership
(``|a| <= 1``) free of square roots.
"""
from __future__ import annotations

import contextlib
import math
import sys
from dataclasses import dataclass
from decimal import Context, Decimal
from enum import Enum
from fractions import Fraction
from numbers import Rational

__all__ = [
    "ExactComplex",
    "DiskScalar",
    "DiskScalarError",
    "Ordering",
    "ZERO",
    "ONE",
    "as_fraction",
    "format_rational",
    "decimal_mirror",
    "magnitude_squared",
    "compare_magnitude",
    "to_approx",
    "is_overflow",
    "exact_sqrt",
    "exact_root4",
    "sqrt_lower",
    "sqrt_upper",
    "root4_lower",
]


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and strings such as ``"3/4"`` or ``"1e-9"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        with _unbounded_digits():
            return Fraction(value.strip())
    if isinstance(value, float):
        # floats are accepted only when they are finite; the result is the
        # exact binary value, not the decimal the caller may have meant
        if not math.isfinite(value):
            raise ValueError(f"non-finite float {value!r}")
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


@contextlib.contextmanager
def _unbounded_digits():
    # orbit coefficients of shifts easily pass the interpreter's default
    # 4300-digit cap on int <-> str conversion
    get = getattr(sys, "get_int_max_str_digits", None)
    if get is None:
        yield
        return
    old = get()
    sys.set_int_max_str_digits(0)
    try:
        yield
    finally:
        sys.set_int_max_str_digits(old)


def format_rational(q: Fraction) -> str:
    with _unbounded_digits():
        if q.denominator == 1:
            return str(q.numerator)
        return f"{q.numerator}/{q.denominator}"


_DEC = Context(prec=17)


def decimal_mirror(q: Fraction) -> str:
    """Human-readable decimal rendering; never used for decisions."""
    if q == 0:
        return "0"
    d = _DEC.divide(Decimal(q.numerator), Decimal(q.denominator))
    return format(d, "G")


class ExactComplex:
    """Complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", as_fraction(re))
        object.__setattr__(self, "im", as_fraction(im))

    @classmethod
    def _raw(cls, re: Fraction, im: Fraction) -> ExactComplex:
        z = object.__new__(cls)
        object.__setattr__(z, "re", re)
        object.__setattr__(z, "im", im)
        return z

    @classmethod
    def coerce(cls, value) -> ExactComplex:
        if isinstance(value, ExactComplex):
            return value
        if isinstance(value, complex):
            return cls(value.real, value.imag)
        return cls(value, 0)

    def __setattr__(self, name, value):
        raise AttributeError("ExactComplex is immutable")

    def __reduce__(self):
        return (ExactComplex, (self.re, self.im))

    # arithmetic

    def __add__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return ExactComplex._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return ExactComplex._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return ExactComplex._raw(self.re * other, self.im * other)
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        if self.im == 0 and o.im == 0:
            return ExactComplex._raw(self.re * o.re, Fraction(0))
        return ExactComplex._raw(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o * self.reciprocal()

    def __neg__(self):
        return ExactComplex._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.reciprocal() ** (-n)
        if self.im == 0:
            return ExactComplex._raw(self.re**n, Fraction(0))
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def reciprocal(self) -> ExactComplex:
        m = self.abs2()
        if m == 0:
            raise ZeroDivisionError("reciprocal of zero")
        return ExactComplex._raw(self.re / m, -self.im / m)

    def conjugate(self) -> ExactComplex:
        return ExactComplex._raw(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        if self.im == 0:
            return f"ExactComplex({format_rational(self.re)!r})"
        return f"ExactComplex({format_rational(self.re)!r}, {format_rational(self.im)!r})"

    def __str__(self):
        if self.im == 0:
            return format_rational(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"({format_rational(self.re)} {sign} {format_rational(abs(self.im))}i)"

    # serialization

    def to_json(self) -> dict:
        return {"re": format_rational(self.re), "im": format_rational(self.im)}

    @classmethod
    def from_json(cls, obj) -> ExactComplex:
        """Accepts ``{"re": "p/q", "im": "p/q"}`` or a bare real ``"p/q"``."""
        if isinstance(obj, dict):
            extra = set(obj) - {"re", "im"}
            if extra:
                raise ValueError(f"unexpected keys {sorted(extra)} in complex value")
            return cls(obj.get("re", 0), obj.get("im", 0))
        if isinstance(obj, (str, int)) and not isinstance(obj, bool):
            return cls(obj, 0)
        raise ValueError(f"cannot read complex value from {obj!r}")


def _coerce_or_none(value):
    if isinstance(value, ExactComplex):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return ExactComplex._raw(Fraction(value), Fraction(0))
    return None


ZERO = ExactComplex(0)
ONE = ExactComplex(1)


def magnitude_squared(z: ExactComplex) -> Fraction:
    return ExactComplex.coerce(z).abs2()


class Ordering(Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def compare_magnitude(a: ExactComplex, b: ExactComplex) -> Ordering:
    ma, mb = magnitude_squared(a), magnitude_squared(b)
    if ma < mb:
        return Ordering.LESS
    if ma > mb:
        return Ordering.GREATER
    return Ordering.EQUAL


def _approx_part(q: Fraction) -> float:
    try:
        return float(q)
    except OverflowError:
        return math.inf if q > 0 else -math.inf


def to_approx(z: ExactComplex) -> complex:
    """Nearest double rounding of each part; overflow saturates to +-inf."""
    z = ExactComplex.coerce(z)
    return complex(_approx_part(z.re), _approx_part(z.im))


def is_overflow(c: complex) -> bool:
    return math.isinf(c.real) or math.isinf(c.imag)


class DiskScalarError(ValueError):
    pass


@dataclass(frozen=True)
class DiskScalar:
    """A scalar of modulus at most one, checked exactly."""

    value: ExactComplex

    def __post_init__(self):
        v = ExactComplex.coerce(self.value)
        object.__setattr__(self, "value", v)
        if v.abs2() > 1:
            raise DiskScalarError(f"|{v}|^2 = {format_rational(v.abs2())} exceeds 1")

    def to_json(self) -> dict:
        return self.value.to_json()

    @classmethod
    def from_json(cls, obj) -> DiskScalar:
        return cls(ExactComplex.from_json(obj))


# roots of non-negative rationals

def exact_sqrt(q: Fraction) -> Fraction | None:
    """Rational square root of ``q`` if one exists."""
    q = as_fraction(q)
    if q < 0:
        raise ValueError("square root of a negative rational")
    p, d = q.numerator, q.denominator
    rp, rd = math.isqrt(p), math.isqrt(d)
    if rp * rp == p and rd * rd == d:
        return Fraction(rp, rd)
    return None


def exact_root4(q: Fraction) -> Fraction | None:
    s = exact_sqrt(q)
    return None if s is None else exact_sqrt(s)


def _scaled_floor_root(q: Fraction, k: int, digits: int) -> Fraction:
    # floor(q^(1/k) * 10^digits) / 10^digits for k in {2, 4}
    scale = 10 ** (digits * k)
    m = (q.numerator * scale) // q.denominator
    r = math.isqrt(m)
    if k == 4:
        r = math.isqrt(r)
    return Fraction(r, 10**digits)


def sqrt_lower(q: Fraction, digits: int = 18) -> Fraction:
    """Rational ``s <= sqrt(q)`` with ``sqrt(q) - s < 10**-digits``."""
    q = as_fraction(q)
    exact = exact_sqrt(q)
    if exact is not None:
        return exact
    return _scaled_floor_root(q, 2, digits)


def sqrt_upper(q: Fraction, digits: int = 18) -> Fraction:
    """Rational ``s >= sqrt(q)`` with ``s - sqrt(q) <= 10**-digits``."""
    q = as_fraction(q)
    exact = exact_sqrt(q)
    if exact is not None:
        return exact
    return _scaled_floor_root(q, 2, digits) + Fraction(1, 10**digits)


def root4_lower(q: Fraction, digits: int = 18) -> Fraction:
    """Rational ``s <= q**(1/4)`` with ``q**(1/4) - s < 10**-digits``."""
    q = as_fraction(q)
    exact = exact_root4(q)
    if exact is not None:
        return exact
    return _scaled_floor_root(q, 4, digits)
