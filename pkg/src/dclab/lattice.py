"""Finite-support vectors over integer index lattices.

A :class:`SupportVector` models an element of l2(Z), l2(N) or C^n that has
finitely many nonzero coordinates. Entries are kept in canonical form: sorted
by index, no stored zeros, every index valid for the lattice.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .scalar import ZERO, ExactComplex, format_rational

__all__ = [
    "LatticeKind",
    "IndexLattice",
    "Z",
    "N",
    "finite",
    "LatticeMismatch",
    "SupportVector",
    "norm_squared",
    "axpy",
    "distance_squared",
]


class LatticeKind(Enum):
    BILATERAL = "Z"
    UNILATERAL = "N"
    FINITE = "dim"


@dataclass(frozen=True)
class IndexLattice:
    kind: LatticeKind
    dim: int | None = None

    def __post_init__(self):
        if self.kind is LatticeKind.FINITE:
            if not isinstance(self.dim, int) or self.dim < 1:
                raise ValueError(f"finite lattice needs a positive dimension, got {self.dim!r}")
        elif self.dim is not None:
            raise ValueError(f"{self.kind.value} lattice takes no dimension")

    @property
    def is_finite(self) -> bool:
        return self.kind is LatticeKind.FINITE

    @property
    def is_bilateral(self) -> bool:
        return self.kind is LatticeKind.BILATERAL

    def admits(self, i: int) -> bool:
        if self.kind is LatticeKind.BILATERAL:
            return True
        if self.kind is LatticeKind.UNILATERAL:
            return i >= 0
        return 0 <= i < self.dim

    def clip(self, lo: int, hi: int) -> range:
        """Indices of ``[lo, hi]`` that belong to the lattice."""
        if self.kind is LatticeKind.UNILATERAL:
            lo = max(lo, 0)
        elif self.kind is LatticeKind.FINITE:
            lo, hi = max(lo, 0), min(hi, self.dim - 1)
        return range(lo, hi + 1)

    def to_json(self):
        if self.kind is LatticeKind.FINITE:
            return {"dim": self.dim}
        return self.kind.value

    @classmethod
    def from_json(cls, obj) -> IndexLattice:
        if obj == "Z":
            return Z
        if obj == "N":
            return N
        if isinstance(obj, dict) and set(obj) == {"dim"}:
            return finite(obj["dim"])
        raise ValueError(f"unknown lattice {obj!r}")

    def __str__(self):
        if self.kind is LatticeKind.FINITE:
            return f"C^{self.dim}"
        return "l2(Z)" if self.is_bilateral else "l2(N)"


Z = IndexLattice(LatticeKind.BILATERAL)
N = IndexLattice(LatticeKind.UNILATERAL)


def finite(n: int) -> IndexLattice:
    return IndexLattice(LatticeKind.FINITE, n)


class LatticeMismatch(ValueError):
    pass


def _check_same(u: SupportVector, v: SupportVector) -> None:
    if u.lattice != v.lattice:
        raise LatticeMismatch(f"{u.lattice} vs {v.lattice}")


class SupportVector:
    """Immutable finite-support vector. Use the constructors, not ``__init__``."""

    __slots__ = ("lattice", "_entries", "_hash")

    def __init__(self, lattice: IndexLattice, entries: Mapping[int, ExactComplex] | Iterable = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        clean = {}
        for i, z in items:
            if not isinstance(i, int) or isinstance(i, bool):
                raise TypeError(f"index {i!r} is not an integer")
            if not lattice.admits(i):
                raise ValueError(f"index {i} not in {lattice}")
            if i in clean:
                raise ValueError(f"duplicate index {i}")
            z = ExactComplex.coerce(z)
            if not z.is_zero():
                clean[i] = z
        object.__setattr__(self, "lattice", lattice)
        object.__setattr__(self, "_entries", dict(sorted(clean.items())))
        object.__setattr__(self, "_hash", None)

    @classmethod
    def _trusted(cls, lattice: IndexLattice, entries: dict) -> SupportVector:
        # entries already validated and zero-free; only ordering is restored
        v = object.__new__(cls)
        object.__setattr__(v, "lattice", lattice)
        object.__setattr__(v, "_entries", dict(sorted(entries.items())))
        object.__setattr__(v, "_hash", None)
        return v

    def __setattr__(self, name, value):
        raise AttributeError("SupportVector is immutable")

    def __reduce__(self):
        return (SupportVector, (self.lattice, tuple(self._entries.items())))

    @classmethod
    def zero(cls, lattice: IndexLattice) -> SupportVector:
        return cls._trusted(lattice, {})

    @classmethod
    def basis(cls, lattice: IndexLattice, i: int, coeff=1) -> SupportVector:
        return cls(lattice, {i: coeff})

    # read access

    def __getitem__(self, i: int) -> ExactComplex:
        return self._entries.get(i, ZERO)

    def items(self) -> Iterator[tuple[int, ExactComplex]]:
        return iter(self._entries.items())

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self._entries)

    def __len__(self):
        return len(self._entries)

    def is_zero(self) -> bool:
        return not self._entries

    def __eq__(self, other):
        if not isinstance(other, SupportVector):
            return NotImplemented
        return self.lattice == other.lattice and self._entries == other._entries

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.lattice, tuple(self._entries.items()))))
        return self._hash

    def __repr__(self):
        if not self._entries:
            return f"SupportVector({self.lattice}, 0)"
        terms = " + ".join(f"{z}*e[{i}]" for i, z in self._entries.items())
        return f"SupportVector({self.lattice}, {terms})"

    # algebra

    def scale(self, a) -> SupportVector:
        a = ExactComplex.coerce(a)
        if a.is_zero():
            return SupportVector.zero(self.lattice)
        return SupportVector._trusted(self.lattice, {i: a * z for i, z in self._entries.items()})

    def __add__(self, other: SupportVector) -> SupportVector:
        return axpy(1, other, self)

    def __sub__(self, other: SupportVector) -> SupportVector:
        return axpy(-1, other, self)

    def __neg__(self) -> SupportVector:
        return self.scale(-1)

    def reindex(self, lattice: IndexLattice, offset: int) -> SupportVector:
        """Same coefficients moved to ``index + offset`` on ``lattice``."""
        return SupportVector(lattice, {i + offset: z for i, z in self._entries.items()})

    # serialization

    def to_json(self) -> dict:
        return {
            "lattice": self.lattice.to_json(),
            "entries": [
                {"index": i, "re": format_rational(z.re), "im": format_rational(z.im)}
                for i, z in self._entries.items()
            ],
        }

    @classmethod
    def from_json(cls, obj) -> SupportVector:
        lattice = IndexLattice.from_json(obj["lattice"])
        pairs = []
        last = None
        for e in obj["entries"]:
            i = e["index"]
            if last is not None and i <= last:
                raise ValueError(f"entry indices must be strictly increasing (got {i} after {last})")
            last = i
            pairs.append((i, ExactComplex(e.get("re", 0), e.get("im", 0))))
        return cls(lattice, pairs)


def norm_squared(v: SupportVector) -> Fraction:
    return sum((z.abs2() for _, z in v.items()), Fraction(0))


def axpy(a, x: SupportVector, y: SupportVector) -> SupportVector:
    """Exact ``a*x + y``."""
    _check_same(x, y)
    a = ExactComplex.coerce(a)
    out = dict(y._entries)
    if not a.is_zero():
        for i, z in x.items():
            s = out.get(i, ZERO) + a * z
            if s.is_zero():
                out.pop(i, None)
            else:
                out[i] = s
    return SupportVector._trusted(y.lattice, out)


def _inner(u: SupportVector, v: SupportVector) -> ExactComplex:
    """<u, v> = sum u_i * conj(v_i), linear in the first slot."""
    _check_same(u, v)
    if len(u) > len(v):
        small, big, flip = v, u, True
    else:
        small, big, flip = u, v, False
    acc = ZERO
    for i, z in small.items():
        w = big._entries.get(i)
        if w is not None:
            acc = acc + (w * z.conjugate() if flip else z * w.conjugate())
    return acc


def distance_squared(u: SupportVector, v: SupportVector) -> Fraction:
    _check_same(u, v)
    return norm_squared(axpy(-1, v, u))
