"""Coordinate-aligned subspaces, balls inside them, invariance and sampling.

All subspaces here are closed spans of basis vectors, so membership and
projection are exact: a vector belongs to the subspace iff every index in its
support is allowed.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .lattice import (
    IndexLattice,
    LatticeMismatch,
    SupportVector,
    distance_squared,
    finite,
)
from .operators import (
    BackwardShift,
    ForwardShift,
    OperatorSpec,
    apply_power,
    is_diagonal,
    is_shift,
)
from .scalar import ExactComplex, as_fraction, format_rational

__all__ = [
    "IndexMask",
    "CoordinateSpan",
    "Axis",
    "SubspaceSpec",
    "TrivialSubspace",
    "Ball",
    "InvarianceVerdict",
    "contains",
    "project",
    "invariance_check",
    "allowed_in_window",
    "sample_targets",
    "sample_balls",
    "subspace_to_json",
    "subspace_from_json",
]


class TrivialSubspace(ValueError):
    """Raised when a subspace would be {0} or the whole space."""


@dataclass(frozen=True)
class IndexMask:
    """Sequences supported on indices whose residue mod ``modulus`` is allowed."""

    lattice: IndexLattice
    modulus: int
    allowed: frozenset
    allow_trivial: bool = False

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        allowed = frozenset(int(a) % self.modulus for a in self.allowed)
        object.__setattr__(self, "allowed", allowed)
        if not self.allow_trivial:
            if self.lattice.is_finite:
                _check_finite_nontrivial(self)
            elif not allowed or len(allowed) == self.modulus:
                raise TrivialSubspace("residue mask must allow some but not all residues")

    def allows(self, i: int) -> bool:
        return self.lattice.admits(i) and (i % self.modulus) in self.allowed


@dataclass(frozen=True)
class CoordinateSpan:
    """Span of finitely many basis vectors."""

    lattice: IndexLattice
    indices: frozenset
    allow_trivial: bool = False

    def __post_init__(self):
        idx = frozenset(int(i) for i in self.indices)
        bad = [i for i in idx if not self.lattice.admits(i)]
        if bad:
            raise ValueError(f"indices {sorted(bad)} not in {self.lattice}")
        object.__setattr__(self, "indices", idx)
        if not self.allow_trivial:
            if not idx:
                raise TrivialSubspace("empty coordinate span")
            if self.lattice.is_finite and len(idx) == self.lattice.dim:
                raise TrivialSubspace("coordinate span is the whole space")

    def allows(self, i: int) -> bool:
        return i in self.indices


@dataclass(frozen=True)
class Axis:
    """``{(0, .., a, .., 0)}``: one coordinate axis of C^dim."""

    dim: int
    axis: int = 0
    allow_trivial: bool = False

    def __post_init__(self):
        if not 0 <= self.axis < self.dim:
            raise ValueError(f"axis {self.axis} outside C^{self.dim}")
        if self.dim == 1 and not self.allow_trivial:
            raise TrivialSubspace("an axis of C^1 is the whole space")

    @property
    def lattice(self) -> IndexLattice:
        return finite(self.dim)

    def allows(self, i: int) -> bool:
        return i == self.axis


SubspaceSpec = Union[IndexMask, CoordinateSpan, Axis]


def _check_finite_nontrivial(sub) -> None:
    flags = [sub.allows(i) for i in range(sub.lattice.dim)]
    if not any(flags) or all(flags):
        raise TrivialSubspace("subspace of C^n must be neither {0} nor the whole space")


def is_trivial(sub: SubspaceSpec) -> bool:
    """True for the whole-space (or zero) subspaces admitted with ``allow_trivial``."""
    try:
        if isinstance(sub, IndexMask):
            IndexMask(sub.lattice, sub.modulus, sub.allowed)
        elif isinstance(sub, CoordinateSpan):
            CoordinateSpan(sub.lattice, sub.indices)
        else:
            Axis(sub.dim, sub.axis)
    except TrivialSubspace:
        return True
    return False


def _same_lattice(sub, v: SupportVector) -> None:
    if sub.lattice != v.lattice:
        raise LatticeMismatch(f"subspace on {sub.lattice}, vector on {v.lattice}")


def contains(sub: SubspaceSpec, v: SupportVector) -> bool:
    _same_lattice(sub, v)
    return all(sub.allows(i) for i in v.support)


def project(sub: SubspaceSpec, v: SupportVector) -> SupportVector:
    _same_lattice(sub, v)
    return SupportVector._trusted(v.lattice, {i: z for i, z in v.items() if sub.allows(i)})


def allowed_in_window(sub: SubspaceSpec, window: tuple[int, int]) -> list[int]:
    lo, hi = window
    return [i for i in sub.lattice.clip(lo, hi) if sub.allows(i)]


@dataclass(frozen=True)
class Ball:
    """Open ball ``{v : |v - center| < radius}`` relative to a subspace."""

    center: SupportVector
    radius: Fraction

    def __post_init__(self):
        r = as_fraction(self.radius)
        if r <= 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "radius", r)

    def holds(self, v: SupportVector) -> bool:
        return distance_squared(v, self.center) < self.radius * self.radius

    def check_in(self, sub: SubspaceSpec) -> None:
        if not contains(sub, self.center):
            raise ValueError("ball center is not in the subspace")

    def to_json(self) -> dict:
        return {"center": self.center.to_json(), "radius": format_rational(self.radius)}

    @classmethod
    def from_json(cls, obj) -> Ball:
        return cls(SupportVector.from_json(obj["center"]), as_fraction(obj["radius"]))


# invariance


@dataclass(frozen=True)
class InvarianceVerdict:
    holds: bool
    scope: str  # "global" or "window"
    n: int
    witness: int | None = None
    image: SupportVector | None = None

    def __bool__(self):
        return self.holds

    def to_json(self) -> dict:
        out = {"holds": self.holds, "scope": self.scope, "n": self.n}
        if self.witness is not None:
            out["witness_index"] = self.witness
            out["witness_image"] = self.image.to_json()
        return out


def _analytic_invariance(op: OperatorSpec, sub: SubspaceSpec, n: int) -> bool | None:
    """Global verdict for T^n(M) in M when it can be decided exactly, else None."""
    if n == 0 or is_diagonal(op):
        return True
    if sub.lattice.is_finite or isinstance(sub, CoordinateSpan):
        return None  # decided by exhaustive enumeration instead
    if is_shift(op) and isinstance(sub, IndexMask):
        d = n if isinstance(op, ForwardShift) else -n
        m = sub.modulus
        if all((a + d) % m in sub.allowed for a in sub.allowed):
            return True
        if all(not w.is_zero() for w in op.rule.distinct_weights()):
            return False
    return None


def _exhaustive_indices(sub: SubspaceSpec):
    if sub.lattice.is_finite:
        return [i for i in range(sub.lattice.dim) if sub.allows(i)]
    if isinstance(sub, CoordinateSpan):
        return sorted(sub.indices)
    return None


def _find_violation(op, sub, n, indices):
    for i in indices:
        img = apply_power(op, SupportVector.basis(sub.lattice, i), n)
        if not contains(sub, img):
            return i, img
    return None


def invariance_check(
    op: OperatorSpec, sub: SubspaceSpec, n: int, window: tuple[int, int]
) -> InvarianceVerdict:
    """Decide whether ``T^n e_i`` stays in ``sub`` for the allowed ``i``.

    Every allowed basis index in ``window`` is checked by direct application.
    The scope is ``"global"`` when the statement for the whole subspace is
    settled too: analytically for residue masks under shifts and for diagonal
    operators, or by enumeration when only finitely many indices are allowed.
    """
    lo, hi = window
    if hi < lo:
        raise ValueError("empty window")
    if op.lattice != sub.lattice:
        raise LatticeMismatch(f"operator on {op.lattice}, subspace on {sub.lattice}")
    exhaustive = _exhaustive_indices(sub)
    if exhaustive is not None:
        hit = _find_violation(op, sub, n, exhaustive)
        if hit is None:
            return InvarianceVerdict(True, "global", n)
        return InvarianceVerdict(False, "global", n, hit[0], hit[1])

    near_first = sorted(allowed_in_window(sub, window), key=lambda i: (abs(i), i < 0))
    local = _find_violation(op, sub, n, near_first)
    analytic = _analytic_invariance(op, sub, n)
    if analytic is True and local is not None:
        raise AssertionError(f"window witness e_{local[0]} contradicts analytic invariance")
    if analytic is True:
        return InvarianceVerdict(True, "global", n)
    if analytic is False:
        if local is None:
            local = _far_witness(op, sub, n)
        return InvarianceVerdict(False, "global", n, local[0], local[1])
    if local is None:
        return InvarianceVerdict(True, "window", n)
    return InvarianceVerdict(False, "window", n, local[0], local[1])


def _far_witness(op, sub: IndexMask, n: int):
    # the window missed the bad residue class; walk outward from the lattice start
    start = 0 if not sub.lattice.is_bilateral else -sub.modulus
    if isinstance(op, BackwardShift) and not sub.lattice.is_bilateral:
        start = n
    for i in range(start, start + 2 * sub.modulus + n + 1):
        if sub.allows(i):
            img = apply_power(op, SupportVector.basis(sub.lattice, i), n)
            if not contains(sub, img):
                return i, img
    raise AssertionError("analytic violation without a witness")


# sampling

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def _unit_from_slope(t: Fraction) -> ExactComplex:
    # ((1 - t^2) + 2 t i) / (1 + t^2) has modulus exactly 1
    d = 1 + t * t
    return ExactComplex((1 - t * t) / d, 2 * t / d)


def head_phase(j: int) -> ExactComplex:
    """Exact unit-modulus phase near ``exp(i * j * golden_angle)``."""
    if j == 0:
        return ExactComplex(1)
    theta = math.remainder(j * _GOLDEN_ANGLE, 2 * math.pi)
    half = theta / 2
    if abs(abs(half) - math.pi / 2) < 1e-6:
        return ExactComplex(-1)
    t = Fraction(math.tan(half)).limit_denominator(1000)
    return _unit_from_slope(t)


def _rational_unit(rng: random.Random, d: int) -> list[Fraction]:
    """Exact rational point on the unit sphere in R^d (inverse stereographic)."""
    if d == 1:
        return [Fraction(rng.choice((-1, 1)))]
    s = [Fraction(rng.randint(-1000, 1000), 1000) for _ in range(d - 1)]
    S = sum(x * x for x in s)
    pt = [2 * x / (1 + S) for x in s] + [(S - 1) / (S + 1)]
    if rng.random() < 0.5:
        pt[-1] = -pt[-1]
    return pt


def sample_targets(
    sub: SubspaceSpec,
    radius,
    count: int,
    window: tuple[int, int],
    seed: int,
) -> list[SupportVector]:
    """Seeded targets inside ``sub`` with norm at most ``radius``.

    The list starts with the zero vector, then ``radius * phase * e_i`` for the
    allowed indices of the window in increasing order; the remainder are
    random vectors on one to three allowed indices. Every target has an exact
    rational norm.
    """
    radius = as_fraction(radius)
    if radius <= 0:
        raise ValueError("radius must be positive")
    if count < 1:
        raise ValueError("count must be positive")
    allowed = allowed_in_window(sub, window)
    if not allowed:
        raise ValueError(f"window {window} contains no allowed index")
    lattice = sub.lattice
    out = [SupportVector.zero(lattice)]
    for j, i in enumerate(allowed):
        if len(out) >= count:
            break
        out.append(SupportVector.basis(lattice, i, head_phase(j) * radius))
    rng = random.Random(seed)
    while len(out) < count:
        s = rng.randint(1, min(3, len(allowed)))
        idx = sorted(rng.sample(allowed, s))
        unit = _rational_unit(rng, 2 * s)
        rho = radius * Fraction(math.isqrt(rng.randrange(10**6)), 1000)
        coords = {i: ExactComplex(rho * unit[2 * k], rho * unit[2 * k + 1]) for k, i in enumerate(idx)}
        out.append(SupportVector(lattice, coords))
    return out[:count]


def sample_balls(
    sub: SubspaceSpec,
    radius,
    count: int,
    window: tuple[int, int],
    seed: int,
    min_radius=Fraction(1, 10),
    max_radius=Fraction(1),
) -> list[tuple[Ball, Ball]]:
    """Seeded pairs of open balls centred in ``sub``."""
    centers = sample_targets(sub, radius, 2 * count, window, seed)
    rng = random.Random(f"{seed}:ball-radii")
    lo, hi = as_fraction(min_radius), as_fraction(max_radius)
    pairs = []
    for k in range(count):
        r1 = lo + (hi - lo) * Fraction(rng.randint(0, 100), 100)
        r2 = lo + (hi - lo) * Fraction(rng.randint(0, 100), 100)
        pairs.append((Ball(centers[2 * k], r1), Ball(centers[2 * k + 1], r2)))
    return pairs


# serialization


def subspace_to_json(sub: SubspaceSpec) -> dict:
    if isinstance(sub, IndexMask):
        out = {
            "kind": "index_mask",
            "lattice": sub.lattice.to_json(),
            "modulus": sub.modulus,
            "allowed": sorted(sub.allowed),
        }
    elif isinstance(sub, CoordinateSpan):
        out = {"kind": "span", "lattice": sub.lattice.to_json(), "indices": sorted(sub.indices)}
    else:
        out = {"kind": "axis", "dim": sub.dim, "axis": sub.axis}
    if sub.allow_trivial:
        out["allow_trivial"] = True
    return out


def subspace_from_json(obj: dict) -> SubspaceSpec:
    kind = obj["kind"]
    trivial = bool(obj.get("allow_trivial", False))
    if kind == "index_mask":
        lattice = IndexLattice.from_json(obj.get("lattice", "Z"))
        return IndexMask(lattice, int(obj["modulus"]), frozenset(obj["allowed"]), trivial)
    if kind == "span":
        return CoordinateSpan(IndexLattice.from_json(obj["lattice"]), frozenset(obj["indices"]), trivial)
    if kind == "axis":
        return Axis(int(obj["dim"]), int(obj["axis"]), trivial)
    raise ValueError(f"unknown subspace kind {kind!r}")
