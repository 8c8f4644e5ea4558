"""Disk orbits, cone orbits and finite-resolution density diagnostics.

The disk orbit of ``x`` under ``T`` is ``{a T^n x : |a| <= 1, n >= 0}``; the
cone orbit drops the bound on ``a``. For a fixed ``n`` the best disk scalar
for a target ``t`` is the least-squares coefficient ``<t, p>/|p|^2`` of
``p = T^n x``, projected onto the closed unit disk. That projection is optimal
for every ``p`` (the objective is ``|p|^2 |a - c|^2 + const``), so no grid
search is needed. It is exact unless the clamp divides by an irrational
modulus, in which case a rational point just inside the disk is used and the
result is labelled approximate.

``n = 0`` is part of every orbit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .lattice import SupportVector, _inner, distance_squared, norm_squared
from .operators import (
    DirectSum,
    ForwardShift,
    IdentityOp,
    OperatorSpec,
    ScalarOp,
    apply,
    apply_power,
    is_shift,
)
from .scalar import (
    ZERO,
    DiskScalar,
    ExactComplex,
    decimal_mirror,
    exact_sqrt,
    format_rational,
    sqrt_upper,
)
from .subspaces import SubspaceSpec, contains

__all__ = [
    "DEFAULT_TOL_SQUARED",
    "DiskOrbitWitness",
    "ConeWitness",
    "NotFound",
    "CoverageEntry",
    "CoverageReport",
    "BoundednessCertificate",
    "GrowthCertificate",
    "Orbit",
    "clamp_to_disk",
    "disk_orbit_witness",
    "cone_orbit_witness",
    "coverage_report",
    "boundedness_certificate",
    "growth_certificate",
    "rational_json",
]

DEFAULT_TOL_SQUARED = Fraction(1, 10**18)


def rational_json(q: Fraction) -> dict:
    return {"exact": format_rational(q), "decimal": decimal_mirror(q)}


class Orbit:
    """Lazily extended ``x, Tx, T^2 x, ...`` with cached norms and membership."""

    def __init__(self, op: OperatorSpec, x: SupportVector):
        self.op = op
        self.points = [x]
        self._norms: dict[int, Fraction] = {}
        self._member: dict[tuple[int, object], bool] = {}

    def point(self, n: int) -> SupportVector:
        while len(self.points) <= n:
            self.points.append(apply(self.op, self.points[-1]))
        return self.points[n]

    def norm2(self, n: int) -> Fraction:
        if n not in self._norms:
            self._norms[n] = norm_squared(self.point(n))
        return self._norms[n]

    def in_sub(self, n: int, sub: SubspaceSpec) -> bool:
        key = (n, sub)
        if key not in self._member:
            self._member[key] = contains(sub, self.point(n))
        return self._member[key]


def clamp_to_disk(c: ExactComplex) -> tuple[ExactComplex, bool]:
    """Nearest point of the closed unit disk to ``c``; flag is False if rounded."""
    m = c.abs2()
    if m <= 1:
        return c, True
    r = exact_sqrt(m)
    if r is not None:
        return c * (1 / r), True
    return c * (1 / sqrt_upper(m)), False


def _residual(alpha: ExactComplex, ip_tp: ExactComplex, p2: Fraction, t2: Fraction) -> Fraction:
    # |a p - t|^2 = |a|^2 |p|^2 - 2 Re(a <p, t>) + |t|^2 with <p, t> = conj(<t, p>)
    return alpha.abs2() * p2 - 2 * (alpha * ip_tp.conjugate()).re + t2


@dataclass(frozen=True)
class DiskOrbitWitness:
    n: int
    alpha: DiskScalar
    point: SupportVector
    residual_squared: Fraction
    exact: bool

    found = True

    def recheck(self, op: OperatorSpec, x: SupportVector, target: SupportVector) -> bool:
        """Recompute ``alpha T^n x`` from scratch and compare."""
        if self.alpha.value.abs2() > 1:
            return False
        point = apply_power(op, x, self.n).scale(self.alpha.value)
        return point == self.point and distance_squared(point, target) == self.residual_squared

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha.to_json(),
            "residual_squared": rational_json(self.residual_squared),
            "exactness": "exact" if self.exact else "approximate",
        }


@dataclass(frozen=True)
class ConeWitness:
    n: int
    beta: ExactComplex
    point: SupportVector
    residual_squared: Fraction
    exact: bool = True

    found = True

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "beta": self.beta.to_json(),
            "residual_squared": rational_json(self.residual_squared),
            "exactness": "exact" if self.exact else "approximate",
        }


@dataclass(frozen=True)
class NotFound:
    best_residual_squared: Fraction
    best_n: int
    best_scalar: ExactComplex
    exact: bool = True

    found = False

    def __bool__(self):
        return False

    def to_json(self) -> dict:
        return {
            "best_residual_squared": rational_json(self.best_residual_squared),
            "best_n": self.best_n,
            "best_scalar": self.best_scalar.to_json(),
            "exactness": "exact" if self.exact else "approximate",
        }


def _search(op, x, target, sub, max_n, tol_squared, orbit, disk: bool):
    t2 = norm_squared(target)
    lattice = target.lattice
    if t2 == 0:
        zero = SupportVector.zero(lattice)
        if disk:
            return DiskOrbitWitness(0, DiskScalar(ZERO), zero, Fraction(0), True)
        return ConeWitness(0, ZERO, zero, Fraction(0), True)
    orbit = orbit or Orbit(op, x)
    best = None  # (residual, n, scalar, exact)
    for n in range(max_n + 1):
        ip = _inner(target, orbit.point(n))
        if ip.is_zero() or (sub is not None and not orbit.in_sub(n, sub)):
            # the best multiple is 0 (orthogonal point, or only 0 lands in the subspace)
            scalar, exact, res = ZERO, True, t2
        else:
            p2 = orbit.norm2(n)
            c = ip * (1 / p2)
            if disk:
                scalar, exact = clamp_to_disk(c)
            else:
                scalar, exact = c, True
            res = _residual(scalar, ip, p2, t2)
        if res <= tol_squared:
            point = orbit.point(n).scale(scalar)
            if disk:
                return DiskOrbitWitness(n, DiskScalar(scalar), point, res, exact and res == 0)
            return ConeWitness(n, scalar, point, res, exact and res == 0)
        # n only grows, so a tie in residual keeps the earlier n
        if best is None or res < best[0]:
            best = (res, n, scalar, exact)
    return NotFound(*best)


def disk_orbit_witness(
    op: OperatorSpec,
    x: SupportVector,
    target: SupportVector,
    sub: SubspaceSpec,
    max_n: int,
    tol_squared: Fraction = DEFAULT_TOL_SQUARED,
    orbit: Orbit | None = None,
) -> DiskOrbitWitness | NotFound:
    """First ``(n, a)`` with ``|a T^n x - target|^2 <= tol_squared``.

    Only orbit points inside ``sub`` are scaled by a nonzero ``a``. The search
    runs ``n = 0..max_n`` in order, so the witness has the smallest such ``n``.
    On failure the best residual seen is returned (ties: smaller ``n``, then
    smaller ``|a|``).
    """
    if x.is_zero():
        raise ValueError("the disk orbit of the zero vector is {0}")
    if not contains(sub, target):
        raise ValueError("target is not in the subspace")
    return _search(op, x, target, sub, max_n, tol_squared, orbit, disk=True)


def cone_orbit_witness(
    op: OperatorSpec,
    x: SupportVector,
    target: SupportVector,
    tol_squared: Fraction = DEFAULT_TOL_SQUARED,
    max_n: int = 80,
    sub: SubspaceSpec | None = None,
    orbit: Orbit | None = None,
) -> ConeWitness | NotFound:
    """Like :func:`disk_orbit_witness` with an unrestricted complex multiplier."""
    if x.is_zero() and not target.is_zero():
        raise ValueError("the cone orbit of the zero vector is {0}")
    return _search(op, x, target, sub, max_n, tol_squared, orbit, disk=False)


# coverage


@dataclass(frozen=True)
class CoverageEntry:
    index: int
    target: SupportVector
    result: DiskOrbitWitness | ConeWitness | NotFound

    @property
    def hit(self) -> bool:
        return bool(self.result.found)

    def row(self) -> dict:
        r = self.result
        if r.found:
            scalar = r.alpha.value if isinstance(r, DiskOrbitWitness) else r.beta
            return {
                "index": self.index,
                "hit": True,
                "n": r.n,
                "alpha_re": format_rational(scalar.re),
                "alpha_im": format_rational(scalar.im),
                "residual": format_rational(r.residual_squared),
            }
        return {
            "index": self.index,
            "hit": False,
            "n": r.best_n,
            "alpha_re": format_rational(r.best_scalar.re),
            "alpha_im": format_rational(r.best_scalar.im),
            "residual": format_rational(r.best_residual_squared),
        }


@dataclass(frozen=True)
class CoverageReport:
    instance: str
    entries: tuple[CoverageEntry, ...]
    tol_squared: Fraction
    max_n: int
    parameters: dict = field(default_factory=dict)
    kind: str = "disk"

    @property
    def targets(self) -> int:
        return len(self.entries)

    @property
    def hits(self) -> int:
        return sum(e.hit for e in self.entries)

    @property
    def witnesses(self) -> list:
        return [e.result for e in self.entries if e.hit]

    @property
    def misses(self) -> list[tuple[int, Fraction]]:
        return [(e.index, e.result.best_residual_squared) for e in self.entries if not e.hit]

    @property
    def max_residual_squared(self) -> Fraction:
        return max((w.residual_squared for w in self.witnesses), default=Fraction(0))

    @property
    def exact(self) -> bool:
        return all(e.result.exact for e in self.entries)

    @property
    def passed(self) -> bool:
        return self.hits == self.targets

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "instance": self.instance,
            "targets": self.targets,
            "hits": self.hits,
            "passed": self.passed,
            "exactness": "exact" if self.exact else "approximate",
            "tol_squared": rational_json(self.tol_squared),
            "max_residual_squared": rational_json(self.max_residual_squared),
            "parameters": dict(self.parameters, max_n=self.max_n),
            "misses": [
                {"index": i, "best_residual_squared": rational_json(r)} for i, r in self.misses
            ],
            "rows": [e.row() for e in self.entries],
        }


def coverage_report(
    op: OperatorSpec,
    x: SupportVector,
    sub: SubspaceSpec,
    targets: list[SupportVector],
    max_n: int,
    tol_squared: Fraction = DEFAULT_TOL_SQUARED,
    instance: str = "",
    parameters: dict | None = None,
    cone: bool = False,
) -> CoverageReport:
    """Run the witness search for every target; entries keep input order."""
    for t in targets:
        if not contains(sub, t):
            raise ValueError("coverage targets must lie in the subspace")
    orbit = Orbit(op, x)
    entries = []
    for i, t in enumerate(targets):
        if cone:
            res = cone_orbit_witness(op, x, t, tol_squared, max_n, sub, orbit)
        else:
            res = disk_orbit_witness(op, x, t, sub, max_n, tol_squared, orbit)
        entries.append(CoverageEntry(i, t, res))
    return CoverageReport(
        instance, tuple(entries), tol_squared, max_n, dict(parameters or {}), "cone" if cone else "disk"
    )


# certificates


def _contraction(op) -> bool:
    if isinstance(op, IdentityOp):
        return True
    if isinstance(op, ScalarOp):
        return op.k.abs2() <= 1
    if isinstance(op, DirectSum):
        return all(_contraction(p) for p, _ in op.parts)
    return False


@dataclass(frozen=True)
class BoundednessCertificate:
    bound_squared: Fraction
    analytic: bool
    max_n: int
    argmax_n: int

    @property
    def bound(self) -> Fraction | None:
        return exact_sqrt(self.bound_squared)

    def residual_floor_squared(self, target_norm_squared: Fraction) -> Fraction | None:
        """Exact lower bound on ``|a T^n x - t|^2`` when ``|t|`` exceeds the bound.

        Only available when both norms are rational; then it is ``(|t| - B)^2``.
        """
        b, t = self.bound, exact_sqrt(target_norm_squared)
        if b is None or t is None or t <= b:
            return None
        return (t - b) ** 2

    def to_json(self) -> dict:
        b = self.bound
        return {
            "bound_squared": rational_json(self.bound_squared),
            "bound": rational_json(b) if b is not None else None,
            "analytic": self.analytic,
            "max_n": self.max_n,
            "argmax_n": self.argmax_n,
            "scope": "all n" if self.analytic else f"n <= {self.max_n}",
        }


def boundedness_certificate(op: OperatorSpec, x: SupportVector, max_n: int) -> BoundednessCertificate:
    """Largest ``|T^n x|^2`` over ``n <= max_n``.

    For contractive diagonal operators (``|k| <= 1``) the bound ``|x|`` holds
    for every ``n`` and the certificate is flagged analytic.
    """
    if _contraction(op):
        return BoundednessCertificate(norm_squared(x), True, max_n, 0)
    orbit = Orbit(op, x)
    best, arg = orbit.norm2(0), 0
    for n in range(1, max_n + 1):
        v = orbit.norm2(n)
        if v > best:
            best, arg = v, n
    return BoundednessCertificate(best, False, max_n, arg)


@dataclass(frozen=True)
class GrowthCertificate:
    norms_squared: tuple[tuple[int, Fraction], ...]
    strictly_increasing: bool
    rate_squared: Fraction | None
    bound: Fraction | None
    threshold: int | None

    @property
    def analytic(self) -> bool:
        return self.rate_squared is not None and self.rate_squared > 1

    @property
    def rate(self) -> Fraction | None:
        return None if self.rate_squared is None else exact_sqrt(self.rate_squared)

    @property
    def certified(self) -> bool:
        return self.analytic

    def note(self) -> str:
        if not self.analytic:
            return "no growth certificate"
        return (
            "|T^n x| >= c^n |x| with c > 1 for every n: the plain orbit leaves every "
            "bounded set, so it is dense in no subspace"
        )

    def to_json(self) -> dict:
        rate = self.rate
        return {
            "norms_squared": [[n, format_rational(v)] for n, v in self.norms_squared],
            "strictly_increasing": self.strictly_increasing,
            "rate_squared": None if self.rate_squared is None else rational_json(self.rate_squared),
            "rate": None if rate is None else rational_json(rate),
            "analytic": self.analytic,
            "bound": None if self.bound is None else rational_json(self.bound),
            "threshold": self.threshold,
            "note": self.note(),
        }


def _min_gain_squared(op) -> Fraction | None:
    # smallest factor by which one application can scale |v|^2, when it is a uniform bound
    if isinstance(op, ForwardShift) or (is_shift(op) and op.lattice.is_bilateral):
        return min(w.abs2() for w in op.rule.distinct_weights())
    if isinstance(op, ScalarOp):
        return op.k.abs2()
    if isinstance(op, IdentityOp):
        return Fraction(1)
    if isinstance(op, DirectSum):
        gains = [_min_gain_squared(p) for p, _ in op.parts]
        return None if None in gains else min(gains)
    return None


def growth_certificate(
    op: OperatorSpec,
    x: SupportVector,
    n_range: tuple[int, int] = (1, 20),
    bound: Fraction | None = None,
) -> GrowthCertificate:
    """Exact ``|T^n x|^2`` over ``n_range`` plus an analytic rate when available.

    For shifts (injective ones) the rate is the smallest weight modulus; for
    scalar operators it is ``|k|``. A rate ``c > 1`` certifies
    ``|T^n x| >= c^n |x|`` for all ``n``. With ``bound`` given, ``threshold``
    is the first ``n`` in range from which ``|T^n x| >= bound`` stays true.
    """
    if x.is_zero():
        raise ValueError("growth of the zero vector is undefined")
    lo, hi = n_range
    orbit = Orbit(op, x)
    norms = tuple((n, orbit.norm2(n)) for n in range(lo, hi + 1))
    inc = all(a[1] < b[1] for a, b in zip(norms, norms[1:]))
    rate2 = _min_gain_squared(op)
    if rate2 is not None:
        x2 = norm_squared(x)
        for n, v in norms:
            if v < rate2**n * x2:
                raise AssertionError(f"growth bound violated at n={n}")
    threshold = None
    if bound is not None:
        b2 = bound * bound
        for n, v in reversed(norms):
            if v < b2:
                break
            threshold = n
    return GrowthCertificate(norms, inc, rate2, bound, threshold)
