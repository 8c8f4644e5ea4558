"""Mechanical checks of the subspace-diskcyclic criterion on concrete instances.

An instance fixes the operator ``T``, the subspace ``M``, an affine sequence
``n_k = a k + b`` and a ``back_map`` ``S`` with ``x_k = S^{n_k} y``. Limits
("-> 0") are certified at finite depth: strict decrease on a tail of
``k = 1..k_max``, a value below a floor at ``k_max``, and, when the ratio of
consecutive terms becomes constant, that exact geometric ratio.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .lattice import SupportVector, _inner, axpy, distance_squared, norm_squared
from .operators import (
    BackwardShift,
    DirectSum,
    ForwardShift,
    IdentityOp,
    OperatorSpec,
    ScalarOp,
    UnsupportedOperation,
    apply,
    apply_power,
    invert,
    is_diagonal,
    is_invertible,
    is_shift,
)
from .orbits import clamp_to_disk, rational_json
from .scalar import (
    ONE,
    ZERO,
    DiskScalar,
    ExactComplex,
    exact_root4,
    exact_sqrt,
    format_rational,
    root4_lower,
    sqrt_lower,
    sqrt_upper,
)
from .subspaces import (
    Ball,
    InvarianceVerdict,
    SubspaceSpec,
    allowed_in_window,
    contains,
    invariance_check,
)

__all__ = [
    "NkRule",
    "CriterionInstance",
    "CriterionError",
    "BackMapError",
    "LambdaChoice",
    "ConditionA",
    "ConditionB",
    "ConditionC",
    "CriterionReport",
    "DiskcyclicWitness",
    "WitnessNotFound",
    "BasisReductionReport",
    "TransitivityHit",
    "TransitivityMiss",
    "right_inverse_threshold",
    "right_inverse_threshold_scan",
    "default_probes",
    "evaluate_criterion",
    "select_lambda",
    "construct_diskcyclic_witness",
    "basis_reduction_check",
    "transitivity_probe",
    "criterion_seed_vector",
]

DECAY_FLOOR = Fraction(1, 10**18)


class CriterionError(ValueError):
    pass


class BackMapError(CriterionError):
    """The back map does not eventually invert ``T^{n_k}`` on the probe."""


@dataclass(frozen=True)
class NkRule:
    """``n_k = a*k + b`` for ``k >= 1``."""

    a: int
    b: int = 0

    def __post_init__(self):
        if self.a < 1:
            raise ValueError("n_k must be strictly increasing (a >= 1)")
        if self.a + self.b < 1:
            raise ValueError("n_k must be a positive integer for every k >= 1")

    def __call__(self, k: int) -> int:
        return self.a * k + self.b

    def first_k_at_least(self, n: int) -> int:
        """Smallest ``k >= 1`` with ``n_k >= n``."""
        k = max(1, -(-(n - self.b) // self.a))
        return k

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True)
class CriterionInstance:
    op: OperatorSpec
    sub: SubspaceSpec
    nk: NkRule
    back_map: OperatorSpec
    dense_window: tuple[int, int]

    def __post_init__(self):
        if self.op.lattice != self.sub.lattice or self.back_map.lattice != self.op.lattice:
            raise CriterionError("operator, back map and subspace must share a lattice")
        lo, hi = self.dense_window
        if hi < lo or not allowed_in_window(self.sub, self.dense_window):
            raise CriterionError("dense window holds no allowed index")
        object.__setattr__(self, "dense_window", (int(lo), int(hi)))

    def check_probe(self, v: SupportVector, what: str) -> None:
        lo, hi = self.dense_window
        if not contains(self.sub, v):
            raise CriterionError(f"{what} is not in the subspace")
        if any(i < lo or i > hi for i in v.support):
            raise CriterionError(f"{what} is not supported in the dense window {self.dense_window}")


# right-inverse thresholds


def _diag_coeff(op, i: int) -> ExactComplex:
    if isinstance(op, IdentityOp):
        return ONE
    if isinstance(op, ScalarOp):
        return op.k
    for part, off in op.parts:
        if off <= i < off + part.lattice.dim:
            return _diag_coeff(part, i - off)
    raise IndexError(i)


def _index_threshold(op, back, i: int) -> int | None:
    """Smallest ``N`` with ``T^n S^n e_i = e_i`` for every ``n >= N``; None if no such N."""
    if is_diagonal(op) and is_diagonal(back):
        return 0 if _diag_coeff(op, i) * _diag_coeff(back, i) == ONE else None
    if isinstance(op, ForwardShift) and isinstance(back, BackwardShift):
        if not back.lattice.is_bilateral:
            return None  # S^n kills e_i once n > i
        step = -1
        # S moves j -> j-1 with z_j, then T moves back with w_{j-1}
        factor = lambda j: back.rule.weight(j) * op.rule.weight(j - 1)  # noqa: E731
        tail_from = min(back.rule.lower_to, op.rule.lower_to + 1)
        tail = back.rule.lower_tail * op.rule.lower_tail
        in_tail = lambda j: j <= tail_from  # noqa: E731
    elif isinstance(op, BackwardShift) and isinstance(back, ForwardShift):
        step = 1
        factor = lambda j: back.rule.weight(j) * op.rule.weight(j + 1)  # noqa: E731
        tail_from = max(back.rule.upper_from, op.rule.upper_from - 1)
        tail = back.rule.upper_tail * op.rule.upper_tail
        in_tail = lambda j: j >= tail_from  # noqa: E731
    else:
        raise UnsupportedOperation(
            f"no right-inverse analysis for {type(op).__name__} with {type(back).__name__}"
        )
    if tail != ONE:
        return None
    prod, last_bad, n, j = ONE, 0, 0, i
    while not in_tail(j):
        prod = prod * factor(j)
        n += 1
        if prod != ONE:
            last_bad = n
        j += step
    if prod != ONE:
        return None
    return last_bad + 1 if last_bad else 0


def right_inverse_threshold(op, back, y: SupportVector, nk: NkRule) -> int | None:
    """Analytic ``k*``: ``T^{n_k} S^{n_k} y = y`` for all ``k >= k*``; None if never."""
    worst = 0
    for i in y.support:
        t = _index_threshold(op, back, i)
        if t is None:
            return None
        worst = max(worst, t)
    return nk.first_k_at_least(worst)


def right_inverse_threshold_scan(op, back, y: SupportVector, nk: NkRule, k_max: int) -> int | None:
    """Brute-force ``k*`` over ``1..k_max`` using one-step applications only."""
    holds = []
    for k in range(1, k_max + 1):
        v = y
        for _ in range(nk(k)):
            v = apply(back, v)
        for _ in range(nk(k)):
            v = apply(op, v)
        holds.append(v == y)
    if not holds[-1]:
        return None
    k0 = k_max
    while k0 > 1 and holds[k0 - 2]:
        k0 -= 1
    return k0


# limit certificates


def _tail_decreasing_from(values: list[Fraction]) -> int | None:
    """1-based k from which ``values`` strictly decrease up to the end."""
    if len(values) < 2:
        return None
    k = len(values)
    while k > 1 and values[k - 2] > values[k - 1]:
        k -= 1
    return k if k < len(values) else None


def _geometric_tail(values: list[Fraction]) -> tuple[Fraction | None, int | None]:
    """Constant consecutive ratio on a tail, and the 1-based k where it starts."""
    if len(values) < 3 or any(v == 0 for v in values):
        return None, None
    ratios = [b / a for a, b in zip(values, values[1:])]
    r = ratios[-1]
    start = len(ratios)
    while start > 1 and ratios[start - 2] == r:
        start -= 1
    if start > len(ratios) - 1:
        return None, None
    return r, start


@dataclass(frozen=True)
class ConditionA:
    y: SupportVector
    norms_squared: tuple[Fraction, ...]
    in_subspace: bool
    decreasing_from: int | None
    below_floor: bool
    threshold: int | None
    threshold_checked: bool
    ratio: Fraction | None
    ratio_from: int | None

    @property
    def passed(self) -> bool:
        return (
            self.in_subspace
            and self.decreasing_from is not None
            and self.below_floor
            and self.threshold is not None
            and self.threshold_checked
        )

    def to_json(self) -> dict:
        return {
            "y": self.y.to_json(),
            "passed": self.passed,
            "xk_norms_squared": [format_rational(v) for v in self.norms_squared],
            "in_subspace": self.in_subspace,
            "decreasing_from_k": self.decreasing_from,
            "below_floor": self.below_floor,
            "equality_threshold_k": self.threshold,
            "equality_rechecked": self.threshold_checked,
            "geometric_ratio": None if self.ratio is None else rational_json(self.ratio),
            "geometric_from_k": self.ratio_from,
        }


@dataclass(frozen=True)
class ConditionB:
    x: SupportVector
    products_squared: tuple[Fraction, ...]
    decreasing_from: int | None
    below_floor: bool
    ratio_squared: Fraction | None
    ratio_from: int | None

    @property
    def ratio(self) -> Fraction | None:
        """Per-step ratio of the unsquared product, when it is rational."""
        return None if self.ratio_squared is None else exact_sqrt(self.ratio_squared)

    @property
    def passed(self) -> bool:
        return self.decreasing_from is not None and self.below_floor

    def to_json(self) -> dict:
        r = self.ratio
        return {
            "x": self.x.to_json(),
            "passed": self.passed,
            "products_squared": [format_rational(v) for v in self.products_squared],
            "decreasing_from_k": self.decreasing_from,
            "below_floor": self.below_floor,
            "ratio_squared": None if self.ratio_squared is None else rational_json(self.ratio_squared),
            "ratio": None if r is None else rational_json(r),
            "geometric_from_k": self.ratio_from,
        }


@dataclass(frozen=True)
class ConditionC:
    verdicts: tuple[InvarianceVerdict, ...]

    @property
    def passed(self) -> bool:
        return all(v.holds for v in self.verdicts)

    @property
    def scope(self) -> str:
        return "global" if all(v.scope == "global" for v in self.verdicts) else "window"

    @property
    def first_failure(self) -> InvarianceVerdict | None:
        return next((v for v in self.verdicts if not v.holds), None)

    def to_json(self) -> dict:
        bad = self.first_failure
        return {
            "passed": self.passed,
            "scope": self.scope,
            "checked_n": [v.n for v in self.verdicts],
            "first_failure": None if bad is None else bad.to_json(),
        }


@dataclass(frozen=True)
class CriterionReport:
    cond_a: tuple[ConditionA, ...]
    cond_b: tuple[ConditionB, ...]
    cond_c: ConditionC
    k_max: int
    nk: NkRule

    @property
    def a_passed(self) -> bool:
        return all(c.passed for c in self.cond_a)

    @property
    def b_passed(self) -> bool:
        return all(c.passed for c in self.cond_b)

    @property
    def c_passed(self) -> bool:
        return self.cond_c.passed

    @property
    def passed(self) -> bool:
        return self.a_passed and self.b_passed and self.c_passed

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "k_max": self.k_max,
            "nk": self.nk.to_json(),
            "cond_a": {"passed": self.a_passed, "probes": [c.to_json() for c in self.cond_a]},
            "cond_b": {"passed": self.b_passed, "probes": [c.to_json() for c in self.cond_b]},
            "cond_c": self.cond_c.to_json(),
        }


def default_probes(inst: CriterionInstance) -> list[tuple[SupportVector, SupportVector]]:
    """Scaled basis vectors and two-term sums from the dense window, nearest to 0 first."""
    idx = sorted(allowed_in_window(inst.sub, inst.dense_window), key=lambda i: (abs(i), i < 0))
    lat = inst.sub.lattice

    def e(i, c=1):
        return SupportVector.basis(lat, i, c)

    first = idx[0]
    probes = [(e(first), e(first))]
    if len(idx) >= 2:
        a, b = idx[0], idx[1]
        probes.append((e(b, 2), e(a, Fraction(1, 2))))
        probes.append((e(a) + e(b), e(b) - e(a, 2)))
    if len(idx) >= 4:
        lo, hi = min(idx), max(idx)
        probes.append((e(lo) + e(idx[2], ExactComplex(0, 1)), e(hi, 3) + e(idx[3])))
    return probes


def evaluate_criterion(
    inst: CriterionInstance,
    probes: list[tuple[SupportVector, SupportVector]] | None = None,
    k_max: int = 50,
    floor: Fraction = DECAY_FLOOR,
) -> CriterionReport:
    """Check conditions (a), (b), (c) for ``k = 1..k_max``.

    (a) for each probe ``y``: ``x_k = S^{n_k} y`` lies in ``M``, ``|x_k|^2``
    decreases strictly on a tail and ends below ``floor``, and
    ``T^{n_k} x_k = y`` exactly from the analytic threshold ``k*`` on.
    (b) for each probe ``x``: ``|T^{n_k} x|^2 |x_k|^2`` (with that probe's
    ``x_k``) decreases strictly on a tail and ends below ``floor``.
    (c) ``T^{n_k}(M)`` is inside ``M`` for every ``k``.
    """
    probes = probes if probes is not None else default_probes(inst)
    if not probes:
        raise CriterionError("at least one probe is required")
    op, back, nk = inst.op, inst.back_map, inst.nk
    a_out, b_out = [], []
    for x, y in probes:
        inst.check_probe(x, "probe x")
        inst.check_probe(y, "probe y")
        threshold = right_inverse_threshold(op, back, y, nk)
        if threshold is None:
            raise BackMapError("back map never inverts T^{n_k} on the probe y")
        xs, xnorms, tnorms = [], [], []
        checked = True
        for k in range(1, k_max + 1):
            n = nk(k)
            xk = apply_power(back, y, n)
            xs.append(xk)
            xnorms.append(norm_squared(xk))
            tnorms.append(norm_squared(apply_power(op, x, n)))
            if k >= threshold and apply_power(op, xk, n) != y:
                checked = False
        ratio, ratio_from = _geometric_tail(xnorms)
        a_out.append(
            ConditionA(
                y,
                tuple(xnorms),
                all(contains(inst.sub, v) for v in xs),
                _tail_decreasing_from(xnorms),
                xnorms[-1] < floor,
                threshold if threshold <= k_max else None,
                checked,
                ratio,
                ratio_from,
            )
        )
        prods = [t * v for t, v in zip(tnorms, xnorms)]
        pratio, pfrom = _geometric_tail(prods)
        b_out.append(
            ConditionB(x, tuple(prods), _tail_decreasing_from(prods), prods[-1] < floor, pratio, pfrom)
        )
    verdicts = tuple(invariance_check(op, inst.sub, nk(k), inst.dense_window) for k in range(1, k_max + 1))
    return CriterionReport(tuple(a_out), tuple(b_out), ConditionC(verdicts), k_max, nk)


# lambda selection


@dataclass(frozen=True)
class LambdaChoice:
    value: ExactComplex
    case: int
    exact: bool
    hypercyclic_path: bool = False

    @property
    def within_disk(self) -> bool:
        return self.value.abs2() <= 1

    def to_json(self) -> dict:
        return {
            "lambda": self.value.to_json(),
            "case": self.case,
            "exact": self.exact,
            "hypercyclic_path": self.hypercyclic_path,
        }


def select_lambda(
    norm_Tx_sq: Fraction,
    norm_xk_sq: Fraction,
    k: int,
    digits: int = 18,
    tx_vanishing: bool = False,
) -> LambdaChoice:
    """Case rule for ``lambda_k`` from squared norms of ``T^{n_k} x`` and ``x_k``.

    1. both nonzero: ``lambda = (|x_k| / |T^{n_k} x|)^(1/2)``
    2. ``x_k = 0``:   ``lambda = 2^-k / |T^{n_k} x|``
    3. ``T^{n_k} x = 0``: ``lambda = 2^k |x_k|``, on the hypercyclic path

    Roots are exact when the relevant power of the input ratio is a rational
    square; otherwise a rational lower approximation within ``10**-digits`` is
    returned with ``exact=False``. ``tx_vanishing`` marks inputs whose
    ``|T^{n_k} x|`` tends to 0, which also routes to the hypercyclic path.
    """
    tx, xk = Fraction(norm_Tx_sq), Fraction(norm_xk_sq)
    if tx < 0 or xk < 0:
        raise ValueError("squared norms are non-negative")
    if tx == 0 and xk == 0:
        raise ValueError("|T^{n_k} x| and |x_k| are both zero")
    if tx and xk:
        fourth = xk / tx
        lam, case = exact_root4(fourth), 1
        exact = lam is not None
        if not exact:
            lam = root4_lower(fourth, digits)
        return LambdaChoice(ExactComplex(lam), case, exact, tx_vanishing)
    if xk == 0:
        square = Fraction(1, 4**k) / tx
        case, path = 2, tx_vanishing
    else:
        square = Fraction(4**k) * xk
        case, path = 3, True
    lam = exact_sqrt(square)
    exact = lam is not None
    if not exact:
        lam = sqrt_lower(square, digits)
    return LambdaChoice(ExactComplex(lam), case, exact, path)


# witness construction


@dataclass(frozen=True)
class DiskcyclicWitness:
    z: SupportVector
    k: int
    n: int
    lam: DiskScalar
    lambda_exact: bool
    dist_z_squared: Fraction
    dist_image_squared: Fraction

    found = True

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "lambda": self.lam.to_json(),
            "lambda_exact": self.lambda_exact,
            "z": self.z.to_json(),
            "dist_z_squared": rational_json(self.dist_z_squared),
            "dist_image_squared": rational_json(self.dist_image_squared),
        }


@dataclass(frozen=True)
class WitnessNotFound:
    limits: tuple[tuple[int, Fraction, Fraction], ...]

    found = False

    def __bool__(self):
        return False

    def to_json(self) -> dict:
        return {
            "found": False,
            "limits": [
                {"k": k, "dist_z_squared": rational_json(a), "dist_image_squared": rational_json(b)}
                for k, a, b in self.limits
            ],
        }


def construct_diskcyclic_witness(
    inst: CriterionInstance, U1: Ball, U2: Ball, k_max: int, digits: int = 18
) -> DiskcyclicWitness | WitnessNotFound:
    """``z = x + x_k / lambda_k`` with ``x, y`` the centres of ``U1, U2``.

    Returns the smallest ``k`` for which ``z`` is in ``U1`` (and ``M``),
    ``lambda_k T^{n_k} z`` is in ``U2`` and ``|lambda_k| <= 1``. The image is
    recomputed by applying ``T^{n_k}`` to ``z`` itself.
    """
    x, y = U1.center, U2.center
    inst.check_probe(x, "U1 centre")
    inst.check_probe(y, "U2 centre")
    op, back = inst.op, inst.back_map
    r1, r2 = U1.radius**2, U2.radius**2
    limits = []
    for k in range(1, k_max + 1):
        n = inst.nk(k)
        tx = apply_power(op, x, n)
        xk = apply_power(back, y, n)
        t2, x2 = norm_squared(tx), norm_squared(xk)
        if t2 == 0 and x2 == 0:
            continue
        choice = select_lambda(t2, x2, k, digits)
        lam = choice.value
        if lam.is_zero():
            continue
        z = axpy(lam.reciprocal(), xk, x)
        image = apply_power(op, z, n).scale(lam)
        dz, dy = distance_squared(z, x), distance_squared(image, y)
        limits.append((k, dz, dy))
        if dz < r1 and dy < r2 and choice.within_disk and contains(inst.sub, z):
            return DiskcyclicWitness(z, k, n, DiskScalar(lam), choice.exact, dz, dy)
    return WitnessNotFound(tuple(limits))


# basis reduction


def _onset(shift, start: int) -> int:
    """Steps after which every further step multiplies by the tail weight."""
    if isinstance(shift, ForwardShift):
        return max(0, shift.rule.upper_from - start)
    return max(0, start - shift.rule.lower_to)


@dataclass(frozen=True)
class PairEvidence:
    pair: tuple[int, int]
    ratios: tuple[Fraction, ...]
    threshold_scan: int | None
    threshold_analytic: int

    @property
    def constant_ratio(self) -> Fraction | None:
        return self.ratios[-1] if self.threshold_scan is not None else None

    def to_json(self) -> dict:
        c = self.constant_ratio
        return {
            "pair": list(self.pair),
            "ratio": None if c is None else rational_json(c),
            "threshold_scan_k": self.threshold_scan,
            "threshold_analytic_k": self.threshold_analytic,
        }


@dataclass(frozen=True)
class BasisReductionReport:
    anchor: tuple[int, int]
    anchor_products: tuple[Fraction, ...]
    pairs: tuple[PairEvidence, ...]
    k_max: int

    @property
    def anchor_decays(self) -> bool:
        return _tail_decreasing_from(list(self.anchor_products)) is not None

    @property
    def holds(self) -> bool:
        return all(
            p.threshold_scan is not None and p.threshold_scan <= p.threshold_analytic < self.k_max
            for p in self.pairs
        )

    @property
    def threshold(self) -> int:
        return max(p.threshold_analytic for p in self.pairs)

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "anchor": list(self.anchor),
            "anchor_decays": self.anchor_decays,
            "threshold_k": self.threshold,
            "pairs": [p.to_json() for p in self.pairs],
        }


def basis_reduction_check(
    inst: CriterionInstance, pairs: list[tuple[int, int]], k_max: int
) -> BasisReductionReport:
    """Ratio of ``|T^{n_k} e_r|^2 |S^{n_k} e_p|^2`` to the first pair's, for each pair.

    For invertible bilateral shifts every ratio becomes an exact constant once
    all paths have left the irregular part of the weight rules; the analytic
    threshold is that point, and the scan confirms it.
    """
    op, back, sub = inst.op, inst.back_map, inst.sub
    for s in (op, back):
        if not (is_shift(s) and s.lattice.is_bilateral and is_invertible(s)):
            raise CriterionError("basis reduction needs invertible bilateral shifts")
    if not pairs:
        raise CriterionError("no index pairs given")
    for r, p in pairs:
        for i in (r, p):
            if not sub.allows(i):
                raise CriterionError(f"index {i} is not in the subspace")
    lat = sub.lattice

    def products(r, p):
        out = []
        for k in range(1, k_max + 1):
            n = inst.nk(k)
            fr = norm_squared(apply_power(op, SupportVector.basis(lat, r), n))
            bp = norm_squared(apply_power(back, SupportVector.basis(lat, p), n))
            out.append(fr * bp)
        return out

    anchor = pairs[0]
    base = products(*anchor)
    a_onset = max(_onset(op, anchor[0]), _onset(back, anchor[1]))
    evidence = []
    for r, p in pairs:
        ratios = [v / b for v, b in zip(products(r, p), base)]
        k0 = len(ratios)
        while k0 > 1 and ratios[k0 - 2] == ratios[-1]:
            k0 -= 1
        scan = k0 if k0 < len(ratios) else None
        onset = max(a_onset, _onset(op, r), _onset(back, p))
        evidence.append(PairEvidence((r, p), tuple(ratios), scan, inst.nk.first_k_at_least(onset)))
    return BasisReductionReport(anchor, tuple(base), tuple(evidence), k_max)


# transitivity


@dataclass(frozen=True)
class TransitivityHit:
    """``T^n w`` lies in ``alpha U`` for ``w`` in ``V``; ``delta = 1/alpha`` is a disk scalar."""

    n: int
    alpha: ExactComplex
    delta: DiskScalar
    w: SupportVector
    point: SupportVector
    invariance: InvarianceVerdict

    found = True

    def to_json(self) -> dict:
        return {
            "found": True,
            "n": self.n,
            "alpha": self.alpha.to_json(),
            "delta": self.delta.to_json(),
            "w": self.w.to_json(),
            "invariance": self.invariance.to_json(),
        }


@dataclass(frozen=True)
class TransitivityMiss:
    best_separation_squared: Fraction | None
    best_n: int | None

    found = False

    def __bool__(self):
        return False

    def to_json(self) -> dict:
        sep = self.best_separation_squared
        return {
            "found": False,
            "best_separation_squared": None if sep is None else rational_json(sep),
            "best_n": self.best_n,
        }


def _small_scalar(p2: Fraction, room: Fraction) -> Fraction:
    # positive s <= 1 with s^2 * p2 < room
    s = Fraction(1)
    bound = sqrt_upper(p2, 6)
    if bound * bound * s * s >= room:
        s = sqrt_lower(room, 6) / (2 * bound)
    return s


def _candidates(op, inverse, sub, U: Ball, V: Ball, n: int, unimodular: bool, window):
    u, v = U.center, V.center
    rU2 = U.radius**2
    starts = [v]
    if v.is_zero():
        idx = [i for i in u.support] or allowed_in_window(sub, window)[:1]
        if idx:
            starts.append(SupportVector.basis(sub.lattice, idx[0], V.radius / 2))
    for w in starts:
        p = apply_power(op, w, n)
        p2 = norm_squared(p)
        if p2 == 0 or not contains(sub, p):
            continue
        c = _inner(u, p) * (1 / p2)
        if unimodular:
            r = None if c.is_zero() else exact_sqrt(c.abs2())
            delta = ONE if r is None else c * (1 / r)
        elif c.is_zero():
            delta = ExactComplex(_small_scalar(p2, rU2 - norm_squared(u)) if rU2 > norm_squared(u) else 1)
        else:
            delta = clamp_to_disk(c)[0]
        yield w, delta
    if inverse is None or u.is_zero():
        return
    y = apply_power(inverse, u, n)
    q2 = norm_squared(apply_power(op, v, n))
    if unimodular or q2 == 0:
        delta = ONE
    else:
        ratio = norm_squared(y) / q2
        delta = ExactComplex(min(Fraction(1), root4_lower(ratio, 12)))
        if delta.is_zero():
            return
    yield axpy(delta.reciprocal(), y, v), delta


def transitivity_probe(
    op: OperatorSpec,
    sub: SubspaceSpec,
    U: Ball,
    V: Ball,
    max_n: int,
    window: tuple[int, int] = (-9, 9),
    unimodular: bool = False,
) -> TransitivityHit | TransitivityMiss:
    """Search ``n <= max_n`` for ``w`` in ``V`` with ``T^n w`` in ``alpha U``, ``|alpha| >= 1``.

    Equivalently ``delta T^n w`` is in ``U`` for the disk scalar
    ``delta = 1/alpha``. Candidates are the centre of ``V`` with the optimal
    disk scalar, and, for invertible ``T``, ``w = v + T^{-n} u / delta`` with
    ``delta`` balancing the two error terms. Every candidate is rechecked by
    direct application. ``unimodular`` restricts to ``|alpha| = 1``.
    """
    U.check_in(sub)
    V.check_in(sub)
    inverse = invert(op) if is_invertible(op) else None
    rU2 = U.radius**2
    best, best_n = None, None
    for n in range(max_n + 1):
        for w, delta in _candidates(op, inverse, sub, U, V, n, unimodular, window):
            if delta.is_zero() or delta.abs2() > 1 or (unimodular and delta.abs2() != 1):
                continue
            if not (V.holds(w) and contains(sub, w)):
                continue
            point = apply_power(op, w, n).scale(delta)
            sep = distance_squared(point, U.center)
            if sep < rU2 and contains(sub, point):
                inv = invariance_check(op, sub, n, window)
                return TransitivityHit(n, delta.reciprocal(), DiskScalar(delta), w, point, inv)
            if best is None or sep < best:
                best, best_n = sep, n
    return TransitivityMiss(best, best_n)


# finite-resolution diskcyclic vectors


def criterion_seed_vector(
    inst: CriterionInstance,
    targets: list[SupportVector],
    tol_squared: Fraction,
    max_spacing: int = 4096,
) -> tuple[SupportVector, list[int]]:
    """A vector whose disk orbit meets every target within ``tol``.

    Builds ``x = sum_j sigma^{m_j} S^{m_j} t_j`` over the nonzero targets with
    ``m_j`` taken from the ``n_k`` sequence at growing spacing, where ``sigma``
    sits strictly between the tail growth of ``T`` and the inverse tail decay
    of ``S``. Then ``sigma^{-m_j} T^{m_j} x`` is ``t_j`` plus cross terms that
    shrink geometrically in the spacing; the spacing grows by half until every
    target is met at ``n = m_j``. Returns ``x`` and the powers ``m_j``.
    """
    op, back = inst.op, inst.back_map
    if not (isinstance(op, ForwardShift) and isinstance(back, BackwardShift)):
        raise UnsupportedOperation("seed construction is implemented for forward shifts with a backward back map")
    grow2 = op.rule.upper_tail.abs2()
    decay2 = back.rule.lower_tail.abs2()
    if grow2 * decay2 >= 1:
        raise CriterionError("tail growth times tail decay must be below 1")
    sigma = Fraction(sqrt_lower(sqrt_lower(grow2 / decay2, 9), 9)).limit_denominator(64)
    if not (grow2 < sigma**2 < 1 / decay2):
        sigma = (sqrt_upper(grow2, 9) + sqrt_lower(1 / decay2, 9)) / 2
    live = [t for t in targets if not t.is_zero()]
    for t in live:
        inst.check_probe(t, "target")
    lat = inst.sub.lattice
    spacing = 4
    while spacing <= max_spacing:
        ks = [spacing * (j + 1) for j in range(len(live))]
        ms = [inst.nk(k) for k in ks]
        x = SupportVector.zero(lat)
        for m, t in zip(ms, live):
            x = axpy(ExactComplex(sigma**m), apply_power(back, t, m), x)
        if all(_meets(op, x, t, m, tol_squared) for m, t in zip(ms, live)):
            return x, ms
        spacing += max(1, spacing // 2)
    raise CriterionError("no spacing up to max_spacing separates the targets")


def _meets(op, x, t, m, tol_squared) -> bool:
    p = apply_power(op, x, m)
    p2 = norm_squared(p)
    if p2 == 0:
        return False
    ip = _inner(t, p)
    alpha, _ = clamp_to_disk(ip * (1 / p2))
    return distance_squared(p.scale(alpha), t) <= tol_squared
