"""Built-in instances, instance files and the finite-dimension generator."""
from __future__ import annotations

import dataclasses
import functools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import jsonschema

from .criterion import CriterionInstance, NkRule, criterion_seed_vector
from .lattice import Z, SupportVector, finite
from .operators import (
    DirectSum,
    ForwardShift,
    IdentityOp,
    OperatorSpec,
    ScalarOp,
    SignSplit,
    adjoint,
    invert,
    operator_from_json,
    operator_to_json,
)
from .scalar import DiskScalar, ExactComplex, as_fraction, format_rational
from .subspaces import (
    Axis,
    IndexMask,
    SubspaceSpec,
    sample_targets,
    subspace_from_json,
    subspace_to_json,
)

__all__ = [
    "Params",
    "Instance",
    "InstanceError",
    "CHECKS",
    "builtin_names",
    "builtin_instance",
    "generate_finite_dim_instance",
    "coverage_key",
    "serialize",
    "instance_from_json",
    "load_instance",
    "dump_instance",
]

INSTANCE_FORMAT = "dclab-instance/1"
CHECKS = ("coverage", "cone", "criterion", "transitivity", "growth", "bounded")
TRIVIAL_FLAG = "subspace trivial: diskcyclic on the whole space"


class InstanceError(ValueError):
    pass


def _window_json(w):
    return None if w is None else [w[0], w[1]]


@dataclass(frozen=True)
class Params:
    tol: Fraction = Fraction(1, 10**9)
    max_n: int = 80
    k_max: int = 50
    window: tuple[int, int] = (-9, 9)
    seed: int = 42
    targets: int = 200
    radius: Fraction = Fraction(10)
    radii: tuple[Fraction, ...] = ()
    ball_pairs: int = 50
    growth_n: int = 20
    target_window: tuple[int, int] | None = None

    def __post_init__(self):
        fix = object.__setattr__
        fix(self, "tol", as_fraction(self.tol))
        fix(self, "radius", as_fraction(self.radius))
        fix(self, "radii", tuple(as_fraction(r) for r in self.radii))
        fix(self, "window", tuple(self.window))
        if self.target_window is not None:
            fix(self, "target_window", tuple(self.target_window))
        if self.tol <= 0 or self.radius <= 0 or any(r <= 0 for r in self.radii):
            raise InstanceError("tol and radii must be positive")
        for name in ("max_n", "k_max", "targets", "ball_pairs", "growth_n"):
            if getattr(self, name) < 1:
                raise InstanceError(f"params.{name} must be positive")
        if self.window[0] > self.window[1]:
            raise InstanceError("params.window is empty")

    @property
    def tol_squared(self) -> Fraction:
        return self.tol * self.tol

    @property
    def coverage_radii(self) -> tuple[Fraction, ...]:
        return self.radii or (self.radius,)

    @property
    def sampling_window(self) -> tuple[int, int]:
        return self.target_window or self.window

    def replace(self, **changes) -> Params:
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_json(self) -> dict:
        return {
            "tol": format_rational(self.tol),
            "max_n": self.max_n,
            "k_max": self.k_max,
            "window": _window_json(self.window),
            "seed": self.seed,
            "targets": self.targets,
            "radius": format_rational(self.radius),
            "radii": [format_rational(r) for r in self.radii],
            "ball_pairs": self.ball_pairs,
            "growth_n": self.growth_n,
            "target_window": _window_json(self.target_window),
        }

    @classmethod
    def from_json(cls, obj: dict) -> Params:
        kw = dict(obj)
        if kw.get("radii") is not None:
            kw["radii"] = tuple(kw["radii"])
        return cls(**{k: v for k, v in kw.items() if v is not None})


def coverage_key(radius: Fraction) -> str:
    return f"coverage@{format_rational(radius)}"


@dataclass(frozen=True)
class Instance:
    name: str
    op: OperatorSpec
    sub: SubspaceSpec
    seed_vector: SupportVector
    params: Params = field(default_factory=Params)
    criterion: CriterionInstance | None = None
    expected: dict = field(default_factory=dict)
    description: str = ""
    flags: tuple[str, ...] = ()
    witness_fixtures: tuple[tuple[int, DiskScalar], ...] = ()

    def __post_init__(self):
        if self.seed_vector.is_zero():
            raise InstanceError("seed_vector must be nonzero")
        if self.seed_vector.lattice != self.op.lattice or self.sub.lattice != self.op.lattice:
            raise InstanceError("operator, subspace and seed_vector must share a lattice")
        if self.criterion is not None and (self.criterion.op != self.op or self.criterion.sub != self.sub):
            raise InstanceError("criterion must use the instance operator and subspace")
        for key, value in self.expected.items():
            if not isinstance(value, bool):
                raise InstanceError(f"expected[{key!r}] must be a boolean")
            if key.split("@")[0] not in CHECKS:
                raise InstanceError(f"expected[{key!r}] names no known check")

    def with_params(self, params: Params) -> Instance:
        return dataclasses.replace(self, params=params)


# built-in catalog


def _axis_seed(dim: int) -> SupportVector:
    return SupportVector.basis(finite(dim), 0)


@functools.cache
def _flagship() -> Instance:
    F = ForwardShift(Z, SignSplit(3, 4), declared_invertible=True)
    M = IndexMask(Z, 2, frozenset({1}))
    crit = CriterionInstance(F, M, NkRule(2, 0), invert(F), (-9, 9))
    params = Params(radius=Fraction(1), targets=8, target_window=(-3, 3), ball_pairs=4)
    targets = sample_targets(M, params.radius, params.targets, params.sampling_window, params.seed)
    x, powers = criterion_seed_vector(crit, targets, params.tol_squared)
    return Instance(
        "flagship_shift",
        F,
        M,
        x,
        params.replace(max_n=powers[-1]),
        crit,
        {coverage_key(params.radius): True, "criterion": True, "growth": True},
        "bilateral forward shift with weights 3 (n >= 0) and 4 (n < 0) on the odd-index subspace",
    )


def _identity() -> Instance:
    L = finite(3)
    I = IdentityOp(L)
    A = Axis(3, 0)
    return Instance(
        "identity_supercyclic",
        I,
        A,
        _axis_seed(3),
        Params(),
        CriterionInstance(I, A, NkRule(1, 0), I, (0, 2)),
        {"cone": True, coverage_key(Fraction(10)): False, "criterion": False, "bounded": True, "growth": False},
        "identity on C^3, first axis: supercyclic on the axis but not diskcyclic",
    )


def _scalar() -> Instance:
    return Instance(
        "scalar_diskcyclic",
        ScalarOp(2, 2),
        Axis(2, 0),
        _axis_seed(2),
        Params(),
        None,
        {coverage_key(Fraction(10)): True, "transitivity": True, "growth": True, "bounded": False},
        "2I on C^2, first axis",
    )


def _scalar_adjoint() -> Instance:
    return Instance(
        "scalar_adjoint",
        adjoint(ScalarOp(2, ExactComplex(1, 1))),
        Axis(2, 0),
        _axis_seed(2),
        Params(),
        None,
        {coverage_key(Fraction(10)): True, "transitivity": True, "growth": True},
        "adjoint of (1+i)I on C^2, that is (1-i)I, first axis",
    )


def _inverse_halving() -> Instance:
    return Instance(
        "inverse_halving",
        ScalarOp(2, Fraction(1, 2)),
        Axis(2, 0),
        _axis_seed(2),
        Params(radii=(Fraction(9, 10), Fraction(2))),
        None,
        {
            coverage_key(Fraction(9, 10)): True,
            coverage_key(Fraction(2)): False,
            "bounded": True,
            "growth": False,
        },
        "(1/2)I on C^2, first axis: orbit bounded by 1, dense only in the unit ball of the axis",
    )


def _direct_sum() -> Instance:
    S = DirectSum(((ScalarOp(1, 2), 0), (IdentityOp(finite(2)), 1)))
    return Instance(
        "direct_sum_s",
        S,
        Axis(3, 0),
        _axis_seed(3),
        Params(),
        None,
        {coverage_key(Fraction(10)): True, "transitivity": True},
        "(2) + I_2 on C^3 with the first axis; 2 on C stands in for a diskcyclic summand",
    )


_BUILTINS = {
    "flagship_shift": _flagship,
    "identity_supercyclic": _identity,
    "scalar_diskcyclic": _scalar,
    "scalar_adjoint": _scalar_adjoint,
    "inverse_halving": _inverse_halving,
    "direct_sum_s": _direct_sum,
}


def builtin_names() -> list[str]:
    return list(_BUILTINS)


def builtin_instance(name: str) -> Instance:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise InstanceError(f"unknown instance {name!r}; known: {', '.join(_BUILTINS)}") from None


def generate_finite_dim_instance(n: int) -> Instance:
    """``2I`` on ``C^n`` with the first axis; for ``n = 1`` the axis is the whole space."""
    if n < 1:
        raise InstanceError("dimension must be positive")
    trivial = n == 1
    return Instance(
        f"finite_dim_{n}",
        ScalarOp(n, 2),
        Axis(n, 0, allow_trivial=trivial),
        _axis_seed(n),
        Params(),
        None,
        {coverage_key(Fraction(10)): True},
        f"2I on C^{n}, first axis",
        (TRIVIAL_FLAG,) if trivial else (),
    )


# serialization

_RATIONAL = {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}
_SCALAR = {
    "oneOf": [
        _RATIONAL,
        {
            "type": "object",
            "properties": {"re": _RATIONAL, "im": _RATIONAL},
            "required": ["re", "im"],
            "additionalProperties": False,
        },
    ]
}
_LATTICE = {
    "oneOf": [
        {"enum": ["Z", "N"]},
        {
            "type": "object",
            "properties": {"dim": {"type": "integer", "minimum": 1}},
            "required": ["dim"],
            "additionalProperties": False,
        },
    ]
}
_VECTOR = {
    "type": "object",
    "properties": {
        "lattice": _LATTICE,
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"index": {"type": "integer"}, "re": _RATIONAL, "im": _RATIONAL},
                "required": ["index"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["lattice", "entries"],
    "additionalProperties": False,
}
_WINDOW = {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}
_KIND_OBJECT = {"type": "object", "properties": {"kind": {"type": "string"}}, "required": ["kind"]}

INSTANCE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "format": {"const": INSTANCE_FORMAT},
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "operator": _KIND_OBJECT,
        "subspace": _KIND_OBJECT,
        "seed_vector": _VECTOR,
        "criterion": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "properties": {
                        "back_map": _KIND_OBJECT,
                        "nk": {
                            "type": "object",
                            "properties": {"a": {"type": "integer"}, "b": {"type": "integer"}},
                            "required": ["a", "b"],
                            "additionalProperties": False,
                        },
                        "dense_window": _WINDOW,
                    },
                    "required": ["back_map", "nk", "dense_window"],
                    "additionalProperties": False,
                },
            ]
        },
        "expected": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "params": {
            "type": "object",
            "properties": {
                "tol": _RATIONAL,
                "max_n": {"type": "integer"},
                "k_max": {"type": "integer"},
                "window": _WINDOW,
                "seed": {"type": "integer"},
                "targets": {"type": "integer"},
                "radius": _RATIONAL,
                "radii": {"type": "array", "items": _RATIONAL},
                "ball_pairs": {"type": "integer"},
                "growth_n": {"type": "integer"},
                "target_window": {"oneOf": [{"type": "null"}, _WINDOW]},
            },
            "additionalProperties": False,
        },
        "flags": {"type": "array", "items": {"type": "string"}},
        "witness_fixtures": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"n": {"type": "integer", "minimum": 0}, "alpha": _SCALAR},
                "required": ["n", "alpha"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["format", "name", "operator", "subspace", "seed_vector"],
    "additionalProperties": False,
}


def serialize(inst: Instance) -> dict:
    crit = inst.criterion
    return {
        "format": INSTANCE_FORMAT,
        "name": inst.name,
        "description": inst.description,
        "operator": operator_to_json(inst.op),
        "subspace": subspace_to_json(inst.sub),
        "seed_vector": inst.seed_vector.to_json(),
        "criterion": None
        if crit is None
        else {
            "back_map": operator_to_json(crit.back_map),
            "nk": crit.nk.to_json(),
            "dense_window": list(crit.dense_window),
        },
        "expected": dict(inst.expected),
        "params": inst.params.to_json(),
        "flags": list(inst.flags),
        "witness_fixtures": [{"n": n, "alpha": a.to_json()} for n, a in inst.witness_fixtures],
    }


def _field(name: str, build):
    try:
        return build()
    except InstanceError as exc:
        raise InstanceError(f"{name}: {exc}") from None
    except (ValueError, TypeError, KeyError) as exc:
        raise InstanceError(f"{name}: {exc}") from exc


def instance_from_json(obj) -> Instance:
    """Validate against the schema, then rebuild every object through its constructor."""
    try:
        jsonschema.validate(obj, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InstanceError(f"schema error at {exc.json_path}: {exc.message}") from None
    op = _field("operator", lambda: operator_from_json(obj["operator"]))
    sub = _field("subspace", lambda: subspace_from_json(obj["subspace"]))
    x = _field("seed_vector", lambda: SupportVector.from_json(obj["seed_vector"]))
    crit = None
    if obj.get("criterion"):
        c = obj["criterion"]
        crit = _field(
            "criterion",
            lambda: CriterionInstance(
                op, sub, NkRule(c["nk"]["a"], c["nk"]["b"]), operator_from_json(c["back_map"]), tuple(c["dense_window"])
            ),
        )
    params = _field("params", lambda: Params.from_json(obj.get("params", {})))
    fixtures = tuple(
        (f["n"], _field(f"witness_fixtures[{i}].alpha", lambda f=f: DiskScalar(ExactComplex.from_json(f["alpha"]))))
        for i, f in enumerate(obj.get("witness_fixtures", []))
    )
    return _field(
        "instance",
        lambda: Instance(
            obj["name"],
            op,
            sub,
            x,
            params,
            crit,
            dict(obj.get("expected", {})),
            obj.get("description", ""),
            tuple(obj.get("flags", [])),
            fixtures,
        ),
    )


def load_instance(path) -> Instance:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return instance_from_json(obj)


def dump_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(serialize(inst), indent=2) + "\n")

