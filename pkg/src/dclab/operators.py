"""Symbolic operators: weighted shifts, scalar and identity operators, direct sums.

Shift conventions::

    ForwardShift:  e_j  ->  w_j * e_{j+1}
    BackwardShift: e_j  ->  z_j * e_{j-1}      (e_0 -> 0 on l2(N))

Powers of shifts are evaluated in closed form: the index is translated by n
and the coefficient is one weight product, computed from the rule's tail
weights and a bounded middle segment, so ``F^100`` costs the same as ``F^2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .lattice import (
    IndexLattice,
    LatticeKind,
    LatticeMismatch,
    SupportVector,
    finite,
)
from .scalar import ONE, ExactComplex, format_rational

__all__ = [
    "SignSplit",
    "Table",
    "WeightRule",
    "ForwardShift",
    "BackwardShift",
    "ScalarOp",
    "IdentityOp",
    "DirectSum",
    "OperatorSpec",
    "NotInvertible",
    "UnsupportedOperation",
    "apply",
    "apply_power",
    "weight_product",
    "invert",
    "adjoint",
    "is_invertible",
    "is_shift",
    "is_diagonal",
    "operator_to_json",
    "operator_from_json",
    "rule_to_json",
    "rule_from_json",
]


class NotInvertible(ValueError):
    pass


class UnsupportedOperation(TypeError):
    pass


# weight rules


@dataclass(frozen=True)
class SignSplit:
    """``w_j = nonneg`` for ``j >= split`` and ``neg`` below it."""

    nonneg: ExactComplex
    neg: ExactComplex
    split: int = 0

    def __post_init__(self):
        object.__setattr__(self, "nonneg", ExactComplex.coerce(self.nonneg))
        object.__setattr__(self, "neg", ExactComplex.coerce(self.neg))

    def weight(self, j: int) -> ExactComplex:
        return self.nonneg if j >= self.split else self.neg

    @property
    def upper_tail(self) -> ExactComplex:
        return self.nonneg

    @property
    def lower_tail(self) -> ExactComplex:
        return self.neg

    @property
    def upper_from(self) -> int:
        return self.split

    @property
    def lower_to(self) -> int:
        return self.split - 1

    def distinct_weights(self) -> tuple[ExactComplex, ...]:
        return (self.nonneg, self.neg)

    def reciprocal_shifted(self, offset: int) -> SignSplit:
        """Rule ``j -> 1 / w_{j - offset}``."""
        return SignSplit(self.nonneg.reciprocal(), self.neg.reciprocal(), self.split + offset)


@dataclass(frozen=True)
class Table:
    """Explicit weights on finitely many indices, ``default`` everywhere else."""

    entries: tuple[tuple[int, ExactComplex], ...]
    default: ExactComplex

    def __post_init__(self):
        items = self.entries.items() if isinstance(self.entries, dict) else self.entries
        clean = tuple(sorted((int(i), ExactComplex.coerce(z)) for i, z in items))
        if len({i for i, _ in clean}) != len(clean):
            raise ValueError("duplicate index in weight table")
        object.__setattr__(self, "entries", clean)
        object.__setattr__(self, "default", ExactComplex.coerce(self.default))
        object.__setattr__(self, "_lookup", dict(clean))

    def weight(self, j: int) -> ExactComplex:
        return self._lookup.get(j, self.default)

    @property
    def upper_tail(self) -> ExactComplex:
        return self.default

    @property
    def lower_tail(self) -> ExactComplex:
        return self.default

    @property
    def upper_from(self) -> int:
        return self.entries[-1][0] + 1 if self.entries else 0

    @property
    def lower_to(self) -> int:
        return self.entries[0][0] - 1 if self.entries else -1

    def distinct_weights(self) -> tuple[ExactComplex, ...]:
        return tuple(dict.fromkeys([z for _, z in self.entries] + [self.default]))

    def reciprocal_shifted(self, offset: int) -> Table:
        return Table(
            tuple((i + offset, z.reciprocal()) for i, z in self.entries),
            self.default.reciprocal(),
        )


WeightRule = Union[SignSplit, Table]


def _path_product(rule: WeightRule, lo: int, hi: int) -> ExactComplex:
    """Product of ``rule.weight(j)`` for ``lo <= j <= hi`` (empty -> 1)."""
    if hi < lo:
        return ONE
    acc = ONE
    a, b = rule.lower_to, rule.upper_from
    n_low = max(0, min(hi, a) - lo + 1)
    if n_low:
        acc = acc * rule.lower_tail**n_low
    n_high = max(0, hi - max(lo, b) + 1)
    if n_high:
        acc = acc * rule.upper_tail**n_high
    for j in range(max(lo, a + 1), min(hi, b - 1) + 1):
        acc = acc * rule.weight(j)
    return acc


# operator specs


def _check_shift_lattice(lattice: IndexLattice) -> None:
    if lattice.kind is LatticeKind.FINITE:
        raise ValueError("weighted shifts live on l2(Z) or l2(N), not on C^n")


@dataclass(frozen=True)
class ForwardShift:
    lattice: IndexLattice
    rule: WeightRule
    declared_invertible: bool = False

    def __post_init__(self):
        _check_shift_lattice(self.lattice)
        if self.declared_invertible:
            _verify_invertible(self)


@dataclass(frozen=True)
class BackwardShift:
    lattice: IndexLattice
    rule: WeightRule
    declared_invertible: bool = False

    def __post_init__(self):
        _check_shift_lattice(self.lattice)
        if self.declared_invertible:
            _verify_invertible(self)


@dataclass(frozen=True)
class ScalarOp:
    """``k * I`` on C^dim."""

    dim: int
    k: ExactComplex

    def __post_init__(self):
        object.__setattr__(self, "k", ExactComplex.coerce(self.k))
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    @property
    def lattice(self) -> IndexLattice:
        return finite(self.dim)


@dataclass(frozen=True)
class IdentityOp:
    lattice: IndexLattice


@dataclass(frozen=True)
class DirectSum:
    """Block-diagonal operator; each part acts on ``[offset, offset + dim)``."""

    parts: tuple[tuple["OperatorSpec", int], ...]
    lattice: IndexLattice = field(init=False)

    def __post_init__(self):
        parts = tuple((op, int(off)) for op, off in self.parts)
        if not parts:
            raise ValueError("direct sum needs at least one part")
        spans = []
        for op, off in parts:
            lat = op.lattice
            if not lat.is_finite:
                raise ValueError("direct sums are supported on finite-dimensional blocks only")
            spans.append((off, off + lat.dim))
        spans.sort()
        if spans[0][0] != 0:
            raise ValueError("direct sum blocks must start at index 0")
        for (a0, a1), (b0, b1) in zip(spans, spans[1:]):
            if b0 != a1:
                raise ValueError("direct sum blocks must be disjoint and contiguous")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "lattice", finite(spans[-1][1]))


OperatorSpec = Union[ForwardShift, BackwardShift, ScalarOp, IdentityOp, DirectSum]


def is_shift(op) -> bool:
    return isinstance(op, (ForwardShift, BackwardShift))


def is_diagonal(op) -> bool:
    if isinstance(op, (ScalarOp, IdentityOp)):
        return True
    if isinstance(op, DirectSum):
        return all(is_diagonal(p) for p, _ in op.parts)
    return False


def _verify_invertible(op) -> None:
    if is_shift(op):
        if not op.lattice.is_bilateral:
            raise NotInvertible(f"{type(op).__name__} on {op.lattice} is not invertible")
        if any(w.is_zero() for w in op.rule.distinct_weights()):
            raise NotInvertible("shift has a zero weight")
    elif isinstance(op, ScalarOp):
        if op.k.is_zero():
            raise NotInvertible("zero scalar operator")
    elif isinstance(op, DirectSum):
        for part, _ in op.parts:
            _verify_invertible(part)


def is_invertible(op) -> bool:
    try:
        _verify_invertible(op)
    except NotInvertible:
        return False
    return True


# action


def _require_lattice(op, v: SupportVector) -> None:
    if v.lattice != op.lattice:
        raise LatticeMismatch(f"operator on {op.lattice}, vector on {v.lattice}")


def apply(op: OperatorSpec, v: SupportVector) -> SupportVector:
    return apply_power(op, v, 1)


def apply_power(op: OperatorSpec, v: SupportVector, n: int) -> SupportVector:
    """Exact ``op^n v``."""
    if n < 0:
        raise ValueError("power must be non-negative")
    _require_lattice(op, v)
    if n == 0 or isinstance(op, IdentityOp):
        return v
    if isinstance(op, ScalarOp):
        return v.scale(op.k**n)
    if isinstance(op, DirectSum):
        out = {}
        for part, off in op.parts:
            dim = part.lattice.dim
            block = {i - off: z for i, z in v.items() if off <= i < off + dim}
            if block:
                img = apply_power(part, SupportVector(part.lattice, block), n)
                out.update((i + off, z) for i, z in img.items())
        return SupportVector._trusted(op.lattice, out)
    out = {}
    if isinstance(op, ForwardShift):
        for i, z in v.items():
            c = _path_product(op.rule, i, i + n - 1)
            if not c.is_zero():
                out[i + n] = z * c
    else:
        unilateral = not op.lattice.is_bilateral
        for i, z in v.items():
            if unilateral and i - n < 0:
                continue
            c = _path_product(op.rule, i - n + 1, i)
            if not c.is_zero():
                out[i - n] = z * c
    return SupportVector._trusted(op.lattice, out)


def weight_product(op: OperatorSpec, start: int, n: int) -> ExactComplex:
    """Product of the ``n`` weights met moving ``n`` steps from ``start``."""
    if not is_shift(op):
        raise UnsupportedOperation("weight products are defined for shifts only")
    if n < 0:
        raise ValueError("step count must be non-negative")
    if not op.lattice.admits(start):
        raise ValueError(f"start index {start} not in {op.lattice}")
    if isinstance(op, ForwardShift):
        return _path_product(op.rule, start, start + n - 1)
    if not op.lattice.is_bilateral and start - n < 0:
        raise ValueError(f"backward path of {n} steps from {start} leaves l2(N)")
    return _path_product(op.rule, start - n + 1, start)


def invert(op: OperatorSpec) -> OperatorSpec:
    _verify_invertible(op)
    if isinstance(op, ForwardShift):
        # F^{-1} e_{j+1} = e_j / w_j, so z_m = 1 / w_{m-1}
        return BackwardShift(op.lattice, op.rule.reciprocal_shifted(1), declared_invertible=True)
    if isinstance(op, BackwardShift):
        # B^{-1} e_{j-1} = e_j / z_j, so w_m = 1 / z_{m+1}
        return ForwardShift(op.lattice, op.rule.reciprocal_shifted(-1), declared_invertible=True)
    if isinstance(op, ScalarOp):
        return ScalarOp(op.dim, op.k.reciprocal())
    if isinstance(op, IdentityOp):
        return op
    return DirectSum(tuple((invert(p), off) for p, off in op.parts))


def adjoint(op: OperatorSpec) -> ScalarOp:
    """Adjoint of a scalar operator. Other operators are deliberately unsupported."""
    if not isinstance(op, ScalarOp):
        raise UnsupportedOperation("adjoint is implemented for scalar operators only")
    return ScalarOp(op.dim, op.k.conjugate())


# serialization


def _scalar_json(z: ExactComplex):
    return format_rational(z.re) if z.is_real() else z.to_json()


def rule_to_json(rule: WeightRule) -> dict:
    if isinstance(rule, SignSplit):
        out = {"nonneg": _scalar_json(rule.nonneg), "neg": _scalar_json(rule.neg)}
        if rule.split:
            out["split"] = rule.split
        return out
    return {
        "table": [{"index": i, "w": _scalar_json(z)} for i, z in rule.entries],
        "default": _scalar_json(rule.default),
    }


def rule_from_json(obj: dict) -> WeightRule:
    if "table" in obj:
        return Table(
            tuple((e["index"], ExactComplex.from_json(e["w"])) for e in obj["table"]),
            ExactComplex.from_json(obj["default"]),
        )
    return SignSplit(
        ExactComplex.from_json(obj["nonneg"]),
        ExactComplex.from_json(obj["neg"]),
        int(obj.get("split", 0)),
    )


_SHIFT_KINDS = {"forward_shift": ForwardShift, "backward_shift": BackwardShift}


def operator_to_json(op: OperatorSpec) -> dict:
    if is_shift(op):
        kind = "forward_shift" if isinstance(op, ForwardShift) else "backward_shift"
        out = {"kind": kind, "lattice": op.lattice.to_json(), "weights": rule_to_json(op.rule)}
        if op.declared_invertible:
            out["invertible"] = True
        return out
    if isinstance(op, ScalarOp):
        return {"kind": "scalar", "dim": op.dim, "k": _scalar_json(op.k)}
    if isinstance(op, IdentityOp):
        return {"kind": "identity", "lattice": op.lattice.to_json()}
    return {
        "kind": "direct_sum",
        "parts": [{"op": operator_to_json(p), "offset": off} for p, off in op.parts],
    }


def operator_from_json(obj: dict) -> OperatorSpec:
    kind = obj["kind"]
    if kind in _SHIFT_KINDS:
        return _SHIFT_KINDS[kind](
            IndexLattice.from_json(obj["lattice"]),
            rule_from_json(obj["weights"]),
            declared_invertible=bool(obj.get("invertible", False)),
        )
    if kind == "scalar":
        return ScalarOp(int(obj["dim"]), ExactComplex.from_json(obj["k"]))
    if kind == "identity":
        return IdentityOp(IndexLattice.from_json(obj["lattice"]))
    if kind == "direct_sum":
        return DirectSum(tuple((operator_from_json(p["op"]), p["offset"]) for p in obj["parts"]))
    raise ValueError(f"unknown operator kind {kind!r}")


def describe(op: OperatorSpec) -> str:
    if isinstance(op, ForwardShift):
        return f"forward shift on {op.lattice}"
    if isinstance(op, BackwardShift):
        return f"backward shift on {op.lattice}"
    if isinstance(op, ScalarOp):
        return f"{op.k}*I on C^{op.dim}"
    if isinstance(op, IdentityOp):
        return f"I on {op.lattice}"
    return " (+) ".join(describe(p) for p, _ in op.parts)
