"""Typed parameter-space model: parameter specs, validation, and membership.

A search space is an ordered mapping from parameter names to specs. Specs are
immutable; an invalid spec is representable (so it can be reported by
``validate_space``) but the engine refuses to run on one.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP
from typing import Any, Callable, Iterator, Optional, Sequence, Union

import numpy as np

from .errors import FormatError, SpaceError

__all__ = [
    "IntSpec",
    "FloatSpec",
    "ChoiceSpec",
    "CustomSpec",
    "ParamSpec",
    "SearchSpace",
    "Candidate",
    "parse_format",
    "validate_space",
    "contains",
    "space_from_json",
    "space_digest",
]


# ---------------------------------------------------------------------------
# Specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntSpec:
    """Integer parameter, inclusive on both ends.

    ``multiple_of=m`` restricts values to multiples of m; ``power_of=b``
    restricts values to powers of b (sampled uniformly over exponents, hence
    log-uniform over values). The two are mutually exclusive.
    """

    low: int
    high: int
    multiple_of: Optional[int] = None
    power_of: Optional[int] = None
    shape: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.shape is not None:
            object.__setattr__(self, "shape", _normalize_shape(self.shape))


@dataclass(frozen=True)
class FloatSpec:
    """Float parameter, linear (``log=False``) or log-uniform (``log=True``).

    ``precision`` quantizes a linear parameter to N decimal digits;
    ``significant_digits`` quantizes a log parameter to N significant digits.
    """

    low: float
    high: float
    log: bool = False
    precision: Optional[int] = None
    significant_digits: Optional[int] = None
    shape: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.shape is not None:
            object.__setattr__(self, "shape", _normalize_shape(self.shape))


@dataclass(frozen=True)
class ChoiceSpec:
    """Finite set of opaque options. ``is_ordinal`` gives the list a
    neighborhood structure (mutations move to nearby indices)."""

    options: tuple
    is_ordinal: bool = False

    def __init__(self, options: Sequence, is_ordinal: bool = False):
        object.__setattr__(self, "options", tuple(options))
        object.__setattr__(self, "is_ordinal", bool(is_ordinal))

    def index_of(self, value) -> int:
        """Index of ``value`` under == on the original option list; -1 if absent."""
        for i, opt in enumerate(self.options):
            if _safe_eq(opt, value):
                return i
        return -1


@dataclass(frozen=True)
class CustomSpec:
    """User-defined parameter: ``seed_fn(rng)`` draws a fresh value,
    ``mutate_fn(value, temperature, rng)`` perturbs one."""

    seed_fn: Callable
    mutate_fn: Callable


ParamSpec = Union[IntSpec, FloatSpec, ChoiceSpec, CustomSpec]


def _normalize_shape(shape) -> tuple[int, ...]:
    if isinstance(shape, (int, np.integer)):
        return (int(shape),)
    return tuple(int(s) for s in shape)


def _safe_eq(a, b) -> bool:
    try:
        res = a == b
        if isinstance(res, np.ndarray):
            return bool(res.all())
        return bool(res)
    except Exception:
        return False


# ---------------------------------------------------------------------------
# Quantization helpers (round-half-away-from-zero via Decimal)
# ---------------------------------------------------------------------------

def round_decimals(value: float, digits: int) -> float:
    """Round to ``digits`` decimal places, half away from zero."""
    d = Decimal(repr(float(value)))
    return float(d.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_UP))


def round_significant(value: float, digits: int) -> float:
    """Round the base-10 mantissa to ``digits`` significant digits,
    half away from zero."""
    v = float(value)
    if v == 0.0 or not math.isfinite(v):
        return v
    d = Decimal(repr(v))
    exp = d.adjusted()  # floor(log10(|v|))
    return float(d.quantize(Decimal(1).scaleb(exp - digits + 1), rounding=ROUND_HALF_UP))


def _decimal_grid_bounds(low: float, high: float, digits: int) -> tuple[float, float]:
    """Smallest/largest multiples of 10^-digits inside [low, high]."""
    step = Decimal(1).scaleb(-digits)
    lo = Decimal(repr(float(low)))
    hi = Decimal(repr(float(high)))
    glo = (lo / step).to_integral_value(rounding="ROUND_CEILING") * step
    ghi = (hi / step).to_integral_value(rounding="ROUND_FLOOR") * step
    return float(glo), float(ghi)


def _sig_grid_bounds(low: float, high: float, digits: int) -> tuple[float, float]:
    """Smallest/largest ``digits``-significant-digit values inside [low, high].

    Requires low > 0 (log-mode invariant).
    """
    glo = round_significant(low, digits)
    if glo < low:
        d = Decimal(repr(glo))
        glo = round_significant(float(d + Decimal(1).scaleb(d.adjusted() - digits + 1)), digits)
    ghi = round_significant(high, digits)
    if ghi > high:
        d = Decimal(repr(ghi))
        ghi = round_significant(float(d - Decimal(1).scaleb(d.adjusted() - digits + 1)), digits)
    return glo, ghi


def int_grid_bounds(spec: IntSpec) -> tuple[int, int]:
    """Effective inclusive bounds after snapping to the multiple_of grid."""
    if spec.multiple_of:
        m = spec.multiple_of
        return (math.ceil(spec.low / m) * m, math.floor(spec.high / m) * m)
    return (spec.low, spec.high)


def power_grid(spec: IntSpec) -> list[int]:
    """All b^k inside [low, high], ascending."""
    b = spec.power_of
    grid = []
    v = 1
    while v <= spec.high:
        if v >= spec.low:
            grid.append(v)
        v *= b
    return grid


def float_grid_bounds(spec: FloatSpec) -> tuple[float, float]:
    """Effective bounds after snapping to the quantization grid (if any)."""
    if not spec.log and spec.precision is not None:
        return _decimal_grid_bounds(spec.low, spec.high, spec.precision)
    if spec.log and spec.significant_digits is not None:
        return _sig_grid_bounds(spec.low, spec.high, spec.significant_digits)
    return (float(spec.low), float(spec.high))


# ---------------------------------------------------------------------------
# Format strings
# ---------------------------------------------------------------------------

_FMT_RE = re.compile(r"^:?0\.(\d+)([fg])$")


@dataclass(frozen=True)
class QuantizationFormat:
    mode: str  # "linear" | "log"
    digits: int


def parse_format(fmt: str) -> QuantizationFormat:
    """Parse a quantization format string.

    ``"0.Nf"`` selects linear sampling quantized to N decimal digits;
    ``"0.Ng"`` selects log sampling quantized to N significant digits.
    A leading ":" is accepted.
    """
    m = _FMT_RE.match(fmt)
    if m is None:
        raise FormatError(
            f"invalid format string {fmt!r}: expected '0.<digits>f' (linear, decimal "
            "digits) or '0.<digits>g' (log, significant digits), optionally ':'-prefixed"
        )
    digits = int(m.group(1))
    if m.group(2) == "f":
        return QuantizationFormat(mode="linear", digits=digits)
    if digits < 1:
        raise FormatError(f"invalid format string {fmt!r}: 'g' needs at least 1 significant digit")
    return QuantizationFormat(mode="log", digits=digits)


def float_spec_from_format(low: float, high: float, fmt: str, shape=None) -> FloatSpec:
    """Build a FloatSpec whose quantization comes from a format string."""
    q = parse_format(fmt)
    if q.mode == "linear":
        return FloatSpec(low, high, log=False, precision=q.digits, shape=shape)
    return FloatSpec(low, high, log=True, significant_digits=q.digits, shape=shape)


# ---------------------------------------------------------------------------
# Search space and candidates
# ---------------------------------------------------------------------------

class SearchSpace:
    """Named, ordered collection of parameter specs."""

    def __init__(self, params: Optional[dict[str, ParamSpec]] = None, **kwargs: ParamSpec):
        merged: dict[str, ParamSpec] = {}
        if params:
            merged.update(params)
        merged.update(kwargs)
        self._params: dict[str, ParamSpec] = dict(merged)

    @property
    def params(self) -> dict[str, ParamSpec]:
        return dict(self._params)

    def names(self) -> list[str]:
        return list(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __getitem__(self, name: str) -> ParamSpec:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def items(self):
        return self._params.items()

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self._params.items())
        return f"SearchSpace({inner})"


@dataclass(frozen=True)
class Candidate:
    """One concrete configuration record plus provenance."""

    values: dict[str, Any]
    origin: str  # "random" | "local" | "queued"
    id: str

    @staticmethod
    def build(space: SearchSpace, values: dict[str, Any], origin: str, id: str) -> "Candidate":
        problems = check_values(space, values)
        if problems:
            raise SpaceError("; ".join(problems))
        return Candidate(values=dict(values), origin=origin, id=id)


def check_values(space: SearchSpace, values: dict[str, Any]) -> list[str]:
    """Key-set equality with the space plus per-value membership."""
    problems = []
    missing = [n for n in space if n not in values]
    extra = [n for n in values if n not in space]
    if missing:
        problems.append(f"missing parameters: {missing}")
    if extra:
        problems.append(f"unknown parameters: {extra}")
    for name in space:
        if name in values and not contains(space[name], values[name]):
            problems.append(f"parameter '{name}': value {values[name]!r} outside its domain")
    return problems


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _validate_shape(shape, problems: list[str], prefix: str) -> None:
    if shape is None:
        return
    if len(shape) == 0 or any(s < 1 for s in shape):
        problems.append(f"{prefix}: shape must be a non-empty list of positive integers")


def validate_spec(spec: ParamSpec) -> list[str]:
    """All invariant violations of one spec, in a stable order."""
    problems: list[str] = []
    if isinstance(spec, IntSpec):
        if not (isinstance(spec.low, (int, np.integer)) and isinstance(spec.high, (int, np.integer))):
            problems.append("int bounds must be integers")
            return problems
        if spec.low > spec.high:
            problems.append(f"low {spec.low} > high {spec.high}")
        if spec.multiple_of is not None and spec.power_of is not None:
            problems.append("multiple_of and power_of are mutually exclusive")
            return problems
        if spec.multiple_of is not None:
            if spec.multiple_of < 1:
                problems.append("multiple_of must be a positive integer")
            elif spec.low <= spec.high:
                glo, ghi = int_grid_bounds(spec)
                if glo > ghi:
                    problems.append(
                        f"no multiple of {spec.multiple_of} in [{spec.low}, {spec.high}]"
                    )
        if spec.power_of is not None:
            if spec.power_of < 2:
                problems.append("power_of must be an integer >= 2")
            elif spec.low < 1:
                problems.append("power_of requires low >= 1")
            elif spec.low <= spec.high and not power_grid(spec):
                problems.append(
                    f"no power of {spec.power_of} in [{spec.low}, {spec.high}]"
                )
        _validate_shape(spec.shape, problems, "int")
    elif isinstance(spec, FloatSpec):
        if not (math.isfinite(spec.low) and math.isfinite(spec.high)):
            problems.append("float bounds must be finite")
            return problems
        if spec.low > spec.high:
            problems.append(f"low {spec.low} > high {spec.high}")
        if spec.log and spec.low <= 0:
            problems.append("log requires low > 0")
        if spec.precision is not None:
            if spec.log:
                problems.append("precision is only valid for linear (log=False) parameters")
            elif spec.precision < 0:
                problems.append("precision must be a non-negative integer")
            elif spec.low <= spec.high:
                glo, ghi = _decimal_grid_bounds(spec.low, spec.high, spec.precision)
                if glo > ghi:
                    problems.append(
                        f"no {spec.precision}-decimal grid point in [{spec.low}, {spec.high}]"
                    )
        if spec.significant_digits is not None:
            if not spec.log:
                problems.append("significant_digits is only valid for log=True parameters")
            elif spec.significant_digits < 1:
                problems.append("significant_digits must be a positive integer")
            elif 0 < spec.low <= spec.high:
                glo, ghi = _sig_grid_bounds(spec.low, spec.high, spec.significant_digits)
                if glo > ghi:
                    problems.append(
                        f"no {spec.significant_digits}-significant-digit grid point "
                        f"in [{spec.low}, {spec.high}]"
                    )
        _validate_shape(spec.shape, problems, "float")
    elif isinstance(spec, ChoiceSpec):
        if len(spec.options) == 0:
            problems.append("options must be non-empty")
    elif isinstance(spec, CustomSpec):
        if not callable(spec.seed_fn):
            problems.append("seed_fn must be callable")
        if not callable(spec.mutate_fn):
            problems.append("mutate_fn must be callable")
    else:
        problems.append(f"unknown spec type {type(spec).__name__}")
    return problems


def validate_space(space: SearchSpace) -> list[str]:
    """Every invariant violation in the space, tagged with the parameter name.

    Deterministic and order-stable; an empty list means the space is valid.
    """
    problems: list[str] = []
    for name, spec in space.items():
        if not isinstance(name, str) or not name:
            problems.append(f"parameter name {name!r} must be a non-empty string")
        for p in validate_spec(spec):
            problems.append(f"parameter '{name}': {p}")
    return problems


def ensure_valid(space: SearchSpace) -> None:
    problems = validate_space(space)
    if problems:
        raise SpaceError("invalid search space: " + "; ".join(problems))


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------

def _scalar_int_contains(spec: IntSpec, v) -> bool:
    if isinstance(v, (bool, np.bool_)):
        return False
    if isinstance(v, (float, np.floating)):
        if float(v) != int(v):
            return False
        v = int(v)
    if not isinstance(v, (int, np.integer)):
        return False
    v = int(v)
    if v < spec.low or v > spec.high:
        return False
    if spec.multiple_of is not None:
        return v % spec.multiple_of == 0
    if spec.power_of is not None:
        return v in power_grid(spec)
    return True


def _scalar_float_contains(spec: FloatSpec, v) -> bool:
    if not isinstance(v, (int, float, np.integer, np.floating)) or isinstance(v, (bool, np.bool_)):
        return False
    v = float(v)
    if not math.isfinite(v):
        return False
    glo, ghi = float_grid_bounds(spec)
    if v < glo or v > ghi:
        return False
    if not spec.log and spec.precision is not None:
        return round_decimals(v, spec.precision) == v
    if spec.log and spec.significant_digits is not None:
        return round_significant(v, spec.significant_digits) == v
    return True


def contains(spec: ParamSpec, value) -> bool:
    """True iff ``value`` lies in bounds and on the quantization grid
    (or, for choices, equals one of the options)."""
    if isinstance(spec, ChoiceSpec):
        return spec.index_of(value) >= 0
    if isinstance(spec, CustomSpec):
        return True  # membership is user-defined; trusted by construction
    if isinstance(spec, (IntSpec, FloatSpec)):
        check = _scalar_int_contains if isinstance(spec, IntSpec) else _scalar_float_contains
        if spec.shape is not None:
            if not isinstance(value, np.ndarray) or value.shape != spec.shape:
                return False
            return all(check(spec, x) for x in value.flat)
        return check(spec, value)
    return False


# ---------------------------------------------------------------------------
# JSON loading and digests
# ---------------------------------------------------------------------------

def _spec_from_json(name: str, doc: dict) -> ParamSpec:
    if not isinstance(doc, dict) or "type" not in doc:
        raise SpaceError(f"parameter '{name}': expected an object with a 'type' field")
    kind = doc["type"]
    fields = {k: v for k, v in doc.items() if k != "type"}
    shape = fields.pop("shape", None)
    if shape is not None:
        shape = _normalize_shape(shape)
    try:
        if kind == "int":
            return IntSpec(
                low=fields.pop("low"),
                high=fields.pop("high"),
                multiple_of=fields.pop("multiple_of", None),
                power_of=fields.pop("power_of", None),
                shape=shape,
                **fields,
            )
        if kind == "float":
            fmt = fields.pop("format", None)
            if fmt is not None:
                if any(k in fields for k in ("log", "precision", "significant_digits")):
                    raise SpaceError(
                        f"parameter '{name}': 'format' conflicts with explicit "
                        "log/precision/significant_digits fields"
                    )
                return float_spec_from_format(
                    fields.pop("low"), fields.pop("high"), fmt, shape=shape
                )
            return FloatSpec(
                low=fields.pop("low"),
                high=fields.pop("high"),
                log=fields.pop("log", False),
                precision=fields.pop("precision", None),
                significant_digits=fields.pop("significant_digits", None),
                shape=shape,
                **fields,
            )
        if kind == "choice":
            return ChoiceSpec(
                options=fields.pop("options"),
                is_ordinal=fields.pop("is_ordinal", False),
            )
    except SpaceError:
        raise
    except (KeyError, TypeError) as e:
        raise SpaceError(f"parameter '{name}': {e}") from e
    raise SpaceError(f"parameter '{name}': unknown type {kind!r}")


def space_from_json(doc: Union[str, dict]) -> SearchSpace:
    """Load a search space from a JSON document

    ``{"name": {"type": "int"|"float"|"choice", ...fields...}}``; float specs
    additionally accept ``"format": "0.1g"`` in place of explicit
    quantization fields.
    """
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise SpaceError(f"invalid space JSON: {e}") from e
    if not isinstance(doc, dict):
        raise SpaceError("space document must be a JSON object")
    space = SearchSpace({name: _spec_from_json(name, sub) for name, sub in doc.items()})
    ensure_valid(space)
    return space


def spec_to_json(spec: ParamSpec) -> dict:
    """Canonical JSON form of a spec (custom specs degrade to an opaque tag)."""
    if isinstance(spec, IntSpec):
        out: dict[str, Any] = {"type": "int", "low": int(spec.low), "high": int(spec.high)}
        if spec.multiple_of is not None:
            out["multiple_of"] = int(spec.multiple_of)
        if spec.power_of is not None:
            out["power_of"] = int(spec.power_of)
        if spec.shape is not None:
            out["shape"] = list(spec.shape)
        return out
    if isinstance(spec, FloatSpec):
        out = {"type": "float", "low": float(spec.low), "high": float(spec.high), "log": spec.log}
        if spec.precision is not None:
            out["precision"] = int(spec.precision)
        if spec.significant_digits is not None:
            out["significant_digits"] = int(spec.significant_digits)
        if spec.shape is not None:
            out["shape"] = list(spec.shape)
        return out
    if isinstance(spec, ChoiceSpec):
        try:
            options = json.loads(json.dumps(list(spec.options)))
        except (TypeError, ValueError):
            options = [repr(o) for o in spec.options]
        return {"type": "choice", "options": options, "is_ordinal": spec.is_ordinal}
    if isinstance(spec, CustomSpec):
        seed_name = getattr(spec.seed_fn, "__qualname__", repr(spec.seed_fn))
        mutate_name = getattr(spec.mutate_fn, "__qualname__", repr(spec.mutate_fn))
        return {"type": "custom", "seed_fn": seed_name, "mutate_fn": mutate_name}
    raise SpaceError(f"unknown spec type {type(spec).__name__}")


def space_to_json(space: SearchSpace) -> dict:
    return {name: spec_to_json(spec) for name, spec in space.items()}


def space_digest(space: SearchSpace) -> str:
    """Stable hash of the canonical space serialization."""
    canon = json.dumps(space_to_json(space), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()
