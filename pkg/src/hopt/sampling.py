"""Sampling kernels: uniform seeding over the space and temperature-scaled
local perturbation, for every parameter spec.

All randomness flows through :class:`Rng`, a counter-based generator whose
state is exactly ``(seed, number of logical draws)``. Every public draw
consumes a fixed amount of the underlying stream (normals use Box-Muller on
two uniforms), so restoring a checkpointed counter reproduces the stream
bit-for-bit.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .errors import SpaceError
from .space import (
    Candidate,
    ChoiceSpec,
    CustomSpec,
    FloatSpec,
    IntSpec,
    ParamSpec,
    SearchSpace,
    float_grid_bounds,
    int_grid_bounds,
    power_grid,
    round_decimals,
    round_significant,
)

__all__ = ["Rng", "sample", "mutate", "quantize", "sample_candidate", "mutate_candidate"]

# Fraction of the (possibly log-scaled) range used as one standard deviation
# of mutation noise at temperature 1.
NOISE_SCALE = 0.2

_SEED_MASK = (1 << 64) - 1
_REPLAY_CHUNK = 1 << 20


class Rng:
    """Deterministic, serializable random stream.

    State is ``(seed, counter)`` where ``counter`` counts consumed uniform
    doubles. Restoration replays the counter against a fresh Philox stream,
    which is cheap because the replay is vectorized.
    """

    __slots__ = ("seed", "counter", "_gen")

    def __init__(self, seed: int, counter: int = 0):
        self.seed = int(seed)
        self.counter = 0
        self._gen = np.random.Generator(np.random.Philox(key=self.seed & _SEED_MASK))
        if counter:
            self._skip(int(counter))

    def _skip(self, n: int) -> None:
        while n > 0:
            chunk = min(n, _REPLAY_CHUNK)
            self._gen.random(chunk)
            self.counter += chunk
            n -= chunk

    def random(self) -> float:
        """One uniform double in [0, 1)."""
        self.counter += 1
        return float(self._gen.random())

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Box-Muller normal; consumes exactly two uniforms."""
        u1 = 1.0 - self.random()  # (0, 1]
        u2 = self.random()
        z = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        return mu + sigma * z

    def randint(self, low: int, high: int) -> int:
        """Uniform integer on the inclusive range [low, high]."""
        n = high - low + 1
        return low + min(int(self.random() * n), n - 1)

    def index(self, n: int) -> int:
        return self.randint(0, n - 1)

    def state(self) -> dict:
        return {"seed": self.seed, "counter": self.counter}

    @classmethod
    def from_state(cls, state: dict) -> "Rng":
        return cls(seed=int(state["seed"]), counter=int(state["counter"]))

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, counter={self.counter})"


# ---------------------------------------------------------------------------
# Quantization (projection onto the spec's grid)
# ---------------------------------------------------------------------------

def _round_half_away(x: float) -> int:
    if x >= 0:
        return int(math.floor(x + 0.5))
    return int(math.ceil(x - 0.5))


def _quantize_int_scalar(spec: IntSpec, v: float) -> int:
    if spec.power_of is not None:
        grid = power_grid(spec)
        if not grid:
            raise SpaceError(f"empty power_of grid for {spec!r}")
        # nearest exponent (log-space distance)
        lv = math.log(max(float(v), 1e-300))
        best = min(range(len(grid)), key=lambda i: abs(math.log(grid[i]) - lv))
        return grid[best]
    if spec.multiple_of is not None:
        glo, ghi = int_grid_bounds(spec)
        m = spec.multiple_of
        q = _round_half_away(float(v) / m) * m
        return min(max(q, glo), ghi)
    q = _round_half_away(float(v))
    return min(max(q, spec.low), spec.high)


def _quantize_float_scalar(spec: FloatSpec, v: float) -> float:
    glo, ghi = float_grid_bounds(spec)
    if not spec.log and spec.precision is not None:
        q = round_decimals(float(v), spec.precision)
    elif spec.log and spec.significant_digits is not None:
        q = round_significant(float(v), spec.significant_digits)
    else:
        q = float(v)
    if q < glo:
        return glo
    if q > ghi:
        return ghi
    # clipped values may land off-grid only via the raw bounds; re-snap
    if not spec.log and spec.precision is not None:
        return round_decimals(q, spec.precision)
    if spec.log and spec.significant_digits is not None:
        return round_significant(q, spec.significant_digits)
    return q


def quantize(spec: ParamSpec, value):
    """Project ``value`` onto the spec's admissible grid (clip + snap).

    Idempotent on grid points; identity for choices and custom specs.
    """
    if isinstance(spec, (ChoiceSpec, CustomSpec)):
        return value
    if isinstance(spec, IntSpec):
        if spec.shape is not None:
            arr = np.asarray(value)
            out = np.array([_quantize_int_scalar(spec, float(x)) for x in arr.flat], dtype=np.int64)
            return out.reshape(spec.shape)
        return _quantize_int_scalar(spec, float(value))
    if isinstance(spec, FloatSpec):
        if spec.shape is not None:
            arr = np.asarray(value, dtype=float)
            out = np.array([_quantize_float_scalar(spec, float(x)) for x in arr.flat], dtype=np.float64)
            return out.reshape(spec.shape)
        return _quantize_float_scalar(spec, float(value))
    raise SpaceError(f"unknown spec type {type(spec).__name__}")


# ---------------------------------------------------------------------------
# Uniform sampling
# ---------------------------------------------------------------------------

def _sample_int_scalar(spec: IntSpec, rng: Rng) -> int:
    if spec.power_of is not None:
        grid = power_grid(spec)
        return grid[rng.index(len(grid))]  # uniform over exponents
    if spec.multiple_of is not None:
        glo, ghi = int_grid_bounds(spec)
        m = spec.multiple_of
        return m * rng.randint(glo // m, ghi // m)
    return rng.randint(spec.low, spec.high)


def _sample_float_scalar(spec: FloatSpec, rng: Rng) -> float:
    if spec.log:
        raw = math.exp(rng.uniform(math.log(spec.low), math.log(spec.high)))
    else:
        raw = rng.uniform(float(spec.low), float(spec.high))
    return _quantize_float_scalar(spec, raw)


def sample(spec: ParamSpec, rng: Rng):
    """Draw one value uniformly over the spec's domain.

    Linear specs are uniform over the interval/grid, log floats uniform in
    log-space, power_of ints uniform over exponents, choices uniform over
    options; shaped specs draw each element independently.
    """
    if isinstance(spec, ChoiceSpec):
        return spec.options[rng.index(len(spec.options))]
    if isinstance(spec, CustomSpec):
        return spec.seed_fn(rng)
    if isinstance(spec, IntSpec):
        if spec.shape is not None:
            n = int(np.prod(spec.shape))
            out = np.array([_sample_int_scalar(spec, rng) for _ in range(n)], dtype=np.int64)
            return out.reshape(spec.shape)
        return _sample_int_scalar(spec, rng)
    if isinstance(spec, FloatSpec):
        if spec.shape is not None:
            n = int(np.prod(spec.shape))
            out = np.array([_sample_float_scalar(spec, rng) for _ in range(n)], dtype=np.float64)
            return out.reshape(spec.shape)
        return _sample_float_scalar(spec, rng)
    raise SpaceError(f"unknown spec type {type(spec).__name__}")


# ---------------------------------------------------------------------------
# Local perturbation
# ---------------------------------------------------------------------------

def _mutate_int_scalar(spec: IntSpec, v: int, tau: float, rng: Rng) -> int:
    if spec.power_of is not None:
        grid = power_grid(spec)
        k = len(grid)
        try:
            idx = grid.index(int(v))
        except ValueError:
            idx = min(range(k), key=lambda i: abs(grid[i] - int(v)))
        step = _round_half_away(rng.normal(0.0, tau * k / 4.0))
        return grid[min(max(idx + step, 0), k - 1)]
    eps = rng.normal(0.0, NOISE_SCALE * tau * (spec.high - spec.low))
    return _quantize_int_scalar(spec, float(v) + eps)


def _mutate_float_scalar(spec: FloatSpec, v: float, tau: float, rng: Rng) -> float:
    if spec.log:
        span = math.log(spec.high) - math.log(spec.low)
        eps = rng.normal(0.0, NOISE_SCALE * tau * span)
        raw = math.exp(math.log(max(float(v), spec.low * 1e-12)) + eps)
    else:
        eps = rng.normal(0.0, NOISE_SCALE * tau * (spec.high - spec.low))
        raw = float(v) + eps
    return _quantize_float_scalar(spec, raw)


def mutate(spec: ParamSpec, value, tau: float, rng: Rng):
    """Perturb ``value`` with noise whose magnitude scales with ``tau``.

    The result always lies in the spec's domain; at ``tau == 0`` the value is
    returned unchanged (up to re-quantization, a no-op on grid points).
    """
    if isinstance(spec, CustomSpec):
        return spec.mutate_fn(value, tau, rng)
    if isinstance(spec, ChoiceSpec):
        n = len(spec.options)
        if spec.is_ordinal:
            idx = spec.index_of(value)
            if idx < 0:
                idx = rng.index(n)
            step = _round_half_away(rng.normal(0.0, tau * n / 4.0))
            return spec.options[min(max(idx + step, 0), n - 1)]
        if rng.random() < tau:
            return spec.options[rng.index(n)]
        return value
    if isinstance(spec, IntSpec):
        if spec.shape is not None:
            arr = np.asarray(value)
            out = np.array(
                [_mutate_int_scalar(spec, int(x), tau, rng) for x in arr.flat], dtype=np.int64
            )
            return out.reshape(spec.shape)
        return _mutate_int_scalar(spec, int(value), tau, rng)
    if isinstance(spec, FloatSpec):
        if spec.shape is not None:
            arr = np.asarray(value, dtype=float)
            out = np.array(
                [_mutate_float_scalar(spec, float(x), tau, rng) for x in arr.flat],
                dtype=np.float64,
            )
            return out.reshape(spec.shape)
        return _mutate_float_scalar(spec, float(value), tau, rng)
    raise SpaceError(f"unknown spec type {type(spec).__name__}")


# ---------------------------------------------------------------------------
# Candidate-level operations
# ---------------------------------------------------------------------------

def sample_candidate(space: SearchSpace, rng: Rng, id: str = "") -> Candidate:
    """Independent uniform draw of every parameter; provenance ``random``."""
    values = {name: sample(spec, rng) for name, spec in space.items()}
    return Candidate(values=values, origin="random", id=id)


def mutate_candidate(space: SearchSpace, best: Candidate, tau: float, rng: Rng, id: str = "") -> Candidate:
    """Perturb a non-empty subset of the incumbent's parameters.

    Each parameter is selected independently with probability
    ``max(tau, 1/P)``; an empty selection is redrawn. Unselected parameters
    are copied verbatim.
    """
    names = space.names()
    p_sel = max(tau, 1.0 / len(names)) if names else 1.0
    selected: list[bool] = []
    while True:
        selected = [rng.random() < p_sel for _ in names]
        if not names or any(selected):
            break
    values = {}
    for name, hit in zip(names, selected):
        if hit:
            values[name] = mutate(space[name], best.values[name], tau, rng)
        else:
            values[name] = best.values[name]
    return Candidate(values=values, origin="local", id=id)
