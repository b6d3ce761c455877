"""Built-in synthetic objectives for benchmarking the search engine.

Each objective ships with its canonical search space and default optimization
direction. ``multimodal2d`` is a fixed sum of three Gaussian bumps plus a
plane tilt on the unit square; its global optimum is located by the dense-grid
script in ``scripts/pilot.py`` and committed as a test fixture.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .space import FloatSpec, SearchSpace

__all__ = ["BuiltinObjective", "get_objective", "OBJECTIVE_NAMES", "multimodal2d_fn"]

OBJECTIVE_NAMES = ("sphere", "rosenbrock", "rastrigin", "multimodal2d", "noisy_sphere")

# (amplitude, center_x, center_y, sigma) of the three bumps, plus tilt slope
MULTIMODAL2D_BUMPS = (
    (1.0, 0.7, 0.3, 0.15),
    (0.7, 0.2, 0.75, 0.12),
    (0.5, 0.45, 0.55, 0.20),
)
MULTIMODAL2D_TILT = 0.05


@dataclass(frozen=True)
class BuiltinObjective:
    name: str
    space: SearchSpace
    fn: Callable[[dict], float]
    direction: str


def _vector(values: dict) -> np.ndarray:
    names = sorted(values, key=lambda n: (len(n), n))
    return np.array([float(values[n]) for n in names], dtype=float)


def sphere_fn(values: dict) -> float:
    x = _vector(values)
    return float(np.sum(x * x))


def rosenbrock_fn(values: dict) -> float:
    x = _vector(values)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def rastrigin_fn(values: dict) -> float:
    x = _vector(values)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def multimodal2d_fn(values: dict) -> float:
    x, y = float(values["x"]), float(values["y"])
    total = MULTIMODAL2D_TILT * (x + y)
    for amp, cx, cy, sigma in MULTIMODAL2D_BUMPS:
        r2 = (x - cx) ** 2 + (y - cy) ** 2
        total += amp * math.exp(-r2 / (2.0 * sigma * sigma))
    return total


class NoisySphere:
    """Sphere plus seeded Gaussian observation noise (a stand-in for
    stochastic training objectives)."""

    def __init__(self, noise_sigma: float = 0.1, seed: int = 0):
        self.noise_sigma = float(noise_sigma)
        self._rng = np.random.default_rng(seed)

    def __call__(self, values: dict) -> float:
        return sphere_fn(values) + self.noise_sigma * float(self._rng.standard_normal())


def _axes_space(dims: int, low: float, high: float) -> SearchSpace:
    return SearchSpace({f"x{i}": FloatSpec(low, high) for i in range(dims)})


def get_objective(
    name: str,
    dims: int = 2,
    noise_sigma: float = 0.1,
    seed: int = 0,
) -> BuiltinObjective:
    """Look up a built-in objective with its canonical space and direction."""
    if dims < 1:
        raise ValueError(f"dims must be >= 1, got {dims}")
    if name == "sphere":
        return BuiltinObjective("sphere", _axes_space(dims, -1.0, 1.0), sphere_fn, "minimize")
    if name == "rosenbrock":
        return BuiltinObjective(
            "rosenbrock", _axes_space(dims, -2.0, 2.0), rosenbrock_fn, "minimize"
        )
    if name == "rastrigin":
        return BuiltinObjective(
            "rastrigin", _axes_space(dims, -5.12, 5.12), rastrigin_fn, "minimize"
        )
    if name == "multimodal2d":
        space = SearchSpace({"x": FloatSpec(0.0, 1.0), "y": FloatSpec(0.0, 1.0)})
        return BuiltinObjective("multimodal2d", space, multimodal2d_fn, "maximize")
    if name == "noisy_sphere":
        return BuiltinObjective(
            "noisy_sphere",
            _axes_space(dims, -1.0, 1.0),
            NoisySphere(noise_sigma=noise_sigma, seed=seed),
            "minimize",
        )
    raise ValueError(f"unknown objective {name!r}; available: {', '.join(OBJECTIVE_NAMES)}")
