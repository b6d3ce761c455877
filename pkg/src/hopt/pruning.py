"""Noisy-objective handling: repeated evaluation with mean aggregation and
quantile-based early termination of unpromising candidates.

A candidate's intermediate results are compared, step by step, against the
running means of every earlier candidate that reached the same step. If the
candidate's running mean is not within the surviving quantile (e.g. the top
20% for ``q=0.2`` under maximize), its remaining repeats are skipped.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, Optional

import numpy as np

log = logging.getLogger(__name__)

__all__ = ["QuantilePruner", "RepeatedObjective", "evaluate_repeated"]

# Minimum number of candidates that must have reached a step before any
# pruning decision is made at that step.
MIN_HISTORY = 5


class QuantilePruner:
    """Prunes candidates whose running mean falls outside the top ``q`` fraction.

    ``per_step_values[k]`` holds the k-th intermediate value of every candidate
    that reached step k; running means are tracked alongside so decisions are
    made on per-step running means.
    """

    def __init__(self, q: float = 0.2, min_history: int = MIN_HISTORY):
        if not (0.0 < q < 1.0):
            raise ValueError(f"q must be in (0, 1), got {q}")
        self.q = float(q)
        self.min_history = int(min_history)
        self.per_step_values: dict[int, list[float]] = {}
        self.per_step_means: dict[int, list[float]] = {}
        self._open_trial: list[float] = []

    def observe(self, step_index: int, value: float) -> None:
        """Record one intermediate value. Non-finite values are ignored."""
        value = float(value)
        if not math.isfinite(value):
            log.warning("ignoring non-finite intermediate value %r at step %d", value, step_index)
            return
        if step_index == 0:
            self._open_trial = []
        self._open_trial = self._open_trial[:step_index]
        self._open_trial.append(value)
        self.per_step_values.setdefault(step_index, []).append(value)
        mean = float(np.mean(self._open_trial))
        self.per_step_means.setdefault(step_index, []).append(mean)

    def observe_trial(self, values: list[float]) -> None:
        """Record a whole candidate's intermediate sequence in order."""
        for i, v in enumerate(values):
            self.observe(i, v)

    def should_prune(self, step_index: int, running_values: list[float], direction: str) -> bool:
        """True iff enough history exists at this step and the candidate's
        running mean is strictly worse than the surviving-quantile threshold."""
        history = self.per_step_means.get(step_index, [])
        if len(history) < self.min_history:
            return False
        current = float(np.mean(running_values))
        if direction == "maximize":
            threshold = float(np.quantile(history, 1.0 - self.q, method="linear"))
            return current < threshold
        threshold = float(np.quantile(history, self.q, method="linear"))
        return current > threshold

    def snapshot(self) -> "QuantilePruner":
        """Independent copy for handing to a worker; the original stays
        controller-owned."""
        clone = QuantilePruner(q=self.q, min_history=self.min_history)
        clone.per_step_values = {k: list(v) for k, v in self.per_step_values.items()}
        clone.per_step_means = {k: list(v) for k, v in self.per_step_means.items()}
        return clone

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "min_history": self.min_history,
            "per_step_values": {str(k): v for k, v in self.per_step_values.items()},
            "per_step_means": {str(k): v for k, v in self.per_step_means.items()},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "QuantilePruner":
        pruner = cls(q=doc["q"], min_history=doc.get("min_history", MIN_HISTORY))
        pruner.per_step_values = {int(k): list(v) for k, v in doc["per_step_values"].items()}
        pruner.per_step_means = {int(k): list(v) for k, v in doc["per_step_means"].items()}
        return pruner


class RepeatedObjective:
    """Evaluates an objective ``n`` times and reports the arithmetic mean."""

    def __init__(self, inner: Callable[[dict], float], n: int):
        if n < 1:
            raise ValueError(f"repeat count must be >= 1, got {n}")
        self.inner = inner
        self.n = int(n)

    def __call__(self, values: dict) -> float:
        return float(np.mean([self.inner(values) for _ in range(self.n)]))


def evaluate_repeated(
    obj: RepeatedObjective,
    candidate_values: dict,
    pruner: Optional[QuantilePruner] = None,
    direction: str = "maximize",
) -> tuple[str, Optional[float], list[float]]:
    """Run the inner objective up to ``n`` times with optional pruning.

    Returns ``("finished", mean, values)``, ``("pruned", None, partial)``, or
    raises whatever the inner objective raises (partial values are attached to
    the exception as ``partial_values``).
    """
    values: list[float] = []
    for i in range(obj.n):
        try:
            v = float(obj.inner(candidate_values))
        except Exception as e:
            e.partial_values = list(values)  # type: ignore[attr-defined]
            raise
        values.append(v)
        if pruner is not None:
            pruner.observe(i, v)
            if pruner.should_prune(i, values, direction):
                return ("pruned", None, values)
    return ("finished", float(np.mean(values)), values)
