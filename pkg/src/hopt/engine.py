"""Search controller: budget management, phase switching, temperature
annealing, candidate queue, incumbent tracking, and callbacks.

The controller runs two sequential phases. Phase 1 draws candidates uniformly
over the whole space for the first ``random_fraction`` of the budget
(25% by default). Phase 2 perturbs the incumbent with noise whose temperature
decreases linearly over the remaining budget down to a floor.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, Optional, Sequence, Union

import numpy as np

from . import persist
from .errors import NoSuccessfulEvaluation, ProtocolError, SearchAborted, SpaceError
from .pruning import QuantilePruner, RepeatedObjective, evaluate_repeated
from .sampling import Rng, mutate_candidate, sample, sample_candidate
from .space import Candidate, SearchSpace, check_values, ensure_valid, space_digest
from .util import parse_run_args

log = logging.getLogger(__name__)

__all__ = [
    "Budget",
    "EvaluationRecord",
    "Callbacks",
    "Search",
    "SearchResult",
    "temperature_at",
    "statistics",
    "history_to_csv",
    "evaluate_candidate",
]

RANDOM_FRACTION_DEFAULT = 0.25
TAU_MIN = 0.05
DIRECTIONS = ("maximize", "minimize")
ENGINE_VERSION = "0.1.0"


@dataclass
class Budget:
    """Evaluation budget in wall-clock seconds or candidate-evaluation steps."""

    mode: str  # "wallclock" | "steps"
    total: float
    consumed: float = 0.0

    def fraction(self) -> float:
        if self.total <= 0:
            return 1.0
        return self.consumed / self.total

    def exhausted(self) -> bool:
        return self.consumed >= self.total

    def to_dict(self) -> dict:
        return {"mode": self.mode, "total": self.total, "consumed": self.consumed}

    @classmethod
    def from_dict(cls, doc: dict) -> "Budget":
        return cls(mode=doc["mode"], total=doc["total"], consumed=doc["consumed"])


def temperature_at(budget: Budget, random_fraction: float = RANDOM_FRACTION_DEFAULT) -> float:
    """Temperature for the current consumed fraction of the budget.

    1.0 through the random-search phase, then a linear decay over the
    remaining budget, floored at ``TAU_MIN``.
    """
    f = budget.fraction()
    if f <= random_fraction or random_fraction >= 1.0:
        return 1.0
    return max(TAU_MIN, 1.0 - (f - random_fraction) / (1.0 - random_fraction))


@dataclass
class EvaluationRecord:
    """One settled evaluation: candidate, outcome, and timing."""

    candidate: Candidate
    status: str  # "finished" | "pruned" | "failed"
    value: Optional[float] = None
    intermediates: list[float] = field(default_factory=list)
    started_at: float = 0.0
    ended_at: float = 0.0
    error: Optional[str] = None


class Callbacks:
    """No-op callback base; override the hooks you need.

    Hooks run serially on the controller. An exception raised from a hook
    aborts the search cleanly with the state checkpointed.
    """

    def on_search_start(self, search: "Search") -> None:
        pass

    def on_candidate_issued(self, search: "Search", candidate: Candidate) -> None:
        pass

    def on_evaluated(self, search: "Search", record: EvaluationRecord) -> None:
        pass

    def on_new_best(self, search: "Search", candidate: Candidate, value: float) -> None:
        pass

    def on_search_end(self, search: "Search", result: "SearchResult") -> None:
        pass


def _is_better(value: float, incumbent: Optional[float], direction: str) -> bool:
    if incumbent is None:
        return True
    if direction == "maximize":
        return value > incumbent
    return value < incumbent


def statistics(history: Sequence[EvaluationRecord], direction: str = "maximize", top_k: int = 5) -> dict:
    """Summary statistics over the finished records of a history."""
    finished = [r for r in history if r.status == "finished"]
    if not finished:
        return {"count": 0}
    values = np.array([r.value for r in finished], dtype=float)
    ranked = sorted(finished, key=lambda r: r.value, reverse=(direction == "maximize"))
    return {
        "count": len(finished),
        "mean": float(values.mean()),
        "std": float(values.std()),
        "percentiles": {
            str(p): float(np.percentile(values, p)) for p in (0, 25, 50, 75, 100)
        },
        "top_k": [
            {"params": persist.encode_values(r.candidate.values), "value": r.value}
            for r in ranked[:top_k]
        ],
    }


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, np.ndarray):
        return json.dumps(value.tolist())
    if isinstance(value, (np.integer,)):
        return str(int(value))
    if isinstance(value, (np.floating,)):
        return repr(float(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def history_to_csv(history: Sequence[EvaluationRecord], space: SearchSpace) -> str:
    """History as CSV: id, origin, status, value, one column per parameter
    (name-sorted), then the timestamp columns."""
    names = sorted(space.names())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "origin", "status", "value"] + names + ["started_at", "ended_at"])
    for rec in history:
        row = [rec.candidate.id, rec.candidate.origin, rec.status, _csv_cell(rec.value)]
        row += [_csv_cell(rec.candidate.values.get(n)) for n in names]
        row += [repr(rec.started_at), repr(rec.ended_at)]
        writer.writerow(row)
    return buf.getvalue()


@dataclass
class SearchResult:
    """Outcome of a finished search."""

    best_candidate: Optional[Candidate]
    best_value: Optional[float]
    history: list[EvaluationRecord]
    direction: str
    budget: Optional[Budget]
    seed: int

    @property
    def succeeded(self) -> bool:
        """False when no evaluation finished successfully."""
        return self.best_candidate is not None

    def statistics(self, top_k: int = 5) -> dict:
        return statistics(self.history, direction=self.direction, top_k=top_k)

    def to_json_dict(self) -> dict:
        return {
            "best": (
                {
                    "params": persist.encode_values(self.best_candidate.values),
                    "value": self.best_value,
                }
                if self.best_candidate is not None
                else None
            ),
            "no_successful_evaluation": not self.succeeded,
            "statistics": self.statistics(),
            "budget": self.budget.to_dict() if self.budget else None,
            "direction": self.direction,
            "seed": self.seed,
            "version": ENGINE_VERSION,
        }


def evaluate_candidate(
    objective: Callable[[dict], float],
    values: dict,
    eval_repeats: int = 1,
    pruner: Optional[QuantilePruner] = None,
    direction: str = "maximize",
) -> tuple[str, Optional[float], list[float], Optional[str]]:
    """Evaluate one configuration, with optional repeats and pruning.

    Returns ``(status, value, intermediates, error)``. Objective exceptions
    become a ``failed`` outcome; non-finite values are coerced to ``failed``.
    """
    obj = RepeatedObjective(objective, eval_repeats) if eval_repeats > 1 or pruner else None
    try:
        if obj is not None:
            status, value, intermediates = evaluate_repeated(obj, values, pruner, direction)
        else:
            value = float(objective(values))
            status, intermediates = "finished", [value]
    except Exception as e:  # noqa: BLE001 - objectives are arbitrary user code
        partial = list(getattr(e, "partial_values", []))
        return ("failed", None, partial, f"{type(e).__name__}: {e}")
    if status == "finished" and (value is None or not math.isfinite(value)):
        return ("failed", None, intermediates, f"non-finite objective value {value!r}")
    if status == "pruned":
        return ("pruned", None, intermediates, None)
    return ("finished", value, intermediates, None)


class Search:
    """Two-phase search over a typed parameter space.

    Usable either through :meth:`run` (engine drives the objective) or the
    ask/tell pair :meth:`suggest` / :meth:`report` (caller drives evaluation,
    e.g. the HTTP service).
    """

    def __init__(
        self,
        space: SearchSpace,
        direction: str = "maximize",
        seed: int = 0,
        random_fraction: float = RANDOM_FRACTION_DEFAULT,
        callbacks: Optional[Callbacks] = None,
        checkpoint: Optional[str] = None,
    ):
        if direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
        if not (0.0 <= random_fraction <= 1.0):
            raise ValueError(f"random_fraction must be in [0, 1], got {random_fraction}")
        ensure_valid(space)
        self.space = space
        self.direction = direction
        self.seed = int(seed)
        self.random_fraction = float(random_fraction)
        self.callbacks = callbacks or Callbacks()
        self.rng = Rng(self.seed)
        self.budget: Optional[Budget] = None
        self.best_candidate: Optional[Candidate] = None
        self.best_value: Optional[float] = None
        self.history: list[EvaluationRecord] = []
        self.queue: list[Candidate] = []
        self.pruner: Optional[QuantilePruner] = None
        self._issued: dict[str, tuple[Candidate, float]] = {}
        self._next_id = 0
        self._wall_base = 0.0
        self._wall_started: Optional[float] = None
        self._resumed = False
        self._persister: Optional[persist.Persister] = None
        if checkpoint is not None:
            self.attach(checkpoint)

    # -- persistence -------------------------------------------------------

    def attach(self, path: str) -> str:
        """Attach a checkpoint file or directory.

        An existing file resumes the search from it; a missing file or a
        directory starts fresh (the file is created on the first flush).
        Returns ``"resumed"`` or ``"fresh"``.
        """
        self._persister = persist.Persister(path)
        doc = self._persister.attach()
        if doc is None:
            return "fresh"
        persist.check_space_digest(doc, space_digest(self.space))
        self._restore(doc)
        return "resumed"

    def _restore(self, doc: dict) -> None:
        self.direction = doc["direction"]
        self.random_fraction = doc["random_fraction"]
        self.seed = doc["rng"]["seed"]
        self.rng = Rng.from_state(doc["rng"])
        self.budget = Budget.from_dict(doc["budget"]) if doc["budget"] else None
        if self.budget is not None and self.budget.mode == "wallclock":
            self._wall_base = self.budget.consumed
        self._next_id = doc["next_id"]
        self.history = [persist.decode_record(r) for r in doc["history"]]
        self.queue = [persist.decode_candidate(c) for c in doc["queue"]]
        if doc.get("best") is not None:
            self.best_candidate = persist.decode_candidate(doc["best"]["candidate"])
            self.best_value = doc["best"]["value"]
        if doc.get("pruner") is not None:
            self.pruner = QuantilePruner.from_dict(doc["pruner"])
        self._resumed = True

    def to_checkpoint_dict(self) -> dict:
        self._sync_wallclock()
        return {
            "space_digest": space_digest(self.space),
            "direction": self.direction,
            "random_fraction": self.random_fraction,
            "budget": self.budget.to_dict() if self.budget else None,
            "rng": self.rng.state(),
            "next_id": self._next_id,
            "best": (
                {
                    "candidate": persist.encode_candidate(self.best_candidate),
                    "value": self.best_value,
                }
                if self.best_candidate is not None
                else None
            ),
            "history": [persist.encode_record(r) for r in self.history],
            "queue": [persist.encode_candidate(c) for c in self.queue],
            "pruner": self.pruner.to_dict() if self.pruner else None,
            "created_at": time.time(),
        }

    def _flush(self) -> None:
        if self._persister is not None:
            self._persister.flush(self.to_checkpoint_dict())

    # -- schedule ----------------------------------------------------------

    def _sync_wallclock(self) -> None:
        if (
            self.budget is not None
            and self.budget.mode == "wallclock"
            and self._wall_started is not None
        ):
            self.budget.consumed = self._wall_base + (time.monotonic() - self._wall_started)

    def phase(self) -> str:
        if self.budget is None:
            raise ProtocolError("search not started")
        self._sync_wallclock()
        return "random_search" if self.budget.fraction() < self.random_fraction else "local_search"

    def temperature(self) -> float:
        if self.budget is None:
            raise ProtocolError("search not started")
        self._sync_wallclock()
        return temperature_at(self.budget, self.random_fraction)

    # -- ask/tell ----------------------------------------------------------

    def start(self, steps: Optional[int] = None, runtime: Union[str, float, None] = None) -> None:
        """Fix the budget and open the search.

        On a resumed search the checkpointed budget wins and the arguments
        are ignored.
        """
        if self._resumed and self.budget is not None:
            log.info(
                "resumed from checkpoint: keeping budget %s (start() arguments ignored)",
                self.budget,
            )
        else:
            self.budget = _make_budget(steps, runtime)
        if self.budget.mode == "wallclock":
            self._wall_started = time.monotonic()
        self._run_callback(self.callbacks.on_search_start, self)

    def suggest(self) -> Candidate:
        """Next candidate: queued first, then phase-appropriate sampling."""
        if self.budget is None:
            raise ProtocolError("call start() before suggest()")
        self._sync_wallclock()
        if self.queue:
            candidate = self.queue.pop(0)
        elif self.phase() == "random_search" or self.best_candidate is None:
            candidate = sample_candidate(self.space, self.rng)
        else:
            candidate = mutate_candidate(
                self.space, self.best_candidate, self.temperature(), self.rng
            )
        if not candidate.id:
            candidate = replace(candidate, id=self._new_id())
        self._issued[candidate.id] = (candidate, time.time())
        self._run_callback(self.callbacks.on_candidate_issued, self, candidate)
        return candidate

    def report(
        self,
        candidate: Union[Candidate, str],
        status: str = "finished",
        value: Optional[float] = None,
        intermediates: Optional[list[float]] = None,
        error: Optional[str] = None,
    ) -> EvaluationRecord:
        """Settle one issued candidate and update incumbent, budget, pruner."""
        cid = candidate.id if isinstance(candidate, Candidate) else str(candidate)
        if cid not in self._issued:
            raise ProtocolError(f"unknown candidate id {cid!r}: not issued by this search")
        issued, started_at = self._issued.pop(cid)
        if status == "finished" and (value is None or not math.isfinite(float(value))):
            status, error, value = "failed", f"non-finite objective value {value!r}", None
        record = EvaluationRecord(
            candidate=issued,
            status=status,
            value=float(value) if status == "finished" else None,
            intermediates=list(intermediates or ()),
            started_at=started_at,
            ended_at=time.time(),
            error=error,
        )
        self.history.append(record)
        if self.budget is not None and self.budget.mode == "steps":
            self.budget.consumed += 1
        self._sync_wallclock()
        if self.pruner is not None and record.intermediates:
            self.pruner.observe_trial(record.intermediates)
        new_best = False
        if record.status == "finished" and _is_better(record.value, self.best_value, self.direction):
            self.best_candidate, self.best_value = issued, record.value
            new_best = True
        self._flush()
        self._run_callback(self.callbacks.on_evaluated, self, record)
        if new_best:
            self._run_callback(self.callbacks.on_new_best, self, issued, record.value)
        return record

    def enqueue(self, partial_values: dict) -> Candidate:
        """Queue a user-supplied configuration; missing parameters are filled
        by uniform sampling. Validation failures leave the state unchanged."""
        unknown = [n for n in partial_values if n not in self.space]
        if unknown:
            raise SpaceError(f"unknown parameters in enqueue: {unknown}")
        bad = [
            n
            for n, v in partial_values.items()
            if not _value_ok(self.space, n, v)
        ]
        if bad:
            raise SpaceError(
                "out-of-domain values in enqueue: "
                + "; ".join(f"{n}={partial_values[n]!r}" for n in bad)
            )
        values = dict(partial_values)
        for name, spec in self.space.items():
            if name not in values:
                values[name] = sample(spec, self.rng)
        candidate = Candidate(values=values, origin="queued", id=self._new_id())
        self.queue.append(candidate)
        return candidate

    def should_continue(self) -> bool:
        """True while queued candidates remain or the budget is not exhausted."""
        if self.budget is None:
            return False
        self._sync_wallclock()
        return bool(self.queue) or not self.budget.exhausted()

    # -- driving loop ------------------------------------------------------

    def run(
        self,
        objective: Callable[[dict], float],
        steps: Optional[int] = None,
        runtime: Union[str, float, None] = None,
        workers: Union[int, str] = 1,
        pruner: Optional[QuantilePruner] = None,
        eval_repeats: int = 1,
    ) -> SearchResult:
        """Run the search to budget exhaustion and return the result.

        ``workers`` accepts an integer or a worker-count string ("auto",
        "per-gpu", "2x per-gpu"); more than one worker evaluates candidates
        in parallel processes.
        """
        from . import exec as exec_mod  # local import to avoid a cycle

        if pruner is not None:
            self.pruner = pruner
        spec = exec_mod.resolve_workers(workers)
        self.start(steps=steps, runtime=runtime)
        if spec.resolved > 1:
            exec_mod.run_parallel(self, objective, spec, eval_repeats=eval_repeats)
        else:
            if spec.device_bindings:
                import os

                os.environ["CUDA_VISIBLE_DEVICES"] = spec.device_bindings[0]
            while self.should_continue():
                candidate = self.suggest()
                snapshot = self.pruner.snapshot() if self.pruner is not None else None
                status, value, intermediates, error = evaluate_candidate(
                    objective, candidate.values, eval_repeats, snapshot, self.direction
                )
                self.report(
                    candidate, status=status, value=value, intermediates=intermediates, error=error
                )
        return self.finish()

    def finish(self) -> SearchResult:
        """Final flush, end-of-search callback, and result assembly."""
        self._flush()
        result = self.result()
        self._run_callback(self.callbacks.on_search_end, self, result)
        return result

    def result(self) -> SearchResult:
        return SearchResult(
            best_candidate=self.best_candidate,
            best_value=self.best_value,
            history=list(self.history),
            direction=self.direction,
            budget=self.budget,
            seed=self.seed,
        )

    def statistics(self, top_k: int = 5) -> dict:
        return statistics(self.history, direction=self.direction, top_k=top_k)

    # -- internals ---------------------------------------------------------

    def _new_id(self) -> str:
        cid = f"c{self._next_id:06d}"
        self._next_id += 1
        return cid

    def _run_callback(self, hook, *args) -> None:
        try:
            hook(*args)
        except Exception as e:
            self._flush()
            raise SearchAborted(f"callback {hook.__name__} failed: {e}") from e


def _value_ok(space: SearchSpace, name: str, value) -> bool:
    from .space import contains

    return contains(space[name], value)


def _make_budget(steps: Optional[int], runtime: Union[str, float, None]) -> Budget:
    if (steps is None) == (runtime is None):
        raise ValueError("exactly one of steps= or runtime= must be given")
    if steps is not None:
        if steps < 0:
            raise ValueError(f"steps budget must be >= 0, got {steps}")
        return Budget(mode="steps", total=float(steps))
    if isinstance(runtime, str):
        mode, amount = parse_run_args(runtime)
        if mode == "steps":
            return Budget(mode="steps", total=float(amount))
        return Budget(mode="wallclock", total=float(amount))
    return Budget(mode="wallclock", total=float(runtime))
