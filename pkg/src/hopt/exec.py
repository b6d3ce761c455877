"""Parallel candidate evaluation: worker-count resolution, per-worker device
visibility, and the asynchronous issue/settle loop.

One controller process owns sampling, scheduling, and callbacks; N forked
worker processes evaluate candidates and stream results back in completion
order. Each worker exports its device binding as its private
``CUDA_VISIBLE_DEVICES`` before evaluating anything.
"""
from __future__ import annotations

import logging
import multiprocessing as mp
import os
import re
import shutil
import subprocess
import time
from dataclasses import dataclass
from queue import Empty
from typing import Callable, Optional, Union

from .engine import Search, evaluate_candidate
from .errors import ParseError, SearchAborted

log = logging.getLogger(__name__)

__all__ = ["WorkerSpec", "resolve_workers", "run_parallel"]

DEVICE_ENV_VAR = "CUDA_VISIBLE_DEVICES"
MAX_CONSECUTIVE_CRASHES = 3

_PER_GPU_RE = re.compile(r"^(?:(\d+)\s*x\s*)?per-gpu$", re.IGNORECASE)


@dataclass(frozen=True)
class WorkerSpec:
    """Resolved worker pool shape."""

    raw: Union[str, int]
    resolved: int
    device_bindings: Optional[tuple[str, ...]] = None


def _detect_devices(env: dict) -> list[str]:
    visible = env.get(DEVICE_ENV_VAR)
    if visible is not None:
        ids = [tok.strip() for tok in visible.split(",") if tok.strip()]
        return ids
    if shutil.which("nvidia-smi"):
        try:
            out = subprocess.run(
                ["nvidia-smi", "-L"], capture_output=True, text=True, timeout=10, check=True
            ).stdout
            n = sum(1 for line in out.splitlines() if line.strip().startswith("GPU "))
            return [str(i) for i in range(n)]
        except (subprocess.SubprocessError, OSError):
            return []
    return []


def resolve_workers(raw: Union[str, int], env: Optional[dict] = None) -> WorkerSpec:
    """Resolve a worker-count argument into a concrete pool shape.

    Accepts a positive integer, "auto" (logical CPU count), "per-gpu"
    (one worker per visible accelerator, each bound to one device id), or
    "Nx per-gpu" (N workers per device).
    """
    env = dict(os.environ) if env is None else env
    if isinstance(raw, bool):
        raise ParseError(f"invalid worker count {raw!r}")
    if isinstance(raw, int):
        if raw < 1:
            raise ParseError(f"worker count must be a positive integer, got {raw}")
        return WorkerSpec(raw=raw, resolved=raw)
    s = str(raw).strip()
    if re.fullmatch(r"[+-]?\d+", s):
        return resolve_workers(int(s), env)
    if s.lower() == "auto":
        return WorkerSpec(raw=raw, resolved=os.cpu_count() or 1)
    m = _PER_GPU_RE.match(s)
    if m is not None:
        per = int(m.group(1)) if m.group(1) else 1
        if per < 1:
            raise ParseError(f"invalid multiplier in worker spec {raw!r}")
        devices = _detect_devices(env)
        if not devices:
            raise ParseError(
                f"worker spec {raw!r} needs visible accelerators, but none were found "
                f"({DEVICE_ENV_VAR} unset/empty and no device query available)"
            )
        bindings = tuple(d for d in devices for _ in range(per))
        return WorkerSpec(raw=raw, resolved=len(bindings), device_bindings=bindings)
    raise ParseError(
        f"cannot parse worker count {raw!r}: expected a positive integer, "
        "'auto', 'per-gpu', or 'Nx per-gpu'"
    )


# ---------------------------------------------------------------------------
# Worker pool
# ---------------------------------------------------------------------------

def _worker_main(worker_idx, task_q, result_q, objective, binding, eval_repeats, direction):
    if binding is not None:
        os.environ[DEVICE_ENV_VAR] = binding
    while True:
        task = task_q.get()
        if task is None:
            return
        cid, values, pruner = task
        status, value, intermediates, error = evaluate_candidate(
            objective, values, eval_repeats, pruner, direction
        )
        result_q.put((worker_idx, cid, status, value, intermediates, error))


class _Pool:
    """Forked worker processes with one task queue each and a shared result queue."""

    def __init__(self, spec: WorkerSpec, objective, eval_repeats, direction):
        self.ctx = mp.get_context("fork")
        self.spec = spec
        self.objective = objective
        self.eval_repeats = eval_repeats
        self.direction = direction
        self.result_q = self.ctx.Queue()
        self.task_qs = [self.ctx.Queue() for _ in range(spec.resolved)]
        self.procs: list = [None] * spec.resolved
        self.busy: dict[int, str] = {}  # worker idx -> in-flight candidate id
        for i in range(spec.resolved):
            self._spawn(i)

    def _binding(self, i: int) -> Optional[str]:
        return self.spec.device_bindings[i] if self.spec.device_bindings else None

    def _spawn(self, i: int) -> None:
        proc = self.ctx.Process(
            target=_worker_main,
            args=(
                i,
                self.task_qs[i],
                self.result_q,
                self.objective,
                self._binding(i),
                self.eval_repeats,
                self.direction,
            ),
            daemon=True,
        )
        proc.start()
        self.procs[i] = proc

    def idle_workers(self) -> list[int]:
        return [i for i in range(self.spec.resolved) if i not in self.busy]

    def submit(self, worker_idx: int, cid: str, values: dict, pruner) -> None:
        if not self.procs[worker_idx].is_alive():
            self._spawn(worker_idx)
        self.task_qs[worker_idx].put((cid, values, pruner))
        self.busy[worker_idx] = cid

    def poll(self, timeout: float = 0.05):
        try:
            return self.result_q.get(timeout=timeout)
        except Empty:
            return None

    def dead_busy_workers(self) -> list[int]:
        return [i for i in self.busy if not self.procs[i].is_alive()]

    def restart(self, worker_idx: int) -> None:
        self.busy.pop(worker_idx, None)
        proc = self.procs[worker_idx]
        if proc.is_alive():
            proc.terminate()
        proc.join(timeout=5)
        self._spawn(worker_idx)

    def shutdown(self) -> None:
        for q in self.task_qs:
            try:
                q.put(None)
            except (OSError, ValueError):
                pass
        deadline = time.monotonic() + 5
        for proc in self.procs:
            proc.join(timeout=max(0.0, deadline - time.monotonic()))
            if proc.is_alive():
                proc.terminate()
                proc.join(timeout=1)


def run_parallel(
    search: Search,
    objective: Callable[[dict], float],
    workers: WorkerSpec,
    eval_repeats: int = 1,
) -> None:
    """Drive an already-started search with a pool of worker processes.

    At most ``workers.resolved`` evaluations are in flight; results are
    reported in completion order. Every issued candidate settles exactly once.
    A crashed worker fails its candidate and is restarted; three consecutive
    crashes abort the search (state checkpointed by the failing report).
    """
    pool = _Pool(workers, objective, eval_repeats, search.direction)
    pending: dict[str, object] = {}  # candidate id -> Candidate
    consecutive_crashes = 0
    try:
        while True:
            while pool.idle_workers() and _can_issue(search, len(pending)):
                candidate = search.suggest()
                snapshot = search.pruner.snapshot() if search.pruner is not None else None
                pool.submit(pool.idle_workers()[0], candidate.id, candidate.values, snapshot)
                pending[candidate.id] = candidate
            if not pending:
                if not _can_issue(search, 0):
                    break
                continue
            item = pool.poll()
            if item is not None:
                worker_idx, cid, status, value, intermediates, error = item
                pool.busy.pop(worker_idx, None)
                pending.pop(cid, None)
                consecutive_crashes = 0
                search.report(
                    cid, status=status, value=value, intermediates=intermediates, error=error
                )
                continue
            for worker_idx in pool.dead_busy_workers():
                cid = pool.busy[worker_idx]
                pending.pop(cid, None)
                consecutive_crashes += 1
                search.report(
                    cid,
                    status="failed",
                    error=f"worker process died (exit code "
                    f"{pool.procs[worker_idx].exitcode})",
                )
                if consecutive_crashes >= MAX_CONSECUTIVE_CRASHES:
                    raise SearchAborted(
                        f"{consecutive_crashes} consecutive worker crashes; aborting"
                    )
                pool.restart(worker_idx)
    finally:
        pool.shutdown()


def _can_issue(search: Search, in_flight: int) -> bool:
    if search.queue:
        return True
    if search.budget is None:
        return False
    if search.budget.mode == "steps":
        return search.budget.consumed + in_flight < search.budget.total
    return search.should_continue()
