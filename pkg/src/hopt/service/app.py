"""HTTP ask/tell service wrapping the search engine.

Clients create a session from a JSON space document, then alternate
``/suggest`` and ``/report`` while evaluating candidates on their side. The
server owns sampling, scheduling, incumbent tracking, and (optionally)
checkpointing; it never executes objective code.
"""
from __future__ import annotations

import threading
import uuid
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse

from .. import __version__
from ..engine import Search, history_to_csv
from ..errors import CheckpointError, ProtocolError, SpaceError
from ..persist import encode_values
from ..pruning import QuantilePruner
from ..space import space_from_json, validate_space
from . import schemas

__all__ = ["create_app"]


class _Session:
    def __init__(self, search: Search, resumed: bool):
        self.search = search
        self.resumed = resumed
        self.lock = threading.Lock()


def create_app() -> FastAPI:
    app = FastAPI(
        title="hopt",
        version=__version__,
        description="Ask/tell interface to the two-phase black-box optimizer.",
    )
    sessions: dict[str, _Session] = {}

    def _get(session_id: str) -> _Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    @app.post("/spaces/validate", response_model=schemas.SpaceValidateResponse)
    def validate(req: schemas.SpaceValidateRequest) -> schemas.SpaceValidateResponse:
        try:
            space = space_from_json(req.space)
        except SpaceError as e:
            return schemas.SpaceValidateResponse(valid=False, violations=[str(e)])
        violations = validate_space(space)
        return schemas.SpaceValidateResponse(valid=not violations, violations=violations)

    @app.post("/sessions", response_model=schemas.SessionInfo, status_code=201)
    def create_session(req: schemas.CreateSessionRequest) -> schemas.SessionInfo:
        if (req.steps is None) == (req.runtime is None):
            raise HTTPException(
                status_code=422, detail="exactly one of 'steps' or 'runtime' must be set"
            )
        try:
            space = space_from_json(req.space)
            search = Search(
                space,
                direction=req.direction,
                seed=req.seed,
                random_fraction=req.random_fraction,
                checkpoint=req.checkpoint,
            )
            if req.prune_quantile is not None:
                search.pruner = QuantilePruner(q=req.prune_quantile)
            search.start(steps=req.steps, runtime=req.runtime)
        except (SpaceError, CheckpointError, ValueError) as e:
            raise HTTPException(status_code=422, detail=str(e)) from e
        session_id = uuid.uuid4().hex[:12]
        sessions[session_id] = _Session(search, resumed=search._resumed)
        return _info(session_id, sessions[session_id])

    @app.get("/sessions/{session_id}", response_model=schemas.SessionInfo)
    def session_info(session_id: str) -> schemas.SessionInfo:
        return _info(session_id, _get(session_id))

    @app.post("/sessions/{session_id}/suggest", response_model=schemas.SuggestResponse)
    def suggest(session_id: str) -> schemas.SuggestResponse:
        session = _get(session_id)
        with session.lock:
            search = session.search
            if not search.should_continue():
                raise HTTPException(status_code=409, detail="budget exhausted")
            phase = search.phase()
            temperature = search.temperature()
            candidate = search.suggest()
        return schemas.SuggestResponse(
            candidate_id=candidate.id,
            values=encode_values(candidate.values),
            origin=candidate.origin,
            phase=phase,
            temperature=temperature,
        )

    @app.post("/sessions/{session_id}/report", response_model=schemas.ReportResponse)
    def report(session_id: str, req: schemas.ReportRequest) -> schemas.ReportResponse:
        session = _get(session_id)
        with session.lock:
            search = session.search
            previous_best = search.best_value
            try:
                record = search.report(
                    req.candidate_id,
                    status=req.status,
                    value=req.value,
                    intermediates=req.intermediates,
                    error=req.error,
                )
            except ProtocolError as e:
                raise HTTPException(status_code=409, detail=str(e)) from e
            return schemas.ReportResponse(
                candidate_id=req.candidate_id,
                status=record.status,
                new_best=search.best_value != previous_best,
                best_value=search.best_value,
                budget_consumed=search.budget.consumed,
                budget_total=search.budget.total,
                exhausted=not search.should_continue(),
            )

    @app.post("/sessions/{session_id}/enqueue", response_model=schemas.EnqueueResponse)
    def enqueue(session_id: str, req: schemas.EnqueueRequest) -> schemas.EnqueueResponse:
        session = _get(session_id)
        with session.lock:
            try:
                candidate = session.search.enqueue(req.values)
            except SpaceError as e:
                raise HTTPException(status_code=422, detail=str(e)) from e
            return schemas.EnqueueResponse(
                candidate_id=candidate.id,
                values=encode_values(candidate.values),
                queue_length=len(session.search.queue),
            )

    @app.get("/sessions/{session_id}/statistics")
    def session_statistics(session_id: str) -> dict:
        session = _get(session_id)
        with session.lock:
            return session.search.statistics()

    @app.get("/sessions/{session_id}/history.csv", response_class=PlainTextResponse)
    def history_csv(session_id: str) -> str:
        session = _get(session_id)
        with session.lock:
            return history_to_csv(session.search.history, session.search.space)

    @app.get("/sessions/{session_id}/result", response_model=schemas.ResultResponse)
    def result(session_id: str) -> schemas.ResultResponse:
        session = _get(session_id)
        with session.lock:
            return schemas.ResultResponse(**session.search.result().to_json_dict())

    @app.delete("/sessions/{session_id}", status_code=204)
    def close_session(session_id: str) -> None:
        session = _get(session_id)
        with session.lock:
            session.search.finish()
        del sessions[session_id]

    return app


def _info(session_id: str, session: _Session) -> schemas.SessionInfo:
    search = session.search
    return schemas.SessionInfo(
        session_id=session_id,
        direction=search.direction,
        seed=search.seed,
        random_fraction=search.random_fraction,
        budget_mode=search.budget.mode,
        budget_total=search.budget.total,
        budget_consumed=search.budget.consumed,
        phase=search.phase(),
        temperature=search.temperature(),
        queue_length=len(search.queue),
        history_length=len(search.history),
        best_value=search.best_value,
        resumed=session.resumed,
    )
