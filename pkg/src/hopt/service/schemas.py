"""Pydantic request/response models for the HTTP ask/tell service."""
from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class SpaceValidateRequest(BaseModel):
    space: dict[str, Any]


class SpaceValidateResponse(BaseModel):
    valid: bool
    violations: list[str]


class CreateSessionRequest(BaseModel):
    space: dict[str, Any]
    direction: str = "maximize"
    steps: Optional[int] = None
    runtime: Optional[str] = None
    seed: int = 0
    random_fraction: float = 0.25
    prune_quantile: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    checkpoint: Optional[str] = None


class SessionInfo(BaseModel):
    session_id: str
    direction: str
    seed: int
    random_fraction: float
    budget_mode: str
    budget_total: float
    budget_consumed: float
    phase: str
    temperature: float
    queue_length: int
    history_length: int
    best_value: Optional[float] = None
    resumed: bool = False


class SuggestResponse(BaseModel):
    candidate_id: str
    values: dict[str, Any]
    origin: str
    phase: str
    temperature: float


class ReportRequest(BaseModel):
    candidate_id: str
    status: str = "finished"  # finished | pruned | failed
    value: Optional[float] = None
    intermediates: Optional[list[float]] = None
    error: Optional[str] = None


class ReportResponse(BaseModel):
    candidate_id: str
    status: str
    new_best: bool
    best_value: Optional[float] = None
    budget_consumed: float
    budget_total: float
    exhausted: bool


class EnqueueRequest(BaseModel):
    values: dict[str, Any]


class EnqueueResponse(BaseModel):
    candidate_id: str
    values: dict[str, Any]
    queue_length: int


class ResultResponse(BaseModel):
    best: Optional[dict[str, Any]] = None
    no_successful_evaluation: bool
    statistics: dict[str, Any]
    budget: Optional[dict[str, Any]] = None
    direction: str
    seed: int
    version: str


class ErrorResponse(BaseModel):
    detail: str
