"""hopt: gradient-free black-box optimization with a two-phase sampler.

Phase 1 explores with uniform random search; phase 2 exploits by perturbing
the incumbent with temperature-annealed noise. Ships with typed search
spaces, pruning for noisy objectives, parallel evaluation, crash-safe
checkpointing, a CLI benchmark harness, and an HTTP ask/tell service.
"""
from .engine import (
    Budget,
    Callbacks,
    EvaluationRecord,
    Search,
    SearchResult,
    history_to_csv,
    statistics,
    temperature_at,
)
from .errors import (
    CheckpointError,
    FormatError,
    HoptError,
    ParseError,
    ProtocolError,
    SearchAborted,
    SpaceError,
)
from .objectives import get_objective
from .pruning import QuantilePruner, RepeatedObjective
from .sampling import Rng, mutate, mutate_candidate, quantize, sample, sample_candidate
from .space import (
    Candidate,
    ChoiceSpec,
    CustomSpec,
    FloatSpec,
    IntSpec,
    SearchSpace,
    contains,
    parse_format,
    space_from_json,
    validate_space,
)
from .util import Duration, parse_duration, parse_run_args

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "Callbacks",
    "Candidate",
    "CheckpointError",
    "ChoiceSpec",
    "CustomSpec",
    "Duration",
    "EvaluationRecord",
    "FloatSpec",
    "FormatError",
    "HoptError",
    "IntSpec",
    "ParseError",
    "ProtocolError",
    "QuantilePruner",
    "RepeatedObjective",
    "Rng",
    "Search",
    "SearchAborted",
    "SearchResult",
    "SearchSpace",
    "SpaceError",
    "contains",
    "get_objective",
    "history_to_csv",
    "mutate",
    "mutate_candidate",
    "parse_duration",
    "parse_format",
    "parse_run_args",
    "quantize",
    "sample",
    "sample_candidate",
    "space_from_json",
    "statistics",
    "temperature_at",
    "validate_space",
]
