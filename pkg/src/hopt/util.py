"""Human-friendly argument parsing: durations and run budgets."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import ParseError

__all__ = ["Duration", "parse_duration", "parse_run_args", "format_duration"]

# "m" means minutes (not months), matching common schedulers.
_UNIT_SECONDS = {
    "s": 1.0,
    "sec": 1.0,
    "seconds": 1.0,
    "second": 1.0,
    "min": 60.0,
    "m": 60.0,
    "minute": 60.0,
    "minutes": 60.0,
    "h": 3600.0,
    "hr": 3600.0,
    "hour": 3600.0,
    "hours": 3600.0,
    "d": 86400.0,
    "day": 86400.0,
    "days": 86400.0,
}

_TERM_RE = re.compile(r"\s*(\d+(?:\.\d+)?)\s*([a-zA-Z]*)")


@dataclass(frozen=True)
class Duration:
    seconds: float

    def __post_init__(self):
        if not math.isfinite(self.seconds) or self.seconds < 0:
            raise ParseError(f"duration must be finite and non-negative, got {self.seconds}")


def parse_duration(s: str) -> Duration:
    """Parse a duration string like ``"90s"``, ``"1h 30min"``, or ``"0.5d"``.

    Terms are ``<number> <unit>`` (whitespace optional) with unit in
    seconds/minutes/hours/days (case-insensitive) and sum together; a bare
    number means seconds.
    """
    if not isinstance(s, str) or not s.strip():
        raise ParseError("empty duration string")
    text = s.strip()
    total = 0.0
    pos = 0
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if m is None:
            offending = text[pos:].split()[0]
            raise ParseError(
                f"cannot parse duration term {offending!r}: expected '<number> <unit>' with "
                "unit one of s/sec/seconds, min/m, h/hr/hours, d/days"
            )
        number = float(m.group(1))
        unit = m.group(2).lower()
        if unit and unit not in _UNIT_SECONDS:
            raise ParseError(f"unknown time unit {m.group(2)!r} in {s!r}")
        total += number * (_UNIT_SECONDS[unit] if unit else 1.0)
        pos = m.end()
    return Duration(seconds=total)


def format_duration(d: Duration) -> str:
    """Inverse-friendly rendering: plain seconds."""
    seconds = d.seconds
    if seconds == int(seconds):
        return f"{int(seconds)}s"
    return f"{seconds}s"


_STEPS_RE = re.compile(r"^(\d+)\s*steps?$", re.IGNORECASE)


def parse_run_args(runtime_or_steps: str):
    """Parse a run budget string into ``("wallclock", seconds)`` or
    ``("steps", count)``.

    Duration-grammar strings ("30min", "2h") become wall-clock budgets;
    "N steps" becomes a step budget.
    """
    if not isinstance(runtime_or_steps, str) or not runtime_or_steps.strip():
        raise ParseError("empty budget string")
    s = runtime_or_steps.strip()
    m = _STEPS_RE.match(s)
    if m is not None:
        return ("steps", int(m.group(1)))
    try:
        return ("wallclock", parse_duration(s).seconds)
    except ParseError as e:
        raise ParseError(
            f"cannot parse budget {s!r}: expected either a duration "
            "('90s', '1h 30min', '0.5d') or a step count ('300 steps')"
        ) from e
