"""Crash-safe checkpointing: atomic writes, resume, and value serialization.

File format: a one-line header ``HOPPER-CKPT <version>`` followed by a
canonical UTF-8 JSON document. Writes go through a temp file + rename so a
mid-write crash never corrupts the previous checkpoint.
"""
from __future__ import annotations

import base64
import json
import logging
import os
import pickle
import tempfile
import time
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import CheckpointError
from .space import Candidate

log = logging.getLogger(__name__)

__all__ = [
    "MAGIC",
    "VERSION",
    "save",
    "load",
    "Persister",
    "encode_values",
    "decode_values",
    "encode_candidate",
    "decode_candidate",
    "encode_record",
    "decode_record",
    "check_space_digest",
]

MAGIC = "HOPPER-CKPT"
VERSION = 1


# ---------------------------------------------------------------------------
# Value (de)serialization
# ---------------------------------------------------------------------------

def encode_value(v) -> Any:
    if isinstance(v, np.ndarray):
        kind = "int" if np.issubdtype(v.dtype, np.integer) else "float"
        return {"__array__": v.tolist(), "dtype": kind}
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if v is None or isinstance(v, (bool, int, float, str)):
        return v
    if isinstance(v, (list, tuple)):
        try:
            json.dumps(v)
            return list(v)
        except (TypeError, ValueError):
            pass
    # opaque (e.g. custom-spec values): pickle, base64-wrapped
    return {"__pickle__": base64.b64encode(pickle.dumps(v)).decode("ascii")}


def decode_value(v) -> Any:
    if isinstance(v, dict):
        if "__array__" in v:
            dtype = np.int64 if v.get("dtype") == "int" else np.float64
            return np.array(v["__array__"], dtype=dtype)
        if "__pickle__" in v:
            return pickle.loads(base64.b64decode(v["__pickle__"]))
    return v


def encode_values(values: dict) -> dict:
    return {k: encode_value(v) for k, v in values.items()}


def decode_values(values: dict) -> dict:
    return {k: decode_value(v) for k, v in values.items()}


def encode_candidate(c: Candidate) -> dict:
    return {"id": c.id, "origin": c.origin, "values": encode_values(c.values)}


def decode_candidate(doc: dict) -> Candidate:
    return Candidate(values=decode_values(doc["values"]), origin=doc["origin"], id=doc["id"])


def encode_record(rec) -> dict:
    return {
        "candidate": encode_candidate(rec.candidate),
        "status": rec.status,
        "value": rec.value,
        "intermediates": list(rec.intermediates),
        "started_at": rec.started_at,
        "ended_at": rec.ended_at,
        "error": rec.error,
    }


def decode_record(doc: dict):
    from .engine import EvaluationRecord  # deferred: engine imports this module

    return EvaluationRecord(
        candidate=decode_candidate(doc["candidate"]),
        status=doc["status"],
        value=doc["value"],
        intermediates=list(doc["intermediates"]),
        started_at=doc["started_at"],
        ended_at=doc["ended_at"],
        error=doc.get("error"),
    )


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

def save(doc: dict, path: str) -> None:
    """Atomically write a checkpoint document to ``path``."""
    target = Path(path)
    payload = f"{MAGIC} {VERSION}\n" + json.dumps(doc, sort_keys=True, separators=(",", ":"))
    try:
        fd, tmp = tempfile.mkstemp(
            prefix=target.name + ".", suffix=".tmp", dir=str(target.parent)
        )
    except OSError as e:
        raise CheckpointError(f"cannot write checkpoint to {path!r}: {e}") from e
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, target)
    except OSError as e:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise CheckpointError(f"cannot write checkpoint to {path!r}: {e}") from e


def load(path: str) -> dict:
    """Read and validate a checkpoint document.

    A wrong-magic or wrong-version file raises :class:`CheckpointError`
    before any JSON parsing is attempted.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            body = fh.read()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path!r}: {e}") from e
    parts = header.split()
    if len(parts) != 2 or parts[0] != MAGIC:
        raise CheckpointError(f"{path!r} is not a checkpoint file (bad magic header)")
    if parts[1] != str(VERSION):
        raise CheckpointError(
            f"{path!r} has checkpoint version {parts[1]}, this build reads version {VERSION}"
        )
    try:
        return json.loads(body)
    except json.JSONDecodeError as e:
        raise CheckpointError(f"corrupt checkpoint {path!r}: {e}") from e


def check_space_digest(doc: dict, expected: str) -> None:
    found = doc.get("space_digest")
    if found != expected:
        raise CheckpointError(
            f"checkpoint was written for a different search space: "
            f"checkpoint digest {found!r}, current space digest {expected!r}"
        )


class Persister:
    """Owns the checkpoint target path and the per-settlement flush policy.

    Attaching an existing file yields its document for resume; a missing file
    or a directory starts fresh (directories get a new timestamped file).
    A failed flush is retried once, then surfaces as an error.
    """

    def __init__(self, path: str):
        if not path:
            raise CheckpointError("checkpoint path must be non-empty")
        self.raw_path = path
        self.target: Optional[Path] = None

    def attach(self) -> Optional[dict]:
        p = Path(self.raw_path)
        if p.is_dir():
            stamp = time.strftime("%Y%m%d-%H%M%S", time.gmtime())
            self.target = p / f"{stamp}.ckpt"
            n = 1
            while self.target.exists():
                self.target = p / f"{stamp}-{n}.ckpt"
                n += 1
            return None
        self.target = p
        if p.exists():
            return load(str(p))
        return None

    def flush(self, doc: dict) -> None:
        if self.target is None:
            raise CheckpointError("Persister.attach() must be called before flush()")
        try:
            save(doc, str(self.target))
        except CheckpointError:
            log.warning("checkpoint flush to %s failed, retrying once", self.target)
            save(doc, str(self.target))
