"""Shared exception types."""


class HoptError(Exception):
    """Base class for all package errors."""


class SpaceError(HoptError, ValueError):
    """Invalid search space definition or out-of-domain value."""


class FormatError(SpaceError):
    """Malformed quantization format string."""


class ParseError(HoptError, ValueError):
    """Malformed duration / budget / worker-count string."""


class ProtocolError(HoptError, RuntimeError):
    """Ask/tell protocol violation, e.g. reporting an unknown candidate id."""


class CheckpointError(HoptError, RuntimeError):
    """Unreadable, version-mismatched, or space-mismatched checkpoint."""


class SearchAborted(HoptError, RuntimeError):
    """Search stopped early (callback failure, worker-pool collapse, flush failure)."""


class NoSuccessfulEvaluation(HoptError, RuntimeError):
    """Every evaluation failed or was pruned; no incumbent exists."""
