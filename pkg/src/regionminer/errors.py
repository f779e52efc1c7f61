"""Exception types raised across the package."""


class RegionMinerError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(RegionMinerError):
    """Malformed input data (trace-log text, XES, PNML)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GraphRepairError(RegionMinerError):
    """A causal graph could not be repaired to satisfy the path property."""


class ReplayError(RegionMinerError):
    """A trace cannot be mapped onto a net (unknown or ambiguous label)."""


class SolverError(RegionMinerError):
    """Malformed solver input or exceeded enumeration budget."""
