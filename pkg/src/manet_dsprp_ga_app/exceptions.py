# -*- coding: utf-8 -*-
"""Exception hierarchy shared by every ops package."""

from typing import Optional


class DsprpError(Exception):
    """Root of all errors raised by manet_dsprp_ga_app."""


class ParameterError(DsprpError, ValueError):
    """A parameter or precondition is out of range."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class ConfigurationError(DsprpError, ValueError):
    """Bad, unknown or missing experiment configuration key."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class TopologyParseError(DsprpError, ValueError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class TopologyValidationError(DsprpError, ValueError):
    """A snapshot violates a structural invariant (bad endpoint, cost <= 0, ...)."""


class PathGenerationError(DsprpError):
    """The random walk exhausted its restart budget."""


class ConnectivityError(DsprpError):
    """No s-d connected environment could be drawn within the retry budget."""


class EnumerationLimitError(DsprpError):
    """Brute-force path enumeration refused because the graph is too large."""


class ExperimentInvariantError(DsprpError):
    pass
