"""
Exception hierarchy
===================

Every error raised on purpose by the simulator derives from SimulationError,
so callers (CLI, HTTP API) can tell user errors from crashes.
"""


class SimulationError(Exception):
    """Base class for simulator errors."""


class ConfigurationError(SimulationError):
    """A tree references a predicate or action id nobody registered."""


class TickOrderError(SimulationError):
    """A tree was ticked with a sim_time older than its previous tick."""


class ScenarioParseError(SimulationError):
    """A scenario document did not parse; carries every diagnostic found."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0] if self.diagnostics else None
        summary = str(first) if first else "invalid scenario"
        if len(self.diagnostics) > 1:
            summary += f" (+{len(self.diagnostics) - 1} more)"
        super().__init__(summary)


class ScenarioFault(SimulationError):
    """Runtime fault inside a scenario; aborts the run."""


class MitigationFault(SimulationError):
    """A mitigation step cannot proceed (missing fallback, foreign checkpoint)."""


class UnknownTaskError(SimulationError, KeyError):
    """The task proxy was asked about a task id it never saw."""

    def __str__(self):
        return f"unknown task id: {self.args[0]!r}" if self.args else "unknown task id"


class ExportError(SimulationError):
    """Metrics could not be exported (identity violated or I/O failure)."""
