"""Exception hierarchy shared by the solvers, the pipeline steps and the CLI."""


class GeodesicLabError(Exception):
    """Base class for all errors raised by this package."""

    exit_code: int = 1


class ConfigError(GeodesicLabError):
    """Invalid run configuration or unreadable input."""

    exit_code = 2


class SnapshotError(ConfigError):
    """A field snapshot is corrupted or does not match its header."""


class ResolutionError(GeodesicLabError):
    """The grid is too coarse for the requested operation."""


class SolverError(GeodesicLabError):
    """A numerical solve failed."""

    exit_code = 3


class DivergenceError(SolverError):
    """An iteration left its convergence regime."""


class DegenerateError(SolverError):
    """A coefficient, metric or 1-form degenerated."""


class OracleError(SolverError):
    """The two independent oracle methods disagree."""


class AcceptanceError(GeodesicLabError):
    """One or more acceptance criteria failed."""

    exit_code = 4
