"""Exception hierarchy shared by all solvers and the scenario runner."""


class DRWError(Exception):
    """Base class for every error raised by drwsim."""


class InvalidMaterial(DRWError, ValueError):
    pass


class InvalidGeometry(DRWError, ValueError):
    pass


class NotFound(DRWError, KeyError):
    pass


class GridTooLarge(DRWError):
    pass


class GridTooCoarse(DRWError):
    pass


class BelowCutoff(DRWError):
    pass


class NoGuidedMode(DRWError):
    pass


class IncompatibleGrids(DRWError, ValueError):
    pass


class InsufficientGrid(DRWError, ValueError):
    pass


class TaperInfeasible(DRWError, ValueError):
    pass


class ConfigError(DRWError, ValueError):
    """Raised for malformed scenario configs; ``key`` and ``location`` name the culprit."""

    def __init__(self, message, key=None, location=None):
        self.key = key
        self.location = location
        where = f" at {location}" if location else ""
        super().__init__(f"{message}{where}")


class UnknownKey(ConfigError):
    pass


class MissingUnit(ConfigError):
    pass


class UnsupportedSchemaVersion(ConfigError):
    pass


class StageError(DRWError):
    """A scenario stage failed; ``stage`` names it and ``__cause__`` holds the original error."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
