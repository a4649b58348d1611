"""Exception types shared across the package."""


class AkronError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(AkronError):
    """A CSV file does not match the documented column schema."""


class CsvParseError(AkronError):
    """A CSV cell could not be parsed as a number."""


class EmptyDatasetError(AkronError):
    """An operation that needs data received none."""


class InvalidConfigError(AkronError):
    """A model architecture, training configuration, or grid is invalid."""


class DivergenceError(AkronError):
    """Training produced a non-finite loss.

    Carries the 1-based epoch at which the loss became non-finite.
    """

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"non-finite training loss at epoch {epoch}")


class AllTrialsFailedError(AkronError):
    """Every trial of a repeated-experiment run diverged."""


class ModelFormatError(AkronError):
    """A model file has an unknown format version, kind, or layout."""
