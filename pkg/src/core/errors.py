"""Exception hierarchy for contract and input errors."""

from typing import Iterable


class CritselError(ValueError):
    """Base class for every input or contract error the toolkit raises."""


class DatasetFormatError(CritselError):
    """A file is malformed, misses a required key, or holds an invalid record."""


class ReferentialError(CritselError):
    """Records reference ids that do not exist in the companion data."""

    def __init__(self, message: str, ids: Iterable[int] = ()) -> None:
        self.ids = sorted(set(ids))
        if self.ids:
            message = f"{message}: {self.ids[:20]}" + (" ..." if len(self.ids) > 20 else "")
        super().__init__(message)


class EvaluationError(CritselError):
    """An evaluation or analysis cannot be carried out on the given inputs."""


class NoImportanceError(CritselError):
    """Propagated importance summed to zero; the image must be skipped."""


class ConfigError(CritselError):
    """The run configuration is incomplete or contradictory."""
