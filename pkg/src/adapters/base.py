"""Abstract base class for data adapters."""

import json
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Generic, TypeVar

from src.core import DatasetFormatError

T = TypeVar("T")

logger = logging.getLogger(__name__)


class DataAdapter(ABC, Generic[T]):
    """
    Abstract base class for reading one wire-format file into domain objects.

    All adapters implement load(), which parses the file at `data_path` and
    returns validated domain objects. Records that break a skip-with-warning
    policy are counted in `skipped`; with `strict=True` they raise instead.

    Implementations:
    - CocoAnnotationAdapter: COCO annotation JSON → Dataset
    - CocoCaptionAdapter: COCO captions JSON → {image_id: CaptionSet}
    - CocoDetectionAdapter: COCO results JSON → {image_id: [Detection, ...]}
    - ImportanceAdapter: importance JSON → [ImportanceRecord, ...]
    """

    def __init__(self, data_path: str | Path, strict: bool = False) -> None:
        """
        Initialize the adapter.

        Args:
            data_path: Path to the JSON file
            strict: Turn warn-and-skip policies into hard errors

        Raises:
            FileNotFoundError: If data_path does not exist
        """
        self.data_path = Path(data_path)
        if not self.data_path.exists():
            raise FileNotFoundError(f"data_path {self.data_path} does not exist")
        self.strict = strict
        self.skipped = 0

    @abstractmethod
    def load(self) -> T:
        """
        Parse the source file.

        Raises:
            DatasetFormatError: If the file is malformed or a record is invalid
        """

    def _read_json(self) -> Any:
        try:
            with self.data_path.open(encoding="utf-8") as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise DatasetFormatError(f"{self.data_path}: malformed JSON ({e})") from e

    def _require_keys(self, data: Any, keys: tuple[str, ...]) -> None:
        if not isinstance(data, dict):
            raise DatasetFormatError(f"{self.data_path}: expected a JSON object at top level")
        for key in keys:
            if key not in data:
                raise DatasetFormatError(f"{self.data_path}: missing required key {key!r}")

    def _skip(self, message: str, error: type[Exception] = DatasetFormatError) -> None:
        if self.strict:
            raise error(f"{self.data_path}: {message}")
        self.skipped += 1
        logger.debug("%s: skipping %s", self.data_path, message)
