"""Reader and writer for importance score files."""

from pathlib import Path
from typing import Any, Iterable, Optional

from pydantic import ValidationError

from src.core import DatasetFormatError
from src.importance import ImportanceRecord

from .base import DataAdapter
from .writers import write_json


class ImportanceAdapter(DataAdapter[list[ImportanceRecord]]):
    """
    Adapter for importance files.

    Accepts either a bare JSON array of records or an object
    {"config": {...}, "records": [...]}, where each record is
    {"image_id", "skipped", "reason"?, "scores": [{"annotation_id", "i_o", "i_p"}]}.
    Records are returned sorted by image id.
    """

    def load(self) -> list[ImportanceRecord]:
        data = self._read_json()
        if isinstance(data, dict):
            self._require_keys(data, ("records",))
            data = data["records"]
        if not isinstance(data, list):
            raise DatasetFormatError(f"{self.data_path}: expected a list of importance records")

        records = []
        for index, raw in enumerate(data):
            try:
                records.append(ImportanceRecord.model_validate(raw))
            except ValidationError as e:
                raise DatasetFormatError(
                    f"{self.data_path}: invalid importance record #{index}: {e}"
                ) from e
        image_ids = [r.image_id for r in records]
        if len(set(image_ids)) != len(image_ids):
            raise DatasetFormatError(f"{self.data_path}: duplicate image ids in importance records")
        return sorted(records, key=lambda r: r.image_id)


def load_importance(path: str | Path) -> list[ImportanceRecord]:
    return ImportanceAdapter(data_path=path).load()


def write_importance(
    records: Iterable[ImportanceRecord], path: str | Path, config: Optional[dict[str, Any]] = None
) -> None:
    """Write records sorted by image id, scores sorted by annotation id."""
    ordered = []
    for rec in sorted(records, key=lambda r: r.image_id):
        data = rec.to_json()
        data["scores"] = sorted(data["scores"], key=lambda s: s["annotation_id"])
        ordered.append(data)
    write_json({"config": config or {}, "records": ordered}, path)
