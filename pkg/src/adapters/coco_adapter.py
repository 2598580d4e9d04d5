"""Adapters for the COCO annotation, caption and detection-result formats."""

import logging
from collections import defaultdict
from pathlib import Path
from typing import Any, Mapping, Optional

from pydantic import ValidationError

from src.core import (
    Annotation,
    BBox,
    CaptionSet,
    Category,
    Dataset,
    DatasetFormatError,
    Detection,
    ImageInfo,
    ReferentialError,
    check_references,
)

from .base import DataAdapter

logger = logging.getLogger(__name__)

PASSTHROUGH_KEYS = ("info", "licenses")


class CocoAnnotationAdapter(DataAdapter[Dataset]):
    """
    Adapter for COCO annotation files.

    Expects JSON with structure:
    {
        "images": [{"id": 1, "width": 640, "height": 480, ...}],
        "annotations": [{"id": 7, "image_id": 1, "category_id": 18, "bbox": [x, y, w, h], ...}],
        "categories": [{"id": 18, "name": "dog", ...}]
    }

    Annotations with degenerate boxes (w <= 0 or h <= 0) are skipped and counted.

    Usage:
        dataset = CocoAnnotationAdapter(data_path="instances_val2017.json").load()
    """

    def load(self) -> Dataset:
        data = self._read_json()
        self._require_keys(data, ("images", "annotations", "categories"))

        categories = [self._convert_category(i, c) for i, c in enumerate(data["categories"])]
        images = [self._convert_image(i, img) for i, img in enumerate(data["images"])]
        annotations = []
        for index, record in enumerate(data["annotations"]):
            ann = self._convert_annotation(index, record)
            if ann is not None:
                annotations.append(ann)

        if self.skipped:
            logger.warning("%s: skipped %d degenerate annotation boxes", self.data_path, self.skipped)

        check_references(categories, images, annotations)
        passthrough = {k: data[k] for k in PASSTHROUGH_KEYS if k in data}
        passthrough["categories"] = data["categories"]
        return Dataset(
            categories=categories,
            images=images,
            annotations=annotations,
            passthrough=passthrough,
            skipped_annotations=self.skipped,
        )

    def _convert_category(self, index: int, record: Any) -> Category:
        try:
            return Category(id=record["id"], name=record["name"])
        except (KeyError, TypeError, ValidationError) as e:
            raise DatasetFormatError(f"{self.data_path}: invalid category #{index}: {e}") from e

    def _convert_image(self, index: int, record: Any) -> ImageInfo:
        try:
            return ImageInfo(**record)
        except (TypeError, ValidationError) as e:
            raise DatasetFormatError(f"{self.data_path}: invalid image #{index}: {e}") from e

    def _convert_annotation(self, index: int, record: Any) -> Optional[Annotation]:
        if not isinstance(record, dict):
            raise DatasetFormatError(f"{self.data_path}: annotation #{index} is not an object")
        missing = [k for k in ("id", "image_id", "category_id", "bbox") if k not in record]
        if missing:
            raise DatasetFormatError(f"{self.data_path}: annotation #{index} missing keys {missing}")
        bbox = _parse_bbox(self.data_path, f"annotation id {record['id']}", record["bbox"])
        if bbox is None:
            self._skip(f"annotation id {record['id']} has degenerate bbox {record['bbox']}")
            return None
        try:
            return Annotation(**{**record, "bbox": bbox})
        except ValidationError as e:
            raise DatasetFormatError(
                f"{self.data_path}: invalid annotation id {record['id']}: {e}"
            ) from e


class CocoCaptionAdapter(DataAdapter[dict[int, CaptionSet]]):
    """
    Adapter for COCO caption files: {"annotations": [{"image_id", "caption", "tokens"?}, ...]}.

    Captions are grouped per image in file order and kept verbatim. An optional
    "tokens" list on a record carries externally tagged tokens for that caption.
    """

    def load(self) -> dict[int, CaptionSet]:
        data = self._read_json()
        self._require_keys(data, ("annotations",))

        grouped: dict[int, CaptionSet] = {}
        for index, record in enumerate(data["annotations"]):
            try:
                image_id = int(record["image_id"])
                caption = str(record["caption"])
            except (KeyError, TypeError, ValueError) as e:
                raise DatasetFormatError(
                    f"{self.data_path}: caption record #{index} invalid: {e}"
                ) from e
            tokens = record.get("tokens")
            if tokens is not None and not isinstance(tokens, list):
                raise DatasetFormatError(f"{self.data_path}: caption #{index} tokens must be a list")
            if image_id not in grouped:
                grouped[image_id] = CaptionSet(image_id=image_id)
            grouped[image_id].add(caption, [str(t) for t in tokens] if tokens is not None else None)

        return dict(sorted(grouped.items()))


class CocoDetectionAdapter(DataAdapter[dict[int, list[Detection]]]):
    """
    Adapter for COCO detection results: [{"image_id", "category_id", "bbox", "score"}, ...].

    Detections are grouped per image and sorted by score descending; ties keep
    file order. Unknown category ids and degenerate boxes are skipped with a
    warning (errors under strict mode). Out-of-range scores are always errors.
    """

    def __init__(self, data_path: str | Path, vocab: Mapping[int, Any], strict: bool = False):
        super().__init__(data_path, strict=strict)
        self.vocab = vocab

    def load(self) -> dict[int, list[Detection]]:
        data = self._read_json()
        if not isinstance(data, list):
            raise DatasetFormatError(f"{self.data_path}: expected a JSON list of detections")

        grouped: dict[int, list[Detection]] = defaultdict(list)
        unknown: set[int] = set()
        for index, record in enumerate(data):
            det = self._convert_detection(index, record, unknown)
            if det is not None:
                grouped[det.image_id].append(det)

        if unknown:
            logger.warning(
                "%s: skipped detections with unknown category ids %s", self.data_path, sorted(unknown)
            )
        if self.skipped:
            logger.warning("%s: skipped %d detection records", self.data_path, self.skipped)

        return {
            image_id: sorted(dets, key=lambda d: -d.score)
            for image_id, dets in sorted(grouped.items())
        }

    def _convert_detection(self, index: int, record: Any, unknown: set[int]) -> Optional[Detection]:
        if not isinstance(record, dict):
            raise DatasetFormatError(f"{self.data_path}: detection #{index} is not an object")
        missing = [k for k in ("image_id", "category_id", "bbox", "score") if k not in record]
        if missing:
            raise DatasetFormatError(f"{self.data_path}: detection #{index} missing keys {missing}")
        if record["category_id"] not in self.vocab:
            unknown.add(record["category_id"])
            self._skip(
                f"detection #{index} has unknown category id {record['category_id']}",
                ReferentialError,
            )
            return None
        bbox = _parse_bbox(self.data_path, f"detection #{index}", record["bbox"])
        if bbox is None:
            self._skip(f"detection #{index} has degenerate bbox {record['bbox']}")
            return None
        try:
            return Detection(
                image_id=record["image_id"],
                category_id=record["category_id"],
                bbox=bbox,
                score=record["score"],
            )
        except ValidationError as e:
            raise DatasetFormatError(f"{self.data_path}: invalid detection #{index}: {e}") from e


def _parse_bbox(path: Path, label: str, values: Any) -> Optional[BBox]:
    """Parse [x, y, w, h]; None for degenerate or non-finite boxes."""
    if not isinstance(values, (list, tuple)) or len(values) != 4:
        raise DatasetFormatError(f"{path}: {label} bbox must be [x, y, w, h], got {values!r}")
    try:
        return BBox.from_xywh(values)
    except ValidationError:
        return None
    except (TypeError, ValueError) as e:
        raise DatasetFormatError(f"{path}: {label} bbox is not numeric: {values!r}") from e


def load_annotations(path: str | Path, strict: bool = False) -> Dataset:
    return CocoAnnotationAdapter(data_path=path, strict=strict).load()


def load_captions(path: str | Path) -> dict[int, CaptionSet]:
    return CocoCaptionAdapter(data_path=path).load()


def load_detections(
    path: str | Path, vocab: Mapping[int, Any], strict: bool = False
) -> dict[int, list[Detection]]:
    return CocoDetectionAdapter(data_path=path, vocab=vocab, strict=strict).load()
