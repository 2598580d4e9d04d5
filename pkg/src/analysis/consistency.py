"""Agreement between the critical selections of two datasets over shared images."""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from src.core import BBox, Dataset, EvaluationError
from src.geometry import region_iou
from src.importance import ImportanceRecord, check_coverage, removal_fraction, select

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ["threshold", "mean_iou", "removal_fraction", "images_used"]


@dataclass(frozen=True)
class ScoredDataset:
    """
    A dataset together with its importance records.

    Raises:
        ReferentialError: If the records do not describe exactly this dataset
    """

    dataset: Dataset
    records: Sequence[ImportanceRecord]
    _by_image: dict[int, ImportanceRecord] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_by_image", check_coverage(self.dataset, self.records))

    def selected_boxes(self, image_id: int, threshold: float) -> list[BBox]:
        record = self._by_image.get(image_id)
        if record is None:
            return []
        return [self.dataset.annotation(i).bbox for i in sorted(select(record, threshold))]


class ConsistencyCurve(BaseModel):
    """
    Mean region IOU between the two selections as the swept threshold rises.

    `mean_iou[i]` is None when no shared image had a nonempty selection on
    both sides at `thresholds[i]`.
    """

    fixed_threshold: float
    shared_images: int
    thresholds: list[float]
    mean_iou: list[Optional[float]]
    removal_fraction: list[float]
    images_used: list[int]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_lengths(self) -> "ConsistencyCurve":
        n = len(self.thresholds)
        if not (len(self.mean_iou) == len(self.removal_fraction) == len(self.images_used) == n):
            raise ValueError("Curve columns must have one value per threshold")
        return self

    def argmax_threshold(self) -> Optional[float]:
        """Threshold with the highest mean IOU (first on ties)."""
        defined = [(v, -i) for i, v in enumerate(self.mean_iou) if v is not None]
        if not defined:
            return None
        return self.thresholds[-max(defined)[1]]

    def inflection_threshold(self) -> Optional[float]:
        """Threshold where the IOU series has its most negative second difference."""
        if len(self.mean_iou) < 3 or any(v is None for v in self.mean_iou):
            return None
        second = np.diff(np.asarray(self.mean_iou, dtype=float), n=2)
        return self.thresholds[int(np.argmin(second)) + 1]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "threshold": self.thresholds,
                "mean_iou": self.mean_iou,
                "removal_fraction": self.removal_fraction,
                "images_used": self.images_used,
            },
            columns=CURVE_COLUMNS,
        )


def consistency_curve(
    ds_a: ScoredDataset,
    ds_b: ScoredDataset,
    fixed_threshold: float,
    sweep: Sequence[float],
) -> ConsistencyCurve:
    """
    Hold dataset A's selection at `fixed_threshold` and sweep dataset B's
    threshold. For each value the region IOU of the two selections is
    averaged over shared images where both are nonempty; removal is the
    share of B's annotations dropped at that value.

    Raises:
        EvaluationError: If the datasets share no image ids
    """
    shared = sorted(set(ds_a.dataset.image_ids()) & set(ds_b.dataset.image_ids()))
    if not shared:
        raise EvaluationError("datasets share no image ids")
    fixed = {image_id: ds_a.selected_boxes(image_id, fixed_threshold) for image_id in shared}

    means: list[Optional[float]] = []
    removal: list[float] = []
    used: list[int] = []
    for threshold in sweep:
        ious = []
        for image_id in shared:
            boxes_b = ds_b.selected_boxes(image_id, threshold)
            if fixed[image_id] and boxes_b:
                ious.append(region_iou(fixed[image_id], boxes_b))
        excluded = len(shared) - len(ious)
        if excluded:
            logger.debug("T=%s: %d shared images with an empty selection", threshold, excluded)
        means.append(float(np.mean(ious)) if ious else None)
        removal.append(removal_fraction(ds_b.dataset, ds_b.records, threshold))
        used.append(len(ious))

    return ConsistencyCurve(
        fixed_threshold=fixed_threshold,
        shared_images=len(shared),
        thresholds=list(sweep),
        mean_iou=means,
        removal_fraction=removal,
        images_used=used,
    )
