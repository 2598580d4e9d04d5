"""Rank-flip check between precision on critical objects and on all objects."""

import logging
from itertools import combinations
from typing import Any, Mapping, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core import Dataset, Detection, EvaluationError
from src.importance import ImportanceRecord
from src.metrics import EvalConfig, critical_subset, evaluate, evaluate_filtered

logger = logging.getLogger(__name__)


class DetectorPrecision(BaseModel):
    """
    Precision of one detector on the critical subset I, on all annotations A
    of the evaluable images, and on the complement A \\ I.

    `metrics` holds the full metric set on the critical subset.
    """

    name: str
    critical: float
    full: float
    complement: Optional[float] = None
    metrics: dict[str, Optional[float]] = Field(default_factory=dict)

    model_config = ConfigDict(frozen=True)


class PairFlip(BaseModel):
    """Ordering of two detectors under I and under A (1: first ahead, -1: second ahead, 0: tie)."""

    first: str
    second: str
    critical_order: int
    full_order: int

    model_config = ConfigDict(frozen=True)

    @property
    def flipped(self) -> bool:
        return self.critical_order * self.full_order < 0


class MisalignmentReport(BaseModel):
    threshold: float
    metric: str
    detectors: list[DetectorPrecision]
    pairs: list[PairFlip]

    model_config = ConfigDict(frozen=True)

    @property
    def misaligned(self) -> bool:
        return any(p.flipped for p in self.pairs)

    def ranking(self, level: str) -> list[str]:
        """Detector names best-first by `level` ("critical" or "full"); ties keep input order."""
        values = np.array([getattr(d, level) for d in self.detectors], dtype=float)
        return [self.detectors[i].name for i in np.argsort(-values, kind="stable")]

    def to_json(self) -> dict[str, Any]:
        return {
            "threshold": self.threshold,
            "metric": self.metric,
            "misaligned": self.misaligned,
            "ranking_critical": self.ranking("critical"),
            "ranking_full": self.ranking("full"),
            "detectors": [d.model_dump() for d in self.detectors],
            "pairs": [{**p.model_dump(), "flipped": p.flipped} for p in self.pairs],
        }


def _order(a: float, b: float) -> int:
    return int(np.sign(a - b))


def misalignment_check(
    det_sets: Mapping[str, Sequence[Detection]],
    ds: Dataset,
    records: Sequence[ImportanceRecord],
    threshold: float,
    cfg: Optional[EvalConfig] = None,
    metric: str = "map50",
) -> MisalignmentReport:
    """
    Compare detector rankings by `metric` on the critical subset at
    `threshold` against rankings on every annotation of the evaluable images.

    A pair is flipped only when the two orderings strictly disagree; a tie
    on either side is not a flip.

    Raises:
        EvaluationError: With fewer than two detector submissions, or when
            evaluation itself fails
    """
    if len(det_sets) < 2:
        raise EvaluationError(f"need at least two detector submissions, got {len(det_sets)}")
    cfg = cfg or EvalConfig()
    subset = critical_subset(ds, records, threshold)
    if not subset.image_ids:
        raise EvaluationError("no evaluable images")

    detectors = []
    for name, dets in det_sets.items():
        critical = evaluate_filtered(dets, ds, records, threshold, cfg)
        full = evaluate(dets, ds, cfg, image_ids=subset.image_ids)
        try:
            complement = evaluate_filtered(dets, ds, records, threshold, cfg, complement=True)
            complement_value = complement.metrics()[metric]
        except EvaluationError:
            logger.info("No annotations outside the critical subset at T=%s", threshold)
            complement_value = None
        detectors.append(
            DetectorPrecision(
                name=name,
                critical=_required(critical.metrics()[metric], metric),
                full=_required(full.metrics()[metric], metric),
                complement=complement_value,
                metrics=critical.metrics(),
            )
        )

    pairs = [
        PairFlip(
            first=a.name,
            second=b.name,
            critical_order=_order(a.critical, b.critical),
            full_order=_order(a.full, b.full),
        )
        for a, b in combinations(detectors, 2)
    ]
    report = MisalignmentReport(threshold=threshold, metric=metric, detectors=detectors, pairs=pairs)
    if report.misaligned:
        logger.warning("Detector ranking flips at T=%s", threshold)
    return report


def _required(value: Optional[float], metric: str) -> float:
    if value is None:
        raise EvaluationError(f"metric {metric} is undefined under this evaluation config")
    return value
