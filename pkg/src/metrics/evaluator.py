"""
COCO-protocol evaluation against full or importance-filtered ground truth.

Annotations below the importance threshold are removed outright, not turned
into ignore regions: detections that would have matched them count as false
positives.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core import Dataset, Detection, EvaluationError, ReferentialError
from src.geometry import iou_matrix
from src.importance import ImportanceRecord, check_coverage, select

from .config import EvalConfig
from .matching import greedy_assign
from .precision import interpolated_ap

logger = logging.getLogger(__name__)

METRIC_NAMES = ("map", "map50", "map75", "mar1", "mar10", "mar100", "mar1_50", "f1")


class CategoryMetrics(BaseModel):
    """Per-category AP and recall. `recall` is keyed by detection cap, averaged over γ."""

    category_id: int
    name: str
    gt_count: int
    det_count: int
    ap: float
    ap50: Optional[float] = None
    ap75: Optional[float] = None
    recall: dict[int, float] = Field(default_factory=dict)

    model_config = ConfigDict(frozen=True)


class EvalTotals(BaseModel):
    gt_annotations: int = 0
    detections: int = 0
    images: int = 0
    images_skipped: int = 0
    categories_evaluated: int = 0
    categories_excluded: int = 0

    model_config = ConfigDict(frozen=True)


class MetricsReport(BaseModel):
    """
    The six COCO aggregates plus mAR1_50 and its F1 with mAP50.

    A metric is None when it cannot be defined under the evaluation config
    (for example mAP75 on a grid without 0.75).
    """

    map: Optional[float] = None
    map50: Optional[float] = None
    map75: Optional[float] = None
    mar1: Optional[float] = None
    mar10: Optional[float] = None
    mar100: Optional[float] = None
    mar1_50: Optional[float] = None
    f1: Optional[float] = None
    per_category: list[CategoryMetrics] = Field(default_factory=list)
    totals: EvalTotals = Field(default_factory=EvalTotals)

    model_config = ConfigDict(frozen=True)

    def metrics(self) -> dict[str, Optional[float]]:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def to_json(self, config: Optional[dict[str, Any]] = None) -> dict[str, Any]:
        return {
            "config": config or {},
            "totals": self.totals.model_dump(),
            "metrics": self.metrics(),
            "per_category": [c.model_dump() for c in self.per_category],
        }


def f1_score(map50: Optional[float], mar1_50: Optional[float]) -> Optional[float]:
    """Harmonic mean of mAP50 and mAR1_50; 0 when both are 0."""
    if map50 is None or mar1_50 is None:
        return None
    if map50 + mar1_50 <= 0:
        return 0.0
    return 2 * map50 * mar1_50 / (map50 + mar1_50)


def cap_detections(dets: Sequence[Detection], k: Optional[int]) -> list[Detection]:
    """Keep the k highest-scored detections of each image (stable on ties); None keeps all."""
    if k is None:
        return list(dets)
    by_image: dict[int, list[Detection]] = defaultdict(list)
    for det in dets:
        by_image[det.image_id].append(det)
    kept: list[Detection] = []
    for image_id in sorted(by_image):
        kept.extend(sorted(by_image[image_id], key=lambda d: -d.score)[:k])
    return kept


@dataclass
class _CategoryTrace:
    scores: list[float]
    ranks: list[int]
    flags: list[np.ndarray]


def evaluate(
    detections: Sequence[Detection],
    ds: Dataset,
    cfg: Optional[EvalConfig] = None,
    image_ids: Optional[Iterable[int]] = None,
    images_skipped: int = 0,
) -> MetricsReport:
    """
    Evaluate detections against the annotations of `ds`.

    Each image keeps its top max(max_detections) detections across
    categories; the detection cap k then applies to that per-image ranking.
    Categories without ground truth on the evaluated images are excluded
    from every mean.

    Args:
        detections: Detector output, any order
        ds: Ground truth (full or filtered)
        cfg: Evaluation settings (COCO defaults when None)
        image_ids: Images to evaluate (all dataset images when None)
        images_skipped: Reported in totals only

    Raises:
        ReferentialError: If a detection names a category outside the vocabulary
        EvaluationError: If no category has ground truth ("no categories to evaluate")
    """
    cfg = cfg or EvalConfig()
    images = sorted(set(image_ids)) if image_ids is not None else ds.image_ids()
    image_set = set(images)
    known_images = set(ds.image_ids())

    n_gt: dict[int, int] = defaultdict(int)
    for ann in ds.annotations:
        if ann.image_id in image_set:
            n_gt[ann.category_id] += 1
    categories = [c for c in sorted(ds.categories, key=lambda c: c.id) if n_gt[c.id] > 0]
    if not categories:
        raise EvaluationError("no categories to evaluate")
    included = {c.id for c in categories}

    foreign = [d.category_id for d in detections if d.category_id not in ds.vocabulary]
    if foreign:
        raise ReferentialError("Detections reference categories outside the vocabulary", foreign)
    unknown = sum(d.image_id not in known_images for d in detections)
    if unknown:
        logger.warning("Dropped %d detections on images absent from the annotations", unknown)

    by_image: dict[int, list[Detection]] = defaultdict(list)
    for det in detections:
        if det.image_id in image_set:
            by_image[det.image_id].append(det)

    top_k = cfg.max_detections[-1]
    thresholds = cfg.iou_thresholds
    traces: dict[int, _CategoryTrace] = {c: _CategoryTrace([], [], []) for c in included}
    used = 0
    for image_id in images:
        ranked = sorted(by_image.get(image_id, []), key=lambda d: -d.score)[:top_k]
        used += len(ranked)
        per_category: dict[int, list[tuple[int, Detection]]] = defaultdict(list)
        for rank, det in enumerate(ranked):
            per_category[det.category_id].append((rank, det))
        for category_id, ranked_dets in per_category.items():
            if category_id not in included:
                continue
            gts = ds.annotations_for(image_id, category_id)
            ious = iou_matrix([d.bbox for _, d in ranked_dets], [a.bbox for a in gts])
            flags = np.stack([greedy_assign(ious, gamma) >= 0 for gamma in thresholds])
            trace = traces[category_id]
            trace.scores.extend(d.score for _, d in ranked_dets)
            trace.ranks.extend(rank for rank, _ in ranked_dets)
            trace.flags.append(flags)

    n_t, n_k = len(thresholds), len(cfg.max_detections)
    ap = np.zeros((len(categories), n_t))
    recall = np.zeros((len(categories), n_t, n_k))
    det_counts = []
    for c, category in enumerate(categories):
        trace = traces[category.id]
        det_counts.append(len(trace.scores))
        if not trace.scores:
            continue
        order = np.argsort(-np.asarray(trace.scores, dtype=float), kind="mergesort")
        ranks = np.asarray(trace.ranks)[order]
        flags = np.concatenate(trace.flags, axis=1)[:, order]
        for k_idx, k in enumerate(cfg.max_detections):
            within = ranks < k
            for t_idx in range(n_t):
                value, rc = interpolated_ap(
                    flags[t_idx, within], n_gt[category.id], cfg.recall_points
                )
                recall[c, t_idx, k_idx] = rc
                if k_idx == n_k - 1:
                    ap[c, t_idx] = value

    report = _aggregate(cfg, categories, ap, recall)
    per_category = [
        CategoryMetrics(
            category_id=category.id,
            name=category.name,
            gt_count=n_gt[category.id],
            det_count=det_counts[c],
            ap=float(ap[c].mean()),
            ap50=_at(ap[c], cfg.threshold_index(0.5)),
            ap75=_at(ap[c], cfg.threshold_index(0.75)),
            recall={k: float(recall[c, :, i].mean()) for i, k in enumerate(cfg.max_detections)},
        )
        for c, category in enumerate(categories)
    ]
    totals = EvalTotals(
        gt_annotations=sum(n_gt[c.id] for c in categories),
        detections=used,
        images=len(images),
        images_skipped=images_skipped,
        categories_evaluated=len(categories),
        categories_excluded=len(ds.categories) - len(categories),
    )
    return report.model_copy(update={"per_category": per_category, "totals": totals})


def _at(values: np.ndarray, index: Optional[int]) -> Optional[float]:
    return None if index is None else float(values[index])


def _aggregate(
    cfg: EvalConfig, categories: list, ap: np.ndarray, recall: np.ndarray
) -> MetricsReport:
    t50, t75 = cfg.threshold_index(0.5), cfg.threshold_index(0.75)

    def mar(k: int) -> Optional[float]:
        k_idx = cfg.cap_index(k)
        return None if k_idx is None else float(recall[:, :, k_idx].mean())

    map50 = None if t50 is None else float(ap[:, t50].mean())
    k1 = cfg.cap_index(1)
    mar1_50 = None if t50 is None or k1 is None else float(recall[:, t50, k1].mean())
    return MetricsReport(
        map=float(ap.mean()),
        map50=map50,
        map75=None if t75 is None else float(ap[:, t75].mean()),
        mar1=mar(1),
        mar10=mar(10),
        mar100=mar(100),
        mar1_50=mar1_50,
        f1=f1_score(map50, mar1_50),
    )


@dataclass(frozen=True)
class FilteredGroundTruth:
    """Ground truth restricted to an importance selection, with the images it covers."""

    dataset: Dataset
    image_ids: list[int]
    images_skipped: int


def critical_subset(
    ds: Dataset,
    records: Sequence[ImportanceRecord],
    threshold: float,
    complement: bool = False,
) -> FilteredGroundTruth:
    """
    Keep annotations with I_P > threshold (or, with `complement`, those of
    scored images that are not selected). Skipped images leave the evaluation.

    Raises:
        ReferentialError: If records and dataset disagree on images or annotations
    """
    by_image = check_coverage(ds, records)

    keep: set[int] = set()
    evaluable: list[int] = []
    for image_id in sorted(by_image):
        record = by_image[image_id]
        if record.skipped:
            continue
        evaluable.append(image_id)
        selected = select(record, threshold)
        if complement:
            selected = {s.annotation_id for s in record.scores} - selected
        keep |= selected
    return FilteredGroundTruth(
        dataset=ds.restrict(keep),
        image_ids=evaluable,
        images_skipped=len(by_image) - len(evaluable),
    )


def evaluate_filtered(
    dets: Sequence[Detection],
    ds: Dataset,
    records: Sequence[ImportanceRecord],
    threshold: float,
    cfg: Optional[EvalConfig] = None,
    complement: bool = False,
) -> MetricsReport:
    """
    Evaluate against the annotations selected at `threshold`.

    Raises:
        EvaluationError: If every image is skipped ("no evaluable images") or
            no category keeps ground truth
    """
    subset = critical_subset(ds, records, threshold, complement=complement)
    if not subset.image_ids:
        raise EvaluationError("no evaluable images")
    return evaluate(
        dets,
        subset.dataset,
        cfg,
        image_ids=subset.image_ids,
        images_skipped=subset.images_skipped,
    )
