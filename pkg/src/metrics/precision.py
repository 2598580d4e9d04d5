"""Precision and 101-point interpolated average precision."""

from collections import defaultdict
from typing import Optional, Sequence

import numpy as np

from src.core import Annotation, Detection

from .matching import match


def precision_at(
    dets: Sequence[Detection], gts: Sequence[Annotation], iou_threshold: float
) -> Optional[float]:
    """Matched detections / all detections for one image+category; None when there are no detections."""
    if not dets:
        return None
    ordered = sorted(dets, key=lambda d: -d.score)
    return match(ordered, gts, iou_threshold).true_positives / len(dets)


def interpolated_ap(
    tp_flags: np.ndarray, n_gt: int, recall_points: int = 101
) -> tuple[Optional[float], Optional[float]]:
    """
    COCO interpolated AP and final recall from TP flags in global score order.

    The precision curve is made non-increasing from the right, then sampled
    at `recall_points` evenly spaced recall levels (first precision reaching
    each level; 0 beyond the final recall) and averaged.

    Returns:
        (ap, recall), both None when the category has no ground truth
    """
    if n_gt == 0:
        return None, None
    tp_flags = np.asarray(tp_flags, dtype=bool)
    if tp_flags.size == 0:
        return 0.0, 0.0
    tp_cum = np.cumsum(tp_flags, dtype=float)
    fp_cum = np.cumsum(~tp_flags, dtype=float)
    recall = tp_cum / n_gt
    precision = tp_cum / (tp_cum + fp_cum)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]

    levels = np.linspace(0.0, 1.0, recall_points)
    indices = np.searchsorted(recall, levels, side="left")
    sampled = np.zeros(recall_points)
    valid = indices < recall.size
    sampled[valid] = envelope[indices[valid]]
    return float(np.mean(sampled)), float(recall[-1])


def average_precision(
    dets: Sequence[Detection],
    gts: Sequence[Annotation],
    iou_threshold: float,
    recall_points: int = 101,
) -> Optional[float]:
    """
    AP of one category across images. Detections are matched per image in
    score order, then swept in global score order (ties by image id, then
    within-image order).

    Returns:
        AP in [0, 1], or None when the category has no ground truth (excluded from means)
    """
    dets_by_image: dict[int, list[Detection]] = defaultdict(list)
    for det in dets:
        dets_by_image[det.image_id].append(det)
    gts_by_image: dict[int, list[Annotation]] = defaultdict(list)
    for gt in gts:
        gts_by_image[gt.image_id].append(gt)

    scores: list[float] = []
    flags: list[bool] = []
    for image_id in sorted(dets_by_image):
        ordered = sorted(dets_by_image[image_id], key=lambda d: -d.score)
        result = match(ordered, gts_by_image.get(image_id, []), iou_threshold)
        scores.extend(d.score for d in ordered)
        flags.extend(m is not None for m in result.detection_matches)

    order = np.argsort(-np.asarray(scores, dtype=float), kind="mergesort")
    ap, _ = interpolated_ap(np.asarray(flags, dtype=bool)[order], len(gts), recall_points)
    return ap
