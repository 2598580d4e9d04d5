"""Greedy confidence-ordered matching of detections to ground truth."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.core import Annotation, Detection
from src.geometry import iou_matrix


@dataclass(frozen=True)
class MatchResult:
    """
    Matching of one image+category slice at one IOU threshold.

    `detection_matches[i]` is the annotation id matched by the i-th detection
    (in score order) or None for a false positive; `annotation_matched` maps
    annotation id to whether any detection claimed it.
    """

    iou_threshold: float
    detection_matches: tuple[Optional[int], ...]
    annotation_matched: dict[int, bool]

    @property
    def true_positives(self) -> int:
        return sum(m is not None for m in self.detection_matches)


def greedy_assign(ious: np.ndarray, iou_threshold: float) -> np.ndarray:
    """
    Core greedy rule on a (detections x ground truth) IOU matrix whose rows are
    in score order and columns in annotation-id order.

    Each detection takes the unmatched ground truth with the highest IOU if
    that IOU >= threshold; equal IOUs go to the lower column. Returns the
    matched column per row, -1 for false positives.
    """
    n_det, n_gt = ious.shape
    assigned = np.full(n_det, -1, dtype=int)
    taken = np.zeros(n_gt, dtype=bool)
    for d in range(n_det):
        candidates = np.where(taken | (ious[d] < iou_threshold), -1.0, ious[d])
        if n_gt == 0 or candidates.max() < 0:
            continue
        g = int(np.argmax(candidates))
        assigned[d] = g
        taken[g] = True
    return assigned


def match(
    dets: Sequence[Detection], gts: Sequence[Annotation], iou_threshold: float
) -> MatchResult:
    """
    Match detections of one image and category, given in descending score
    order, against that image's annotations of the category.
    """
    gts = sorted(gts, key=lambda a: a.id)
    ious = iou_matrix([d.bbox for d in dets], [a.bbox for a in gts])
    assigned = greedy_assign(ious, iou_threshold)
    matches = tuple(gts[g].id if g >= 0 else None for g in assigned)
    claimed = {m for m in matches if m is not None}
    return MatchResult(
        iou_threshold=iou_threshold,
        detection_matches=matches,
        annotation_matched={a.id: a.id in claimed for a in gts},
    )
