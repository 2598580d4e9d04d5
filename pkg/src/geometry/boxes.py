"""Axis-aligned box arithmetic on COCO (x, y, w, h) boxes."""

import math
from typing import Sequence

import numpy as np

from src.core import BBox


def area(b: BBox) -> float:
    return b.w * b.h


def intersection_area(b1: BBox, b2: BBox) -> float:
    ix = min(b1.x2, b2.x2) - max(b1.x, b2.x)
    iy = min(b1.y2, b2.y2) - max(b1.y, b2.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    return ix * iy


def iou(b1: BBox, b2: BBox) -> float:
    """Intersection over union (Jaccard index of the two rectangles)."""
    inter = intersection_area(b1, b2)
    if inter == 0.0:
        return 0.0
    # corner-form areas so that iou(a, a) is exactly 1
    union = _corner_area(b1) + _corner_area(b2) - inter
    return inter / union


def _corner_area(b: BBox) -> float:
    return (b.x2 - b.x) * (b.y2 - b.y)


def iou_matrix(boxes_a: Sequence[BBox], boxes_b: Sequence[BBox]) -> np.ndarray:
    """Pairwise IOU, shape (len(boxes_a), len(boxes_b))."""
    out = np.zeros((len(boxes_a), len(boxes_b)), dtype=float)
    for i, a in enumerate(boxes_a):
        for j, b in enumerate(boxes_b):
            out[i, j] = iou(a, b)
    return out


def min_distance(b1: BBox, b2: BBox) -> float:
    """
    Euclidean distance between the closest points of two rectangles.

    Overlapping or touching boxes are at distance 0.
    """
    dx = max(0.0, max(b1.x, b2.x) - min(b1.x2, b2.x2))
    dy = max(0.0, max(b1.y, b2.y) - min(b1.y2, b2.y2))
    return math.hypot(dx, dy)


def union_area(boxes: Sequence[BBox]) -> float:
    """
    Exact area of the geometric union of rectangles.

    Coordinate compression: the distinct x and y edges cut the plane into a
    grid of cells, each either fully covered or not, so summing covered cell
    areas counts overlaps once.
    """
    if not boxes:
        return 0.0
    xs = np.unique([v for b in boxes for v in (b.x, b.x2)])
    ys = np.unique([v for b in boxes for v in (b.y, b.y2)])
    covered = np.zeros((len(ys) - 1, len(xs) - 1), dtype=bool)
    for b in boxes:
        x0, x1 = np.searchsorted(xs, [b.x, b.x2])
        y0, y1 = np.searchsorted(ys, [b.y, b.y2])
        covered[y0:y1, x0:x1] = True
    cell_areas = np.outer(np.diff(ys), np.diff(xs))
    return float(cell_areas[covered].sum())


def region_iou(boxes_a: Sequence[BBox], boxes_b: Sequence[BBox]) -> float:
    """
    Jaccard index of two box-set regions: |Ua ∩ Ub| / |Ua ∪ Ub| where Ua, Ub
    are the unions of each set. Returns 0.0 when both sets are empty.
    """
    both = union_area(list(boxes_a) + list(boxes_b))
    if both == 0.0:
        return 0.0
    inter = union_area(boxes_a) + union_area(boxes_b) - both
    return min(1.0, max(0.0, inter / both))
