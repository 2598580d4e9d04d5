from .boxes import area, intersection_area, iou, iou_matrix, min_distance, region_iou, union_area

__all__ = [
    "area",
    "intersection_area",
    "iou",
    "iou_matrix",
    "min_distance",
    "region_iou",
    "union_area",
]
