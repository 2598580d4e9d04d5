from .base import DataAdapter
from .coco_adapter import (
    CocoAnnotationAdapter,
    CocoCaptionAdapter,
    CocoDetectionAdapter,
    load_annotations,
    load_captions,
    load_detections,
)
from .importance_adapter import ImportanceAdapter, load_importance, write_importance
from .writers import write_csv, write_filtered_annotations, write_json

__all__ = [
    "CocoAnnotationAdapter",
    "CocoCaptionAdapter",
    "CocoDetectionAdapter",
    "DataAdapter",
    "ImportanceAdapter",
    "load_annotations",
    "load_captions",
    "load_detections",
    "load_importance",
    "write_csv",
    "write_filtered_annotations",
    "write_importance",
    "write_json",
]
