from .annotation import Annotation, CaptionSet, Category, Detection, ImageInfo
from .bbox import BBox
from .dataset import Dataset, check_references
from .errors import (
    ConfigError,
    CritselError,
    DatasetFormatError,
    EvaluationError,
    NoImportanceError,
    ReferentialError,
)

__all__ = [
    "Annotation",
    "BBox",
    "CaptionSet",
    "Category",
    "ConfigError",
    "CritselError",
    "Dataset",
    "check_references",
    "DatasetFormatError",
    "Detection",
    "EvaluationError",
    "ImageInfo",
    "NoImportanceError",
    "ReferentialError",
]
