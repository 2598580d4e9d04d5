from .graph import ObjectGraph, build_graph
from .heat import HeatKernel, heat_kernel
from .records import (
    NO_ANNOTATIONS,
    NO_CATEGORY_IMPORTANCE,
    AnnotationScore,
    ImportanceRecord,
    SelectionConfig,
    SkipReason,
)
from .scorers import (
    SCORERS,
    AreaScorer,
    DistributedScorer,
    ImportanceScorer,
    PropagatedScorer,
    create_scorer,
    score_dataset,
    score_image,
)
from .scoring import (
    check_coverage,
    distribute,
    propagate,
    removal_fraction,
    select,
    select_all,
)

__all__ = [
    "NO_ANNOTATIONS",
    "NO_CATEGORY_IMPORTANCE",
    "SCORERS",
    "AnnotationScore",
    "AreaScorer",
    "DistributedScorer",
    "HeatKernel",
    "ImportanceRecord",
    "ImportanceScorer",
    "ObjectGraph",
    "PropagatedScorer",
    "SelectionConfig",
    "SkipReason",
    "build_graph",
    "check_coverage",
    "create_scorer",
    "distribute",
    "heat_kernel",
    "propagate",
    "removal_fraction",
    "score_dataset",
    "score_image",
    "select",
    "select_all",
]
