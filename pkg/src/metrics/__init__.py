from .config import DEFAULT_IOU_THRESHOLDS, DEFAULT_MAX_DETECTIONS, EvalConfig, parse_range
from .evaluator import (
    METRIC_NAMES,
    CategoryMetrics,
    EvalTotals,
    FilteredGroundTruth,
    MetricsReport,
    cap_detections,
    critical_subset,
    evaluate,
    evaluate_filtered,
    f1_score,
)
from .matching import MatchResult, greedy_assign, match
from .precision import average_precision, interpolated_ap, precision_at

__all__ = [
    "DEFAULT_IOU_THRESHOLDS",
    "DEFAULT_MAX_DETECTIONS",
    "METRIC_NAMES",
    "CategoryMetrics",
    "EvalConfig",
    "EvalTotals",
    "FilteredGroundTruth",
    "MatchResult",
    "MetricsReport",
    "average_precision",
    "cap_detections",
    "critical_subset",
    "evaluate",
    "evaluate_filtered",
    "f1_score",
    "greedy_assign",
    "interpolated_ap",
    "match",
    "parse_range",
    "precision_at",
]
