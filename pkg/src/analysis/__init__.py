from .consistency import CURVE_COLUMNS, ConsistencyCurve, ScoredDataset, consistency_curve
from .misalignment import DetectorPrecision, MisalignmentReport, PairFlip, misalignment_check
from .partition import cumulative_removal, quantile_partition

__all__ = [
    "CURVE_COLUMNS",
    "ConsistencyCurve",
    "DetectorPrecision",
    "MisalignmentReport",
    "PairFlip",
    "ScoredDataset",
    "consistency_curve",
    "cumulative_removal",
    "misalignment_check",
    "quantile_partition",
]
