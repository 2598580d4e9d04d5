"""Importance quantile groups and cumulative low-importance removal."""

from typing import Sequence

from src.core import EvaluationError
from src.importance import ImportanceRecord


def quantile_partition(records: Sequence[ImportanceRecord], q: int = 10) -> list[list[int]]:
    """
    Pool the annotations of all scored images, rank them by I_P (ties by
    annotation id) and cut the ranking into q equal-count groups. Groups are
    ordered from least to most important; when the count is not divisible by
    q the lowest groups take one extra annotation each.

    Example:
        scores 0.1, 0.2, 0.3, 0.4 with q=2 -> [[ids of 0.1, 0.2], [ids of 0.3, 0.4]]

    Raises:
        ValueError: If q < 2
        EvaluationError: If there are fewer annotations than groups
    """
    if q < 2:
        raise ValueError(f"Need at least 2 groups, got {q}")
    pooled = sorted(
        (s.i_p, s.annotation_id) for r in records if not r.skipped for s in r.scores
    )
    if len(pooled) < q:
        raise EvaluationError(f"cannot split {len(pooled)} annotations into {q} groups")

    size, extra = divmod(len(pooled), q)
    groups = []
    start = 0
    for i in range(q):
        stop = start + size + (1 if i < extra else 0)
        groups.append([annotation_id for _, annotation_id in pooled[start:stop]])
        start = stop
    return groups


def cumulative_removal(groups: Sequence[Sequence[int]]) -> list[set[int]]:
    """Annotation ids kept after removing the k lowest groups, for k = 0 .. len(groups) - 1."""
    kept = []
    for k in range(len(groups)):
        kept.append({annotation_id for group in groups[k:] for annotation_id in group})
    return kept
