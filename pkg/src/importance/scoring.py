"""Distribution, propagation and threshold selection of annotation importance."""

from typing import Iterable, Sequence

import numpy as np

from src.core import Annotation, Dataset, NoImportanceError, ReferentialError
from src.geometry import area
from src.semantics import TypicalityScores

from .heat import HeatKernel
from .records import ImportanceRecord


def distribute(ts: TypicalityScores, anns: Sequence[Annotation]) -> np.ndarray:
    """
    Spread each category's I_C over its annotations in proportion to box area.

    Returns I_O aligned with `anns`; annotations of unmentioned categories get 0.
    """
    areas = np.array([area(a.bbox) for a in anns], dtype=float)
    categories = np.array([a.category_id for a in anns])
    io = np.zeros(len(anns), dtype=float)
    for category_id, importance in ts.per_category.items():
        members = categories == category_id
        if not members.any():
            continue
        io[members] = areas[members] * importance / areas[members].sum()
    return io


def propagate(io: np.ndarray, hk: HeatKernel) -> np.ndarray:
    """
    Diffuse I_O through the heat kernel and normalise to unit sum.

    Negative floating-point residue is clamped to 0 before normalising.

    Raises:
        ValueError: If dimensions disagree
        NoImportanceError: If the diffused vector sums to zero
    """
    io = np.asarray(io, dtype=float)
    if io.shape != (hk.n,):
        raise ValueError(f"I_O has shape {io.shape}, kernel is {hk.n}x{hk.n}")
    raw = np.clip(hk.matrix @ io, 0.0, None)
    total = raw.sum()
    if not total > 0:
        raise NoImportanceError("Propagated importance sums to zero")
    return raw / total


def select(rec: ImportanceRecord, threshold: float) -> set[int]:
    """Ids of annotations with I_P strictly above the threshold; empty for skipped records."""
    if rec.skipped:
        return set()
    return {s.annotation_id for s in rec.scores if s.i_p > threshold}


def select_all(records: Iterable[ImportanceRecord], threshold: float) -> set[int]:
    keep: set[int] = set()
    for rec in records:
        keep |= select(rec, threshold)
    return keep


def removal_fraction(ds: Dataset, records: Iterable[ImportanceRecord], threshold: float) -> float:
    """Share of the dataset's annotations not selected at `threshold` (skipped images count as removed)."""
    total = len(ds.annotations)
    if total == 0:
        return 0.0
    return 1.0 - len(select_all(records, threshold)) / total


def check_coverage(
    ds: Dataset, records: Iterable[ImportanceRecord]
) -> dict[int, ImportanceRecord]:
    """
    Index records by image after checking they describe exactly this dataset.

    Raises:
        ReferentialError: If records name unknown images, leave images out, or
            score annotations that are not on their image
    """
    by_image = {r.image_id: r for r in records}
    known = set(ds.image_ids())
    extra = by_image.keys() - known
    if extra:
        raise ReferentialError("Importance records name images absent from the annotations", extra)
    missing = known - by_image.keys()
    if missing:
        raise ReferentialError("Images without importance records", missing)
    foreign: set[int] = set()
    for image_id, record in by_image.items():
        on_image = {a.id for a in ds.annotations_for(image_id)}
        foreign |= {s.annotation_id for s in record.scores} - on_image
    if foreign:
        raise ReferentialError("Importance records score unknown annotations", foreign)
    return by_image
