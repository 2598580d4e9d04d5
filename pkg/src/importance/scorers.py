"""Importance scorers: the caption-grounded pipeline and its two baselines."""

import logging
import os
from abc import ABC, abstractmethod
from multiprocessing import Pool
from typing import Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.core import Annotation, Dataset, NoImportanceError
from src.geometry import area
from src.semantics import ConceptMap, typicality

from .graph import build_graph
from .heat import heat_kernel
from .records import (
    NO_ANNOTATIONS,
    NO_CATEGORY_IMPORTANCE,
    AnnotationScore,
    ImportanceRecord,
    SelectionConfig,
)
from .scoring import distribute, propagate

logger = logging.getLogger(__name__)


class ImportanceScorer(ABC):
    """
    Abstract base class for per-image annotation importance scorers.

    All scorers implement score_image, which is pure per image so datasets
    can be scored in parallel.
    """

    name: str = "base"

    @abstractmethod
    def score_image(self, ds: Dataset, image_id: int) -> ImportanceRecord:
        """
        Score every annotation of one image.

        Args:
            ds: Dataset holding the image's annotations (and captions)
            image_id: Image to score

        Returns:
            ImportanceRecord with unit-sum I_P, or a skip record with its reason
        """
        pass

    @staticmethod
    def _record(
        image_id: int, anns: Sequence[Annotation], io: np.ndarray, ip: np.ndarray
    ) -> ImportanceRecord:
        return ImportanceRecord(
            image_id=image_id,
            scores=[
                AnnotationScore(annotation_id=a.id, i_o=float(o), i_p=float(p))
                for a, o, p in zip(anns, io, ip)
            ],
        )


class PropagatedScorer(ImportanceScorer):
    """
    Caption-grounded importance: typicality → area distribution → heat-kernel propagation.

    Images whose captions ground no annotated category are skipped with
    reason "no-category-importance".
    """

    name = "propagated"

    def __init__(self, cmap: ConceptMap, cfg: Optional[SelectionConfig] = None):
        self.cmap = cmap
        self.cfg = cfg or SelectionConfig()

    def score_image(self, ds: Dataset, image_id: int) -> ImportanceRecord:
        anns = ds.annotations_for(image_id)
        if not anns:
            return ImportanceRecord.skip(image_id, NO_ANNOTATIONS)
        io = self._object_importance(ds, image_id, anns)
        if io is None:
            return ImportanceRecord.skip(image_id, NO_CATEGORY_IMPORTANCE)
        try:
            ip = self._spread(anns, io)
        except NoImportanceError:
            return ImportanceRecord.skip(image_id, NO_CATEGORY_IMPORTANCE)
        return self._record(image_id, anns, io, ip)

    def _object_importance(
        self, ds: Dataset, image_id: int, anns: Sequence[Annotation]
    ) -> Optional[np.ndarray]:
        captions = ds.captions.get(image_id)
        if captions is None or len(captions) == 0:
            logger.debug("Image %d has no captions", image_id)
            return None
        ts = typicality(captions, self.cmap)
        io = distribute(ts, anns)
        if not io.sum() > 0:
            logger.debug("Image %d: captions ground no annotated category", image_id)
            return None
        return io

    def _spread(self, anns: Sequence[Annotation], io: np.ndarray) -> np.ndarray:
        return propagate(io, heat_kernel(build_graph(anns), self.cfg.heat_time))


class DistributedScorer(PropagatedScorer):
    """Pre-propagation ablation: I_P is I_O normalised to unit sum."""

    name = "distributed"

    def _spread(self, anns: Sequence[Annotation], io: np.ndarray) -> np.ndarray:
        return io / io.sum()


class AreaScorer(ImportanceScorer):
    """Caption-free baseline: importance is each box's share of the image's annotated area."""

    name = "area"

    def score_image(self, ds: Dataset, image_id: int) -> ImportanceRecord:
        anns = ds.annotations_for(image_id)
        if not anns:
            return ImportanceRecord.skip(image_id, NO_ANNOTATIONS)
        areas = np.array([area(a.bbox) for a in anns], dtype=float)
        share = areas / areas.sum()
        return self._record(image_id, anns, share, share)


SCORERS = ("propagated", "distributed", "area")


def create_scorer(
    scorer_type: str, cmap: Optional[ConceptMap] = None, cfg: Optional[SelectionConfig] = None
) -> ImportanceScorer:
    """Factory function to create a scorer by name."""
    if scorer_type == "area":
        return AreaScorer()
    if cmap is None:
        raise ValueError(f"Scorer {scorer_type!r} needs a concept map")
    if scorer_type == "propagated":
        return PropagatedScorer(cmap, cfg)
    if scorer_type == "distributed":
        return DistributedScorer(cmap, cfg)
    raise ValueError(f"Unknown scorer {scorer_type!r}; available: {', '.join(SCORERS)}")


def score_image(
    ds: Dataset, cmap: ConceptMap, cfg: SelectionConfig, image_id: int
) -> ImportanceRecord:
    return PropagatedScorer(cmap, cfg).score_image(ds, image_id)


_worker_state: dict = {}


def _init_worker(ds: Dataset, scorer: ImportanceScorer) -> None:
    _worker_state["ds"] = ds
    _worker_state["scorer"] = scorer


def _score_in_worker(image_id: int) -> ImportanceRecord:
    return _worker_state["scorer"].score_image(_worker_state["ds"], image_id)


def score_dataset(
    ds: Dataset, scorer: ImportanceScorer, jobs: Optional[int] = 1
) -> list[ImportanceRecord]:
    """
    Score every image of the dataset, ordered by image id.

    Args:
        ds: Dataset to score
        scorer: Scorer applied to each image
        jobs: Worker processes; None uses every core. Output does not depend on it.
    """
    image_ids = ds.image_ids()
    jobs = jobs or os.cpu_count() or 1
    progress = {"total": len(image_ids), "desc": f"Scoring ({scorer.name})", "disable": None}

    if jobs <= 1 or len(image_ids) < 2:
        records = [scorer.score_image(ds, i) for i in tqdm(image_ids, **progress)]
    else:
        chunksize = max(1, len(image_ids) // (jobs * 8))
        with Pool(processes=jobs, initializer=_init_worker, initargs=(ds, scorer)) as pool:
            records = list(tqdm(pool.imap(_score_in_worker, image_ids, chunksize), **progress))

    skipped = sum(r.skipped for r in records)
    if skipped:
        logger.warning("Skipped %d of %d images", skipped, len(records))
    return sorted(records, key=lambda r: r.image_id)
