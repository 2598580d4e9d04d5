"""Lemma n-gram → category table used to ground caption words in the detection vocabulary."""

import logging
from pathlib import Path
from typing import Iterable, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core import Category, DatasetFormatError, ReferentialError

from .normalizer import normalize_caption

logger = logging.getLogger(__name__)

DEFAULT_SYNONYMS_PATH = Path(__file__).resolve().parents[2] / "data" / "concept_synonyms.tsv"


class ConceptMap(BaseModel):
    """
    Maps lemma n-grams (1 to `max_ngram` lowercase tokens joined by single
    spaces) to category ids.

    Example:
        ConceptMap(entries={"tennis racket": 43, "racquet": 43, "dog": 18})
    """

    entries: dict[str, int] = Field(default_factory=dict)
    max_ngram: int = Field(default=3, ge=1)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_keys(self) -> "ConceptMap":
        for key in self.entries:
            tokens = key.split(" ")
            if key != key.lower() or not all(tokens):
                raise ValueError(f"Concept key {key!r} must be lowercase single-space-joined tokens")
            if len(tokens) > self.max_ngram:
                raise ValueError(f"Concept key {key!r} is longer than {self.max_ngram} tokens")
        return self

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, int]], max_ngram: int = 3) -> "ConceptMap":
        """
        Build a map from raw (phrase, category_id) pairs. Phrases go through the
        caption normaliser so keys and caption tokens share one lemma space.
        The first mapping of a key wins; conflicting later ones are dropped.
        """
        entries: dict[str, int] = {}
        for phrase, category_id in pairs:
            key = " ".join(normalize_caption(phrase))
            if not key:
                logger.warning("Concept %r normalises to nothing; ignored", phrase)
                continue
            if len(key.split(" ")) > max_ngram:
                logger.warning("Concept %r longer than %d tokens; ignored", phrase, max_ngram)
                continue
            if key in entries and entries[key] != category_id:
                logger.warning(
                    "Concept %r already maps to category %d; ignoring mapping to %d",
                    key,
                    entries[key],
                    category_id,
                )
                continue
            entries[key] = category_id
        return cls(entries=entries, max_ngram=max_ngram)

    @classmethod
    def from_vocabulary(
        cls,
        categories: list[Category],
        synonyms_path: Optional[str | Path] = DEFAULT_SYNONYMS_PATH,
        strict: bool = False,
    ) -> "ConceptMap":
        """
        Identity mappings for every category name, extended by a synonym TSV.

        Args:
            categories: Active vocabulary
            synonyms_path: "lemma<TAB>category_name" file; None for identity only
            strict: Raise on synonym lines naming unknown categories

        Raises:
            FileNotFoundError: If synonyms_path does not exist
            DatasetFormatError: If the TSV is malformed, or names unknown categories in strict mode
        """
        by_name = {c.name: c.id for c in categories}
        pairs = [(c.name, c.id) for c in categories]
        if synonyms_path is not None:
            pairs.extend(_read_synonyms(Path(synonyms_path), by_name, strict))
        return cls.from_pairs(pairs)

    def validate_vocabulary(self, category_ids: Iterable[int]) -> None:
        """
        Raises:
            ReferentialError: If an entry targets a category outside the vocabulary
        """
        known = set(category_ids)
        unknown = [cid for cid in self.entries.values() if cid not in known]
        if unknown:
            raise ReferentialError("Concept map targets unknown category ids", unknown)

    def lookup(self, key: str) -> Optional[int]:
        return self.entries.get(key)


def _read_synonyms(path: Path, by_name: dict[str, int], strict: bool) -> list[tuple[str, int]]:
    if not path.exists():
        raise FileNotFoundError(f"concept map {path} does not exist")
    try:
        table = pd.read_csv(
            path,
            sep="\t",
            comment="#",
            header=None,
            names=["concept", "category"],
            dtype=str,
            skip_blank_lines=True,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        return []
    except pd.errors.ParserError as e:
        raise DatasetFormatError(f"{path}: malformed concept map ({e})") from e
    malformed = table[table["category"].isna() | table["concept"].isna()]
    if not malformed.empty:
        raise DatasetFormatError(
            f"{path}: lines must be 'concept<TAB>category_name', got {malformed['concept'].tolist()}"
        )

    pairs = []
    unresolved = []
    for concept, category in zip(table["concept"], table["category"]):
        name = " ".join(category.lower().split())
        if name not in by_name:
            unresolved.append(name)
            continue
        pairs.append((concept, by_name[name]))

    if unresolved:
        if strict:
            raise DatasetFormatError(f"{path}: unknown category names {sorted(set(unresolved))}")
        logger.info(
            "%s: %d synonym lines name categories outside the vocabulary", path, len(unresolved)
        )
    return pairs


def load_concept_map(
    path: Optional[str | Path], categories: list[Category], strict: bool = False
) -> ConceptMap:
    """
    Concept map for a vocabulary: identity names plus `path` (bundled synonyms
    when None). The bundled table covers the full COCO vocabulary, so `strict`
    applies to user tables only.
    """
    if path is None:
        return ConceptMap.from_vocabulary(categories, synonyms_path=DEFAULT_SYNONYMS_PATH)
    return ConceptMap.from_vocabulary(categories, synonyms_path=path, strict=strict)
