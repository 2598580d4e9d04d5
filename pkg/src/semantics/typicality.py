"""Per-category typicality: document frequency of grounded concepts across an image's captions."""

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core import CaptionSet

from .concept_map import ConceptMap
from .normalizer import normalize_caption, normalize_tokens


class TypicalityScores(BaseModel):
    """
    I_C per category for one image. Categories never mentioned are absent.

    Example:
        TypicalityScores(image_id=1, per_category={18: 0.6}, caption_count=5)
    """

    image_id: int
    per_category: dict[int, float] = Field(default_factory=dict)
    caption_count: int = Field(ge=1)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_range(self) -> "TypicalityScores":
        for category_id, value in self.per_category.items():
            if not 0.0 < value <= 1.0:
                raise ValueError(f"I_C for category {category_id} out of (0, 1]: {value}")
        return self


def match_categories(tokens: list[str], cmap: ConceptMap) -> set[int]:
    """
    Categories whose concept n-grams occur in `tokens`. Scans left to right,
    longest n-gram first; tokens consumed by a match are not reused.
    """
    found: set[int] = set()
    i = 0
    while i < len(tokens):
        for n in range(min(cmap.max_ngram, len(tokens) - i), 0, -1):
            category_id = cmap.lookup(" ".join(tokens[i : i + n]))
            if category_id is not None:
                found.add(category_id)
                i += n
                break
        else:
            i += 1
    return found


def caption_tokens(captions: CaptionSet) -> list[list[str]]:
    """Lemma tokens per caption, preferring externally tagged tokens where supplied."""
    tagged = captions.tagged or [None] * len(captions.captions)
    return [
        normalize_tokens(tokens) if tokens is not None else normalize_caption(text)
        for text, tokens in zip(captions.captions, tagged)
    ]


def typicality(captions: CaptionSet, cmap: ConceptMap) -> TypicalityScores:
    """
    I_C(c) = (captions mentioning c at least once) / |S|, each caption one document.

    Raises:
        ValueError: If the caption set is empty
    """
    if len(captions) == 0:
        raise ValueError(f"Image {captions.image_id} has no captions")

    document_frequency: dict[int, int] = {}
    for tokens in caption_tokens(captions):
        for category_id in match_categories(tokens, cmap):
            document_frequency[category_id] = document_frequency.get(category_id, 0) + 1

    total = len(captions)
    return TypicalityScores(
        image_id=captions.image_id,
        per_category={cid: df / total for cid, df in sorted(document_frequency.items())},
        caption_count=total,
    )
