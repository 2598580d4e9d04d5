from .concept_map import DEFAULT_SYNONYMS_PATH, ConceptMap, load_concept_map
from .normalizer import lemmatize, normalize_caption, normalize_tokens
from .typicality import TypicalityScores, match_categories, typicality

__all__ = [
    "ConceptMap",
    "DEFAULT_SYNONYMS_PATH",
    "TypicalityScores",
    "lemmatize",
    "load_concept_map",
    "match_categories",
    "normalize_caption",
    "normalize_tokens",
    "typicality",
]
