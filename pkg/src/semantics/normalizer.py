"""
Deterministic caption normaliser: lowercase, split on non-alphabetic runs,
lemmatise each token with a small irregular-plural table and suffix rules.
"""

import re

_WORD = re.compile(r"[a-z]+")

IRREGULAR_LEMMAS = {
    "men": "man",
    "women": "woman",
    "children": "child",
    "people": "person",
    "persons": "person",
    "knives": "knife",
    "mice": "mouse",
    "teeth": "tooth",
    "feet": "foot",
    "geese": "goose",
    "leaves": "leaf",
    "shelves": "shelf",
    "wolves": "wolf",
    "calves": "calf",
    "loaves": "loaf",
    "halves": "half",
    "buses": "bus",
}

# Words ending in these are already singular ("glass", "bus", "tennis", "famous").
KEEP_SUFFIXES = ("ss", "us", "is", "ous")

# (suffix, replacement, minimum token length). First matching rule wins.
SUFFIX_RULES = (
    ("ies", "y", 5),
    ("sses", "ss", 5),
    ("xes", "x", 4),
    ("ches", "ch", 5),
    ("shes", "sh", 5),
    ("zzes", "zz", 5),
    ("s", "", 4),
)


def lemmatize(token: str) -> str:
    """Reduce one lowercase token to its lemma."""
    if token in IRREGULAR_LEMMAS:
        return IRREGULAR_LEMMAS[token]
    if token.endswith(KEEP_SUFFIXES):
        return token
    for suffix, replacement, min_len in SUFFIX_RULES:
        if len(token) >= min_len and token.endswith(suffix):
            return token[: -len(suffix)] + replacement
    return token


def tokenize(text: str) -> list[str]:
    return _WORD.findall(text.lower())


def normalize_caption(text: str) -> list[str]:
    """
    Turn a raw caption into lemma tokens.

    Example:
        normalize_caption("Two dogs playing.") == ["two", "dog", "playing"]
    """
    return [lemmatize(token) for token in tokenize(text)]


def normalize_tokens(tokens: list[str]) -> list[str]:
    """Lemmatise externally tagged tokens with the same rules as captions."""
    return [lemmatize(t) for token in tokens for t in tokenize(token)]
