"""Deterministic writers for every output file the toolkit produces."""

import json
from pathlib import Path
from typing import Any, Iterable, Optional

import pandas as pd

from src.core import Dataset, ReferentialError


def write_json(data: Any, path: str | Path) -> None:
    """Write JSON with stable key order so repeated runs are byte-identical."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")


def write_filtered_annotations(
    ds: Dataset,
    keep: Iterable[int],
    path: str | Path,
    config: Optional[dict[str, Any]] = None,
) -> None:
    """
    Write a COCO annotation file holding only the annotations in `keep`.

    Images, categories, info and licenses are written as loaded. The effective
    run configuration, when given, goes under a top-level "config" key that
    annotation readers ignore.

    Raises:
        ReferentialError: If `keep` holds ids that are not in the dataset
    """
    keep = set(keep)
    foreign = keep - ds.annotation_ids()
    if foreign:
        raise ReferentialError("Cannot keep annotation ids missing from the dataset", foreign)

    out: dict[str, Any] = {}
    for key in ("info", "licenses"):
        if key in ds.passthrough:
            out[key] = ds.passthrough[key]
    out["images"] = [image.model_dump(exclude_none=True) for image in ds.images]
    out["annotations"] = [ann.to_coco() for ann in ds.annotations if ann.id in keep]
    out["categories"] = ds.passthrough.get(
        "categories", [c.model_dump() for c in ds.categories]
    )
    if config is not None:
        out["config"] = config
    write_json(out, path)


def write_csv(frame: pd.DataFrame, path: str | Path) -> None:
    """Write a table as CSV with a header row and "\\n" line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
