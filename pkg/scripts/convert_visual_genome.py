#!/usr/bin/env python3
"""
Convert Visual Genome objects and region descriptions to COCO-style files.

Region descriptions become caption records, so the caption-grounded scorer
runs on VG unchanged. Only the most frequent object names are kept as the
category vocabulary.
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path
from typing import Any

from tqdm import tqdm

from src.adapters import write_json
from src.semantics import normalize_caption

VG_DIR = Path("data/vg")
OBJECTS_PATH = VG_DIR / "objects.json"
REGIONS_PATH = VG_DIR / "region_descriptions.json"
IMAGE_DATA_PATH = VG_DIR / "image_data.json"
ANNOTATIONS_OUT = VG_DIR / "vg_instances.json"
CAPTIONS_OUT = VG_DIR / "vg_captions.json"

NUM_CATEGORIES = 150


def object_name(obj: dict[str, Any]) -> str | None:
    """Canonical lemma name of a VG object (first listed name)."""
    names = obj.get("names") or ([obj["name"]] if "name" in obj else [])
    if not names:
        return None
    name = " ".join(normalize_caption(names[0]))
    return name or None


def build_vocabulary(objects: list[dict[str, Any]], size: int) -> dict[str, int]:
    """Most frequent object names, ties broken alphabetically, mapped to ids 1..size."""
    counts: Counter[str] = Counter()
    for image in objects:
        for obj in image["objects"]:
            name = object_name(obj)
            if name:
                counts[name] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:size]
    return {name: i for i, (name, _) in enumerate(sorted(n for n, _ in ranked), start=1)}


def convert_objects(
    objects: list[dict[str, Any]], image_data: list[dict[str, Any]], vocab: dict[str, int]
) -> dict[str, Any]:
    images = [
        {"id": img.get("image_id", img.get("id")), "width": img.get("width"), "height": img.get("height")}
        for img in image_data
    ]
    annotations = []
    dropped = 0
    for image in tqdm(objects, desc="Objects"):
        for obj in image["objects"]:
            name = object_name(obj)
            if name not in vocab or obj.get("w", 0) <= 0 or obj.get("h", 0) <= 0:
                dropped += 1
                continue
            annotations.append(
                {
                    "id": obj["object_id"],
                    "image_id": image["image_id"],
                    "category_id": vocab[name],
                    "bbox": [obj["x"], obj["y"], obj["w"], obj["h"]],
                    "area": obj["w"] * obj["h"],
                    "iscrowd": 0,
                }
            )
    print(f"  ✓ {len(annotations)} annotations kept, {dropped} outside the vocabulary or degenerate")
    annotations.sort(key=lambda a: a["id"])
    seen: set[int] = set()
    unique = []
    for ann in annotations:
        # VG repeats objects shared between relationships
        if ann["id"] not in seen:
            seen.add(ann["id"])
            unique.append(ann)
    return {
        "info": {"description": "Visual Genome objects converted to COCO layout"},
        "images": images,
        "annotations": unique,
        "categories": [{"id": i, "name": n} for n, i in sorted(vocab.items(), key=lambda kv: kv[1])],
    }


def convert_regions(regions: list[dict[str, Any]]) -> dict[str, Any]:
    captions = []
    for image in tqdm(regions, desc="Regions"):
        for region in image["regions"]:
            phrase = region.get("phrase", "").strip()
            if phrase:
                captions.append(
                    {"id": region["region_id"], "image_id": region["image_id"], "caption": phrase}
                )
    return {"annotations": captions}


def main() -> None:
    print("# VISUAL GENOME CONVERSION")
    for path in (OBJECTS_PATH, REGIONS_PATH, IMAGE_DATA_PATH):
        if not path.exists():
            print(f"Missing {path}; download the Visual Genome JSON files into {VG_DIR}")
            return

    print("\nLoading Visual Genome files...")
    with open(OBJECTS_PATH, encoding="utf-8") as f:
        objects = json.load(f)
    with open(REGIONS_PATH, encoding="utf-8") as f:
        regions = json.load(f)
    with open(IMAGE_DATA_PATH, encoding="utf-8") as f:
        image_data = json.load(f)
    print(f"  ✓ {len(objects)} images with objects, {len(regions)} with region descriptions")

    vocab = build_vocabulary(objects, NUM_CATEGORIES)
    print(f"  ✓ Vocabulary of {len(vocab)} object names")

    write_json(convert_objects(objects, image_data, vocab), ANNOTATIONS_OUT)
    write_json(convert_regions(regions), CAPTIONS_OUT)
    print(f"\nWrote {ANNOTATIONS_OUT} and {CAPTIONS_OUT}")


if __name__ == "__main__":
    main()
