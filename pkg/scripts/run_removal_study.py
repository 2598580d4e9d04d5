#!/usr/bin/env python3
"""
Score full COCO and Visual Genome annotation sets and record how many
annotations each importance threshold removes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from src.adapters import load_annotations, load_captions
from src.importance import PropagatedScorer, SelectionConfig, removal_fraction, score_dataset
from src.semantics import load_concept_map

COCO_ANNOTATIONS = Path("data/coco/instances_val2017.json")
COCO_CAPTIONS = Path("data/coco/captions_val2017.json")
VG_ANNOTATIONS = Path("data/vg/vg_instances.json")
VG_CAPTIONS = Path("data/vg/vg_captions.json")

# (dataset, threshold, reference removal share)
REFERENCE_POINTS = [
    ("coco", 0.25, 0.92),
    ("vg", 0.075, 0.61),
    ("vg", 0.30, 0.96),
]
TOLERANCE = 0.03


@dataclass
class RemovalResult:
    """Removal share of one dataset at one threshold."""

    dataset: str
    threshold: float
    removed: float
    reference: float
    images: int
    skipped: int

    @property
    def within_tolerance(self) -> bool:
        return abs(self.removed - self.reference) <= TOLERANCE


def run_dataset(name: str, annotations: Path, captions: Path) -> list[RemovalResult]:
    print(f"\nScoring {name}...")
    ds = load_annotations(annotations)
    ds = ds.with_captions(load_captions(captions))
    cmap = load_concept_map(None, ds.categories)
    records = score_dataset(ds, PropagatedScorer(cmap, SelectionConfig()), jobs=None)
    skipped = sum(r.skipped for r in records)
    print(f"  ✓ {len(records)} images scored, {skipped} skipped")

    results = []
    for dataset, threshold, reference in REFERENCE_POINTS:
        if dataset != name:
            continue
        removed = removal_fraction(ds, records, threshold)
        results.append(RemovalResult(name, threshold, removed, reference, len(records), skipped))
        print(f"  T={threshold}: {removed:.1%} removed (reference {reference:.0%})")
    return results


def write_results_markdown(results: list[RemovalResult], output_path: Path) -> None:
    """Write the removal table to RESULTS.md."""
    lines = ["# Annotation Removal Study", ""]
    lines.append(
        "Share of annotations removed by importance selection on full datasets "
        f"(tolerance ±{TOLERANCE:.0%}; the concept map stands in for a commonsense graph)."
    )
    lines.extend(["", "| Dataset | T | Removed | Reference | Images | Skipped | Within tolerance |"])
    lines.append("| --- | --- | --- | --- | --- | --- | --- |")
    for r in results:
        row = [
            r.dataset,
            f"{r.threshold:g}",
            f"{r.removed:.1%}",
            f"{r.reference:.0%}",
            str(r.images),
            str(r.skipped),
            "yes" if r.within_tolerance else "no",
        ]
        lines.append("| " + " | ".join(row) + " |")
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def main() -> None:
    print("# ANNOTATION REMOVAL STUDY")
    results: list[RemovalResult] = []
    for name, annotations, captions in (
        ("coco", COCO_ANNOTATIONS, COCO_CAPTIONS),
        ("vg", VG_ANNOTATIONS, VG_CAPTIONS),
    ):
        if not annotations.exists() or not captions.exists():
            print(f"\nSkipping {name}: {annotations} or {captions} not found")
            continue
        results.extend(run_dataset(name, annotations, captions))

    if not results:
        print("\nNo datasets found; nothing written.")
        return
    project_root = Path(__file__).resolve().parent.parent
    md_path = project_root / "RESULTS.md"
    write_results_markdown(results, md_path)
    print(f"\nResults table saved to: {md_path}")


if __name__ == "__main__":
    main()
