#!/usr/bin/env python3
"""
critsel CLI - critical-annotation selection and detector evaluation.
"""

import functools
import logging
from pathlib import Path
from typing import Any, Callable, List, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from src.adapters import (
    load_annotations,
    load_captions,
    load_detections,
    load_importance,
    write_csv,
    write_filtered_annotations,
    write_importance,
    write_json,
)
from src.analysis import (
    ScoredDataset,
    consistency_curve,
    cumulative_removal,
    misalignment_check,
    quantile_partition,
)
from src.core import ConfigError, CritselError, Dataset, Detection
from src.importance import (
    SelectionConfig,
    create_scorer,
    removal_fraction,
    score_dataset,
)
from src.logging_setup import configure_logging
from src.metrics import (
    METRIC_NAMES,
    MetricsReport,
    cap_detections,
    critical_subset,
    evaluate,
    evaluate_filtered,
    parse_range,
)
from src.semantics import load_concept_map
from src.settings import SAMPLE_THRESHOLDS, THRESHOLD_PRESETS, RunConfig

logger = logging.getLogger("critsel")

app = typer.Typer(help="critsel - critical-annotation selection and detector evaluation")
console = Console()
err_console = Console(stderr=True)

EXIT_INPUT_ERROR = 2
EXIT_INTERNAL_ERROR = 1


@app.callback()
def main():
    """Select the annotations that matter and evaluate detectors against them."""
    configure_logging()


def handle_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    """Map input and contract errors to exit code 2, anything else to 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except typer.Exit:
            raise
        except (CritselError, FileNotFoundError, ValidationError) as e:
            err_console.print(f"[bold red]Error:[/bold red] {e}")
            raise typer.Exit(EXIT_INPUT_ERROR) from e
        except Exception as e:
            logger.exception("Internal error")
            err_console.print(f"[bold red]Internal error:[/bold red] {e}")
            raise typer.Exit(EXIT_INTERNAL_ERROR) from e

    return wrapper


def _config(config_path: Optional[Path], preset: Optional[str] = None, **flags) -> RunConfig:
    if preset is not None:
        if preset not in THRESHOLD_PRESETS:
            raise ConfigError(
                f"Unknown preset {preset!r}; available: {', '.join(THRESHOLD_PRESETS)}"
            )
        flags["thresholds"] = list(flags.get("thresholds") or []) + [THRESHOLD_PRESETS[preset]]
    cfg = RunConfig.from_sources(flags, config_path)
    cfg.check_paths()
    return cfg


def _detections(path: Path, ds: Dataset, cfg: RunConfig) -> list[Detection]:
    grouped = load_detections(path, ds.vocabulary, strict=cfg.strict)
    dets = [d for image_dets in grouped.values() for d in image_dets]
    return cap_detections(dets, cfg.max_det)


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.4f}"


def _detector_names(paths: list[Path]) -> list[str]:
    stems = [p.stem for p in paths]
    if len(set(stems)) == len(stems):
        return stems
    return [str(p) for p in paths]


def _metrics_table(report: MetricsReport, title: str) -> Table:
    table = Table(title=title, show_header=True)
    table.add_column("Metric", style="cyan")
    table.add_column("Value", style="green", justify="right")
    for name, value in report.metrics().items():
        table.add_row(name, _fmt(value))
    return table


ConfigOption = typer.Option(None, "--config", help="YAML file with option defaults")
OutOption = typer.Option(None, "--out", "-o", help="Output file")
StrictOption = typer.Option(False, "--strict", help="Turn skipped records into errors")
JobsOption = typer.Option(
    None, "--jobs", "-j", help="Worker processes (only scoring runs in parallel)"
)
ThresholdOption = typer.Option(
    None, "--threshold", "-T", help="Importance threshold T in [0, 1)"
)
PresetOption = typer.Option(
    None, "--preset", help=f"Named threshold: {', '.join(THRESHOLD_PRESETS)}"
)


@app.command()
@handle_errors
def score(
    annotations: Optional[Path] = typer.Option(None, "--annotations", help="COCO annotation file"),
    captions: Optional[Path] = typer.Option(None, "--captions", help="COCO caption file"),
    concept_map: Optional[Path] = typer.Option(
        None, "--concept-map", help="Concept TSV (bundled synonyms when omitted)"
    ),
    heat_time: Optional[float] = typer.Option(None, "--heat-time", help="Heat dispersion time t"),
    scorer: Optional[str] = typer.Option(
        None, "--scorer", help="propagated, distributed or area"
    ),
    jobs: Optional[int] = JobsOption,
    out: Optional[Path] = OutOption,
    strict: bool = StrictOption,
    config: Optional[Path] = ConfigOption,
):
    """Score the importance of every annotation."""
    cfg = _config(
        config,
        annotations=annotations,
        captions=captions,
        concept_map=concept_map,
        heat_time=heat_time,
        scorer=scorer,
        jobs=jobs,
        out=out,
        strict=strict,
    )
    cfg.require("annotations", "out")
    if cfg.scorer != "area":
        cfg.require("captions")

    ds = load_annotations(cfg.annotations, strict=cfg.strict)
    console.print(f"[green]✓[/green] Loaded {len(ds.annotations)} annotations on {len(ds.images)} images")
    cmap = None
    if cfg.captions is not None:
        ds = ds.with_captions(load_captions(cfg.captions))
    if cfg.scorer != "area":
        cmap = load_concept_map(cfg.concept_map, ds.categories, strict=cfg.strict)
        cmap.validate_vocabulary(ds.vocabulary)

    importance_scorer = create_scorer(cfg.scorer, cmap, SelectionConfig(heat_time=cfg.heat_time))
    records = score_dataset(ds, importance_scorer, jobs=cfg.jobs)
    write_importance(records, cfg.out, config=cfg.echo("score"))

    skipped = sum(r.skipped for r in records)
    table = Table(title="Importance Summary", show_header=True)
    table.add_column("Metric", style="cyan")
    table.add_column("Value", style="green", justify="right")
    table.add_row("Images", str(len(records)))
    table.add_row("Skipped images", str(skipped))
    for t in SAMPLE_THRESHOLDS:
        table.add_row(f"Removed at T={t}", f"{removal_fraction(ds, records, t):.1%}")
    console.print(table)
    console.print(f"[green]✓[/green] Wrote {cfg.out}")


@app.command()
@handle_errors
def select(
    annotations: Optional[Path] = typer.Option(None, "--annotations", help="COCO annotation file"),
    importance: Optional[Path] = typer.Option(None, "--importance", help="Importance file"),
    threshold: Optional[List[float]] = ThresholdOption,
    preset: Optional[str] = PresetOption,
    out: Optional[Path] = OutOption,
    config: Optional[Path] = ConfigOption,
):
    """Write the annotations whose importance exceeds T."""
    cfg = _config(
        config,
        preset,
        annotations=annotations,
        importance=importance,
        thresholds=threshold,
        out=out,
    )
    cfg.require("annotations", "importance", "out")
    t = cfg.threshold()

    ds = load_annotations(cfg.annotations, strict=cfg.strict)
    records = load_importance(cfg.importance)
    subset = critical_subset(ds, records, t)
    keep = subset.dataset.annotation_ids()
    write_filtered_annotations(ds, keep, cfg.out, config=cfg.echo("select"))

    removed = removal_fraction(ds, records, t)
    console.print(
        f"[green]✓[/green] Kept {len(keep)} of {len(ds.annotations)} annotations "
        f"(removed {removed:.1%}) at T={t}"
    )
    console.print(f"[green]✓[/green] Wrote {cfg.out}")


@app.command("evaluate")
@handle_errors
def evaluate_command(
    detections: Optional[List[Path]] = typer.Option(
        None, "--detections", help="COCO detection results file"
    ),
    annotations: Optional[Path] = typer.Option(None, "--annotations", help="COCO annotation file"),
    importance: Optional[Path] = typer.Option(
        None, "--importance", help="Importance file; evaluates the critical subset at T"
    ),
    threshold: Optional[List[float]] = ThresholdOption,
    preset: Optional[str] = PresetOption,
    iou_grid: Optional[str] = typer.Option(None, "--iou-grid", help="IOU thresholds start:step:stop"),
    max_det: Optional[int] = typer.Option(None, "--max-det", help="Proposals kept per image"),
    out: Optional[Path] = OutOption,
    strict: bool = StrictOption,
    jobs: Optional[int] = JobsOption,
    config: Optional[Path] = ConfigOption,
):
    """Evaluate one detector with the COCO protocol."""
    cfg = _config(
        config,
        preset,
        detections=detections,
        annotations=annotations,
        importance=importance,
        thresholds=threshold,
        iou_grid=iou_grid,
        max_det=max_det,
        out=out,
        strict=strict,
        jobs=jobs,
    )
    cfg.require("detections", "annotations", "out")
    if len(cfg.detections) != 1:
        raise ConfigError("evaluate takes exactly one --detections file; use compare for several")

    ds = load_annotations(cfg.annotations, strict=cfg.strict)
    dets = _detections(cfg.detections[0], ds, cfg)
    eval_cfg = cfg.eval_config()
    if cfg.importance is not None:
        t = cfg.threshold()
        report = evaluate_filtered(dets, ds, load_importance(cfg.importance), t, eval_cfg)
        title = f"Metrics at T={t}"
    else:
        report = evaluate(dets, ds, eval_cfg)
        title = "Metrics (all annotations)"

    echo = {**cfg.echo("evaluate"), "eval": eval_cfg.model_dump()}
    write_json(report.to_json(echo), cfg.out)
    console.print(_metrics_table(report, title))
    totals = report.totals
    console.print(
        f"{totals.gt_annotations} annotations, {totals.detections} detections, "
        f"{totals.images} images ({totals.images_skipped} skipped), "
        f"{totals.categories_evaluated} categories"
    )


@app.command()
@handle_errors
def compare(
    detections: Optional[List[Path]] = typer.Option(
        None, "--detections", help="Detection results file (repeat for each detector)"
    ),
    annotations: Optional[Path] = typer.Option(None, "--annotations", help="COCO annotation file"),
    importance: Optional[Path] = typer.Option(None, "--importance", help="Importance file"),
    threshold: Optional[List[float]] = ThresholdOption,
    preset: Optional[str] = PresetOption,
    iou_grid: Optional[str] = typer.Option(None, "--iou-grid", help="IOU thresholds start:step:stop"),
    max_det: Optional[int] = typer.Option(None, "--max-det", help="Proposals kept per image"),
    out: Optional[Path] = OutOption,
    strict: bool = StrictOption,
    jobs: Optional[int] = JobsOption,
    config: Optional[Path] = ConfigOption,
):
    """Compare detectors on critical subsets and flag ranking flips."""
    cfg = _config(
        config,
        preset,
        detections=detections,
        annotations=annotations,
        importance=importance,
        thresholds=threshold,
        iou_grid=iou_grid,
        max_det=max_det,
        out=out,
        strict=strict,
        jobs=jobs,
    )
    cfg.require("detections", "annotations", "importance", "out")
    if len(cfg.detections) < 2:
        raise ConfigError(f"compare needs at least two --detections files, got {len(cfg.detections)}")

    ds = load_annotations(cfg.annotations, strict=cfg.strict)
    records = load_importance(cfg.importance)
    names = _detector_names(cfg.detections)
    det_sets = {name: _detections(path, ds, cfg) for name, path in zip(names, cfg.detections)}
    eval_cfg = cfg.eval_config()

    reports = []
    for t in cfg.thresholds:
        report = misalignment_check(det_sets, ds, records, t, eval_cfg)
        reports.append(report)

        table = Table(title=f"T={t}", show_header=True)
        table.add_column("Detector", style="cyan")
        table.add_column("P (mAP50)", justify="right")
        table.add_column("R (mAR1_50)", justify="right")
        table.add_column("F1", justify="right")
        table.add_column("P all", justify="right")
        table.add_column("P complement", justify="right")
        for d in report.detectors:
            table.add_row(
                d.name,
                _fmt(d.metrics.get("map50")),
                _fmt(d.metrics.get("mar1_50")),
                _fmt(d.metrics.get("f1")),
                _fmt(d.full),
                _fmt(d.complement),
            )
        console.print(table)
        for pair in report.pairs:
            if pair.flipped:
                console.print(f"  flip: {pair.first} vs {pair.second}")
        if report.misaligned:
            console.print(f"[bold red]MISALIGNED[/bold red] at T={t}")

    echo = {**cfg.echo("compare"), "eval": eval_cfg.model_dump()}
    write_json({"config": echo, "reports": [r.to_json() for r in reports]}, cfg.out)
    console.print(f"[green]✓[/green] Wrote {cfg.out}")


@app.command()
@handle_errors
def consistency(
    annotations: Optional[Path] = typer.Option(
        None, "--annotations", help="Dataset A annotation file (held fixed)"
    ),
    importance: Optional[Path] = typer.Option(None, "--importance", help="Dataset A importance"),
    annotations_b: Optional[Path] = typer.Option(
        None, "--annotations-b", help="Dataset B annotation file (swept)"
    ),
    importance_b: Optional[Path] = typer.Option(
        None, "--importance-b", help="Dataset B importance"
    ),
    threshold: Optional[List[float]] = ThresholdOption,
    preset: Optional[str] = PresetOption,
    sweep: Optional[str] = typer.Option(None, "--sweep", help="Swept thresholds start:step:stop"),
    out: Optional[Path] = OutOption,
    strict: bool = StrictOption,
    jobs: Optional[int] = JobsOption,
    config: Optional[Path] = ConfigOption,
):
    """Sweep dataset B's threshold against dataset A's fixed selection."""
    cfg = _config(
        config,
        preset,
        annotations=annotations,
        importance=importance,
        annotations_b=annotations_b,
        importance_b=importance_b,
        thresholds=threshold,
        sweep=sweep,
        out=out,
        strict=strict,
        jobs=jobs,
    )
    cfg.require("annotations", "importance", "annotations_b", "importance_b", "out")

    ds_a = ScoredDataset(
        load_annotations(cfg.annotations, strict=cfg.strict), load_importance(cfg.importance)
    )
    ds_b = ScoredDataset(
        load_annotations(cfg.annotations_b, strict=cfg.strict), load_importance(cfg.importance_b)
    )
    curve = consistency_curve(ds_a, ds_b, cfg.threshold(), parse_range(cfg.sweep))
    write_csv(curve.to_frame(), cfg.out)

    table = Table(title=f"Consistency (A fixed at T={curve.fixed_threshold})", show_header=True)
    table.add_column("T", style="cyan", justify="right")
    table.add_column("Mean IOU", justify="right")
    table.add_column("Removed", justify="right")
    table.add_column("Images", justify="right")
    for t, iou, removed, used in zip(
        curve.thresholds, curve.mean_iou, curve.removal_fraction, curve.images_used
    ):
        table.add_row(f"{t:g}", _fmt(iou), f"{removed:.1%}", str(used))
    console.print(table)
    console.print(f"Best-agreement threshold: {curve.argmax_threshold()}")
    console.print(f"Inflection threshold: {curve.inflection_threshold()}")
    console.print(f"[green]✓[/green] Wrote {cfg.out}")


@app.command()
@handle_errors
def partition(
    importance: Optional[Path] = typer.Option(None, "--importance", help="Importance file"),
    groups: Optional[int] = typer.Option(None, "--groups", "-q", help="Number of quantile groups"),
    out: Optional[Path] = OutOption,
    config: Optional[Path] = ConfigOption,
):
    """Split annotations into importance quantile groups."""
    cfg = _config(config, importance=importance, groups=groups, out=out)
    cfg.require("importance", "out")

    records = load_importance(cfg.importance)
    parts = quantile_partition(records, cfg.groups)
    i_p = {s.annotation_id: s.i_p for r in records for s in r.scores}
    kept = cumulative_removal(parts)

    table = Table(title=f"{cfg.groups} Importance Groups", show_header=True)
    table.add_column("Group", style="cyan", justify="right")
    table.add_column("Size", justify="right")
    table.add_column("Min I_P", justify="right")
    table.add_column("Max I_P", justify="right")
    out_groups = []
    for index, group in enumerate(parts):
        low, high = i_p[group[0]], i_p[group[-1]]
        table.add_row(str(index), str(len(group)), f"{low:.4g}", f"{high:.4g}")
        out_groups.append(
            {"index": index, "min_i_p": low, "max_i_p": high, "annotation_ids": group}
        )
    console.print(table)

    write_json(
        {
            "config": cfg.echo("partition"),
            "groups": out_groups,
            "kept": [sorted(k) for k in kept],
        },
        cfg.out,
    )
    console.print(f"[green]✓[/green] Wrote {cfg.out}")


if __name__ == "__main__":
    app()
