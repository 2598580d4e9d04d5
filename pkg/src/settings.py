"""
Run configuration.

Values come from, in order of precedence: command-line flags, a YAML file
given with --config, CRITSEL_* environment variables (or a .env file), and
the defaults below.
"""

from pathlib import Path
from typing import Any, Optional

import yaml
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.core import ConfigError
from src.importance import SCORERS
from src.metrics import EvalConfig, parse_range

THRESHOLD_PRESETS = {"vg-inflection": 0.075, "coco": 0.25, "vg-best": 0.30}
SAMPLE_THRESHOLDS = (0.075, 0.25, 0.30)

PATH_FIELDS = (
    "annotations",
    "annotations_b",
    "captions",
    "concept_map",
    "importance",
    "importance_b",
)
# Never change results, so never echoed; outputs stay byte-identical across
# --jobs values and output locations.
UNECHOED_FIELDS = {"jobs", "out"}


class RunConfig(BaseSettings):
    """
    Effective configuration of one CLI run.

    Example:
        RunConfig(annotations=Path("instances.json"), thresholds=[0.25], heat_time=1.0)
    """

    annotations: Optional[Path] = None
    captions: Optional[Path] = None
    detections: list[Path] = Field(default_factory=list)
    concept_map: Optional[Path] = None
    importance: Optional[Path] = None
    annotations_b: Optional[Path] = None
    importance_b: Optional[Path] = None
    thresholds: list[float] = Field(default_factory=lambda: [0.0])
    heat_time: float = Field(default=1.0, ge=0.0)
    iou_grid: str = "0.50:0.05:0.95"
    max_det: Optional[int] = Field(default=None, ge=1)
    sweep: str = "0:0.05:0.35"
    groups: int = Field(default=10, ge=2)
    jobs: Optional[int] = Field(default=None, ge=1)
    out: Optional[Path] = None
    strict: bool = False
    scorer: str = "propagated"

    model_config = SettingsConfigDict(
        env_prefix="CRITSEL_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    @field_validator("thresholds")
    def validate_thresholds(cls, v: list[float]) -> list[float]:  # noqa: N805
        if not v:
            raise ValueError("At least one threshold is required")
        if any(not 0.0 <= t < 1.0 for t in v):
            raise ValueError(f"Thresholds must lie in [0, 1), got {v}")
        return v

    @field_validator("iou_grid", "sweep")
    def validate_range(cls, v: str) -> str:  # noqa: N805
        if not parse_range(v):
            raise ValueError(f"Range {v!r} is empty")
        return v

    @field_validator("scorer")
    def validate_scorer(cls, v: str) -> str:  # noqa: N805
        if v not in SCORERS:
            raise ValueError(f"Unknown scorer {v!r}; available: {', '.join(SCORERS)}")
        return v

    @classmethod
    def from_sources(
        cls, flags: dict[str, Any], config_path: Optional[Path] = None
    ) -> "RunConfig":
        """
        Merge flags over a YAML config file. Flags left at None (or empty
        lists, or a False switch) do not override lower-precedence sources.

        Raises:
            FileNotFoundError: If config_path does not exist
            ConfigError: If the YAML file is not a mapping
            pydantic.ValidationError: If a merged value is invalid
        """
        values = _read_yaml(config_path) if config_path is not None else {}
        values.update({k: v for k, v in flags.items() if not _unset(v)})
        return cls(**values)

    def require(self, *names: str) -> None:
        missing = [name for name in names if _unset(getattr(self, name))]
        if missing:
            flags = ", ".join("--" + name.replace("_", "-") for name in missing)
            raise ConfigError(f"Missing required option(s): {flags}")

    def check_paths(self) -> None:
        """
        Raises:
            FileNotFoundError: If a referenced input file does not exist
        """
        paths = [getattr(self, name) for name in PATH_FIELDS] + list(self.detections)
        for path in paths:
            if path is not None and not Path(path).exists():
                raise FileNotFoundError(f"Input file {path} does not exist")

    def threshold(self) -> float:
        """The single threshold of commands that take one."""
        if len(self.thresholds) != 1:
            raise ConfigError(f"Expected one threshold, got {self.thresholds}")
        return self.thresholds[0]

    def eval_config(self) -> EvalConfig:
        return EvalConfig(iou_thresholds=parse_range(self.iou_grid))

    def echo(self, command: str) -> dict[str, Any]:
        """Configuration recorded in output files."""
        return {"command": command, **self.model_dump(mode="json", exclude=UNECHOED_FIELDS)}


class LogSettings(BaseSettings):
    """Diagnostics level from CRITSEL_LOG: error, warn, info or debug."""

    log: str = "warn"

    model_config = SettingsConfigDict(env_prefix="CRITSEL_", env_file=".env", extra="ignore")

    @field_validator("log")
    def validate_level(cls, v: str) -> str:  # noqa: N805
        v = v.lower()
        if v not in ("error", "warn", "warning", "info", "debug"):
            raise ValueError(f"CRITSEL_LOG must be error, warn, info or debug, got {v!r}")
        return v


def _unset(value: Any) -> bool:
    if value is None or value is False:
        return True
    return isinstance(value, (list, tuple)) and len(value) == 0


def _read_yaml(path: Path) -> dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file {path} does not exist")
    with path.open(encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config file must be a mapping of option names to values")
    return {str(k).replace("-", "_"): v for k, v in data.items()}
