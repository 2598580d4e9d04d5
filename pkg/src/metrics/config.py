from pydantic import BaseModel, ConfigDict, Field, field_validator

DEFAULT_IOU_THRESHOLDS = [round(0.5 + 0.05 * i, 2) for i in range(10)]
DEFAULT_MAX_DETECTIONS = [1, 10, 100]


def parse_range(text: str) -> list[float]:
    """
    Parse "start:step:stop" (inclusive stop) or a comma list into floats.

    Example:
        parse_range("0:0.05:0.35") == [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35]
    """
    text = text.strip()
    if ":" not in text:
        try:
            return [float(v) for v in text.split(",") if v.strip()]
        except ValueError as e:
            raise ValueError(f"Invalid value list {text!r}") from e
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"Range {text!r} must be start:step:stop")
    try:
        start, step, stop = (float(p) for p in parts)
    except ValueError as e:
        raise ValueError(f"Range {text!r} must be numeric") from e
    if step <= 0:
        raise ValueError(f"Range step must be positive, got {step}")
    count = int(round((stop - start) / step)) + 1
    values = [round(start + i * step, 10) for i in range(count)]
    return [v for v in values if v <= stop + 1e-9]


class EvalConfig(BaseModel):
    """
    COCO-protocol evaluation settings.

    Example:
        EvalConfig(iou_thresholds=[0.5], max_detections=[1, 20])
    """

    iou_thresholds: list[float] = Field(default_factory=lambda: list(DEFAULT_IOU_THRESHOLDS))
    max_detections: list[int] = Field(default_factory=lambda: list(DEFAULT_MAX_DETECTIONS))
    recall_points: int = Field(default=101, ge=2)

    model_config = ConfigDict(frozen=True)

    @field_validator("iou_thresholds")
    def validate_thresholds(cls, v: list[float]) -> list[float]:  # noqa: N805
        if not v:
            raise ValueError("At least one IOU threshold is required")
        if any(not 0.0 < g <= 1.0 for g in v):
            raise ValueError(f"IOU thresholds must lie in (0, 1], got {v}")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"IOU thresholds must be strictly increasing, got {v}")
        return v

    @field_validator("max_detections")
    def validate_max_detections(cls, v: list[int]) -> list[int]:  # noqa: N805
        if not v:
            raise ValueError("At least one detection cap is required")
        if any(k <= 0 for k in v):
            raise ValueError(f"Detection caps must be positive, got {v}")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"Detection caps must be strictly increasing, got {v}")
        return v

    def threshold_index(self, gamma: float) -> int | None:
        for i, g in enumerate(self.iou_thresholds):
            if abs(g - gamma) < 1e-9:
                return i
        return None

    def cap_index(self, k: int) -> int | None:
        return self.max_detections.index(k) if k in self.max_detections else None
