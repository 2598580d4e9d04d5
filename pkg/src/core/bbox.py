import math
from typing import Sequence

from pydantic import BaseModel, ConfigDict, model_validator


class BBox(BaseModel):
    """
    Axis-aligned rectangle in pixel units, stored in COCO (x, y, w, h) order.

    Example:
        BBox(x=10.0, y=20.5, w=30.0, h=12.25)
    """

    x: float
    y: float
    w: float
    h: float

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_extent(self) -> "BBox":
        if not all(math.isfinite(v) for v in (self.x, self.y, self.w, self.h)):
            raise ValueError("Box coordinates must be finite")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"Degenerate box: width {self.w} and height {self.h} must be positive")
        return self

    @classmethod
    def from_xywh(cls, values: Sequence[float]) -> "BBox":
        if len(values) != 4:
            raise ValueError(f"Box needs 4 values [x, y, w, h], got {len(values)}")
        x, y, w, h = (float(v) for v in values)
        return cls(x=x, y=y, w=w, h=h)

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    def corners(self) -> tuple[float, float, float, float]:
        """Return (x1, y1, x2, y2)."""
        return self.x, self.y, self.x2, self.y2

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]

    def translated(self, dx: float, dy: float) -> "BBox":
        return BBox(x=self.x + dx, y=self.y + dy, w=self.w, h=self.h)

    def scaled(self, s: float) -> "BBox":
        return BBox(x=self.x * s, y=self.y * s, w=self.w * s, h=self.h * s)
