import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .bbox import BBox


class Category(BaseModel):
    """
    One entry of a detection vocabulary. Names are lowercased so caption
    tokens and category names compare directly.

    Example:
        Category(id=43, name="tennis racket")
    """

    id: int
    name: str

    model_config = ConfigDict(frozen=True)

    @field_validator("name")
    def normalize_name(cls, v: str) -> str:  # noqa: N805
        name = " ".join(v.lower().split())
        if not name:
            raise ValueError("Category name cannot be empty")
        return name


class ImageInfo(BaseModel):
    """COCO image entry. Unknown keys (file_name, coco_url, ...) pass through untouched."""

    id: int
    width: Optional[float] = None
    height: Optional[float] = None

    model_config = ConfigDict(frozen=True, extra="allow")


class Annotation(BaseModel):
    """
    Ground-truth object region. Extra COCO keys (area, iscrowd, segmentation)
    are carried along so filtered files keep the source schema.

    Example:
        Annotation(id=7, image_id=1, category_id=18, bbox=BBox(x=0, y=0, w=10, h=10))
    """

    id: int
    image_id: int
    category_id: int
    bbox: BBox

    model_config = ConfigDict(frozen=True, extra="allow")

    @field_validator("bbox", mode="before")
    def parse_bbox(cls, v):  # noqa: N805
        if isinstance(v, (list, tuple)):
            return BBox.from_xywh(v)
        return v

    def to_coco(self) -> dict:
        record = self.model_dump()
        record["bbox"] = self.bbox.to_list()
        return record


class Detection(BaseModel):
    """Scored detector proposal in the COCO results format."""

    image_id: int
    category_id: int
    bbox: BBox
    score: float = Field(ge=0.0, le=1.0)

    model_config = ConfigDict(frozen=True)

    @field_validator("bbox", mode="before")
    def parse_bbox(cls, v):  # noqa: N805
        if isinstance(v, (list, tuple)):
            return BBox.from_xywh(v)
        return v

    @field_validator("score")
    def validate_score(cls, v: float) -> float:  # noqa: N805
        if not math.isfinite(v):
            raise ValueError("Score must be finite")
        return v

    def to_coco(self) -> dict:
        return {
            "image_id": self.image_id,
            "category_id": self.category_id,
            "bbox": self.bbox.to_list(),
            "score": self.score,
        }


class CaptionSet(BaseModel):
    """
    Ground-truth sentences describing one image. `tagged` optionally holds
    externally tagged tokens per caption (None where the built-in normaliser applies).
    """

    image_id: int
    captions: list[str] = Field(default_factory=list)
    tagged: list[Optional[list[str]]] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_tagged(self) -> "CaptionSet":
        if self.tagged and len(self.tagged) != len(self.captions):
            raise ValueError(
                f"Image {self.image_id}: {len(self.tagged)} token lists for "
                f"{len(self.captions)} captions"
            )
        return self

    def __len__(self) -> int:
        return len(self.captions)

    def add(self, caption: str, tokens: Optional[list[str]] = None) -> None:
        has_tags = bool(self.tagged) or tokens is not None
        if tokens is not None and not self.tagged:
            self.tagged = [None] * len(self.captions)
        self.captions.append(caption)
        if has_tags:
            self.tagged.append(tokens)
