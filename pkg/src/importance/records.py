from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

SkipReason = Literal["no-category-importance", "no-annotations"]

NO_CATEGORY_IMPORTANCE: SkipReason = "no-category-importance"
NO_ANNOTATIONS: SkipReason = "no-annotations"


class AnnotationScore(BaseModel):
    """Importance of one annotation before (i_o) and after (i_p) propagation."""

    annotation_id: int
    i_o: float = Field(ge=0.0)
    i_p: float = Field(ge=0.0)

    model_config = ConfigDict(frozen=True)


class ImportanceRecord(BaseModel):
    """
    Importance scores for every annotation of one image, or a skip marker.

    Example:
        ImportanceRecord(
            image_id=1,
            scores=[AnnotationScore(annotation_id=7, i_o=0.6, i_p=1.0)],
        )
        ImportanceRecord(image_id=2, skipped=True, reason="no-annotations")
    """

    image_id: int
    skipped: bool = False
    reason: Optional[SkipReason] = None
    scores: list[AnnotationScore] = Field(default_factory=list)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_consistency(self) -> "ImportanceRecord":
        if self.skipped:
            if self.reason is None:
                raise ValueError(f"Skipped record for image {self.image_id} needs a reason")
            if self.scores:
                raise ValueError(f"Skipped record for image {self.image_id} cannot carry scores")
            return self
        if self.reason is not None:
            raise ValueError(f"Record for image {self.image_id} has a reason but is not skipped")
        if not self.scores:
            raise ValueError(f"Record for image {self.image_id} has no scores")
        total = sum(s.i_p for s in self.scores)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"I_P of image {self.image_id} sums to {total}, expected 1")
        return self

    @classmethod
    def skip(cls, image_id: int, reason: SkipReason) -> "ImportanceRecord":
        return cls(image_id=image_id, skipped=True, reason=reason)

    def to_json(self) -> dict:
        return self.model_dump(exclude_none=True)


class SelectionConfig(BaseModel):
    """Importance threshold T and heat dispersion time t."""

    threshold: float = Field(default=0.0, ge=0.0, lt=1.0)
    heat_time: float = Field(default=1.0, ge=0.0)

    model_config = ConfigDict(frozen=True)
