from collections import defaultdict
from typing import Any, Iterable, Optional

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from .annotation import Annotation, CaptionSet, Category, ImageInfo
from .errors import DatasetFormatError, ReferentialError


def check_references(
    categories: list[Category], images: list[ImageInfo], annotations: list[Annotation]
) -> None:
    """
    Check vocabulary uniqueness and that every annotation points at a known
    image and category.

    Raises:
        DatasetFormatError: On duplicate category, image or annotation ids
        ReferentialError: On annotations referencing unknown images or categories
    """
    names: set[str] = set()
    ids: set[int] = set()
    for category in categories:
        if category.id in ids:
            raise DatasetFormatError(f"Duplicate category id {category.id}")
        if category.name in names:
            raise DatasetFormatError(f"Duplicate category name {category.name!r}")
        ids.add(category.id)
        names.add(category.name)

    image_ids = {image.id for image in images}
    if len(image_ids) != len(images):
        raise DatasetFormatError("Duplicate image ids in images section")

    seen: set[int] = set()
    duplicates: set[int] = set()
    for ann in annotations:
        if ann.id in seen:
            duplicates.add(ann.id)
        seen.add(ann.id)
    if duplicates:
        raise DatasetFormatError(f"Duplicate annotation ids: {sorted(duplicates)[:20]}")

    unknown_images = [a.image_id for a in annotations if a.image_id not in image_ids]
    if unknown_images:
        raise ReferentialError("Annotations reference unknown image ids", unknown_images)
    unknown_categories = [a.category_id for a in annotations if a.category_id not in ids]
    if unknown_categories:
        raise ReferentialError("Annotations reference unknown category ids", unknown_categories)


class Dataset(BaseModel):
    """
    Immutable in-memory view of a COCO-style annotation file.

    Holds the category vocabulary, the image list, the flat annotation list
    (indexed per image and per category) and optional caption sets.
    `passthrough` keeps the raw `info`, `licenses` and `categories` sections
    so filtered files can be written back unchanged.

    Example:
        Dataset(
            categories=[Category(id=1, name="person")],
            images=[ImageInfo(id=1, width=640, height=480)],
            annotations=[Annotation(id=1, image_id=1, category_id=1, bbox=[0, 0, 10, 10])],
        )
    """

    categories: list[Category]
    images: list[ImageInfo]
    annotations: list[Annotation] = Field(default_factory=list)
    captions: dict[int, CaptionSet] = Field(default_factory=dict)
    passthrough: dict[str, Any] = Field(default_factory=dict)
    skipped_annotations: int = 0

    model_config = ConfigDict(frozen=True)

    _vocab: dict[int, Category] = PrivateAttr(default_factory=dict)
    _by_image: dict[int, list[Annotation]] = PrivateAttr(default_factory=dict)
    _by_id: dict[int, Annotation] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def validate_references(self) -> "Dataset":
        check_references(self.categories, self.images, self.annotations)
        return self

    def model_post_init(self, __context: Any) -> None:
        self._vocab = {c.id: c for c in self.categories}
        by_image: dict[int, list[Annotation]] = defaultdict(list)
        for ann in self.annotations:
            by_image[ann.image_id].append(ann)
        self._by_image = {k: sorted(v, key=lambda a: a.id) for k, v in by_image.items()}
        self._by_id = {ann.id: ann for ann in self.annotations}

    @property
    def vocabulary(self) -> dict[int, Category]:
        return self._vocab

    def image_ids(self) -> list[int]:
        return sorted(image.id for image in self.images)

    def annotation_ids(self) -> set[int]:
        return set(self._by_id)

    def annotation(self, annotation_id: int) -> Annotation:
        return self._by_id[annotation_id]

    def annotations_for(self, image_id: int, category_id: Optional[int] = None) -> list[Annotation]:
        """Annotations of one image (optionally one category), ordered by annotation id."""
        anns = self._by_image.get(image_id, [])
        if category_id is None:
            return list(anns)
        return [a for a in anns if a.category_id == category_id]

    def restrict(self, keep: Iterable[int]) -> "Dataset":
        """
        Return a copy holding only the annotations whose ids are in `keep`.

        Raises:
            ReferentialError: If `keep` contains ids foreign to this dataset
        """
        keep = set(keep)
        foreign = keep - self._by_id.keys()
        if foreign:
            raise ReferentialError("Annotation ids not in dataset", foreign)
        return Dataset(
            categories=self.categories,
            images=self.images,
            annotations=[a for a in self.annotations if a.id in keep],
            captions=self.captions,
            passthrough=self.passthrough,
            skipped_annotations=self.skipped_annotations,
        )

    def with_captions(self, captions: dict[int, CaptionSet]) -> "Dataset":
        """Attach caption sets; captions for images outside the dataset are dropped."""
        image_ids = {image.id for image in self.images}
        return self.model_copy(
            update={"captions": {k: v for k, v in captions.items() if k in image_ids}}
        )
