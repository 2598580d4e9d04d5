"""Unit tests for ranking misalignment, importance quantiles and cross-dataset consistency."""

import pytest
from pydantic import ValidationError

from src.analysis import (
    CURVE_COLUMNS,
    ConsistencyCurve,
    ScoredDataset,
    consistency_curve,
    cumulative_removal,
    misalignment_check,
    quantile_partition,
)
from src.core import EvaluationError, ReferentialError
from src.importance import ImportanceRecord
from src.metrics import parse_range
from tests.factories import det, make_dataset, record

SWEEP = parse_range("0:0.05:0.35")


@pytest.fixture
def racket_scene():
    """One critical racket and five superfluous objects on disjoint boxes."""
    categories = {1: "tennis racket", 2: "chair", 3: "bench", 4: "bottle", 5: "cup", 6: "clock"}
    annotations = [(i, 1, i, [120 * (i - 1), 0, 100, 100]) for i in range(1, 7)]
    ds = make_dataset(categories, annotations)
    records = [record(1, {1: 0.9, 2: 0.02, 3: 0.02, 4: 0.02, 5: 0.02, 6: 0.02})]
    return ds, records


def detect(ds, annotation_ids, score=0.9):
    return [
        det(a.image_id, a.category_id, a.bbox.to_list(), score)
        for a in ds.annotations
        if a.id in annotation_ids
    ]


class TestMisalignment:
    """Tests for rank flips between critical and full precision."""

    def test_flip(self, racket_scene):
        """Test that the superfluous-object detector wins on A but loses on I."""
        ds, records = racket_scene
        det_sets = {"racket": detect(ds, {1}), "clutter": detect(ds, {2, 3, 4, 5, 6})}
        report = misalignment_check(det_sets, ds, records, 0.5)
        racket, clutter = report.detectors
        assert racket.critical == pytest.approx(1.0)
        assert racket.full == pytest.approx(1 / 6)
        assert racket.complement == pytest.approx(0.0)
        assert clutter.critical == pytest.approx(0.0)
        assert clutter.full == pytest.approx(5 / 6)
        assert clutter.complement == pytest.approx(1.0)
        assert report.misaligned
        assert report.pairs[0].flipped
        assert report.ranking("critical") == ["racket", "clutter"]
        assert report.ranking("full") == ["clutter", "racket"]

    def test_identical_submissions(self, racket_scene):
        """Test that equal detectors never flip."""
        ds, records = racket_scene
        dets = detect(ds, {1, 2})
        report = misalignment_check({"a": dets, "b": list(dets)}, ds, records, 0.5)
        assert not report.misaligned
        assert report.pairs[0].critical_order == report.pairs[0].full_order == 0

    def test_three_detectors_without_flip(self, racket_scene):
        """Test that ties on one side are not flips."""
        ds, records = racket_scene
        det_sets = {
            "all": detect(ds, {1, 2, 3, 4, 5, 6}),
            "some": detect(ds, {1, 2, 3}),
            "none": [],
        }
        report = misalignment_check(det_sets, ds, records, 0.5)
        assert len(report.pairs) == 3
        assert not report.misaligned
        assert [d.full for d in report.detectors] == pytest.approx([1.0, 0.5, 0.0])

    def test_zero_threshold_agrees(self, racket_scene):
        """Test that at T = 0 the critical subset is everything."""
        ds, records = racket_scene
        det_sets = {"racket": detect(ds, {1}), "clutter": detect(ds, {2, 3, 4, 5, 6})}
        report = misalignment_check(det_sets, ds, records, 0.0)
        assert not report.misaligned
        assert all(d.complement is None for d in report.detectors)
        assert all(d.critical == pytest.approx(d.full) for d in report.detectors)

    def test_needs_two_detectors(self, racket_scene):
        """Test that one submission cannot be ranked."""
        ds, records = racket_scene
        with pytest.raises(EvaluationError, match="at least two"):
            misalignment_check({"only": detect(ds, {1})}, ds, records, 0.5)

    def test_to_json(self, racket_scene):
        """Test the report's JSON form."""
        ds, records = racket_scene
        det_sets = {"racket": detect(ds, {1}), "clutter": detect(ds, {2, 3, 4, 5, 6})}
        data = misalignment_check(det_sets, ds, records, 0.5).to_json()
        assert data["misaligned"] is True
        assert data["pairs"][0]["flipped"] is True
        assert data["detectors"][0]["metrics"]["map50"] == pytest.approx(1.0)


class TestQuantilePartition:
    """Tests for equal-count importance groups."""

    def test_even_split(self):
        """Test four annotations in two groups."""
        records = [record(1, {1: 0.1, 2: 0.2, 3: 0.3, 4: 0.4})]
        assert quantile_partition(records, 2) == [[1, 2], [3, 4]]

    def test_remainder_goes_to_lowest_groups(self):
        """Test four annotations in three groups."""
        records = [record(1, {4: 0.6, 3: 0.4}), record(2, {2: 0.2, 1: 0.8})]
        assert quantile_partition(records, 3) == [[2, 3], [4], [1]]

    def test_ties_by_annotation_id(self):
        """Test that equal scores rank by id."""
        assert quantile_partition([record(1, {5: 0.5, 3: 0.5})], 2) == [[3], [5]]

    def test_skipped_records_ignored(self):
        """Test that skip markers contribute nothing."""
        records = [record(1, {1: 0.25, 2: 0.75}), ImportanceRecord.skip(2, "no-annotations")]
        assert quantile_partition(records, 2) == [[1], [2]]

    def test_too_few_annotations(self):
        """Test that groups cannot be empty."""
        with pytest.raises(EvaluationError, match="cannot split 2 annotations into 3 groups"):
            quantile_partition([record(1, {1: 0.5, 2: 0.5})], 3)

    def test_needs_two_groups(self):
        """Test the lower bound on q."""
        with pytest.raises(ValueError):
            quantile_partition([record(1, {1: 1.0})], 1)

    def test_cumulative_removal(self):
        """Test the nested kept sets."""
        assert cumulative_removal([[1, 2], [3], [4]]) == [{1, 2, 3, 4}, {3, 4}, {4}]


@pytest.fixture
def dog_pair():
    """Dataset A holds one dog; dataset B the same dog plus three low-importance boxes."""
    ds_a = make_dataset({1: "dog"}, [(1, 1, 1, [0, 0, 100, 100])])
    ds_b = make_dataset(
        {1: "dog", 2: "other"},
        [
            (1, 1, 1, [0, 0, 100, 100]),
            (2, 1, 2, [300, 0, 100, 100]),
            (3, 1, 2, [0, 300, 100, 100]),
            (4, 1, 2, [300, 300, 100, 100]),
        ],
    )
    a = ScoredDataset(ds_a, [record(1, {1: 1.0})])
    b = ScoredDataset(ds_b, [record(1, {1: 0.86, 2: 0.03, 3: 0.07, 4: 0.04})])
    return a, b


class TestConsistency:
    """Tests for the cross-dataset agreement curve."""

    def test_curve(self, dog_pair):
        """Test IOU and removal along the sweep."""
        curve = consistency_curve(*dog_pair, 0.25, SWEEP)
        assert curve.shared_images == 1
        assert curve.mean_iou == pytest.approx([0.25, 0.5] + [1.0] * 6)
        assert curve.removal_fraction == pytest.approx([0.0, 0.5] + [0.75] * 6)
        assert curve.images_used == [1] * 8

    def test_best_and_inflection(self, dog_pair):
        """Test the summary thresholds."""
        curve = consistency_curve(*dog_pair, 0.25, SWEEP)
        assert curve.argmax_threshold() == 0.1
        assert curve.inflection_threshold() == 0.1

    def test_empty_fixed_selection(self, dog_pair):
        """Test that images with nothing selected on A are left out."""
        _, b = dog_pair
        halves = make_dataset({1: "dog"}, [(1, 1, 1, [0, 0, 100, 100]), (2, 1, 1, [0, 0, 50, 50])])
        a = ScoredDataset(halves, [record(1, {1: 0.5, 2: 0.5})])
        curve = consistency_curve(a, b, 0.5, SWEEP)
        assert curve.mean_iou == [None] * 8
        assert curve.images_used == [0] * 8
        assert curve.argmax_threshold() is None
        assert curve.inflection_threshold() is None

    def test_no_shared_images(self, dog_pair):
        """Test that disjoint datasets cannot be compared."""
        a, _ = dog_pair
        other = make_dataset({1: "dog"}, [(1, 2, 1, [0, 0, 10, 10])])
        with pytest.raises(EvaluationError, match="share no image ids"):
            consistency_curve(a, ScoredDataset(other, [record(2, {1: 1.0})]), 0.25, SWEEP)

    def test_stale_records(self, dog_pair):
        """Test that records scoring unknown annotations are rejected up front."""
        _, b = dog_pair
        with pytest.raises(ReferentialError) as exc:
            ScoredDataset(b.dataset, [record(1, {1: 0.5, 99: 0.5})])
        assert exc.value.ids == [99]

    def test_records_must_cover_images(self, dog_pair):
        """Test that every image needs a record and every record an image."""
        a, b = dog_pair
        with pytest.raises(ReferentialError) as exc:
            ScoredDataset(b.dataset, [])
        assert exc.value.ids == [1]
        extra = [record(1, {1: 1.0}), ImportanceRecord.skip(5, "no-annotations")]
        with pytest.raises(ReferentialError) as exc:
            ScoredDataset(a.dataset, extra)
        assert exc.value.ids == [5]

    def test_frame(self, dog_pair):
        """Test the tabular form."""
        frame = consistency_curve(*dog_pair, 0.25, SWEEP).to_frame()
        assert list(frame.columns) == CURVE_COLUMNS
        assert len(frame) == 8

    def test_column_lengths_checked(self):
        """Test that every column needs one value per threshold."""
        with pytest.raises(ValidationError):
            ConsistencyCurve(
                fixed_threshold=0.25,
                shared_images=1,
                thresholds=[0.0, 0.1],
                mean_iou=[1.0],
                removal_fraction=[0.0, 0.0],
                images_used=[1, 1],
            )

    def test_argmax_first_on_ties(self):
        """Test that the lowest threshold wins a tie."""
        curve = ConsistencyCurve(
            fixed_threshold=0.25,
            shared_images=1,
            thresholds=[0.0, 0.1, 0.2],
            mean_iou=[0.5, 0.9, 0.9],
            removal_fraction=[0.0, 0.1, 0.2],
            images_used=[1, 1, 1],
        )
        assert curve.argmax_threshold() == 0.1
