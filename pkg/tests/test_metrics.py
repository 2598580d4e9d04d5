"""Unit tests for matching, average precision and COCO-protocol evaluation."""

import logging

import numpy as np
import pytest
from pydantic import ValidationError

from src.core import EvaluationError, ReferentialError
from src.geometry import iou
from src.importance import ImportanceRecord
from src.metrics import (
    DEFAULT_IOU_THRESHOLDS,
    EvalConfig,
    average_precision,
    cap_detections,
    critical_subset,
    evaluate,
    evaluate_filtered,
    f1_score,
    interpolated_ap,
    match,
    parse_range,
    precision_at,
)
from tests.factories import det, make_dataset, record

AP_EXAMPLE = (51 + 100 / 3) / 101


@pytest.fixture
def one_per_image():
    return make_dataset(
        {1: "dog", 2: "cat"},
        [
            (1, 1, 1, [0, 0, 50, 50]),
            (2, 2, 2, [10, 10, 40, 60]),
            (3, 3, 1, [100, 100, 30, 30]),
        ],
    )


@pytest.fixture
def two_dogs():
    return make_dataset({1: "dog"}, [(1, 1, 1, [0, 0, 50, 50]), (2, 1, 1, [200, 0, 50, 50])])


def perfect(ds, score=1.0):
    return [det(a.image_id, a.category_id, a.bbox.to_list(), score) for a in ds.annotations]


class TestParseRange:
    """Tests for range and list parsing."""

    def test_sweep(self):
        """Test the default threshold sweep."""
        assert parse_range("0:0.05:0.35") == [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35]

    def test_iou_grid(self):
        """Test that the COCO grid has ten thresholds."""
        assert parse_range("0.50:0.05:0.95") == pytest.approx(DEFAULT_IOU_THRESHOLDS)

    def test_list(self):
        """Test a comma list."""
        assert parse_range("0.5, 0.75") == [0.5, 0.75]

    @pytest.mark.parametrize("text", ["0:0:1", "a:b:c", "0:1", "x,y"])
    def test_invalid(self, text):
        """Test malformed ranges."""
        with pytest.raises(ValueError):
            parse_range(text)


class TestEvalConfig:
    """Tests for evaluation settings validation."""

    def test_defaults(self):
        """Test COCO defaults."""
        cfg = EvalConfig()
        assert len(cfg.iou_thresholds) == 10
        assert cfg.max_detections == [1, 10, 100]
        assert cfg.threshold_index(0.75) == 5
        assert cfg.cap_index(10) == 1

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"iou_thresholds": []},
            {"iou_thresholds": [0.0, 0.5]},
            {"iou_thresholds": [0.75, 0.5]},
            {"max_detections": [10, 1]},
            {"max_detections": [0]},
        ],
    )
    def test_invalid(self, kwargs):
        """Test rejected settings."""
        with pytest.raises(ValidationError):
            EvalConfig(**kwargs)


class TestMatch:
    """Tests for greedy matching."""

    GT = [(1, 1, 1, [0, 0, 10, 10]), (2, 1, 1, [0, 0, 10, 10])]

    def test_duplicate_detection_is_false_positive(self):
        """Test that a ground truth matches at most one detection."""
        ds = make_dataset({1: "dog"}, [(1, 1, 1, [0, 0, 10, 10])])
        dets = [det(1, 1, [0, 0, 10, 10], 0.9), det(1, 1, [0, 0, 10, 10], 0.8)]
        result = match(dets, ds.annotations, 0.5)
        assert result.detection_matches == (1, None)
        assert result.true_positives == 1

    def test_tie_goes_to_lower_id(self):
        """Test that equal IOUs pick the lowest annotation id."""
        ds = make_dataset({1: "dog"}, self.GT)
        result = match([det(1, 1, [0, 0, 10, 10], 0.9)], list(reversed(ds.annotations)), 0.5)
        assert result.detection_matches == (1,)
        assert result.annotation_matched == {1: True, 2: False}

    def test_threshold_inclusive(self):
        """Test that IOU equal to the threshold matches."""
        ds = make_dataset({1: "dog"}, [(1, 1, 1, [0, 0, 10, 10])])
        assert match([det(1, 1, [0, 0, 5, 10], 0.9)], ds.annotations, 0.5).true_positives == 1
        assert match([det(1, 1, [0, 0, 5, 10], 0.9)], ds.annotations, 0.51).true_positives == 0

    def test_best_iou_preferred(self):
        """Test that a detection takes the best-overlapping free ground truth."""
        ds = make_dataset({1: "dog"}, [(1, 1, 1, [0, 0, 10, 10]), (2, 1, 1, [2, 0, 10, 10])])
        assert match([det(1, 1, [2, 0, 10, 10], 0.9)], ds.annotations, 0.5).detection_matches == (2,)

    def test_no_ground_truth(self):
        """Test that every detection is a false positive without ground truth."""
        result = match([det(1, 1, [0, 0, 1, 1], 0.5)], [], 0.5)
        assert result.detection_matches == (None,)


class TestPrecision:
    """Tests for single-slice precision and AP."""

    def test_precision_at(self):
        """Test one match out of two detections."""
        ds = make_dataset({1: "dog"}, [(1, 1, 1, [0, 0, 10, 10])])
        dets = [det(1, 1, [50, 50, 10, 10], 0.9), det(1, 1, [0, 0, 10, 10], 0.3)]
        assert precision_at(dets, ds.annotations, 0.5) == 0.5

    def test_precision_without_detections(self):
        """Test that precision is undefined without detections."""
        assert precision_at([], [], 0.5) is None

    def test_interpolated_example(self):
        """Test TP, FP, TP against two ground truths."""
        ap, recall = interpolated_ap(np.array([True, False, True]), 2)
        assert ap == pytest.approx(AP_EXAMPLE)
        assert recall == 1.0

    def test_perfect_ranking(self):
        """Test that all-TP flags give AP 1."""
        assert interpolated_ap(np.ones(7, dtype=bool), 7)[0] == pytest.approx(1.0)

    def test_no_detections(self):
        """Test AP 0 with ground truth but no detections."""
        assert interpolated_ap(np.array([], dtype=bool), 3) == (0.0, 0.0)

    def test_no_ground_truth(self):
        """Test that AP is undefined without ground truth."""
        assert interpolated_ap(np.array([False]), 0) == (None, None)

    def test_partial_recall(self):
        """Test that recall levels beyond the final recall contribute 0."""
        ap, recall = interpolated_ap(np.array([True]), 2)
        assert recall == 0.5
        assert ap == pytest.approx(51 / 101)

    def test_average_precision(self, two_dogs):
        """Test the worked example through matching."""
        dets = [
            det(1, 1, [0, 0, 50, 50], 0.9),
            det(1, 1, [500, 500, 5, 5], 0.8),
            det(1, 1, [200, 0, 50, 50], 0.7),
        ]
        assert average_precision(dets, two_dogs.annotations, 0.5) == pytest.approx(AP_EXAMPLE)


class TestF1:
    """Tests for the F1 of mAP50 and mAR1_50."""

    def test_value(self):
        """Test the harmonic mean."""
        assert f1_score(0.6, 0.3) == pytest.approx(0.4)

    def test_zero(self):
        """Test that both zero gives 0."""
        assert f1_score(0.0, 0.0) == 0.0

    def test_undefined(self):
        """Test that an undefined input gives None."""
        assert f1_score(None, 0.5) is None


class TestCapDetections:
    """Tests for per-image detection caps."""

    def test_top_k_per_image(self):
        """Test that each image keeps its k best."""
        dets = [det(1, 1, [0, 0, 1, 1], s) for s in (0.1, 0.9, 0.5)] + [det(2, 1, [0, 0, 1, 1], 0.2)]
        kept = cap_detections(dets, 2)
        assert [(d.image_id, d.score) for d in kept] == [(1, 0.9), (1, 0.5), (2, 0.2)]

    def test_none_keeps_all(self):
        """Test that no cap keeps everything."""
        dets = [det(1, 1, [0, 0, 1, 1], 0.5)] * 3
        assert len(cap_detections(dets, None)) == 3


class TestEvaluate:
    """Tests for full-dataset evaluation."""

    def test_perfect_detector(self, one_per_image):
        """Test that detections equal to the ground truth score 1 everywhere."""
        report = evaluate(perfect(one_per_image), one_per_image)
        assert all(v == pytest.approx(1.0) for v in report.metrics().values())
        assert report.totals.categories_evaluated == 2

    def test_no_detections(self, one_per_image):
        """Test that an empty submission scores 0 everywhere."""
        report = evaluate([], one_per_image)
        assert all(v == 0.0 for v in report.metrics().values())

    def test_no_ground_truth(self):
        """Test that a dataset without annotations cannot be evaluated."""
        ds = make_dataset({1: "dog"}, [], image_ids=[1])
        with pytest.raises(EvaluationError, match="no categories to evaluate"):
            evaluate([], ds)

    def test_category_without_ground_truth_excluded(self):
        """Test that detections of an unannotated category do not lower the means."""
        ds = make_dataset({1: "dog", 2: "cat", 3: "bird"}, [(1, 1, 1, [0, 0, 10, 10])])
        dets = perfect(ds) + [det(1, 2, [50, 50, 10, 10], 0.99)]
        report = evaluate(dets, ds)
        assert report.map50 == pytest.approx(1.0)
        assert report.totals.categories_excluded == 2
        assert [c.category_id for c in report.per_category] == [1]

    def test_foreign_category(self, one_per_image):
        """Test that a category outside the vocabulary is an error."""
        with pytest.raises(ReferentialError) as exc:
            evaluate([det(1, 9, [0, 0, 1, 1], 0.5)], one_per_image)
        assert exc.value.ids == [9]

    def test_unknown_image_dropped(self, one_per_image, caplog):
        """Test that detections on unknown images are ignored with a warning."""
        caplog.set_level(logging.WARNING)
        dets = perfect(one_per_image)
        report = evaluate(dets + [det(99, 1, [0, 0, 1, 1], 0.99)], one_per_image)
        assert report.metrics() == evaluate(dets, one_per_image).metrics()
        assert "absent from the annotations" in caplog.text

    def test_cap_applies_across_categories(self):
        """Test that mAR1 ranks an image's detections across categories."""
        ds = make_dataset({1: "dog", 2: "cat"}, [(1, 1, 1, [0, 0, 10, 10]), (2, 1, 2, [50, 0, 10, 10])])
        dets = [det(1, 2, [50, 0, 10, 10], 0.9), det(1, 1, [0, 0, 10, 10], 0.8)]
        report = evaluate(dets, ds)
        assert report.mar1 == pytest.approx(0.5)
        assert report.mar10 == pytest.approx(1.0)
        assert report.mar1_50 == pytest.approx(0.5)
        assert report.map50 == pytest.approx(1.0)

    def test_grid_without_075(self, one_per_image):
        """Test that mAP75 is undefined on a 0.5-only grid."""
        report = evaluate(perfect(one_per_image), one_per_image, EvalConfig(iou_thresholds=[0.5]))
        assert report.map75 is None
        assert report.map == report.map50

    def test_stricter_iou_never_helps(self):
        """Test that AP at 0.75 never exceeds AP at 0.5 with one box per slice."""
        rng = np.random.default_rng(2)
        anns, dets = [], []
        for image_id in range(1, 41):
            x, y = (float(v) for v in rng.uniform(0, 300, size=2))
            anns.append((image_id, image_id, 1 + image_id % 2, [x, y, 40.0, 40.0]))
            dx, dy = (float(v) for v in rng.uniform(-15, 15, size=2))
            dets.append(det(image_id, 1 + image_id % 2, [x + dx, y + dy, 40.0, 40.0], float(rng.uniform())))
        report = evaluate(dets, make_dataset({1: "dog", 2: "cat"}, anns))
        for category in report.per_category:
            assert category.ap50 >= category.ap75
        assert report.map50 >= report.map75

    def test_deterministic_and_order_free(self, one_per_image):
        """Test that shuffling the submission does not change the report."""
        dets = [
            det(1, 1, [0, 0, 50, 40], 0.7),
            det(2, 2, [10, 10, 40, 50], 0.6),
            det(3, 1, [90, 90, 30, 30], 0.5),
            det(1, 2, [0, 0, 50, 50], 0.4),
        ]
        a = evaluate(dets, one_per_image).to_json()
        b = evaluate(list(reversed(dets)), one_per_image).to_json()
        assert a == b

    def test_to_json_layout(self, one_per_image):
        """Test the report's JSON sections."""
        data = evaluate(perfect(one_per_image), one_per_image).to_json({"command": "evaluate"})
        assert list(data) == ["config", "totals", "metrics", "per_category"]
        assert data["totals"]["gt_annotations"] == 3
        assert set(data["metrics"]) == {
            "map", "map50", "map75", "mar1", "mar10", "mar100", "mar1_50", "f1"
        }

    def test_image_subset(self, one_per_image):
        """Test that evaluation can be restricted to some images."""
        report = evaluate(perfect(one_per_image), one_per_image, image_ids=[1, 3])
        assert report.totals.images == 2
        assert [c.category_id for c in report.per_category] == [1]


class TestEvaluateFiltered:
    """Tests for evaluation against importance-filtered ground truth."""

    def test_zero_threshold_matches_full(self, one_per_image):
        """Test that T = 0 with positive scores reproduces the full evaluation."""
        records = [record(1, {1: 1.0}), record(2, {2: 1.0}), record(3, {3: 1.0})]
        dets = [det(1, 1, [0, 0, 50, 40], 0.7), det(3, 2, [100, 100, 30, 30], 0.3)]
        full = evaluate(dets, one_per_image)
        filtered = evaluate_filtered(dets, one_per_image, records, 0.0)
        assert filtered.metrics() == full.metrics()

    def test_removed_annotations_are_not_ignored(self, two_dogs):
        """Test that a detection of a removed box counts as a false positive."""
        records = [record(1, {1: 0.9, 2: 0.1})]
        only_removed = [det(1, 1, [200, 0, 50, 50], 0.9)]
        assert evaluate_filtered(only_removed, two_dogs, records, 0.5).map50 == 0.0
        both = only_removed + [det(1, 1, [0, 0, 50, 50], 0.8)]
        assert evaluate_filtered(both, two_dogs, records, 0.5).map50 == pytest.approx(0.5)

    def test_complement(self, two_dogs):
        """Test evaluation on the annotations below the threshold."""
        records = [record(1, {1: 0.9, 2: 0.1})]
        dets = [det(1, 1, [200, 0, 50, 50], 0.9)]
        report = evaluate_filtered(dets, two_dogs, records, 0.5, complement=True)
        assert report.map50 == pytest.approx(1.0)

    def test_skipped_images_leave_evaluation(self, one_per_image):
        """Test that skipped images and their detections drop out."""
        records = [
            record(1, {1: 1.0}),
            ImportanceRecord.skip(2, "no-category-importance"),
            record(3, {3: 1.0}),
        ]
        dets = perfect(one_per_image)
        report = evaluate_filtered(dets, one_per_image, records, 0.0)
        assert report.totals.images == 2
        assert report.totals.images_skipped == 1
        assert report.map50 == pytest.approx(1.0)

    def test_all_skipped(self, one_per_image):
        """Test that nothing to evaluate is an error."""
        records = [ImportanceRecord.skip(i, "no-annotations") for i in (1, 2, 3)]
        with pytest.raises(EvaluationError, match="no evaluable images"):
            evaluate_filtered([], one_per_image, records, 0.0)

    def test_records_must_cover_dataset(self, one_per_image):
        """Test both directions of the record/dataset agreement."""
        with pytest.raises(ReferentialError) as exc:
            critical_subset(one_per_image, [record(1, {1: 1.0}), record(2, {2: 1.0})], 0.0)
        assert exc.value.ids == [3]
        extra = [record(i, {i: 1.0}) for i in (1, 2, 3)] + [record(4, {4: 1.0})]
        with pytest.raises(ReferentialError) as exc:
            critical_subset(one_per_image, extra, 0.0)
        assert exc.value.ids == [4]

    def test_records_must_score_own_annotations(self, one_per_image):
        """Test that a score for an annotation of another image is rejected."""
        records = [record(1, {1: 0.5, 2: 0.5}), record(2, {2: 1.0}), record(3, {3: 1.0})]
        with pytest.raises(ReferentialError) as exc:
            critical_subset(one_per_image, records, 0.0)
        assert exc.value.ids == [2]

    def test_critical_subset(self, two_dogs):
        """Test the kept annotations and evaluable images."""
        subset = critical_subset(two_dogs, [record(1, {1: 0.9, 2: 0.1})], 0.5)
        assert subset.dataset.annotation_ids() == {1}
        assert subset.image_ids == [1]
        assert subset.images_skipped == 0


def _oracle_greedy(dets, gts, gamma):
    """Hit flag per detection; each takes the best unmatched box, lower id on ties."""
    taken, hits = set(), []
    for d in dets:
        best, best_iou = None, None
        for g in gts:
            if g.id in taken:
                continue
            value = iou(d.bbox, g.bbox)
            if value >= gamma and (best is None or value > best_iou):
                best, best_iou = g.id, value
        if best is not None:
            taken.add(best)
        hits.append(best is not None)
    return hits


def _oracle_ap(hits, n_gt):
    if not hits:
        return 0.0, 0.0
    tp = fp = 0
    recall, precision = [], []
    for hit in hits:
        tp += hit
        fp += not hit
        recall.append(tp / n_gt)
        precision.append(tp / (tp + fp))
    for i in range(len(precision) - 2, -1, -1):
        precision[i] = max(precision[i], precision[i + 1])
    total = 0.0
    for level in np.linspace(0, 1, 101):
        idx = next((i for i, r in enumerate(recall) if r >= level), None)
        total += precision[idx] if idx is not None else 0.0
    return total / 101, recall[-1]


def _oracle_metrics(ds, dets, caps=(1, 10, 100)):
    """Straightforward loop implementation of the COCO aggregates."""
    gammas = DEFAULT_IOU_THRESHOLDS
    ranked = {}
    for image_id in ds.image_ids():
        mine = [d for d in dets if d.image_id == image_id]
        ranked[image_id] = sorted(mine, key=lambda d: -d.score)[: caps[-1]]
    categories = sorted({a.category_id for a in ds.annotations})

    ap, rec = {}, {}
    for c in categories:
        n_gt = sum(a.category_id == c for a in ds.annotations)
        for gamma in gammas:
            scored = []
            for image_id in ds.image_ids():
                mine = [(rank, d) for rank, d in enumerate(ranked[image_id]) if d.category_id == c]
                hits = _oracle_greedy([d for _, d in mine], ds.annotations_for(image_id, c), gamma)
                scored.extend((d.score, rank, hit) for (rank, d), hit in zip(mine, hits))
            scored.sort(key=lambda item: -item[0])
            for k in caps:
                value, recall = _oracle_ap([hit for _, rank, hit in scored if rank < k], n_gt)
                rec[c, gamma, k] = recall
            ap[c, gamma] = value

    def mean(values):
        values = list(values)
        return sum(values) / len(values)

    return {
        "map": mean(ap.values()),
        "map50": mean(ap[c, 0.5] for c in categories),
        "map75": mean(ap[c, 0.75] for c in categories),
        "mar1": mean(v for (_, _, k), v in rec.items() if k == 1),
        "mar10": mean(v for (_, _, k), v in rec.items() if k == 10),
        "mar100": mean(v for (_, _, k), v in rec.items() if k == 100),
        "mar1_50": mean(rec[c, 0.5, 1] for c in categories),
    }


def _random_instance(seed):
    """Up to three images with at most 4 annotations, 4 detections and 3 categories each."""
    rng = np.random.default_rng(seed)
    n_images = int(rng.integers(1, 4))
    anns, dets = [], []
    for image_id in range(1, n_images + 1):
        on_image = []
        for _ in range(int(rng.integers(1 if image_id == 1 else 0, 5))):
            x, y = (float(v) for v in rng.uniform(0, 60, size=2))
            w, h = (float(v) for v in rng.uniform(10, 40, size=2))
            on_image.append((len(anns) + 1, image_id, int(rng.integers(1, 4)), [x, y, w, h]))
            anns.append(on_image[-1])
        for _ in range(int(rng.integers(0, 5))):
            if on_image and rng.uniform() < 0.7:
                _, _, category_id, (x, y, w, h) = on_image[int(rng.integers(len(on_image)))]
                x += float(rng.normal(0, 0.2 * w))
                y += float(rng.normal(0, 0.2 * h))
                if rng.uniform() < 0.2:
                    category_id = int(rng.integers(1, 4))
            else:
                category_id = int(rng.integers(1, 4))
                x, y = (float(v) for v in rng.uniform(0, 60, size=2))
                w, h = (float(v) for v in rng.uniform(10, 40, size=2))
            # coarse scores so that ties occur
            dets.append(det(image_id, category_id, [x, y, w, h], round(float(rng.uniform()), 1)))
    ds = make_dataset({1: "dog", 2: "cat", 3: "bird"}, anns, image_ids=list(range(1, n_images + 1)))
    return ds, dets


RECALL_METRICS = ("mar1", "mar10", "mar100", "mar1_50")


class TestOracle:
    """Cross-check against a loop implementation on random data."""

    @pytest.mark.parametrize("seed", range(200))
    def test_small_instances(self, seed):
        """Test AP and AR aggregates on a small random instance."""
        ds, dets = _random_instance(seed)
        report = evaluate(dets, ds).metrics()
        for name, expected in _oracle_metrics(ds, dets).items():
            assert report[name] == pytest.approx(expected, abs=1e-12), name

    def test_larger_instance(self):
        """Test 200 random annotations with jittered and spurious detections."""
        rng = np.random.default_rng(42)
        anns, dets = [], []
        for aid in range(1, 201):
            image_id = int(rng.integers(1, 21))
            category_id = int(rng.integers(1, 4))
            x, y = (float(v) for v in rng.uniform(0, 400, size=2))
            w, h = (float(v) for v in rng.uniform(10, 80, size=2))
            anns.append((aid, image_id, category_id, [x, y, w, h]))
            if rng.uniform() < 0.8:
                dx, dy = (float(v) for v in rng.normal(0, 0.15 * w, size=2))
                dets.append(det(image_id, category_id, [x + dx, y + dy, w, h], float(rng.uniform())))
        for _ in range(60):
            x, y = (float(v) for v in rng.uniform(0, 400, size=2))
            dets.append(
                det(
                    int(rng.integers(1, 21)),
                    int(rng.integers(1, 4)),
                    [x, y, 30.0, 30.0],
                    float(rng.uniform()),
                )
            )
        ds = make_dataset({1: "dog", 2: "cat", 3: "bird"}, anns, image_ids=list(range(1, 21)))
        report = evaluate(dets, ds).metrics()
        for name, expected in _oracle_metrics(ds, dets).items():
            assert report[name] == pytest.approx(expected, abs=1e-12), name

    @pytest.mark.parametrize("seed", range(50))
    def test_removing_unmatchable_annotation_keeps_recall(self, seed):
        """Test that dropping an annotation no detection can match never lowers recall."""
        ds, dets = _random_instance(seed)
        unmatchable = [
            a.id
            for a in ds.annotations
            if all(
                iou(d.bbox, a.bbox) < 0.5
                for d in dets
                if d.image_id == a.image_id and d.category_id == a.category_id
            )
        ]
        if not unmatchable or len(ds.annotations) == 1:
            pytest.skip("no removable unmatchable annotation")
        before = evaluate(dets, ds)
        after = evaluate(dets, ds.restrict(ds.annotation_ids() - {unmatchable[0]}))
        for name in RECALL_METRICS:
            assert after.metrics()[name] >= before.metrics()[name] - 1e-12, name
        recall_after = {c.category_id: c.recall for c in after.per_category}
        for category in before.per_category:
            if category.category_id in recall_after:
                for k, value in category.recall.items():
                    assert recall_after[category.category_id][k] >= value - 1e-12
