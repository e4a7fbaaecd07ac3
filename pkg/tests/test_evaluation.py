from __future__ import annotations

import random
from collections import Counter

import pytest

from critwatch.core import ConfusionMatrix
from critwatch.evaluation import (
    BadK,
    KeyMismatch,
    assign_folds,
    confusion,
    cross_validate,
    er_timeline,
    metrics,
    serialize_predictions,
    serialize_timeline,
    train_full,
)
from critwatch.forest import ForestParams, SingleClass

from .test_forest import make_vector, random_dataset

# The published cross-validation counts this project reproduces metrics from.
PUBLISHED = ConfusionMatrix(tp=8153, fn=2046, tn=2072496, fp=485234)


# -- fold assignment ----------------------------------------------------------


def test_bad_k_rejected():
    with pytest.raises(BadK):
        assign_folds(["a"], 1, 0)


def test_folds_partition_and_determinism():
    ids = [f"P{i}" for i in range(500)]
    a = assign_folds(ids, 10, 42)
    b = assign_folds(ids, 10, 42)
    assert a == b
    assert set(a) == set(ids)
    assert set(a.values()) <= set(range(1, 11))
    c = assign_folds(ids, 10, 43)
    assert a != c


def test_fold_assignment_order_independent():
    ids = [f"P{i}" for i in range(200)]
    a = assign_folds(ids, 5, 7)
    b = assign_folds(list(reversed(ids)), 5, 7)
    assert a == b


def test_fold_sizes_within_binomial_bounds():
    ids = [f"P{i:06d}" for i in range(100_000)]
    folds = assign_folds(ids, 10, 11)
    sizes = Counter(folds.values())
    assert set(sizes) == set(range(1, 11))
    for f in range(1, 11):
        assert 9500 <= sizes[f] <= 10500, (f, sizes[f])


# -- metrics ------------------------------------------------------------------


def test_published_matrix_recall_precision():
    m = metrics(PUBLISHED)
    assert m.recall == pytest.approx(0.7994, abs=1e-4)
    assert m.precision == pytest.approx(0.0165, abs=1e-4)


def test_published_matrix_summarization_exact_value():
    # (tn + fn) / total computed from the published counts
    m = metrics(PUBLISHED)
    assert m.summarization == pytest.approx(2074542 / 2567929, abs=1e-12)
    assert m.summarization == pytest.approx(0.807866, abs=1e-6)


def test_published_matrix_row_rates_recompute():
    assert PUBLISHED.tn / (PUBLISHED.tn + PUBLISHED.fp) == pytest.approx(0.8103, abs=1e-4)
    assert PUBLISHED.fn / (PUBLISHED.fn + PUBLISHED.tp) == pytest.approx(0.2006, abs=1e-4)


def test_perfect_matrix():
    m = metrics(ConfusionMatrix(tp=1, fp=0, tn=1, fn=0))
    assert m.recall == 1.0
    assert m.precision == 1.0
    assert m.summarization == 0.5


def test_all_negative_predictor_degenerate_corner():
    m = metrics(ConfusionMatrix(tp=0, fp=0, tn=90, fn=10))
    assert m.recall == 0.0
    assert m.precision is None
    assert m.summarization == 1.0


def test_metrics_undefined_on_empty():
    m = metrics(ConfusionMatrix())
    assert m.recall is None and m.precision is None and m.summarization is None


def test_recall_identity():
    m = PUBLISHED
    assert metrics(m).recall + m.fn / (m.tp + m.fn) == pytest.approx(1.0)


def test_metrics_match_brute_force_recount():
    rng = random.Random(3)
    preds = {f"P{i}": rng.random() for i in range(5000)}
    labels = {pid: rng.random() < 0.2 for pid in preds}
    threshold = 0.4
    matrix = confusion(preds, labels, threshold)
    # independent recount
    tp = sum(1 for p in preds if preds[p] > threshold and labels[p])
    fp = sum(1 for p in preds if preds[p] > threshold and not labels[p])
    fn = sum(1 for p in preds if preds[p] <= threshold and labels[p])
    tn = sum(1 for p in preds if preds[p] <= threshold and not labels[p])
    assert (matrix.tp, matrix.fp, matrix.fn, matrix.tn) == (tp, fp, fn, tn)
    m = metrics(matrix)
    assert m.recall == pytest.approx(tp / (tp + fn))
    assert m.precision == pytest.approx(tp / (tp + fp))
    assert m.summarization == pytest.approx((tn + fn) / 5000)


def test_confusion_key_mismatch():
    with pytest.raises(KeyMismatch):
        confusion({"a": 0.5}, {"a": True, "b": False}, 0.5)


def test_single_prediction_above_threshold_false_label_is_fp():
    m = confusion({"a": 0.6}, {"a": False}, 0.5)
    assert (m.tp, m.fp, m.tn, m.fn) == (0, 1, 0, 0)


# -- cross_validate -----------------------------------------------------------


def test_cross_validate_conservation_small():
    rng = random.Random(5)
    dataset = random_dataset(rng, 5, 5)
    params = ForestParams(n_trees=5, seed=1)
    preds, report = cross_validate(dataset, 2, params, seed=3)
    assert set(preds) == {v.pmr_id for v in dataset}
    assert report.matrix.total == 10
    summed = ConfusionMatrix()
    for m in report.per_fold.values():
        summed = summed.add(m)
    assert summed == report.matrix


def _training_splits_two_class(dataset, k, seed) -> bool:
    folds = assign_folds([v.pmr_id for v in dataset], k, seed)
    for f in range(1, k + 1):
        rest = [v for v in dataset if folds[v.pmr_id] != f]
        if not any(v.label for v in rest) or all(v.label for v in rest):
            return False
    return True


def test_cross_validate_every_pmr_predicted_once_many_datasets():
    rng = random.Random(6)
    trials = 0
    while trials < 50:
        n_pos = rng.randrange(3, 12)
        n_neg = rng.randrange(8, 60)
        dataset = random_dataset(rng, n_pos, n_neg)
        k = rng.choice([2, 3, 5])
        seed = rng.randrange(10_000)
        if not _training_splits_two_class(dataset, k, seed):
            continue  # a positive-free training split is a hard error by contract
        trials += 1
        params = ForestParams(n_trees=3, seed=trials)
        preds, report = cross_validate(dataset, k, params, seed=seed)
        assert set(preds) == {v.pmr_id for v in dataset}
        assert report.matrix.total == len(dataset)


def test_cross_validate_single_class_raises():
    rng = random.Random(7)
    dataset = random_dataset(rng, 0, 20)
    with pytest.raises(SingleClass):
        cross_validate(dataset, 2, ForestParams(n_trees=2), 0)


def test_cross_validate_duplicate_ids_rejected():
    rng = random.Random(8)
    dataset = random_dataset(rng, 2, 4)
    with pytest.raises(ValueError):
        cross_validate(dataset + dataset[:1], 2, ForestParams(n_trees=2), 0)


def test_fold_without_positives_is_warning_not_error():
    rng = random.Random(9)
    # 2 positives, 40 negatives, 5 folds: some test fold will lack positives
    dataset = random_dataset(rng, 2, 40)
    preds, report = cross_validate(dataset, 5, ForestParams(n_trees=3, seed=2), seed=1)
    assert set(preds) == {v.pmr_id for v in dataset}
    assert any(w["code"] == "fold_without_positives" for w in report.warnings)


def test_report_json_shape(small_pipeline):
    _, _, vectors, _ = small_pipeline
    params = ForestParams(n_trees=10, seed=4)
    _, report = cross_validate(vectors, 5, params, seed=2)
    doc = report.to_json_dict()
    assert set(doc) == {"matrix", "metrics", "per_fold", "params", "seed", "warnings"}
    assert doc["params"]["n_trees"] == 10
    assert doc["seed"] == 2
    total = sum(sum(cell.values()) for cell in doc["per_fold"].values())
    assert total == len(vectors)


def test_planted_signal_beats_base_rate(small_pipeline):
    _, _, vectors, _ = small_pipeline
    params = ForestParams(n_trees=40, seed=3)
    _, report = cross_validate(vectors, 10, params, seed=11)
    base = sum(1 for v in vectors if v.label) / len(vectors)
    assert report.metrics.recall is not None
    assert report.metrics.recall > base


# -- timelines ----------------------------------------------------------------


def test_timeline_one_point_per_stage(small_pipeline):
    pmrs, index, vectors, _ = small_pipeline
    model = train_full(vectors, ForestParams(n_trees=10, seed=5))
    rng = random.Random(12)
    for p in rng.sample(pmrs, 50):
        points = er_timeline(model, p, index)
        assert len(points) == len(p.records)
        assert [pt.stage for pt in points] == list(range(1, len(p.records) + 1))
        assert all(0.0 <= pt.er <= 1.0 for pt in points)


def test_timeline_final_point_equals_dataset_row_er(small_pipeline):
    import numpy as np

    from critwatch.forest import predict_er_batch, to_matrix

    pmrs, index, vectors, _ = small_pipeline
    model = train_full(vectors, ForestParams(n_trees=10, seed=5))
    X, _ = to_matrix(vectors)
    dataset_ers = predict_er_batch(model, X)
    by_id = dict(zip((v.pmr_id for v in vectors), dataset_ers))
    rng = random.Random(13)
    for p in rng.sample(pmrs, 25):
        points = er_timeline(model, p, index)
        assert points[-1].er == pytest.approx(by_id[p.pmr_id])


def test_timeline_single_record_pmr():
    from critwatch.pipeline import assemble_pmrs, build_customer_index
    from .conftest import rec
    from critwatch.core import EventKind

    pmrs = assemble_pmrs([rec("P1-C00001", 0, 0, EventKind.OPEN)])
    index = build_customer_index(pmrs)
    rng = random.Random(14)
    training = random_dataset(rng, 5, 20)
    model = train_full(training, ForestParams(n_trees=5, seed=2))
    points = er_timeline(model, pmrs[0], index)
    assert len(points) == 1


def test_serializers_are_deterministic(small_pipeline):
    pmrs, index, vectors, _ = small_pipeline
    model = train_full(vectors, ForestParams(n_trees=5, seed=5))
    rng = random.Random(15)
    subset = random_dataset(rng, 20, 180)
    preds, _ = cross_validate(subset, 4, ForestParams(n_trees=4, seed=1), seed=9)
    assert serialize_predictions(preds, subset) == serialize_predictions(preds, subset)
    points = er_timeline(model, pmrs[0], index)
    assert serialize_timeline(pmrs[0].pmr_id, points) == serialize_timeline(
        pmrs[0].pmr_id, points
    )
