"""k-fold cross-validation, the confusion matrix, and its three headline metrics.

Every ticket is predicted exactly once, by the model of the one fold that
held it out; the combined matrix therefore covers the whole dataset. The
headline run scores one final-stage row per ticket. Metrics that would
divide by zero are reported as undefined (None), never as silent NaNs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

from ..core import ConfusionMatrix, FeatureVector
from ..forest import (
    ForestParams,
    RandomForestModel,
    classify,
    predict_er_batch,
    to_matrix,
    train,
)
from ..forest.model import _splitmix64
from ..forest.sampling import SingleClass
from .folds import assign_folds


class KeyMismatch(ValueError):
    def __init__(self, missing: int, extra: int):
        super().__init__(
            f"prediction/label key sets differ ({missing} missing, {extra} extra)"
        )


@dataclass(frozen=True)
class Metrics:
    recall: Optional[float]
    precision: Optional[float]
    summarization: Optional[float]

    def to_json_dict(self) -> dict:
        return {
            "recall": self.recall,
            "precision": self.precision,
            "summarization": self.summarization,
        }


def metrics(matrix: ConfusionMatrix) -> Metrics:
    """recall = tp/(tp+fn); precision = tp/(tp+fp);
    summarization = (tn+fn)/(tn+fn+tp+fp), the fraction of the workload the
    positive short-list removes."""
    recall = matrix.tp / (matrix.tp + matrix.fn) if (matrix.tp + matrix.fn) else None
    precision = matrix.tp / (matrix.tp + matrix.fp) if (matrix.tp + matrix.fp) else None
    summarization = (matrix.tn + matrix.fn) / matrix.total if matrix.total else None
    return Metrics(recall=recall, precision=precision, summarization=summarization)


def confusion(
    predictions: Mapping[str, float], labels: Mapping[str, bool], threshold: float
) -> ConfusionMatrix:
    if set(predictions) != set(labels):
        missing = len(set(labels) - set(predictions))
        extra = len(set(predictions) - set(labels))
        raise KeyMismatch(missing, extra)
    tp = fp = tn = fn = 0
    for pmr_id, er in predictions.items():
        predicted = classify(er, threshold)
        actual = labels[pmr_id]
        if predicted and actual:
            tp += 1
        elif predicted and not actual:
            fp += 1
        elif not predicted and actual:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


@dataclass
class EvalReport:
    matrix: ConfusionMatrix
    metrics: Metrics
    per_fold: dict[int, ConfusionMatrix]
    params: ForestParams
    seed: int
    warnings: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "matrix": {
                "tp": self.matrix.tp,
                "fp": self.matrix.fp,
                "tn": self.matrix.tn,
                "fn": self.matrix.fn,
            },
            "metrics": self.metrics.to_json_dict(),
            "per_fold": {
                str(f): {"tp": m.tp, "fp": m.fp, "tn": m.tn, "fn": m.fn}
                for f, m in sorted(self.per_fold.items())
            },
            "params": self.params.to_json_dict(),
            "seed": self.seed,
            "warnings": self.warnings,
        }


def cross_validate(
    dataset: Sequence[FeatureVector],
    k: int,
    params: ForestParams,
    seed: int,
    include_escalation_type: bool = False,
) -> tuple[dict[str, float], EvalReport]:
    """Train k held-out models and predict every ticket exactly once."""
    if not dataset:
        raise ValueError("dataset is empty")
    ids = [v.pmr_id for v in dataset]
    if len(set(ids)) != len(ids):
        raise ValueError("dataset has duplicate pmr_ids")
    labels = {v.pmr_id: v.label for v in dataset}
    if all(labels.values()) or not any(labels.values()):
        raise SingleClass()

    folds = assign_folds(ids, k, seed)
    predictions: dict[str, float] = {}
    per_fold: dict[int, ConfusionMatrix] = {}
    warnings: list[dict] = []

    for f in range(1, k + 1):
        test = [v for v in dataset if folds[v.pmr_id] == f]
        if not test:
            continue
        train_rows = [v for v in dataset if folds[v.pmr_id] != f]
        if not any(v.label for v in test):
            warnings.append({"code": "fold_without_positives", "fold": f})
        fold_params = replace(params, seed=_splitmix64(params.seed, f) & 0x7FFFFFFFFFFFFFFF)
        model = train(train_rows, fold_params, include_escalation_type)
        X, _ = to_matrix(test, include_escalation_type)
        ers = predict_er_batch(model, X)
        fold_preds = {v.pmr_id: float(er) for v, er in zip(test, ers)}
        predictions.update(fold_preds)
        per_fold[f] = confusion(
            fold_preds, {v.pmr_id: v.label for v in test}, params.threshold
        )

    combined = ConfusionMatrix()
    for m in per_fold.values():
        combined = combined.add(m)
    report = EvalReport(
        matrix=combined,
        metrics=metrics(combined),
        per_fold=per_fold,
        params=params,
        seed=seed,
        warnings=sorted(warnings, key=lambda w: w["fold"]),
    )
    return predictions, report


def train_full(
    dataset: Sequence[FeatureVector],
    params: ForestParams,
    include_escalation_type: bool = False,
) -> RandomForestModel:
    """Train one model on the entire dataset (for serving and timelines)."""
    return train(dataset, params, include_escalation_type)
