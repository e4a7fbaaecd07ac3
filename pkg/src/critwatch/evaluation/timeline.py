"""Per-stage escalation-risk trajectories for individual tickets."""

from __future__ import annotations

import csv
import io
from typing import Iterable, Mapping

from ..core import EscalationRiskPoint, FeatureVector, PMR
from ..forest import RandomForestModel, predict_er_batch, to_matrix
from ..pipeline import CustomerIndex, featurize_stages


def er_timeline(
    model: RandomForestModel,
    pmr: PMR,
    index: CustomerIndex,
    window_months: int = 6,
) -> list[EscalationRiskPoint]:
    """One risk point per stage 1..n; the last equals the full-history risk."""
    stages = featurize_stages(pmr, index, window_months)
    include_et = bool(model.feature_names) and model.feature_names[-1] == "escalation_type"
    X, _ = to_matrix(stages, include_et)
    ers = predict_er_batch(model, X)
    return [
        EscalationRiskPoint(stage=v.stage, er=float(er)) for v, er in zip(stages, ers)
    ]


def serialize_timeline(pmr_id: str, points: Iterable[EscalationRiskPoint]) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("pmr_id", "stage", "er"))
    for p in points:
        writer.writerow((pmr_id, p.stage, repr(p.er)))
    return buf.getvalue().encode("utf-8")


def serialize_predictions(
    predictions: Mapping[str, float], dataset: Iterable[FeatureVector]
) -> bytes:
    """predictions.csv rows in dataset order."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("pmr_id", "er", "label"))
    for v in dataset:
        writer.writerow((v.pmr_id, repr(predictions[v.pmr_id]), "1" if v.label else "0"))
    return buf.getvalue().encode("utf-8")
