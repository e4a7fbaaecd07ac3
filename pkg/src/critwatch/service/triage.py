"""Scoring and detail assembly on top of the triage store."""

from __future__ import annotations

from datetime import datetime
from typing import Optional

from ..core import FEATURE_NAMES, PMR
from ..evaluation import er_timeline
from ..forest import RandomForestModel, predict_er_batch, to_matrix
from ..pipeline import CustomerIndex, featurize_stage
from .store import TriageStore, UnknownPmr


class ModelMissing(RuntimeError):
    def __init__(self) -> None:
        super().__init__("no model loaded")


def rescore_all(
    store: TriageStore,
    model: Optional[RandomForestModel],
    pmrs: list[PMR],
    index: CustomerIndex,
    window_months: int = 6,
    now: Optional[datetime] = None,
) -> int:
    """Re-score every open ticket at its current final stage.

    Closed tickets keep whatever score they last had. The store swap is
    atomic, so concurrent readers see either the old or the new scoring,
    never a mixture.
    """
    if model is None:
        raise ModelMissing()
    open_pmrs = [p for p in pmrs if p.close_ts is None]
    if not open_pmrs:
        return 0
    include_et = bool(model.feature_names) and model.feature_names[-1] == "escalation_type"
    vectors = [
        featurize_stage(p, len(p.records), index, window_months) for p in open_pmrs
    ]
    X, _ = to_matrix(vectors, include_et)
    ers = predict_er_batch(model, X)
    scores = {p.pmr_id: float(er) for p, er in zip(open_pmrs, ers)}
    return store.apply_rescore(scores, now=now)


def get_pmr_detail(
    store: TriageStore,
    pmrs_by_id: dict[str, PMR],
    model: Optional[RandomForestModel],
    index: CustomerIndex,
    pmr_id: str,
    window_months: int = 6,
) -> dict:
    """Triage record plus feature breakdown, risk timeline, and history."""
    record = store.get(pmr_id)
    pmr = pmrs_by_id.get(pmr_id)
    if pmr is None:
        raise UnknownPmr(pmr_id)
    if model is None:
        raise ModelMissing()

    final = featurize_stage(pmr, len(pmr.records), index, window_months)
    timeline = er_timeline(model, pmr, index, window_months)
    history = [
        {
            "seq": r.seq,
            "timestamp": r.timestamp.strftime("%Y-%m-%dT%H:%M:00Z"),
            "actor": r.actor.value,
            "event": r.event.value,
            "sev_from": r.sev_from,
            "sev_to": r.sev_to,
            "level": None if r.level is None else f"L{r.level}",
            "support_person_id": r.support_person_id,
        }
        for r in pmr.records
    ]
    detail = record.to_json_dict()
    detail["cer"] = record.cer
    detail["customer_id"] = pmr.customer_id
    detail["open"] = pmr.close_ts is None
    detail["features"] = {name: getattr(final, name) for name in FEATURE_NAMES}
    detail["stage"] = final.stage
    detail["timeline"] = [{"stage": p.stage, "er": p.er} for p in timeline]
    detail["history"] = history
    return detail
