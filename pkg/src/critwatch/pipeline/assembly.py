"""Grouping call records into PMRs and telling cause escalations from cascades."""

from __future__ import annotations

import re
from typing import Iterable, Optional

from ..core import CallRecord, EscalationType, EventKind, PMR

_CUSTOMER_SUFFIX = re.compile(r"-(C\d+)$")

# Events the customer can see; internal bookkeeping is excluded when judging
# which sharing ticket was active right before an escalation.
_CUSTOMER_VISIBLE = (
    EventKind.OPEN,
    EventKind.MESSAGE_IN,
    EventKind.MESSAGE_OUT,
    EventKind.SEVERITY_CHANGE,
)


class MissingOpen(ValueError):
    def __init__(self, pmr_id: str):
        self.pmr_id = pmr_id
        super().__init__(f"pmr {pmr_id}: no open record")


class NonMonotonicTimestamps(ValueError):
    def __init__(self, pmr_id: str, seq: int):
        self.pmr_id = pmr_id
        self.seq = seq
        super().__init__(f"pmr {pmr_id}: timestamp order conflicts with seq {seq}")


def customer_id_of(pmr_id: str) -> str:
    """Customer id carried in the ticket id; falls back to the id itself."""
    m = _CUSTOMER_SUFFIX.search(pmr_id)
    return m.group(1) if m else pmr_id


def assemble_pmrs(records: Iterable[CallRecord]) -> list[PMR]:
    """Group records by pmr_id and order each group by (timestamp, seq).

    Output follows first-appearance order of each pmr_id in the input.
    """
    groups: dict[str, list[CallRecord]] = {}
    for r in records:
        groups.setdefault(r.pmr_id, []).append(r)

    pmrs = []
    for pmr_id, group in groups.items():
        group.sort(key=lambda r: (r.timestamp, r.seq))
        if group[0].event is not EventKind.OPEN:
            raise MissingOpen(pmr_id)
        for pos, r in enumerate(group):
            if r.seq != pos:
                raise NonMonotonicTimestamps(pmr_id, r.seq)

        close_ts = None
        critsit_id = None
        crit_date = None
        for r in group:
            if r.event is EventKind.CLOSE:
                close_ts = r.timestamp
            if critsit_id is None and r.critsit_id_raw:
                critsit_id = r.critsit_id_raw
            if crit_date is None and r.crit_date is not None:
                crit_date = r.crit_date
        pmrs.append(
            PMR(
                pmr_id=pmr_id,
                customer_id=customer_id_of(pmr_id),
                open_ts=group[0].timestamp,
                close_ts=close_ts,
                records=tuple(group),
                critsit_id=critsit_id,
                crit_date=crit_date,
            )
        )
    return pmrs


def _last_visible_activity(pmr: PMR, cutoff) -> Optional[object]:
    last = None
    for r in pmr.records:
        if cutoff is not None and r.timestamp > cutoff:
            break
        if r.event in _CUSTOMER_VISIBLE:
            last = r.timestamp
    return last


def classify_escalation_type(pmr: PMR, sharing: list[PMR]) -> EscalationType:
    """Proxy cause/cascade rule for observed data without ground truth.

    Among tickets sharing a critsit, the one with the latest customer-visible
    activity before the crit date is deemed the cause; the rest are cascades.
    Ties break toward the lexically smallest pmr_id.
    """
    if pmr.critsit_id is None:
        return EscalationType.NONE
    candidates = [p for p in sharing if p.critsit_id == pmr.critsit_id]
    if pmr.pmr_id not in {p.pmr_id for p in candidates}:
        candidates.append(pmr)
    if len(candidates) == 1:
        return EscalationType.CAUSE
    cutoff = pmr.crit_date
    best_id = None
    best_ts = None
    for p in sorted(candidates, key=lambda p: p.pmr_id):
        ts = _last_visible_activity(p, cutoff)
        if ts is None:
            continue
        if best_ts is None or ts > best_ts:
            best_ts = ts
            best_id = p.pmr_id
    if best_id is None:
        best_id = min(p.pmr_id for p in candidates)
    return EscalationType.CAUSE if best_id == pmr.pmr_id else EscalationType.CASCADE


def escalation_types(pmrs: list[PMR]) -> dict[str, EscalationType]:
    """Apply the proxy rule across a whole dataset."""
    by_critsit: dict[str, list[PMR]] = {}
    for p in pmrs:
        if p.critsit_id is not None:
            by_critsit.setdefault(p.critsit_id, []).append(p)
    out = {}
    for p in pmrs:
        sharing = by_critsit.get(p.critsit_id, []) if p.critsit_id else []
        out[p.pmr_id] = classify_escalation_type(p, sharing)
    return out
