"""Computing the 22-feature vector for any stage of a PMR.

Stage k uses only the first k records, with two deliberate exceptions:
profile features are pinned to the ticket's creation instant (identical at
every stage), and days_open is censored at the crit date once the
escalation has happened.
"""

from __future__ import annotations

from typing import Iterable, Optional

from ..core import EscalationType, EventKind, FeatureVector, PMR
from .assembly import escalation_types
from .index import CustomerIndex
from .stats import (
    average_response_minutes,
    days_between,
    first_support_contact,
    last_message_ts,
    minutes_between,
)


class StageOutOfRange(ValueError):
    def __init__(self, pmr_id: str, stage: int, n_records: int):
        self.pmr_id = pmr_id
        self.stage = stage
        super().__init__(f"pmr {pmr_id}: stage {stage} not in 1..{n_records}")


def featurize_stage(
    pmr: PMR,
    k: int,
    index: CustomerIndex,
    window_months: int = 6,
    escalation_type: Optional[EscalationType] = None,
) -> FeatureVector:
    """Features over records[0:k]; profile fields as of the open instant."""
    if not 1 <= k <= len(pmr.records):
        raise StageOutOfRange(pmr.pmr_id, k, len(pmr.records))
    prefix = pmr.records[:k]
    t_k = prefix[-1].timestamp

    if escalation_type is None:
        escalation_type = (
            EscalationType.NONE if pmr.critsit_id is None else EscalationType.CAUSE
        )

    if pmr.crit_date is not None and pmr.crit_date <= t_k:
        days_open = days_between(pmr.open_ts, pmr.crit_date)
    else:
        days_open = days_between(pmr.open_ts, t_k)

    ownership = 0
    sev_inc = 0
    sev_dec = 0
    to_sev1 = 0
    contacts = set()
    for r in prefix:
        if r.event is EventKind.OWNERSHIP_CHANGE and r.level is not None:
            ownership = r.level
        elif r.event is EventKind.SEVERITY_CHANGE and r.sev_from is not None:
            if r.sev_to < r.sev_from:
                sev_inc += 1
                if r.sev_to == 1:
                    to_sev1 += 1
            elif r.sev_to > r.sev_from:
                sev_dec += 1
        if r.support_person_id is not None and r.event in (
            EventKind.MESSAGE_OUT,
            EventKind.CONTACT_ADDED,
        ):
            contacts.add(r.support_person_id)

    first_contact = first_support_contact(prefix)
    time_until_first = (
        minutes_between(pmr.open_ts, first_contact) if first_contact is not None else -1.0
    )
    avg_response = average_response_minutes(prefix)

    profile = index.profile(pmr.customer_id, pmr.open_ts, window_months)
    if profile.expected_response_time < 0 or avg_response < 0:
        diff_expected = 0.0
    else:
        diff_expected = profile.expected_response_time - avg_response

    last_msg = last_message_ts(prefix)
    days_since_contact = days_between(last_msg, t_k) if last_msg is not None else 0.0

    return FeatureVector(
        pmr_id=pmr.pmr_id,
        stage=k,
        label=pmr.critsit_id is not None,
        escalation_type=escalation_type,
        num_entries=k,
        days_open=days_open,
        ownership_level=ownership,
        num_support_contacts=len(contacts),
        num_sev_increases=sev_inc,
        num_sev_decreases=sev_dec,
        num_to_sev1_transitions=to_sev1,
        time_until_first_contact=time_until_first,
        avg_response_time=avg_response,
        diff_expected_vs_avg=diff_expected,
        days_since_last_contact=days_since_contact,
        closed_pmrs=profile.closed_pmrs,
        closed_critsits=profile.closed_critsits,
        critsit_pmr_ratio=profile.critsit_pmr_ratio,
        expected_response_time=profile.expected_response_time,
        open_pmrs=profile.open_pmrs,
        pmrs_opened_window=profile.pmrs_opened_window,
        pmrs_closed_window=profile.pmrs_closed_window,
        open_critsits=profile.open_critsits,
        critsits_opened_window=profile.critsits_opened_window,
        critsits_closed_window=profile.critsits_closed_window,
        expected_response_time_window=profile.expected_response_time_window,
    )


def featurize_dataset(
    pmrs: list[PMR],
    index: CustomerIndex,
    window_months: int = 6,
    escalation_type_map: Optional[dict[str, EscalationType]] = None,
) -> list[FeatureVector]:
    """One final-stage vector per PMR, in input order.

    Escalation types come from ``escalation_type_map`` (ground truth when
    available); otherwise the cause/cascade proxy rule is applied.
    """
    if escalation_type_map is None:
        escalation_type_map = escalation_types(pmrs)
    return [
        featurize_stage(
            p,
            len(p.records),
            index,
            window_months,
            escalation_type=escalation_type_map.get(p.pmr_id),
        )
        for p in pmrs
    ]


def featurize_stages(
    pmr: PMR,
    index: CustomerIndex,
    window_months: int = 6,
    escalation_type: Optional[EscalationType] = None,
) -> list[FeatureVector]:
    """All stage vectors 1..n for one PMR."""
    return [
        featurize_stage(pmr, k, index, window_months, escalation_type=escalation_type)
        for k in range(1, len(pmr.records) + 1)
    ]
