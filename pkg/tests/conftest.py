from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from critwatch.core import Actor, CallRecord, EventKind

T0 = datetime(2024, 3, 4, 9, 0, tzinfo=timezone.utc)


def rec(
    pmr_id: str,
    seq: int,
    minutes: int,
    event: EventKind,
    actor: Actor = None,
    sev_from: int = None,
    sev_to: int = None,
    level: int = None,
    person: str = None,
    critsit: str = None,
    base: datetime = T0,
) -> CallRecord:
    """Terse CallRecord builder with sensible default actors per event."""
    if actor is None:
        actor = {
            EventKind.OPEN: Actor.CUSTOMER,
            EventKind.CLOSE: Actor.SUPPORT,
            EventKind.MESSAGE_IN: Actor.CUSTOMER,
            EventKind.MESSAGE_OUT: Actor.SUPPORT,
            EventKind.SEVERITY_CHANGE: Actor.CUSTOMER,
            EventKind.OWNERSHIP_CHANGE: Actor.SYSTEM,
            EventKind.CONTACT_ADDED: Actor.SUPPORT,
        }[event]
    return CallRecord(
        pmr_id=pmr_id,
        seq=seq,
        timestamp=base + timedelta(minutes=minutes),
        actor=actor,
        event=event,
        sev_from=sev_from,
        sev_to=sev_to,
        level=level,
        support_person_id=person,
        critsit_id_raw=critsit,
    )


def f1_records(pmr_id: str = "P000100-C00001") -> list[CallRecord]:
    """Eight-record reference ticket used across feature tests.

    open; in +10m; out +40m (S1); sev 3->2 +2h; in +3h; in +3h10m;
    out +4h (S2); sev 2->1 +5h.
    """
    K = EventKind
    return [
        rec(pmr_id, 0, 0, K.OPEN),
        rec(pmr_id, 1, 10, K.MESSAGE_IN),
        rec(pmr_id, 2, 40, K.MESSAGE_OUT, person="S1"),
        rec(pmr_id, 3, 120, K.SEVERITY_CHANGE, sev_from=3, sev_to=2),
        rec(pmr_id, 4, 180, K.MESSAGE_IN),
        rec(pmr_id, 5, 190, K.MESSAGE_IN),
        rec(pmr_id, 6, 240, K.MESSAGE_OUT, person="S2"),
        rec(pmr_id, 7, 300, K.SEVERITY_CHANGE, sev_from=2, sev_to=1),
    ]


@pytest.fixture(scope="session")
def small_world():
    """A modest generated world shared by read-only tests."""
    from critwatch.datagen import GenConfig, generate_world

    config = GenConfig(n_customers=60, n_pmrs=1500, crit_ratio=50, seed=7)
    records, registry, truth = generate_world(config)
    return config, records, registry, truth


@pytest.fixture(scope="session")
def small_pipeline(small_world):
    """Assembled PMRs, index, and final-stage vectors for the small world."""
    from critwatch.pipeline import (
        assemble_pmrs,
        build_customer_index,
        clean_critsit_ids,
        featurize_dataset,
        join_critsit_dates,
    )

    config, records, registry, truth = small_world
    cleaned, _ = clean_critsit_ids(records)
    joined, _ = join_critsit_dates(cleaned, registry)
    pmrs = assemble_pmrs(joined)
    index = build_customer_index(pmrs)
    etypes = {pid: e.escalation_type for pid, e in truth.entries.items()}
    vectors = featurize_dataset(pmrs, index, escalation_type_map=etypes)
    return pmrs, index, vectors, truth
