"""Shared domain types.

Everything here is an immutable value type; instances can be freely shared
across threads. Timestamps are timezone-aware UTC datetimes at minute
resolution (seconds are accepted on input and truncated, since sub-minute
precision in ticket logs carries no meaning).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional


class Actor(str, enum.Enum):
    CUSTOMER = "customer"
    SUPPORT = "support"
    SYSTEM = "system"


class EventKind(str, enum.Enum):
    OPEN = "open"
    CLOSE = "close"
    MESSAGE_IN = "message_in"
    MESSAGE_OUT = "message_out"
    SEVERITY_CHANGE = "severity_change"
    OWNERSHIP_CHANGE = "ownership_change"
    CONTACT_ADDED = "contact_added"


class EscalationType(str, enum.Enum):
    CAUSE = "cause"
    CASCADE = "cascade"
    NONE = "none"


#: Severity runs 4..1 with 1 the most severe; a change to a numerically
#: smaller value is an increase in severity.
SEVERITY_LEVELS = (1, 2, 3, 4)

#: Ownership ladder, encoded ordinally 0..3.
SUPPORT_LEVELS = ("L0", "L1", "L2", "L3")


def utc_minute(ts: datetime) -> datetime:
    """Normalize a datetime to UTC at minute resolution."""
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    else:
        ts = ts.astimezone(timezone.utc)
    return ts.replace(second=0, microsecond=0)


@dataclass(frozen=True, slots=True)
class CallRecord:
    """One timestamped event in a ticket's history; the atomic input unit.

    ``crit_date`` is in-memory enrichment stamped by the registry join; it is
    not part of the CSV layout.
    """

    pmr_id: str
    seq: int
    timestamp: datetime
    actor: Actor
    event: EventKind
    sev_from: Optional[int] = None
    sev_to: Optional[int] = None
    level: Optional[int] = None
    support_person_id: Optional[str] = None
    critsit_id_raw: Optional[str] = None
    crit_date: Optional[datetime] = None


@dataclass(frozen=True, slots=True)
class PMR:
    """A support ticket assembled from its ordered call records.

    A prefix of ``records`` is a "stage": stage k is the first k records.
    """

    pmr_id: str
    customer_id: str
    open_ts: datetime
    close_ts: Optional[datetime]
    records: tuple[CallRecord, ...]
    critsit_id: Optional[str] = None
    crit_date: Optional[datetime] = None


@dataclass(frozen=True, slots=True)
class CritSitRegistryEntry:
    """One escalation artifact: its id, date, and (generator only) its cause."""

    critsit_id: str
    crit_date: datetime
    cause_pmr_id: Optional[str] = None


# Ordered names of the model features, matching the features.csv layout.
FEATURE_NAMES = (
    # basic
    "num_entries",
    "days_open",
    "ownership_level",
    # process
    "num_support_contacts",
    "num_sev_increases",
    "num_sev_decreases",
    "num_to_sev1_transitions",
    # time
    "time_until_first_contact",
    "avg_response_time",
    "diff_expected_vs_avg",
    "days_since_last_contact",
    # customer profile, fixed as of PMR creation
    "closed_pmrs",
    "closed_critsits",
    "critsit_pmr_ratio",
    "expected_response_time",
    "open_pmrs",
    "pmrs_opened_window",
    "pmrs_closed_window",
    "open_critsits",
    "critsits_opened_window",
    "critsits_closed_window",
    "expected_response_time_window",
)


@dataclass(frozen=True, slots=True)
class FeatureVector:
    """The 22 model features for one PMR stage, plus label and provenance.

    Undefined averages use the -1 sentinel rather than null so the ML matrix
    stays purely numeric. ``escalation_type`` is metadata and is not a model
    input by default.
    """

    pmr_id: str
    stage: int
    label: bool
    escalation_type: EscalationType
    num_entries: int
    days_open: float
    ownership_level: int
    num_support_contacts: int
    num_sev_increases: int
    num_sev_decreases: int
    num_to_sev1_transitions: int
    time_until_first_contact: float
    avg_response_time: float
    diff_expected_vs_avg: float
    days_since_last_contact: float
    closed_pmrs: int
    closed_critsits: int
    critsit_pmr_ratio: float
    expected_response_time: float
    open_pmrs: int
    pmrs_opened_window: int
    pmrs_closed_window: int
    open_critsits: int
    critsits_opened_window: int
    critsits_closed_window: int
    expected_response_time_window: float

    def values(self) -> tuple[float, ...]:
        """Feature values in FEATURE_NAMES order."""
        return tuple(float(getattr(self, name)) for name in FEATURE_NAMES)


@dataclass(frozen=True, slots=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def add(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            tn=self.tn + other.tn,
            fn=self.fn + other.fn,
        )


@dataclass(frozen=True, slots=True)
class EscalationRiskPoint:
    """Escalation risk at one stage of a PMR's history."""

    stage: int
    er: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.er <= 1.0:
            raise ValueError(f"er must be in [0,1], got {self.er}")
