"""Per-stream timing computations shared by featurization and the index."""

from __future__ import annotations

from datetime import datetime
from typing import Iterable, Optional, Sequence

from ..core import Actor, CallRecord, EventKind

MINUTE = 60.0


def minutes_between(a: datetime, b: datetime) -> float:
    return (b - a).total_seconds() / MINUTE


def days_between(a: datetime, b: datetime) -> float:
    return (b - a).total_seconds() / (MINUTE * 1440.0)


def response_minutes(records: Iterable[CallRecord]) -> list[float]:
    """Response time of each completed conversation turn.

    A turn starts at the first customer message of a run (consecutive
    incoming messages collapse into one turn) and completes at the next
    outgoing support message.
    """
    turn_start: Optional[datetime] = None
    out = []
    for r in records:
        if r.event is EventKind.MESSAGE_IN:
            if turn_start is None:
                turn_start = r.timestamp
        elif r.event is EventKind.MESSAGE_OUT:
            if turn_start is not None:
                out.append(minutes_between(turn_start, r.timestamp))
                turn_start = None
    return out


def average_response_minutes(records: Iterable[CallRecord]) -> float:
    """Mean completed-turn response time; -1 when no turn has completed."""
    times = response_minutes(records)
    return sum(times) / len(times) if times else -1.0


def first_support_contact(records: Sequence[CallRecord]) -> Optional[datetime]:
    for r in records:
        if r.actor is Actor.SUPPORT and r.event in (
            EventKind.MESSAGE_OUT,
            EventKind.CONTACT_ADDED,
        ):
            return r.timestamp
    return None


def last_message_ts(records: Sequence[CallRecord]) -> Optional[datetime]:
    last = None
    for r in records:
        if r.event in (EventKind.MESSAGE_IN, EventKind.MESSAGE_OUT):
            last = r.timestamp
    return last
