"""CSV serialization for the shared domain types.

File layouts (column order is part of the contract):

    call_records.csv     pmr_id,seq,timestamp,actor,event,sev_from,sev_to,
                         level,support_person_id,critsit_id_raw
    critsit_registry.csv critsit_id,crit_date,cause_pmr_id
    features.csv         pmr_id,stage,label,escalation_type,<22 features>

Inapplicable columns are empty strings. Timestamps are RFC-3339 UTC;
seconds are accepted on input and truncated to minute resolution.
Floats are written with repr() so files round-trip losslessly and are
byte-identical across runs.
"""

from __future__ import annotations

import csv
import io
import re
from datetime import datetime, timezone
from typing import Iterable, Optional

from .types import (
    FEATURE_NAMES,
    Actor,
    CallRecord,
    CritSitRegistryEntry,
    EscalationType,
    EventKind,
    FeatureVector,
)


class CsvError(ValueError):
    """Base class for CSV parse failures."""


class MalformedRow(CsvError):
    def __init__(self, line_no: int, detail: str = "wrong column count"):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {detail}")


class BadTimestamp(CsvError):
    def __init__(self, line_no: int, value: str):
        self.line_no = line_no
        self.value = value
        super().__init__(f"line {line_no}: bad timestamp {value!r}")


class UnknownEvent(CsvError):
    def __init__(self, line_no: int, value: str):
        self.line_no = line_no
        self.value = value
        super().__init__(f"line {line_no}: unknown event {value!r}")


class InvalidRecordSequence(CsvError):
    """Per-PMR seq/timestamp invariants violated."""

    def __init__(self, pmr_id: str, detail: str):
        self.pmr_id = pmr_id
        super().__init__(f"pmr {pmr_id}: {detail}")


CALL_RECORD_COLUMNS = (
    "pmr_id",
    "seq",
    "timestamp",
    "actor",
    "event",
    "sev_from",
    "sev_to",
    "level",
    "support_person_id",
    "critsit_id_raw",
)

REGISTRY_COLUMNS = ("critsit_id", "crit_date", "cause_pmr_id")

FEATURES_COLUMNS = ("pmr_id", "stage", "label", "escalation_type") + FEATURE_NAMES

_TS_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})[Tt](\d{2}):(\d{2})(?::(\d{2})(?:\.\d+)?)?(?:[Zz]|\+00:00)$"
)


def format_timestamp(ts: datetime) -> str:
    """RFC-3339 UTC at minute resolution, e.g. 2014-09-20T20:45:00Z."""
    if ts.tzinfo is not None:
        ts = ts.astimezone(timezone.utc)
    return ts.strftime("%Y-%m-%dT%H:%M:00Z")


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC-3339 UTC timestamp, truncating any seconds."""
    m = _TS_RE.match(value.strip())
    if not m:
        raise ValueError(f"bad timestamp {value!r}")
    year, month, day, hour, minute = (int(m.group(i)) for i in range(1, 6))
    return datetime(year, month, day, hour, minute, tzinfo=timezone.utc)


def _opt(value: Optional[object]) -> str:
    return "" if value is None else str(value)


def _level_token(level: Optional[int]) -> str:
    return "" if level is None else f"L{level}"


def _num(value: float) -> str:
    """Lossless, canonical numeric text: ints bare, floats via repr."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def serialize_call_records(records: Iterable[CallRecord]) -> bytes:
    """Render call records as CSV bytes. Inverse of parse_call_records."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CALL_RECORD_COLUMNS)
    for r in records:
        writer.writerow(
            (
                r.pmr_id,
                r.seq,
                format_timestamp(r.timestamp),
                r.actor.value,
                r.event.value,
                _opt(r.sev_from),
                _opt(r.sev_to),
                _level_token(r.level),
                _opt(r.support_person_id),
                _opt(r.critsit_id_raw),
            )
        )
    return buf.getvalue().encode("utf-8")


def _parse_level(token: str, line_no: int) -> Optional[int]:
    if token == "":
        return None
    if re.fullmatch(r"L[0-3]", token):
        return int(token[1])
    if token in {"0", "1", "2", "3"}:
        return int(token)
    raise MalformedRow(line_no, f"bad support level {token!r}")


def _parse_severity(token: str, line_no: int) -> Optional[int]:
    if token == "":
        return None
    if token in {"1", "2", "3", "4"}:
        return int(token)
    raise MalformedRow(line_no, f"bad severity {token!r}")


def parse_call_records(data: bytes, validate: bool = True) -> list[CallRecord]:
    """Parse CSV bytes into call records, preserving input row order.

    Per-PMR invariants (contiguous seq 0..n-1 when ordered, non-decreasing
    timestamps in seq order, open only at seq 0, at most one open/close) are
    validated unless ``validate`` is False.
    """
    text = data.decode("utf-8")
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "missing header") from None
    if tuple(header) != CALL_RECORD_COLUMNS:
        raise MalformedRow(1, f"unexpected header {header!r}")

    records: list[CallRecord] = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CALL_RECORD_COLUMNS):
            raise MalformedRow(line_no)
        (pmr_id, seq_s, ts_s, actor_s, event_s, sf_s, st_s, lvl_s, spid, crit_raw) = row
        try:
            seq = int(seq_s)
        except ValueError:
            raise MalformedRow(line_no, f"bad seq {seq_s!r}") from None
        try:
            ts = parse_timestamp(ts_s)
        except ValueError:
            raise BadTimestamp(line_no, ts_s) from None
        try:
            actor = Actor(actor_s)
        except ValueError:
            raise MalformedRow(line_no, f"unknown actor {actor_s!r}") from None
        try:
            event = EventKind(event_s)
        except ValueError:
            raise UnknownEvent(line_no, event_s) from None
        records.append(
            CallRecord(
                pmr_id=pmr_id,
                seq=seq,
                timestamp=ts,
                actor=actor,
                event=event,
                sev_from=_parse_severity(sf_s, line_no),
                sev_to=_parse_severity(st_s, line_no),
                level=_parse_level(lvl_s, line_no),
                support_person_id=spid or None,
                critsit_id_raw=crit_raw or None,
            )
        )
    if validate:
        validate_record_sequences(records)
    return records


def validate_record_sequences(records: Iterable[CallRecord]) -> None:
    """Check per-PMR seq/timestamp invariants over an arbitrarily ordered stream."""
    by_pmr: dict[str, list[CallRecord]] = {}
    for r in records:
        by_pmr.setdefault(r.pmr_id, []).append(r)
    for pmr_id, group in by_pmr.items():
        group = sorted(group, key=lambda r: r.seq)
        n_open = sum(1 for r in group if r.event is EventKind.OPEN)
        n_close = sum(1 for r in group if r.event is EventKind.CLOSE)
        if n_open > 1:
            raise InvalidRecordSequence(pmr_id, f"{n_open} open events")
        if n_close > 1:
            raise InvalidRecordSequence(pmr_id, f"{n_close} close events")
        for pos, r in enumerate(group):
            if r.seq != pos:
                raise InvalidRecordSequence(
                    pmr_id, f"seq values not contiguous (expected {pos}, got {r.seq})"
                )
            if r.event is EventKind.OPEN and r.seq != 0:
                raise InvalidRecordSequence(pmr_id, f"open event at seq {r.seq}")
            if pos > 0 and r.timestamp < group[pos - 1].timestamp:
                raise InvalidRecordSequence(
                    pmr_id, f"timestamp decreases at seq {r.seq}"
                )


def serialize_registry(entries: Iterable[CritSitRegistryEntry]) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REGISTRY_COLUMNS)
    for e in entries:
        writer.writerow((e.critsit_id, format_timestamp(e.crit_date), _opt(e.cause_pmr_id)))
    return buf.getvalue().encode("utf-8")


def parse_registry(data: bytes) -> list[CritSitRegistryEntry]:
    reader = csv.reader(io.StringIO(data.decode("utf-8"), newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "missing header") from None
    if tuple(header) != REGISTRY_COLUMNS:
        raise MalformedRow(1, f"unexpected header {header!r}")
    entries = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(REGISTRY_COLUMNS):
            raise MalformedRow(line_no)
        try:
            crit_date = parse_timestamp(row[1])
        except ValueError:
            raise BadTimestamp(line_no, row[1]) from None
        entries.append(
            CritSitRegistryEntry(
                critsit_id=row[0], crit_date=crit_date, cause_pmr_id=row[2] or None
            )
        )
    return entries


def serialize_features(vectors: Iterable[FeatureVector]) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FEATURES_COLUMNS)
    for v in vectors:
        row = [v.pmr_id, str(v.stage), "1" if v.label else "0", v.escalation_type.value]
        row.extend(_num(getattr(v, name)) for name in FEATURE_NAMES)
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


_INT_FEATURES = {
    "num_entries",
    "ownership_level",
    "num_support_contacts",
    "num_sev_increases",
    "num_sev_decreases",
    "num_to_sev1_transitions",
    "closed_pmrs",
    "closed_critsits",
    "open_pmrs",
    "pmrs_opened_window",
    "pmrs_closed_window",
    "open_critsits",
    "critsits_opened_window",
    "critsits_closed_window",
}


def parse_features(data: bytes) -> list[FeatureVector]:
    reader = csv.reader(io.StringIO(data.decode("utf-8"), newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "missing header") from None
    if tuple(header) != FEATURES_COLUMNS:
        raise MalformedRow(1, f"unexpected header {header!r}")
    out = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(FEATURES_COLUMNS):
            raise MalformedRow(line_no)
        try:
            kwargs: dict[str, object] = {
                "pmr_id": row[0],
                "stage": int(row[1]),
                "label": row[2] == "1",
                "escalation_type": EscalationType(row[3]),
            }
            for name, token in zip(FEATURE_NAMES, row[4:]):
                kwargs[name] = int(token) if name in _INT_FEATURES else float(token)
        except ValueError as exc:
            raise MalformedRow(line_no, str(exc)) from None
        out.append(FeatureVector(**kwargs))  # type: ignore[arg-type]
    return out
