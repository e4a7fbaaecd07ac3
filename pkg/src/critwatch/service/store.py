"""Durable triage state: per-ticket risk, analyst assessments, and notes.

Persistence is a JSON snapshot written atomically (temp file + rename)
plus an append-only JSONL mutation log replayed on load, so any
acknowledged mutation survives a process restart. Readers always see an
immutable snapshot dict; every mutation copy-on-writes the dict and swaps
the reference, and a single writer lock serializes mutators. Rescores
replace the whole snapshot in one swap, so readers never observe a
partially rescored store.
"""

from __future__ import annotations

import json
import math
import os
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from ..core import format_timestamp, parse_timestamp


class UnknownPmr(ValueError):
    def __init__(self, pmr_id: str):
        self.pmr_id = pmr_id
        super().__init__(f"unknown pmr {pmr_id}")


class OutOfRange(ValueError):
    def __init__(self, what: str, value: object):
        super().__init__(f"{what} out of range: {value!r}")


class EmptyText(ValueError):
    def __init__(self) -> None:
        super().__init__("text must be non-empty")


def signed_percent(delta: float) -> int:
    """round(100 * delta), half away from zero, clamped to [-100, 100]."""
    scaled = 100.0 * delta
    value = int(math.floor(abs(scaled) + 0.5))
    if scaled < 0:
        value = -value
    return max(-100, min(100, value))


@dataclass(frozen=True, slots=True)
class Comment:
    author: str
    ts: datetime
    text: str

    def to_json_dict(self) -> dict:
        return {"author": self.author, "ts": format_timestamp(self.ts), "text": self.text}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Comment":
        return cls(author=data["author"], ts=parse_timestamp(data["ts"]), text=data["text"])


@dataclass(frozen=True, slots=True)
class TriageRecord:
    pmr_id: str
    er: float
    prev_er: Optional[float] = None
    mer: Optional[int] = None
    followed: bool = False
    next_action: Optional[str] = None
    comments: tuple[Comment, ...] = ()
    last_scored: Optional[datetime] = None

    @property
    def cer(self) -> int:
        """Signed change in risk since the previous scoring, -100..100."""
        if self.prev_er is None:
            return 0
        return signed_percent(self.er - self.prev_er)

    def to_json_dict(self) -> dict:
        return {
            "pmr_id": self.pmr_id,
            "er": self.er,
            "prev_er": self.prev_er,
            "mer": self.mer,
            "followed": self.followed,
            "next_action": self.next_action,
            "comments": [c.to_json_dict() for c in self.comments],
            "last_scored": format_timestamp(self.last_scored) if self.last_scored else None,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TriageRecord":
        return cls(
            pmr_id=data["pmr_id"],
            er=float(data["er"]),
            prev_er=None if data.get("prev_er") is None else float(data["prev_er"]),
            mer=None if data.get("mer") is None else int(data["mer"]),
            followed=bool(data.get("followed", False)),
            next_action=data.get("next_action"),
            comments=tuple(Comment.from_json_dict(c) for c in data.get("comments", [])),
            last_scored=(
                parse_timestamp(data["last_scored"]) if data.get("last_scored") else None
            ),
        )


def _now() -> datetime:
    return datetime.now(timezone.utc).replace(second=0, microsecond=0)


class TriageStore:
    """File-backed store of TriageRecords keyed by pmr_id."""

    SNAPSHOT_VERSION = 1

    def __init__(self, state_path: Path):
        self._path = Path(state_path)
        self._log_path = self._path.with_suffix(self._path.suffix + ".log")
        self._write_lock = threading.Lock()
        self._records: dict[str, TriageRecord] = {}
        self._load()

    # -- reads ---------------------------------------------------------

    def get(self, pmr_id: str) -> TriageRecord:
        rec = self._records.get(pmr_id)
        if rec is None:
            raise UnknownPmr(pmr_id)
        return rec

    def snapshot(self) -> dict[str, TriageRecord]:
        """Current immutable view; safe to iterate without locking."""
        return self._records

    def list_records(
        self, sort: str = "er", follow_only: bool = False
    ) -> list[TriageRecord]:
        """Stable descending sort by er / cer / mer; ties by pmr_id ascending."""
        if sort not in ("er", "cer", "mer"):
            raise OutOfRange("sort", sort)
        records = list(self._records.values())
        if follow_only:
            records = [r for r in records if r.followed]

        def key(r: TriageRecord):
            if sort == "er":
                v = r.er
            elif sort == "cer":
                v = r.cer
            else:
                v = -1 if r.mer is None else r.mer
            return (-v, r.pmr_id)

        return sorted(records, key=key)

    # -- mutations -----------------------------------------------------

    def set_mer(self, pmr_id: str, mer: int) -> TriageRecord:
        if not isinstance(mer, int) or not 0 <= mer <= 100:
            raise OutOfRange("mer", mer)
        with self._write_lock:
            rec = replace(self.get(pmr_id), mer=mer)
            self._commit(rec, {"op": "set_mer", "pmr_id": pmr_id, "mer": mer})
        return rec

    def add_comment(self, pmr_id: str, author: str, text: str) -> TriageRecord:
        if not text:
            raise EmptyText()
        ts = _now()
        with self._write_lock:
            old = self.get(pmr_id)
            rec = replace(old, comments=old.comments + (Comment(author, ts, text),))
            self._commit(
                rec,
                {
                    "op": "add_comment",
                    "pmr_id": pmr_id,
                    "author": author,
                    "text": text,
                    "ts": format_timestamp(ts),
                },
            )
        return rec

    def set_next_action(self, pmr_id: str, text: str) -> TriageRecord:
        with self._write_lock:
            rec = replace(self.get(pmr_id), next_action=text or None)
            self._commit(rec, {"op": "set_next_action", "pmr_id": pmr_id, "text": text})
        return rec

    def set_follow(self, pmr_id: str, followed: bool) -> TriageRecord:
        with self._write_lock:
            rec = replace(self.get(pmr_id), followed=bool(followed))
            self._commit(
                rec, {"op": "set_follow", "pmr_id": pmr_id, "followed": bool(followed)}
            )
        return rec

    def apply_rescore(self, scores: dict[str, float], now: Optional[datetime] = None) -> int:
        """Swap in new risk scores for the given tickets; others untouched."""
        now = now or _now()
        with self._write_lock:
            records = dict(self._records)
            for pmr_id, er in scores.items():
                old = records.get(pmr_id)
                if old is None:
                    records[pmr_id] = TriageRecord(pmr_id=pmr_id, er=float(er), last_scored=now)
                else:
                    records[pmr_id] = replace(
                        old, prev_er=old.er, er=float(er), last_scored=now
                    )
            self._records = records
            self._write_snapshot()
        return len(scores)

    # -- persistence ----------------------------------------------------

    def _commit(self, rec: TriageRecord, log_entry: dict) -> None:
        records = dict(self._records)
        records[rec.pmr_id] = rec
        self._records = records
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(log_entry, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _write_snapshot(self) -> None:
        doc = {
            "version": self.SNAPSHOT_VERSION,
            "records": {pid: r.to_json_dict() for pid, r in sorted(self._records.items())},
        }
        tmp = self._path.with_suffix(self._path.suffix + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self._path)
        if self._log_path.exists():
            self._log_path.unlink()

    def _apply_log_entry(self, entry: dict) -> None:
        op = entry["op"]
        pmr_id = entry["pmr_id"]
        old = self._records.get(pmr_id)
        if old is None:
            return
        if op == "set_mer":
            rec = replace(old, mer=int(entry["mer"]))
        elif op == "add_comment":
            comment = Comment(entry["author"], parse_timestamp(entry["ts"]), entry["text"])
            rec = replace(old, comments=old.comments + (comment,))
        elif op == "set_next_action":
            rec = replace(old, next_action=entry["text"] or None)
        elif op == "set_follow":
            rec = replace(old, followed=bool(entry["followed"]))
        else:
            return
        records = dict(self._records)
        records[pmr_id] = rec
        self._records = records

    def _load(self) -> None:
        if self._path.exists():
            doc = json.loads(self._path.read_text(encoding="utf-8"))
            if doc.get("version") != self.SNAPSHOT_VERSION:
                raise ValueError(f"unsupported state version {doc.get('version')!r}")
            self._records = {
                pid: TriageRecord.from_json_dict(r) for pid, r in doc["records"].items()
            }
        if self._log_path.exists():
            with open(self._log_path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._apply_log_entry(json.loads(line))
            # fold the replayed log into a fresh snapshot
            self._write_snapshot()
