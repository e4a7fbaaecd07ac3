"""Critsit-id cleaning and registry joining.

The critsit id column arrives dirty: besides well-formed ids like
"AJ638562" it carries free-text placeholders ("crit", "accounting", ...).
Cleaning keeps only values matching the id pattern (case-folded upward)
and clears the rest. Joining stamps each crit-linked record with the
registry's escalation date; ids missing from the registry are reported as
orphans rather than dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable

from ..core import CallRecord, CritSitRegistryEntry

CRITSIT_ID_PATTERN = re.compile(r"^[A-Z]{2}[0-9]{6}$")


class DuplicateRegistryId(ValueError):
    def __init__(self, critsit_id: str):
        self.critsit_id = critsit_id
        super().__init__(f"registry lists {critsit_id} more than once")


@dataclass
class CleanReport:
    kept: int = 0
    cleared: int = 0
    noise_tokens: dict[str, int] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "kept": self.kept,
            "cleared": self.cleared,
            "noise_tokens": dict(sorted(self.noise_tokens.items())),
        }


@dataclass
class JoinReport:
    joined_records: int = 0
    orphan_records: int = 0
    orphan_ids: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "joined_records": self.joined_records,
            "orphan_records": self.orphan_records,
            "orphan_ids": self.orphan_ids,
        }


def clean_critsit_ids(records: Iterable[CallRecord]) -> tuple[list[CallRecord], CleanReport]:
    """Keep critsit ids matching the valid pattern (uppercased), clear the rest."""
    report = CleanReport()
    out = []
    for r in records:
        raw = r.critsit_id_raw
        if raw is None or raw == "":
            out.append(r)
            continue
        candidate = raw.strip().upper()
        if CRITSIT_ID_PATTERN.match(candidate):
            report.kept += 1
            out.append(r if candidate == raw else replace(r, critsit_id_raw=candidate))
        else:
            report.cleared += 1
            report.noise_tokens[raw] = report.noise_tokens.get(raw, 0) + 1
            out.append(replace(r, critsit_id_raw=None))
    return out, report


def join_critsit_dates(
    records: Iterable[CallRecord], registry: Iterable[CritSitRegistryEntry]
) -> tuple[list[CallRecord], JoinReport]:
    """Stamp each crit-linked record with its registry crit date."""
    dates = {}
    for entry in registry:
        if entry.critsit_id in dates:
            raise DuplicateRegistryId(entry.critsit_id)
        dates[entry.critsit_id] = entry.crit_date

    report = JoinReport()
    orphan_ids: set[str] = set()
    out = []
    for r in records:
        cid = r.critsit_id_raw
        if cid is None:
            out.append(r)
        elif cid in dates:
            report.joined_records += 1
            out.append(replace(r, crit_date=dates[cid]))
        else:
            report.orphan_records += 1
            orphan_ids.add(cid)
            out.append(r)
    report.orphan_ids = sorted(orphan_ids)
    return out, report
