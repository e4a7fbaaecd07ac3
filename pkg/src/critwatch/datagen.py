"""Synthetic ticket-world generator with a planted, recoverable escalation signal.

Produces call-record streams for a population of customers, escalates a
calibrated fraction of tickets (default 1 in 251), and sweeps a customer's
other open tickets into each escalation as "cascade" entries. Escalation
labels are drawn from a logistic model over the same quantities the feature
pipeline computes (response-time gap against the customer's expectation,
severity climbs toward 1, the customer's historical escalation ratio, and
contact staleness), evaluated over the ticket prefix up to its would-be
escalation moment, so a classifier trained downstream can recover the
signal from the records it actually gets to see.

Everything is a pure function of (config, seed): two runs with the same
config produce byte-identical CSVs.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from .core import (
    Actor,
    CallRecord,
    CritSitRegistryEntry,
    EscalationType,
    EventKind,
    serialize_call_records,
    serialize_registry,
)

# Minute 0 of every generated world.
EPOCH = datetime(2023, 1, 2, 8, 0, tzinfo=timezone.utc)

NOISE_TOKENS = ("crit", "critsit", "accounting", "escalation")

DEFAULT_SIGNAL_WEIGHTS: dict[str, float] = {
    "response_gap": 10.0,      # (avg - expected) support response, hours
    "sev1_transitions": 12.0,  # changes of severity to 1
    "sev_increases": 3.0,      # any severity increase
    "critsit_ratio": 20.0,     # customer's closed-critsit / closed-pmr ratio
    "contact_staleness": 1.0,  # longest silent gap between messages, days
}

# Sub-stream tags for the seeded RNG hierarchy.
_S_CUSTOMERS, _S_ALLOC, _S_OPENS, _S_STREAMS, _S_LABELS, _S_IDS, _S_DIRTY = range(1, 8)


class InvalidConfig(ValueError):
    def __init__(self, field_name: str, detail: str):
        self.field = field_name
        super().__init__(f"{field_name}: {detail}")


@dataclass(frozen=True)
class GenConfig:
    n_customers: int
    n_pmrs: int
    crit_ratio: int = 250
    cascade_enabled: bool = True
    dirty_id_rate: float = 0.05
    window_months: int = 6
    seed: int = 0
    signal_weights: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_SIGNAL_WEIGHTS)
    )
    horizon_days: int = 540
    heavy_fraction: float = 0.05

    def validate(self) -> None:
        if self.n_customers < 1:
            raise InvalidConfig("n_customers", "must be >= 1")
        if self.n_pmrs < 1:
            raise InvalidConfig("n_pmrs", "must be >= 1")
        if self.crit_ratio < 1:
            raise InvalidConfig("crit_ratio", "must be >= 1")
        if not 0.0 <= self.dirty_id_rate <= 1.0:
            raise InvalidConfig("dirty_id_rate", "must be in [0,1]")
        if self.window_months < 1:
            raise InvalidConfig("window_months", "must be >= 1")
        if self.horizon_days < 2:
            raise InvalidConfig("horizon_days", "must be >= 2")
        if not 0.0 <= self.heavy_fraction <= 1.0:
            raise InvalidConfig("heavy_fraction", "must be in [0,1]")
        unknown = set(self.signal_weights) - set(DEFAULT_SIGNAL_WEIGHTS)
        if unknown:
            raise InvalidConfig("signal_weights", f"unknown names {sorted(unknown)}")


@dataclass(frozen=True, slots=True)
class TruthEntry:
    label: bool
    escalation_type: EscalationType
    signal_score: float


@dataclass(frozen=True)
class GroundTruth:
    entries: dict[str, TruthEntry]

    def positives(self) -> int:
        return sum(1 for e in self.entries.values() if e.label)


# One raw event: (minute, actor, event, sev_from, sev_to, level, person)
_RawEvent = tuple[int, Actor, EventKind, Optional[int], Optional[int], Optional[int], Optional[str]]


class _PmrSim:
    """Mutable per-ticket state used during generation and labeling."""

    __slots__ = (
        "index", "customer", "open_min", "events", "turns", "close_min",
        "crit_frac", "crit_delay", "crit_candidate",
        "pre_sev_increases", "pre_sev1", "pre_staleness",
        "avg_resp_full", "avg_resp_pre",
        "crit_kind", "crit_min", "crit_group", "eff_close", "hist_avg", "z",
    )

    def __init__(self, index: int, customer: int, open_min: int):
        self.index = index
        self.customer = customer
        self.open_min = open_min
        self.events: list[_RawEvent] = []
        self.turns: list[tuple[int, int]] = []  # (first_in_min, out_min)
        self.close_min: Optional[int] = None
        self.crit_frac = 0.6
        self.crit_delay = 5760
        self.crit_candidate = open_min + 60
        self.pre_sev_increases = 0
        self.pre_sev1 = 0
        self.pre_staleness = 0.0
        self.avg_resp_full: Optional[float] = None
        self.avg_resp_pre: Optional[float] = None
        self.crit_kind: Optional[str] = None
        self.crit_min: Optional[int] = None
        self.crit_group: Optional[int] = None
        self.eff_close: Optional[int] = None
        self.hist_avg: Optional[float] = None
        self.z = 0.0

    @property
    def pmr_id(self) -> str:
        return f"P{self.index:06d}-C{self.customer:05d}"


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    ex = math.exp(x)
    return ex / (1.0 + ex)


def _apportion(weights: np.ndarray, total: int) -> np.ndarray:
    """Largest-remainder apportionment of ``total`` by weight."""
    shares = weights / weights.sum() * total
    counts = np.floor(shares).astype(np.int64)
    short = total - int(counts.sum())
    if short > 0:
        frac = shares - counts
        order = np.lexsort((np.arange(len(weights)), -frac))
        counts[order[:short]] += 1
    return counts


def _lognormal_minutes(rng: np.random.Generator, median: float, sigma: float) -> int:
    return max(1, int(round(rng.lognormal(math.log(median), sigma))))


def _generate_stream(
    pmr: _PmrSim,
    rng: np.random.Generator,
    response_scale: float,
    trouble_rate: float,
    now_min: int,
) -> None:
    """Fill a ticket with an organic event stream, truncated at ``now_min``."""
    events = pmr.events
    events.append((pmr.open_min, Actor.CUSTOMER, EventKind.OPEN, None, None, None, None))

    severity = int(rng.choice((4, 3, 2), p=(0.5, 0.35, 0.15)))
    level = 0
    n_turns = 1 + min(int(rng.geometric(0.28)) - 1, 9)
    # Tickets that go badly go badly on every front at once: a heavy-tailed
    # friction multiplier drives slow responses, severity climbs, and silence
    # together. The two friction modes barely overlap, so escalations are
    # separable from ordinary tickets rather than a smooth continuum.
    if rng.random() < trouble_rate:
        friction = rng.lognormal(math.log(5.5), 0.25)
    else:
        friction = rng.lognormal(0.0, 0.25)
    p_escalate = min(0.5, 0.08 * friction * friction)
    gap_median = 180.0 * friction**0.7
    pmr_jitter = rng.lognormal(0.0, 0.25)
    person = f"S{int(rng.integers(0, 150)):03d}"
    knows_person = False

    t = pmr.open_min
    for turn in range(n_turns):
        if len(events) >= 36:
            break
        if turn == 0:
            t += int(rng.integers(1, 30))
        else:
            t += _lognormal_minutes(rng, gap_median, 0.9)
        first_in = t
        events.append((t, Actor.CUSTOMER, EventKind.MESSAGE_IN, None, None, None, None))
        # Friction slows responses additively, so troubled tickets show a
        # clear absolute gap even for customers used to fast support.
        slow_down = max(0.0, friction - 1.0) * 90.0 * rng.lognormal(0.0, 0.25)
        resp = max(
            2,
            int(round(rng.lognormal(math.log(response_scale * pmr_jitter), 0.4) + slow_down)),
        )
        if rng.random() < 0.22 and resp > 4:
            extra = first_in + int(rng.integers(1, max(2, int(resp * 0.6))))
            events.append((extra, Actor.CUSTOMER, EventKind.MESSAGE_IN, None, None, None, None))
            t = extra
        out = first_in + resp
        if turn > 0 and rng.random() < 0.18:
            person = f"S{int(rng.integers(0, 150)):03d}"
            knows_person = False
        if not knows_person and turn > 0 and rng.random() < 0.5:
            events.append((out, Actor.SUPPORT, EventKind.CONTACT_ADDED, None, None, None, person))
        knows_person = True
        events.append((out, Actor.SUPPORT, EventKind.MESSAGE_OUT, None, None, None, person))
        pmr.turns.append((first_in, out))
        t = out

        roll = rng.random()
        if roll < p_escalate and severity > 1:
            new_sev = 1 if (severity == 2 or rng.random() < 0.25) else severity - 1
            t += int(rng.integers(2, 240))
            events.append((t, Actor.CUSTOMER, EventKind.SEVERITY_CHANGE, severity, new_sev, None, None))
            severity = new_sev
        elif roll < p_escalate + 0.06 and severity < 4:
            t += int(rng.integers(2, 240))
            events.append((t, Actor.CUSTOMER, EventKind.SEVERITY_CHANGE, severity, severity + 1, None, None))
            severity += 1

        if level < 3:
            p_up = 0.75 if turn == 0 else 0.30
            if rng.random() < p_up:
                level += 1
                t += int(rng.integers(1, 120))
                events.append((t, Actor.SYSTEM, EventKind.OWNERSHIP_CHANGE, None, None, level, None))

    close_at = t + _lognormal_minutes(rng, 720.0, 0.8)
    closer = Actor.SUPPORT if rng.random() < 0.7 else Actor.SYSTEM
    events.append((close_at, closer, EventKind.CLOSE, None, None, None, None))

    # Enforce chronological order, then cut at the observation horizon.
    events.sort(key=lambda e: e[0])
    kept = [e for e in events if e[0] <= now_min]
    if not kept:
        kept = [events[0]]
    pmr.events = kept
    pmr.close_min = close_at if close_at <= now_min else None
    pmr.turns = [(fi, out) for fi, out in pmr.turns if out <= now_min]
    pmr.avg_resp_full = (
        sum(out - fi for fi, out in pmr.turns) / len(pmr.turns) if pmr.turns else None
    )

    # The would-be escalation moment, fixed ahead of the label draw. Signal
    # quantities are measured on the prefix up to it, which is exactly the
    # record prefix an escalated ticket retains.
    organic = [e for e in kept if e[2] is not EventKind.CLOSE]
    if len(organic) > 1:
        pos = max(1, int(pmr.crit_frac * (len(organic) - 1)))
        candidate = organic[pos][0]
    else:
        candidate = pmr.open_min + 60
    pmr.crit_candidate = max(candidate, pmr.open_min + 1)

    pre_turns = [(fi, out) for fi, out in pmr.turns if out <= pmr.crit_candidate]
    pmr.avg_resp_pre = (
        sum(out - fi for fi, out in pre_turns) / len(pre_turns) if pre_turns else None
    )
    msgs = [
        e[0]
        for e in kept
        if e[0] <= pmr.crit_candidate
        and e[2] in (EventKind.OPEN, EventKind.MESSAGE_IN, EventKind.MESSAGE_OUT)
    ]
    gaps = [b - a for a, b in zip(msgs, msgs[1:])]
    pmr.pre_staleness = max(gaps) / 1440.0 if gaps else 0.0
    for e in kept:
        if e[0] <= pmr.crit_candidate and e[2] is EventKind.SEVERITY_CHANGE:
            if e[4] < e[3]:  # type: ignore[operator]
                pmr.pre_sev_increases += 1
                if e[4] == 1:
                    pmr.pre_sev1 += 1


class _CustomerLedger:
    """Running per-customer history during a labeling pass."""

    __slots__ = ("heap", "closed", "crit_closed", "sum_avg", "n_avg", "opened", "pending")

    def __init__(self) -> None:
        self.heap: list[tuple[int, int]] = []  # (eff_close_min, pmr chrono idx)
        self.closed = 0
        self.crit_closed = 0
        self.sum_avg = 0.0
        self.n_avg = 0
        self.opened: list[int] = []
        self.pending: list[tuple[int, int]] = []  # (crit_min, group)


def _label_pass(
    pmrs: list[_PmrSim],
    weights: dict[str, float],
    bias: float,
    u: np.ndarray,
    cascade_enabled: bool,
    now_min: int,
) -> int:
    """Assign cause/cascade labels chronologically; returns total positives."""
    for p in pmrs:
        p.crit_kind = None
        p.crit_min = None
        p.crit_group = None
        p.eff_close = p.close_min
        p.hist_avg = p.avg_resp_full

    w_gap = weights.get("response_gap", 0.0)
    w_sev1 = weights.get("sev1_transitions", 0.0)
    w_inc = weights.get("sev_increases", 0.0)
    w_ratio = weights.get("critsit_ratio", 0.0)
    w_stale = weights.get("contact_staleness", 0.0)

    ledgers: dict[int, _CustomerLedger] = {}
    n_groups = 0
    positives = 0

    for p in pmrs:
        led = ledgers.get(p.customer)
        if led is None:
            led = ledgers[p.customer] = _CustomerLedger()

        # Fold tickets closed strictly before this open into the history.
        while led.heap and led.heap[0][0] < p.open_min:
            _, j = heapq.heappop(led.heap)
            other = pmrs[j]
            led.closed += 1
            if other.crit_kind is not None:
                led.crit_closed += 1
            if other.hist_avg is not None:
                led.sum_avg += other.hist_avg
                led.n_avg += 1

        expected = led.sum_avg / led.n_avg if led.n_avg else None
        ratio = led.crit_closed / led.closed if led.closed else 0.0

        gap_hours = 0.0
        if expected is not None and p.avg_resp_pre is not None:
            gap_hours = (p.avg_resp_pre - expected) / 60.0
        p.z = (
            w_gap * gap_hours
            + w_sev1 * p.pre_sev1
            + w_inc * p.pre_sev_increases
            + w_ratio * ratio
            + w_stale * p.pre_staleness
        )

        # Sweep this ticket into an earlier escalation if it was open then.
        if cascade_enabled and led.pending:
            led.pending = [(t, g) for t, g in led.pending if t >= p.open_min]
            for t, g in led.pending:
                if p.eff_close is None or p.eff_close > t:
                    p.crit_kind = "cascade"
                    p.crit_min = t
                    p.crit_group = g
                    positives += 1
                    break

        if p.crit_kind is None and u[p.index] < _sigmoid(p.z + bias):
            p.crit_kind = "cause"
            p.crit_group = n_groups
            n_groups += 1
            positives += 1
            crit_min = p.crit_candidate
            p.crit_min = crit_min
            close = crit_min + p.crit_delay
            p.eff_close = close if close <= now_min else None
            p.hist_avg = p.avg_resp_pre

            if cascade_enabled:
                group = p.crit_group
                for j in led.opened:
                    other = pmrs[j]
                    if other.crit_kind is None and (
                        other.eff_close is None or other.eff_close > crit_min
                    ):
                        other.crit_kind = "cascade"
                        other.crit_min = crit_min
                        other.crit_group = group
                        positives += 1
                led.pending.append((crit_min, group))

        if p.eff_close is not None:
            heapq.heappush(led.heap, (p.eff_close, p.index))
        led.opened.append(p.index)

    return positives


def _calibrate_bias(
    pmrs: list[_PmrSim],
    config: GenConfig,
    u: np.ndarray,
    now_min: int,
) -> float:
    """Bisect the logistic bias so total positives land near the target rate."""
    target = config.n_pmrs / (1 + config.crit_ratio)
    lo, hi = -40.0, 10.0
    while (
        _label_pass(pmrs, config.signal_weights, lo, u, config.cascade_enabled, now_min)
        > target
        and lo > -1500.0
    ):
        lo *= 2.0
    while (
        _label_pass(pmrs, config.signal_weights, hi, u, config.cascade_enabled, now_min)
        < target
        and hi < 1500.0
    ):
        hi *= 2.0
    best_bias, best_err = hi, float("inf")
    for _ in range(40):
        mid = (lo + hi) / 2.0
        count = _label_pass(pmrs, config.signal_weights, mid, u, config.cascade_enabled, now_min)
        err = abs(count - target)
        if err < best_err:
            best_err, best_bias = err, mid
        if count < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-7:
            break
    return best_bias


def _make_critsit_ids(rng: np.random.Generator, n: int) -> list[str]:
    letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    seen: set[str] = set()
    ids = []
    while len(ids) < n:
        a, b = rng.integers(0, 26, 2)
        num = int(rng.integers(0, 1_000_000))
        cid = f"{letters[a]}{letters[b]}{num:06d}"
        if cid not in seen:
            seen.add(cid)
            ids.append(cid)
    return ids


def generate_world(
    config: GenConfig,
) -> tuple[list[CallRecord], list[CritSitRegistryEntry], GroundTruth]:
    """Generate call records, a complete escalation registry, and ground truth."""
    config.validate()
    seed = config.seed
    now_min = config.horizon_days * 1440

    rng_cust = np.random.default_rng((seed, _S_CUSTOMERS))
    n_heavy = int(round(config.heavy_fraction * config.n_customers))
    heavy = set(int(c) for c in rng_cust.permutation(config.n_customers)[:n_heavy])
    response_scale = np.clip(rng_cust.lognormal(math.log(45.0), 0.5, config.n_customers), 8.0, 360.0)

    rng_alloc = np.random.default_rng((seed, _S_ALLOC))
    weights = rng_alloc.lognormal(0.0, 0.6, config.n_customers)
    for c in heavy:
        weights[c] = 15.0
    counts = _apportion(weights, config.n_pmrs)

    rng_opens = np.random.default_rng((seed, _S_OPENS))
    opens: list[tuple[int, int]] = []
    for c in range(config.n_customers):
        k = int(counts[c])
        if k == 0:
            continue
        for m in sorted(int(x) for x in rng_opens.integers(0, now_min - 1440, k)):
            opens.append((m, c))
    opens.sort()

    rng_labels = np.random.default_rng((seed, _S_LABELS))
    u = rng_labels.random(len(opens))
    crit_fracs = rng_labels.uniform(0.35, 0.9, len(opens))
    crit_delays = np.maximum(
        1440, rng_labels.lognormal(math.log(4 * 1440.0), 0.6, len(opens)).astype(np.int64)
    )

    pmrs: list[_PmrSim] = []
    rng_stream = np.random.default_rng((seed, _S_STREAMS))
    fast_era_end = int(now_min * 0.6)
    # Sized so the planted trouble mode roughly carries the target crit rate
    # once cascade sweeps are added on top.
    trouble_rate = min(0.25, max(0.002, 0.8 / (1 + config.crit_ratio)))
    for idx, (open_min, c) in enumerate(opens):
        p = _PmrSim(idx, c, open_min)
        p.crit_frac = float(crit_fracs[idx])
        p.crit_delay = int(crit_delays[idx])
        scale = float(response_scale[c])
        if c in heavy and open_min < fast_era_end:
            scale *= 0.5
        _generate_stream(p, rng_stream, scale, trouble_rate, now_min)
        pmrs.append(p)

    bias = _calibrate_bias(pmrs, config, u, now_min)
    _label_pass(pmrs, config.signal_weights, bias, u, config.cascade_enabled, now_min)

    groups = sorted({p.crit_group for p in pmrs if p.crit_group is not None})
    rng_ids = np.random.default_rng((seed, _S_IDS))
    id_list = _make_critsit_ids(rng_ids, len(groups))
    group_id = {g: id_list[i] for i, g in enumerate(groups)}
    group_date: dict[int, int] = {}
    group_cause: dict[int, str] = {}
    for p in pmrs:
        if p.crit_kind == "cause":
            group_date[p.crit_group] = p.crit_min  # type: ignore[index]
            group_cause[p.crit_group] = p.pmr_id  # type: ignore[index]

    records: list[CallRecord] = []
    truth_entries: dict[str, TruthEntry] = {}
    for p in pmrs:
        events = p.events
        if p.crit_kind == "cause":
            events = [e for e in events if e[0] <= p.crit_min]
            close = p.crit_min + p.crit_delay  # type: ignore[operator]
            if close <= now_min:
                events = events + [
                    (close, Actor.SUPPORT, EventKind.CLOSE, None, None, None, None)
                ]
        raw_id = group_id[p.crit_group] if p.crit_group is not None else None
        pid = p.pmr_id
        for seq, (minute, actor, event, sf, st, lvl, person) in enumerate(events):
            records.append(
                CallRecord(
                    pmr_id=pid,
                    seq=seq,
                    timestamp=EPOCH + timedelta(minutes=minute),
                    actor=actor,
                    event=event,
                    sev_from=sf,
                    sev_to=st,
                    level=lvl,
                    support_person_id=person,
                    critsit_id_raw=raw_id,
                )
            )
        if p.crit_kind == "cause":
            etype = EscalationType.CAUSE
        elif p.crit_kind == "cascade":
            etype = EscalationType.CASCADE
        else:
            etype = EscalationType.NONE
        truth_entries[pid] = TruthEntry(
            label=p.crit_kind is not None, escalation_type=etype, signal_score=p.z
        )

    registry = [
        CritSitRegistryEntry(
            critsit_id=group_id[g],
            crit_date=EPOCH + timedelta(minutes=group_date[g]),
            cause_pmr_id=group_cause[g],
        )
        for g in groups
    ]
    registry.sort(key=lambda e: (e.crit_date, e.critsit_id))

    records = inject_dirty_critsit_ids(records, config.dirty_id_rate, (seed, _S_DIRTY))
    return records, registry, GroundTruth(truth_entries)


def inject_dirty_critsit_ids(
    records: list[CallRecord], rate: float, seed
) -> list[CallRecord]:
    """Replace ~rate of the non-empty critsit ids with free-text noise tokens."""
    if not 0.0 <= rate <= 1.0:
        raise InvalidConfig("rate", "must be in [0,1]")
    if rate == 0.0:
        return list(records)
    rng = np.random.default_rng(seed)
    out = []
    for r in records:
        if r.critsit_id_raw and rng.random() < rate:
            token = NOISE_TOKENS[int(rng.integers(0, len(NOISE_TOKENS)))]
            out.append(replace(r, critsit_id_raw=token))
        else:
            out.append(r)
    return out


def serialize_truth(truth: GroundTruth) -> bytes:
    lines = ["pmr_id,label,escalation_type,signal_score"]
    for pmr_id, e in truth.entries.items():
        lines.append(
            f"{pmr_id},{1 if e.label else 0},{e.escalation_type.value},{e.signal_score!r}"
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_truth(data: bytes) -> GroundTruth:
    lines = data.decode("utf-8").splitlines()
    if not lines or lines[0] != "pmr_id,label,escalation_type,signal_score":
        raise ValueError("unexpected truth.csv header")
    entries = {}
    for line in lines[1:]:
        if not line:
            continue
        pmr_id, label, etype, score = line.split(",")
        entries[pmr_id] = TruthEntry(
            label=label == "1",
            escalation_type=EscalationType(etype),
            signal_score=float(score),
        )
    return GroundTruth(entries)


def write_world(
    out_dir: Path,
    records: list[CallRecord],
    registry: list[CritSitRegistryEntry],
    truth: GroundTruth,
) -> None:
    """Write call_records.csv, critsit_registry.csv, and truth.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "call_records.csv").write_bytes(serialize_call_records(records))
    (out_dir / "critsit_registry.csv").write_bytes(serialize_registry(registry))
    (out_dir / "truth.csv").write_bytes(serialize_truth(truth))
