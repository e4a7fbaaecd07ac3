"""Customer history index supporting strictly-before-t profile queries.

Profile features describe the customer as of a ticket's creation instant and
must never see that instant itself, so every query counts only events with a
timestamp strictly before t. Windowed variants cover [t - X months, t) with
calendar-month subtraction (day clamped).
"""

from __future__ import annotations

import calendar
from bisect import bisect_left
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Optional

from ..core import PMR
from .stats import average_response_minutes


def minus_months(ts: datetime, months: int) -> datetime:
    """Subtract calendar months, clamping the day to the target month's length."""
    year = ts.year
    month = ts.month - months
    while month < 1:
        month += 12
        year -= 1
    day = min(ts.day, calendar.monthrange(year, month)[1])
    return ts.replace(year=year, month=month, day=day)


@dataclass(frozen=True, slots=True)
class ProfileSnapshot:
    """The customer-profile feature block, as of one instant."""

    closed_pmrs: int = 0
    closed_critsits: int = 0
    critsit_pmr_ratio: float = 0.0
    expected_response_time: float = -1.0
    open_pmrs: int = 0
    pmrs_opened_window: int = 0
    pmrs_closed_window: int = 0
    open_critsits: int = 0
    critsits_opened_window: int = 0
    critsits_closed_window: int = 0
    expected_response_time_window: float = -1.0


class _CustomerHistory:
    __slots__ = ("opens", "close_ts", "close_crit_pref", "close_avg_sum_pref",
                 "close_avg_cnt_pref", "crit_dates", "crit_close_ts")

    def __init__(self, pmrs: list[PMR]):
        self.opens = sorted(p.open_ts for p in pmrs)
        closes = sorted(
            (
                (p.close_ts, p.critsit_id is not None, average_response_minutes(p.records))
                for p in pmrs
                if p.close_ts is not None
            ),
            key=lambda item: item[0],
        )
        self.close_ts = [c[0] for c in closes]
        self.close_crit_pref = [0]
        self.close_avg_sum_pref = [0.0]
        self.close_avg_cnt_pref = [0]
        for _, crit, avg in closes:
            self.close_crit_pref.append(self.close_crit_pref[-1] + (1 if crit else 0))
            defined = avg >= 0.0
            self.close_avg_sum_pref.append(self.close_avg_sum_pref[-1] + (avg if defined else 0.0))
            self.close_avg_cnt_pref.append(self.close_avg_cnt_pref[-1] + (1 if defined else 0))
        self.crit_dates = sorted(p.crit_date for p in pmrs if p.crit_date is not None)
        self.crit_close_ts = sorted(
            p.close_ts for p in pmrs if p.close_ts is not None and p.critsit_id is not None
        )


class CustomerIndex:
    """As-of queries over each customer's ticket history."""

    def __init__(self, histories: dict[str, _CustomerHistory], window_months: int):
        self._histories = histories
        self.window_months = window_months

    def customers(self) -> list[str]:
        return sorted(self._histories)

    def profile(
        self, customer_id: str, t: datetime, window_months: Optional[int] = None
    ) -> ProfileSnapshot:
        hist = self._histories.get(customer_id)
        if hist is None:
            return ProfileSnapshot()
        months = self.window_months if window_months is None else window_months
        w0 = minus_months(t, months)

        opened_before = bisect_left(hist.opens, t)
        closed_before = bisect_left(hist.close_ts, t)
        crit_closed_before = hist.close_crit_pref[closed_before]
        crit_opened_before = bisect_left(hist.crit_dates, t)

        avg_cnt = hist.close_avg_cnt_pref[closed_before]
        avg_sum = hist.close_avg_sum_pref[closed_before]
        expected = avg_sum / avg_cnt if avg_cnt else -1.0

        closed_w_lo = bisect_left(hist.close_ts, w0)
        avg_cnt_w = avg_cnt - hist.close_avg_cnt_pref[closed_w_lo]
        avg_sum_w = avg_sum - hist.close_avg_sum_pref[closed_w_lo]
        expected_w = avg_sum_w / avg_cnt_w if avg_cnt_w else -1.0

        ratio = crit_closed_before / closed_before if closed_before else 0.0
        return ProfileSnapshot(
            closed_pmrs=closed_before,
            closed_critsits=crit_closed_before,
            critsit_pmr_ratio=ratio,
            expected_response_time=expected,
            open_pmrs=opened_before - closed_before,
            pmrs_opened_window=opened_before - bisect_left(hist.opens, w0),
            pmrs_closed_window=closed_before - closed_w_lo,
            open_critsits=crit_opened_before - bisect_left(hist.crit_close_ts, t),
            critsits_opened_window=crit_opened_before - bisect_left(hist.crit_dates, w0),
            critsits_closed_window=bisect_left(hist.crit_close_ts, t)
            - bisect_left(hist.crit_close_ts, w0),
            expected_response_time_window=expected_w,
        )


def build_customer_index(pmrs: Iterable[PMR], window_months: int = 6) -> CustomerIndex:
    by_customer: dict[str, list[PMR]] = {}
    for p in pmrs:
        by_customer.setdefault(p.customer_id, []).append(p)
    return CustomerIndex(
        {cid: _CustomerHistory(group) for cid, group in by_customer.items()},
        window_months,
    )
