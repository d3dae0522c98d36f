"""Screening for N-1 violations and sizing of the two remedial actions.

The sizing curves are the published Nordic results: a 50 MW stair for
reducing the dimensioning incident and a piecewise-linear curve for the
HVDC emergency-power injection, both as functions of pre-fault kinetic
energy and both zero from 153 GWs upward.
"""

from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import EnergyGWs, HourlySeries, PowerMW
from .errors import CapacityExceededError, ConfigurationError, ParameterError
from .errors import OutOfValidatedRangeError
from .frequency import (
    UNDER_FREQUENCY,
    RegressionCoefficients,
    SecurityLimits,
    ifd_regression,
    total_ifd_from_nominal,
)
from .inertia import UnitRecord, n1_kinetic_energy

MIN_CURVE_EK = 80.0
SAFE_EK = 153.0
DI_BLOCK_MW = 50.0

# Lower edges of each plateau (closed) and the reduction applied on it.
_STAIR_EDGES = (80.0, 86.8, 93.5, 100.0, 106.25, 112.5, 118.5, 124.5, 130.5, 136.5, 142.5, 148.5, 153.0)
_STAIR_VALUES = (600.0, 550.0, 500.0, 450.0, 400.0, 350.0, 300.0, 250.0, 200.0, 150.0, 100.0, 50.0, 0.0)

EPC_ANCHORS = (
    (80.0, 690.0), (90.0, 606.0), (100.0, 517.0), (110.0, 426.0), (120.0, 332.0),
    (130.0, 236.0), (140.0, 139.0), (150.0, 41.0), (153.0, 0.0),
)

SCREEN_MODES = ("regression", "curve")


def stair_plateaus() -> list[tuple[float, float, float]]:
    """``(lower, upper, reduction_mw)`` for each finite plateau of the stair."""
    return [(lo, hi, v) for lo, hi, v in zip(_STAIR_EDGES, _STAIR_EDGES[1:], _STAIR_VALUES)]


def _check_range(e_k: float) -> None:
    if e_k < MIN_CURVE_EK:
        raise OutOfValidatedRangeError(
            f"kinetic energy {e_k} GWs is below the {MIN_CURVE_EK} GWs floor of the sizing curves"
        )


def di_reduction_required(e_k: EnergyGWs) -> PowerMW:
    """Dimensioning-incident reduction needed at pre-fault kinetic energy ``e_k``."""
    _check_range(e_k)
    i = bisect.bisect_right(_STAIR_EDGES, e_k) - 1
    return _STAIR_VALUES[i]


def epc_power_required(e_k: EnergyGWs) -> PowerMW:
    """HVDC EPC injection needed at pre-fault kinetic energy ``e_k``."""
    _check_range(e_k)
    if e_k >= SAFE_EK:
        return 0.0
    xs, ys = zip(*EPC_ANCHORS)
    return float(np.interp(e_k, xs, ys))


# --- screening -----------------------------------------------------------


@dataclass(frozen=True)
class ScreeningRecord:
    e_k: EnergyGWs
    ifd: float
    violated: bool


ViolationFlags = HourlySeries  # HourlySeries[ScreeningRecord]


def screen(e_k_series: HourlySeries, delta_p: PowerMW = 1450.0, limits: SecurityLimits = SecurityLimits(),
           mode: str = "curve", *, di_unit: UnitRecord | None = None,
           coeffs: RegressionCoefficients = UNDER_FREQUENCY) -> HourlySeries:
    """Flag the hours in which losing the dimensioning incident breaks the IFD limit.

    ``e_k_series`` holds pre-fault kinetic energy. The regression route needs
    the post-fault value: when ``di_unit`` is given its stored energy is
    subtracted, otherwise the series is used as it is. ``ifd`` in each
    record is the regression IFD from nominal, also reported in curve mode.
    """
    if mode not in SCREEN_MODES:
        raise ParameterError(f"screening mode must be one of {SCREEN_MODES}, got {mode!r}")
    e_k_series.require_complete()
    if e_k_series.step != 1:
        e_k_series = e_k_series.to_hourly()
    records = []
    for e_k in e_k_series.values:
        e_n1 = n1_kinetic_energy(e_k, di_unit) if di_unit is not None else e_k
        ifd = total_ifd_from_nominal(ifd_regression(delta_p, e_n1, coeffs), limits)
        if mode == "regression":
            violated = ifd > limits.ifd_limit
        else:
            violated = di_reduction_required(e_k) > 0
        records.append(ScreeningRecord(e_k, ifd, violated))
    return e_k_series.with_values(records)


# --- events and plans ----------------------------------------------------


@dataclass(frozen=True)
class Event:
    """A run of hours needing action; ``start`` and ``end`` are inclusive."""

    start: int
    end: int
    peak_required_reduction: PowerMW = 0.0
    source: str = "raw"

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"event ends ({self.end}) before it starts ({self.start})")

    @property
    def hours(self) -> int:
        return self.end - self.start + 1


def detect_events(flags: HourlySeries) -> list[Event]:
    """Maximal runs of consecutive violated hours."""
    events = []
    run_start = None
    peak = 0.0
    for t, rec in flags.items():
        if rec.violated:
            if run_start is None:
                run_start, peak = t, 0.0
            peak = max(peak, di_reduction_required(rec.e_k))
            last = t
        elif run_start is not None:
            events.append(Event(run_start, last, peak))
            run_start = None
    if run_start is not None:
        events.append(Event(run_start, last, peak))
    return events


@dataclass(frozen=True)
class PlannerRules:
    merge_window_h: int = 36
    lead_h: int = 0
    lag_h: int = 0

    def __post_init__(self):
        if self.merge_window_h < 0 or self.lead_h < 0 or self.lag_h < 0:
            raise ValueError("planner windows must be non-negative")


@dataclass(frozen=True)
class DiPlan:
    events: tuple[Event, ...]
    reduction: HourlySeries

    def __post_init__(self):
        for t, r in self.reduction.items():
            if r < 0 or r % DI_BLOCK_MW:
                raise ValueError(f"hour {t}: reduction {r} MW is not a non-negative multiple of 50 MW")

    @property
    def energy_mwh(self) -> float:
        return float(sum(self.reduction.values))

    @property
    def active_hours(self) -> int:
        return sum(1 for r in self.reduction.values if r > 0)


def merge_events(events: Sequence[Event], merge_window_h: int = 36) -> list[Event]:
    """Merge events separated by fewer than ``merge_window_h`` hours.

    The gap is counted from the last hour of one event to the first hour of
    the next. Merging is transitive; a merged event takes the largest peak.
    """
    out: list[Event] = []
    for ev in sorted(events, key=lambda e: e.start):
        if out and ev.start - out[-1].end < merge_window_h:
            prev = out.pop()
            ev = Event(prev.start, max(prev.end, ev.end),
                       max(prev.peak_required_reduction, ev.peak_required_reduction), "merged")
        out.append(ev)
    return out


def plan_di(events: Sequence[Event], e_k_series: HourlySeries, rules: PlannerRules = PlannerRules()) -> DiPlan:
    """Schedule the dimensioning-incident reduction.

    Events closer than the merge window become one limitation at the
    largest member reduction, widened by ``lead_h``/``lag_h`` and clipped
    to the series range. Widened windows that overlap are joined.
    """
    for a, b in zip(events, events[1:]):
        if b.start <= a.end:
            raise ParameterError("events must be ordered and disjoint")
    merged = merge_events(events, rules.merge_window_h)
    lo_bound, hi_bound = e_k_series.start, e_k_series.end - 1
    widened: list[Event] = []
    for ev in merged:
        start = max(lo_bound, ev.start - rules.lead_h)
        end = min(hi_bound, ev.end + rules.lag_h)
        if end < start:
            continue
        ev = Event(start, end, ev.peak_required_reduction, ev.source)
        if widened and ev.start <= widened[-1].end:
            prev = widened.pop()
            ev = Event(prev.start, max(prev.end, ev.end),
                       max(prev.peak_required_reduction, ev.peak_required_reduction), "merged")
        widened.append(ev)

    values = [0.0] * len(e_k_series)
    for ev in widened:
        for t in range(ev.start, ev.end + 1):
            values[t - e_k_series.start] = float(ev.peak_required_reduction)
    reduction = HourlySeries(e_k_series.start, tuple(values), 1, e_k_series.start_time)
    return DiPlan(tuple(widened), reduction)


@dataclass(frozen=True)
class LinkRecord:
    link_id: str
    counterpart_country: str
    capacity: PowerMW = float("inf")


NORDIC_LINKS = (
    LinkRecord("KO", "DE", 600.0),
    LinkRecord("BC", "DE", 600.0),
    LinkRecord("NN", "NL", 700.0),
    LinkRecord("SP", "PL", 600.0),
)


@dataclass(frozen=True)
class EpcPlan:
    """Hourly EPC reservation, split equally over ``links``.

    Shares are exact rationals of the hourly total, so they always add back
    to it.
    """

    total: HourlySeries
    links: tuple[LinkRecord, ...] = field(default=NORDIC_LINKS)

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        if not self.links:
            raise ConfigurationError("an EPC plan needs at least one link")
        for t, p in self.total.items():
            if p < 0:
                raise ValueError(f"hour {t}: negative EPC injection {p}")

    def share(self, t: int) -> Fraction:
        return Fraction(self.total.at(t)) / len(self.links)

    def shares(self) -> Iterable[tuple[int, Fraction]]:
        n = len(self.links)
        for t, p in self.total.items():
            yield t, Fraction(p) / n

    @property
    def energy_mwh(self) -> float:
        return float(sum(Fraction(p) for p in self.total.values))

    @property
    def active_hours(self) -> int:
        return sum(1 for p in self.total.values if p > 0)

    @classmethod
    def uniform(cls, hours: Iterable[int], energy_mwh: float, horizon: HourlySeries,
                links: Sequence[LinkRecord] = NORDIC_LINKS) -> "EpcPlan":
        """Spread ``energy_mwh`` evenly over ``hours`` within ``horizon``'s range."""
        hours = sorted(set(hours))
        if not hours:
            raise ParameterError("no hours to spread EPC energy over")
        per_hour = energy_mwh / len(hours)
        values = [0.0] * len(horizon)
        for t in hours:
            if not horizon.covers(t):
                raise ParameterError(f"hour {t} is outside the plan horizon")
            values[t - horizon.start] = per_hour
        return cls(HourlySeries(horizon.start, tuple(values), 1, horizon.start_time), tuple(links))


def plan_epc(flags: HourlySeries, e_k_series: HourlySeries,
             links: Sequence[LinkRecord] = NORDIC_LINKS) -> EpcPlan:
    """Reserve HVDC emergency power on violated hours only.

    Raises
    ------
    CapacityExceededError
        When the per-link share exceeds a link's capacity; ``hours`` lists
        the offending hours.
    """
    if len(links) < 1:
        raise ConfigurationError("at least one HVDC link is required")
    if (flags.start, len(flags), flags.step) != (e_k_series.start, len(e_k_series), e_k_series.step):
        raise ParameterError("flags and kinetic-energy series cover different hours")
    values = []
    over = []
    n = len(links)
    for (t, rec), e_k in zip(flags.items(), e_k_series.values):
        total = epc_power_required(e_k) if rec.violated else 0.0
        share = Fraction(total) / n
        if any(share > link.capacity for link in links):
            over.append(t)
        values.append(total)
    if over:
        raise CapacityExceededError(
            f"EPC share exceeds link capacity in {len(over)} hour(s): {over[:10]}", over
        )
    return EpcPlan(HourlySeries(flags.start, tuple(values), 1, flags.start_time), tuple(links))


# --- CSV export ----------------------------------------------------------


def _stamp(series: HourlySeries, t: int) -> str:
    dt = series.datetime_at(t)
    return dt.isoformat() if dt is not None else str(t)


def di_plan_to_csv(plan: DiPlan) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["timestamp", "action_type", "total_mw"])
    for t, r in plan.reduction.items():
        w.writerow([_stamp(plan.reduction, t), "di_reduction", repr(float(r))])
    return buf.getvalue()


def epc_plan_to_csv(plan: EpcPlan) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["timestamp", "action_type", "total_mw"] + [f"{link.link_id}_mw" for link in plan.links])
    for t, share in plan.shares():
        total = plan.total.at(t)
        w.writerow([_stamp(plan.total, t), "hvdc_epc", repr(float(total))]
                   + [repr(float(share))] * len(plan.links))
    return buf.getvalue()


def events_to_csv(events: Sequence[Event], series: HourlySeries | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["start", "end", "hours", "peak_required_reduction_mw", "source"])
    for ev in events:
        start = _stamp(series, ev.start) if series is not None else ev.start
        end = _stamp(series, ev.end) if series is not None else ev.end
        w.writerow([start, end, ev.hours, repr(float(ev.peak_required_reduction)), ev.source])
    return buf.getvalue()


def flags_to_csv(flags: HourlySeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["timestamp", "ek_gws", "ifd_hz", "violated"])
    for t, rec in flags.items():
        w.writerow([_stamp(flags, t), repr(rec.e_k), repr(rec.ifd), int(rec.violated)])
    return buf.getvalue()
