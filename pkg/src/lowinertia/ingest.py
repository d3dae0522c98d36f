"""CSV readers and writers for fleets, commitments, kinetic energy and prices.

All files are UTF-8, comma separated, with a mandatory header row.
Timestamps are either integer hour indices or ISO-8601 datetimes (UTC when
no offset is given); one file must not mix the two. Every reader rejects
duplicate timestamps, gaps and non-numeric fields with an
:class:`~lowinertia.errors.IngestionError` naming the offending line.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import ABSENT, HourlySeries, exact_mean, parse_utc
from .errors import IngestionError
from .inertia import CommitmentSeries, UnitRecord
from .planner import DiPlan, EpcPlan, Event, LinkRecord, NORDIC_LINKS, events_to_csv
from .pricing import PricePool, REGULATING

HOUR = timedelta(hours=1)


def _open_rows(path, required: Sequence[str]):
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot open: {exc.strerror}", path) from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError("file is empty; a header row is required", path, 1) from None
        header = [h.strip() for h in header]
        missing = [c for c in required if c not in header]
        if missing:
            raise IngestionError(f"header is missing column(s): {', '.join(missing)}", path, 1)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise IngestionError(f"expected {len(header)} fields, found {len(row)}", path, lineno)
            rows.append((lineno, dict(zip(header, (c.strip() for c in row)))))
    return header, rows


def _number(text: str, path, line, name, allow_blank=False):
    if text == "" and allow_blank:
        return ABSENT
    try:
        v = float(text)
    except ValueError:
        raise IngestionError(f"field {name!r} is not numeric: {text!r}", path, line) from None
    if not math.isfinite(v):
        raise IngestionError(f"field {name!r} is not finite: {text!r}", path, line)
    return v


def _flag(text: str, path, line, name) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "y", "t"):
        return True
    if low in ("0", "false", "no", "n", "f", ""):
        return False
    raise IngestionError(f"field {name!r} is not a boolean: {text!r}", path, line)


class _Clock:
    """Maps timestamp fields to hour indices, consistently within one file."""

    def __init__(self, path, origin: datetime | None = None):
        self.path = path
        self.origin = origin
        self.kind = None

    def hour(self, text: str, line: int) -> int:
        kind = "int" if text.lstrip("-").isdigit() else "datetime"
        if self.kind is None:
            self.kind = kind
        elif kind != self.kind:
            raise IngestionError("timestamps mix hour indices and datetimes", self.path, line)
        if kind == "int":
            t = int(text)
            if t < 0:
                raise IngestionError(f"negative hour index {t}", self.path, line)
            return t
        try:
            dt = parse_utc(text)
        except ValueError:
            raise IngestionError(f"unparseable timestamp {text!r}", self.path, line) from None
        if self.origin is None:
            self.origin = dt.replace(month=1, day=1, hour=0, minute=0, second=0, microsecond=0)
        delta = dt - self.origin
        if delta % HOUR:
            raise IngestionError(f"timestamp {text!r} is not on a whole hour", self.path, line)
        t = delta // HOUR
        if t < 0:
            raise IngestionError(f"timestamp {text!r} precedes the horizon origin", self.path, line)
        return int(t)

    @property
    def start_time(self) -> datetime | None:
        return self.origin if self.kind == "datetime" else None


def _series_from_points(points: list[tuple[int, int, object]], path, clock: _Clock) -> HourlySeries:
    """Build an hourly series from ``(line, hour, value)`` in file order.

    A regular coarser step (e.g. 3 h) is expanded by holding each value.
    """
    if not points:
        raise IngestionError("no data rows", path)
    seen = {}
    for line, t, _ in points:
        if t in seen:
            raise IngestionError(f"duplicate timestamp (first seen on line {seen[t]})", path, line)
        seen[t] = line
    step = points[1][1] - points[0][1] if len(points) > 1 else 1
    if step <= 0:
        raise IngestionError("timestamps are not increasing", path, points[1][0])
    for (_, t0, _), (line, t1, _) in zip(points, points[1:]):
        if t1 - t0 != step:
            what = "gap" if t1 - t0 > step else "irregular spacing"
            raise IngestionError(f"{what} in time series: {t1 - t0} h after previous row, expected {step} h",
                                 path, line)
    start = points[0][1]
    start_time = clock.start_time + timedelta(hours=start) if clock.start_time is not None else None
    series = HourlySeries(start, tuple(v for _, _, v in points), step, start_time)
    return series.to_hourly()


def _stamp(series: HourlySeries, t: int) -> str:
    dt = series.datetime_at(t)
    return dt.isoformat() if dt is not None else str(t)


# --- fleet -----------------------------------------------------------------

FLEET_COLUMNS = ("unit_id", "area", "s_mva", "h_s", "is_di")


def ingest_fleet(path) -> list[UnitRecord]:
    """Read a fleet file ``unit_id,area,s_mva,h_s,is_di``.

    Optional extra columns: ``category`` (key into the inertia defaults),
    ``module`` and ``p_max_mw`` (for production-based commitment). A blank
    ``h_s`` means unknown.
    """
    header, rows = _open_rows(path, FLEET_COLUMNS)
    fleet = []
    seen = {}
    n_di = 0
    for line, r in rows:
        uid = r["unit_id"]
        if not uid:
            raise IngestionError("empty unit_id", path, line)
        if uid in seen:
            raise IngestionError(f"duplicate unit_id {uid!r} (first on line {seen[uid]})", path, line)
        seen[uid] = line
        s = _number(r["s_mva"], path, line, "s_mva")
        h = _number(r["h_s"], path, line, "h_s", allow_blank=True)
        is_di = _flag(r["is_di"], path, line, "is_di")
        n_di += is_di
        if n_di > 1:
            raise IngestionError("more than one unit flagged as dimensioning incident", path, line)
        p_max = _number(r.get("p_max_mw", ""), path, line, "p_max_mw", allow_blank=True)
        try:
            unit = UnitRecord(uid, s, h, is_di, r["area"], r.get("category", ""), r.get("module", ""), p_max)
        except ValueError as exc:
            raise IngestionError(str(exc), path, line) from None
        fleet.append(unit)
    return fleet


def write_fleet(path, fleet: Sequence[UnitRecord]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(FLEET_COLUMNS) + ["category", "module", "p_max_mw"])
        for u in fleet:
            w.writerow([
                u.unit_id, u.area, repr(u.s_mva), "" if u.h_s is None else repr(u.h_s),
                int(u.is_dimensioning_incident), u.category, u.module,
                "" if u.p_max_mw is None else repr(u.p_max_mw),
            ])


# --- commitment ------------------------------------------------------------


def greedy_online(units: Sequence[UnitRecord], p_mw: float) -> list[bool]:
    """Which units of one module are online to produce ``p_mw``.

    Units are filled in listed order; a unit is switched on only when the
    ones already online run at full capacity.
    """
    status = []
    remaining = p_mw
    for u in units:
        on = remaining > 0
        status.append(on)
        if on:
            remaining -= u.capacity_mw
    return status


def ingest_commitment(path, fleet: Sequence[UnitRecord], origin: datetime | None = None) -> CommitmentSeries:
    """Read ``timestamp,unit_id,online`` or ``timestamp,unit_id,p_mw``.

    In the production form ``unit_id`` names a generator module (units
    share a module via the fleet's ``module`` column, else a unit is its own
    module) and online units are chosen by :func:`greedy_online`.
    """
    header, rows = _open_rows(path, ("timestamp", "unit_id"))
    if "online" in header:
        mode = "online"
    elif "p_mw" in header:
        mode = "p_mw"
    else:
        raise IngestionError("header needs an 'online' or a 'p_mw' column", path, 1)

    clock = _Clock(path, origin)
    by_key: dict[str, list] = defaultdict(list)
    if mode == "online":
        known = {u.unit_id for u in fleet}
    else:
        modules: dict[str, list[UnitRecord]] = defaultdict(list)
        for u in fleet:
            modules[u.module_id].append(u)
        known = set(modules)
    for line, r in rows:
        key = r["unit_id"]
        if key not in known:
            raise IngestionError(f"unknown {'unit' if mode == 'online' else 'module'} id {key!r}", path, line)
        t = clock.hour(r["timestamp"], line)
        if mode == "online":
            v = _flag(r["online"], path, line, "online")
        else:
            v = _number(r["p_mw"], path, line, "p_mw")
            if v < 0:
                raise IngestionError("negative production", path, line)
            cap = sum(u.capacity_mw for u in modules[key])
            if v > cap:
                raise IngestionError(f"production {v} MW exceeds module capacity {cap} MW", path, line)
        by_key[key].append((line, t, v))

    series = {k: _series_from_points(pts, path, clock) for k, pts in by_key.items()}
    ranges = {(s.start, len(s)) for s in series.values()}
    if len(ranges) > 1:
        raise IngestionError("units/modules do not cover the same hours", path)

    if mode == "online":
        return CommitmentSeries(series, fleet)
    out = {}
    for mod, s in series.items():
        members = modules[mod]
        statuses = [greedy_online(members, p) for p in s.values]
        for i, u in enumerate(members):
            out[u.unit_id] = s.with_values(tuple(st[i] for st in statuses))
    return CommitmentSeries(out, fleet)


def write_commitment(path, commitment: CommitmentSeries) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "unit_id", "online"])
        for uid, s in commitment.items():
            for t, on in s.items():
                w.writerow([_stamp(s, t), uid, int(bool(on))])


# --- kinetic energy --------------------------------------------------------


def ingest_kinetic_energy(path, origin: datetime | None = None) -> HourlySeries:
    """Read ``timestamp,ek_gws``; a blank value is kept as an absent marker."""
    _, rows = _open_rows(path, ("timestamp", "ek_gws"))
    clock = _Clock(path, origin)
    points = []
    for line, r in rows:
        t = clock.hour(r["timestamp"], line)
        v = _number(r["ek_gws"], path, line, "ek_gws", allow_blank=True)
        if v is not ABSENT and v < 0:
            raise IngestionError("kinetic energy cannot be negative", path, line)
        points.append((line, t, v))
    return _series_from_points(points, path, clock)


def write_kinetic_energy(path, series: HourlySeries) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "ek_gws"])
        for t, v in series.items():
            w.writerow([_stamp(series, t), "" if v is ABSENT else repr(float(v))])


# --- prices ----------------------------------------------------------------


@dataclass(frozen=True)
class SeasonWindow:
    """Calendar window applied to datetime-stamped price histories."""

    start_month: int = 6
    start_day: int = 1
    days: int = 93

    def start_of(self, year: int) -> datetime:
        return datetime(year, self.start_month, self.start_day, tzinfo=timezone.utc)

    def contains(self, dt: datetime) -> bool:
        lo = self.start_of(dt.year)
        return lo <= dt < lo + timedelta(days=self.days)

    @property
    def hours(self) -> int:
        return self.days * 24


def ingest_prices(path, label: str, season: SeasonWindow | None = SeasonWindow(),
                  unit: str | None = None) -> PricePool:
    """Read ``timestamp,zone_or_link,value`` into a price pool.

    For a label ``kind:key`` only rows whose ``zone_or_link`` equals ``key``
    are used. For the regulating-power label every zone is read and each
    hour's price is the mean across zones (all zones must report every
    hour). With datetime stamps only hours inside ``season`` are kept.
    """
    _, rows = _open_rows(path, ("timestamp", "zone_or_link", "value"))
    kind, _, key = label.partition(":")
    clock = _Clock(path)
    per_zone: dict[str, list] = defaultdict(list)
    for line, r in rows:
        zone = r["zone_or_link"]
        if key and zone != key:
            continue
        t = clock.hour(r["timestamp"], line)
        v = _number(r["value"], path, line, "value")
        per_zone[zone].append((line, t, v))
    if not per_zone:
        raise IngestionError(f"no rows for {label!r}", path)

    for zone, pts in per_zone.items():
        seen = {}
        for line, t, _ in pts:
            if t in seen:
                raise IngestionError(f"duplicate timestamp for {zone} (first on line {seen[t]})", path, line)
            seen[t] = line
        for (_, t0, _), (line, t1, _) in zip(pts, pts[1:]):
            if t1 <= t0:
                raise IngestionError(f"timestamps for {zone} are not increasing", path, line)
            if t1 - t0 != 1 and not _season_break(clock, t0, t1, season):
                raise IngestionError(f"gap of {t1 - t0} h in {zone} prices", path, line)

    zones = sorted(per_zone)
    hours_ref = [t for _, t, _ in per_zone[zones[0]]]
    for z in zones[1:]:
        if [t for _, t, _ in per_zone[z]] != hours_ref:
            raise IngestionError(f"zone {z} does not report the same hours as {zones[0]}", path)
    columns = [[v for _, _, v in per_zone[z]] for z in zones]
    prices = [exact_mean(col) for col in zip(*columns)]

    origin = clock.start_time
    if origin is not None and season is not None:
        keep = [season.contains(origin + timedelta(hours=t)) for t in hours_ref]
        prices = [p for p, k in zip(prices, keep) if k]
        years = len({(origin + timedelta(hours=t)).year for t, k in zip(hours_ref, keep) if k})
        per_season = season.hours
    else:
        per_season = season.hours if season is not None else len(prices)
        years = max(1, round(len(prices) / per_season))
    if not prices:
        raise IngestionError(f"no {label!r} prices fall inside the season window", path)
    if unit is None:
        unit = "EUR/MW" if kind == "fcr" else "EUR/MWh"
    return PricePool(label, np.array(prices), unit, years, per_season)


def _season_break(clock: _Clock, t0: int, t1: int, season: SeasonWindow | None) -> bool:
    """True when every hour missing between two rows lies outside the season window."""
    origin = clock.start_time
    if origin is None or season is None:
        return False
    nxt = origin + timedelta(hours=t0 + 1)
    if season.contains(nxt):
        return False
    first = season.start_of(nxt.year)
    if first < nxt:
        first = season.start_of(nxt.year + 1)
    return first >= origin + timedelta(hours=t1)


def write_price_pool(path, pool: PricePool) -> None:
    """Write a pool's samples with hour-index stamps; re-ingest with the same label and ``season=None``."""
    _, _, key = pool.label.partition(":")
    zone = key or "avg"
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "zone_or_link", "value"])
        for i, v in enumerate(pool.samples):
            w.writerow([i, zone, repr(float(v))])


# --- events and plans ------------------------------------------------------


def read_events(path, origin: datetime | None = None) -> list[Event]:
    """Read ``start,end,peak_required_reduction_mw[,source]`` (inclusive hours)."""
    header, rows = _open_rows(path, ("start", "end", "peak_required_reduction_mw"))
    clock = _Clock(path, origin)
    events = []
    for line, r in rows:
        start = clock.hour(r["start"], line)
        end = clock.hour(r["end"], line)
        peak = _number(r["peak_required_reduction_mw"], path, line, "peak_required_reduction_mw")
        try:
            ev = Event(start, end, peak, r.get("source") or "raw")
        except ValueError as exc:
            raise IngestionError(str(exc), path, line) from None
        if events and ev.start <= events[-1].end:
            raise IngestionError("events overlap or are out of order", path, line)
        events.append(ev)
    return events


def write_events(path, events: Sequence[Event], series: HourlySeries | None = None) -> None:
    Path(path).write_text(events_to_csv(events, series), encoding="utf-8")


def read_di_plan(path, events: Sequence[Event] = (), origin: datetime | None = None) -> DiPlan:
    _, rows = _open_rows(path, ("timestamp", "action_type", "total_mw"))
    clock = _Clock(path, origin)
    points = [(line, clock.hour(r["timestamp"], line), _number(r["total_mw"], path, line, "total_mw"))
              for line, r in rows]
    return DiPlan(tuple(events), _series_from_points(points, path, clock))


def read_epc_plan(path, links: Sequence[LinkRecord] = NORDIC_LINKS, origin: datetime | None = None) -> EpcPlan:
    header, rows = _open_rows(path, ("timestamp", "action_type", "total_mw"))
    link_cols = [h[:-3] for h in header if h.endswith("_mw") and h != "total_mw"]
    by_id = {link.link_id: link for link in links}
    try:
        plan_links = tuple(by_id[i] for i in link_cols) if link_cols else tuple(links)
    except KeyError as exc:
        raise IngestionError(f"plan names unknown link {exc.args[0]!r}", path, 1) from None
    clock = _Clock(path, origin)
    points = [(line, clock.hour(r["timestamp"], line), _number(r["total_mw"], path, line, "total_mw"))
              for line, r in rows]
    return EpcPlan(_series_from_points(points, path, clock), plan_links)
