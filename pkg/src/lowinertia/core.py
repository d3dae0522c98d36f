"""Hourly time-series container and unit aliases used throughout the package.

Time is an integer hour index counted from the start of a scenario horizon.
A series may additionally carry the UTC datetime of its first sample, which
is used only for labelling exported files and for calendar filters such as
the summer price window.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from datetime import datetime, timedelta, timezone
from typing import Any, Callable, Generic, Iterator, Sequence, TypeVar

from .errors import AbsentValueError, AlignmentError, EmptyOverlapError, RangeError

# Units live in the names; these are plain floats at runtime.
EnergyGWs = float
PowerMW = float
FrequencyHz = float
PriceEurPerMWh = float
PriceEurPerMW = float

V = TypeVar("V")
W = TypeVar("W")

#: Explicit marker for a missing sample. Any arithmetic consumer must reject it.
ABSENT = None


def parse_utc(text: str) -> datetime:
    """Parse an ISO-8601 timestamp; naive values are taken to be UTC."""
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


@dataclass(frozen=True)
class HourlySeries(Generic[V]):
    """Gap-free sequence of samples on a regular hourly grid.

    Parameters
    ----------
    start : int
        Hour index of the first sample (>= 0).
    values : sequence
        Samples in time order. Missing samples must be ``None``.
    step : int
        Spacing between samples, in hours.
    start_time : datetime, optional
        UTC datetime of hour ``start``.
    """

    start: int
    values: tuple
    step: int = 1
    start_time: datetime | None = field(default=None, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not isinstance(self.start, int) or self.start < 0:
            raise ValueError(f"start must be a non-negative integer hour, got {self.start!r}")
        if not isinstance(self.step, int) or self.step < 1:
            raise ValueError(f"step must be a positive integer number of hours, got {self.step!r}")
        if len(self.values) < 1:
            raise ValueError("an HourlySeries needs at least one sample")

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator:
        return iter(self.values)

    @property
    def end(self) -> int:
        """Hour index one step past the last sample (exclusive bound)."""
        return self.start + len(self.values) * self.step

    @property
    def hours(self) -> range:
        return range(self.start, self.end, self.step)

    def items(self) -> Iterator[tuple[int, Any]]:
        return zip(self.hours, self.values)

    def covers(self, t: int) -> bool:
        return self.start <= t < self.end and (t - self.start) % self.step == 0

    def at(self, t: int):
        if not self.covers(t):
            raise RangeError(f"hour {t} is outside series range [{self.start}, {self.end})")
        return self.values[(t - self.start) // self.step]

    def datetime_at(self, t: int) -> datetime | None:
        if self.start_time is None:
            return None
        return self.start_time + timedelta(hours=t - self.start)

    def map(self, fn: Callable[[V], W]) -> "HourlySeries[W]":
        return HourlySeries(self.start, tuple(fn(v) for v in self.values), self.step, self.start_time)

    def with_values(self, values: Sequence) -> "HourlySeries":
        if len(values) != len(self.values):
            raise ValueError("replacement values must keep the series length")
        return HourlySeries(self.start, tuple(values), self.step, self.start_time)

    def slice_hours(self, lo: int, hi: int) -> "HourlySeries[V]":
        """Samples with ``lo <= hour < hi``."""
        lo = max(lo, self.start)
        hi = min(hi, self.end)
        first = -(-(lo - self.start) // self.step)
        last = -(-(hi - self.start) // self.step)
        if last <= first:
            raise EmptyOverlapError(f"no samples in [{lo}, {hi})")
        new_start = self.start + first * self.step
        start_time = None
        if self.start_time is not None:
            start_time = self.start_time + timedelta(hours=new_start - self.start)
        return HourlySeries(new_start, self.values[first:last], self.step, start_time)

    def require_complete(self) -> "HourlySeries[V]":
        for t, v in self.items():
            if v is ABSENT:
                raise AbsentValueError(f"absent value at hour {t}")
        return self

    def to_hourly(self) -> "HourlySeries[V]":
        """Expand a coarser series to 1-hour resolution by holding each value."""
        if self.step == 1:
            return self
        values = tuple(v for v in self.values for _ in range(self.step))
        return HourlySeries(self.start, values, 1, self.start_time)

    @classmethod
    def constant(cls, value, length: int, start: int = 0, start_time: datetime | None = None):
        return cls(start, (value,) * length, 1, start_time)

    # --- text serialization -------------------------------------------------

    def to_csv(self, value_name: str = "value") -> str:
        """Render as ``hour,<value_name>`` CSV with a header of metadata."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        meta = f"# step={self.step}"
        if self.start_time is not None:
            meta += f" start_time={self.start_time.isoformat()}"
        buf.write(meta + "\n")
        writer.writerow(["hour", value_name])
        for t, v in self.items():
            writer.writerow([t, "" if v is ABSENT else _format_scalar(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "HourlySeries":
        lines = text.splitlines()
        step = 1
        start_time = None
        if lines and lines[0].startswith("#"):
            for token in lines[0][1:].split():
                key, _, val = token.partition("=")
                if key == "step":
                    step = int(val)
                elif key == "start_time":
                    start_time = parse_utc(val)
            lines = lines[1:]
        rows = list(csv.reader(lines))[1:]
        if not rows:
            raise ValueError("series CSV has no samples")
        hours = [int(r[0]) for r in rows]
        for prev, cur in zip(hours, hours[1:]):
            if cur - prev != step:
                raise ValueError(f"series CSV is not on a regular {step}-hour grid at hour {cur}")
        values = tuple(_parse_scalar(r[1]) for r in rows)
        return cls(hours[0], values, step, start_time)


def _format_scalar(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_scalar(text: str):
    if text == "":
        return ABSENT
    try:
        return int(text)
    except ValueError:
        return float(text)


def exact_mean(values: Sequence[float]) -> float:
    """Arithmetic mean computed exactly and rounded once."""
    if not values:
        raise ValueError("mean of an empty sequence")
    return float(sum(map(Fraction, values), Fraction(0)) / len(values))


def align(a: HourlySeries, b: HourlySeries) -> HourlySeries:
    """Pair two series over the hours they have in common.

    Raises
    ------
    AlignmentError
        If the steps differ or the grids are out of phase.
    EmptyOverlapError
        If the series share no hour.
    """
    if a.step != b.step:
        raise AlignmentError(f"cannot align series with steps {a.step}h and {b.step}h")
    if (a.start - b.start) % a.step:
        raise AlignmentError("series grids are out of phase")
    lo = max(a.start, b.start)
    hi = min(a.end, b.end)
    if hi <= lo:
        raise EmptyOverlapError(f"series ranges [{a.start},{a.end}) and [{b.start},{b.end}) do not overlap")
    sa = a.slice_hours(lo, hi)
    sb = b.slice_hours(lo, hi)
    start_time = sa.start_time if sa.start_time is not None else sb.start_time
    return HourlySeries(lo, tuple(zip(sa.values, sb.values)), a.step, start_time)
