"""Price scenarios from historical hourly prices.

Each scenario price is a percentile of the distribution of subsample means:
draw ``k`` hourly prices (one season's worth) out of the pooled history,
average them, repeat. The 5th/50th/95th percentiles become the low, median
and high scenarios.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import HourlySeries, exact_mean
from .errors import AlignmentError, ConfigurationError, ParameterError

LEVELS = ("low", "median", "high")
LEVEL_PERCENTILE = {"low": 5, "median": 50, "high": 95}
REGULATING = "regulating_power"


def fcr_label(country: str) -> str:
    return f"fcr:{country}"


def rent_label(link_id: str) -> str:
    return f"congestion_rent:{link_id}"


@dataclass(frozen=True)
class PricePool:
    """Pooled hourly prices for one market product."""

    label: str
    samples: np.ndarray
    unit: str = "EUR/MWh"
    years: int = 1
    hours_per_season: int = 2232

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ParameterError(f"price pool {self.label!r} needs a non-empty 1-D sample array")
        if not np.all(np.isfinite(arr)):
            raise ParameterError(f"price pool {self.label!r} contains non-finite prices")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def fully_populated(self) -> bool:
        return len(self) == self.years * self.hours_per_season

    def __eq__(self, other):
        if not isinstance(other, PricePool):
            return NotImplemented
        return (
            (self.label, self.unit, self.years, self.hours_per_season)
            == (other.label, other.unit, other.years, other.hours_per_season)
            and np.array_equal(self.samples, other.samples)
        )

    __hash__ = None


def zonal_average(zone_series: Sequence[HourlySeries]) -> HourlySeries:
    """Hour-by-hour arithmetic mean across bidding zones, correctly rounded."""
    if not zone_series:
        raise ParameterError("at least one zone is required")
    ref = zone_series[0]
    for s in zone_series[1:]:
        if (s.start, len(s), s.step) != (ref.start, len(ref), ref.step):
            raise AlignmentError("zone price series do not cover the same hours")
    for s in zone_series:
        s.require_complete()
    values = tuple(exact_mean(col) for col in zip(*(s.values for s in zone_series)))
    return ref.with_values(values)


@dataclass(frozen=True)
class BootstrapResult:
    replicate_means: np.ndarray
    p5: float
    p50: float
    p95: float
    seed: int
    k: int = 0
    replace: bool = False

    def percentile(self, level: str) -> float:
        return {"low": self.p5, "median": self.p50, "high": self.p95}[level]

    def histogram_csv(self, bins: int = 50) -> str:
        """Replicate-mean histogram as ``bin_low,bin_high,probability``."""
        counts, edges = np.histogram(self.replicate_means, bins=bins)
        total = counts.sum()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_low", "bin_high", "probability"])
        for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
            w.writerow([repr(float(lo)), repr(float(hi)), repr(float(c / total))])
        return buf.getvalue()


def nearest_rank(sorted_values: Sequence[float], pct: int) -> float:
    """Nearest-rank percentile: the smallest value with at least ``pct``% at or below it."""
    n = len(sorted_values)
    if n == 0:
        raise ParameterError("percentile of an empty sample")
    if not 0 <= pct <= 100:
        raise ParameterError(f"percentile must be within [0, 100], got {pct}")
    rank = max(1, -(-pct * n // 100))
    return float(sorted_values[rank - 1])


def _replicate_means(samples: np.ndarray, k: int, seeds: Sequence[np.random.SeedSequence], replace: bool) -> np.ndarray:
    # Means are taken around a reference price, so a constant pool gives
    # exactly that price; sorted indices make each mean depend only on
    # which prices were drawn, not on the draw order.
    ref = samples[0]
    shifted = samples - ref
    out = np.empty(len(seeds))
    n = samples.size
    for j, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        idx = np.sort(rng.choice(n, size=k, replace=replace))
        out[j] = ref + shifted[idx].mean()
    return out


def bootstrap_mean_distribution(pool: PricePool, k: int, reps: int = 10_000, seed: int = 0, *,
                                replace: bool = False, workers: int = 1) -> BootstrapResult:
    """Distribution of the mean of ``k`` prices drawn from ``pool``.

    Draws are without replacement unless ``replace=True``. Replicate ``i``
    uses its own random stream spawned from ``seed``, so the output is
    identical for any ``workers`` count.

    Raises
    ------
    ParameterError
        If ``k`` is outside ``[1, len(pool)]`` (without replacement) or
        ``reps < 1``.
    """
    n = len(pool)
    if k < 1 or (not replace and k > n):
        raise ParameterError(f"subsample size {k} is not within [1, {n}]")
    if reps < 1:
        raise ParameterError("at least one replicate is required")
    if seed < 0:
        raise ParameterError("seed must be non-negative")
    seeds = np.random.SeedSequence(seed).spawn(reps)
    samples = pool.samples
    if workers <= 1:
        means = _replicate_means(samples, k, seeds, replace)
    else:
        chunks = np.array_split(np.arange(reps), workers)
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda c: _replicate_means(samples, k, [seeds[i] for i in c], replace), chunks))
        means = np.concatenate(parts)
    ordered = np.sort(means)
    return BootstrapResult(
        replicate_means=means,
        p5=nearest_rank(ordered, 5),
        p50=nearest_rank(ordered, 50),
        p95=nearest_rank(ordered, 95),
        seed=seed,
        k=k,
        replace=replace,
    )


@dataclass(frozen=True)
class PriceScenario:
    """Prices for one scenario level.

    ``fcr`` is per MW per hour of reservation and keyed by country;
    ``rent`` is the congestion rent per MWh keyed by link id.
    """

    level: str
    regulating: float
    fcr: Mapping[str, float] = field(default_factory=dict)
    rent: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "fcr", dict(self.fcr))
        object.__setattr__(self, "rent", dict(self.rent))

    def check_covers(self, links) -> None:
        for link in links:
            if link.link_id not in self.rent:
                raise ConfigurationError(f"no congestion rent for link {link.link_id} in {self.level} scenario")
            if link.counterpart_country not in self.fcr:
                raise ConfigurationError(
                    f"no FCR price for {link.counterpart_country} (link {link.link_id}) in {self.level} scenario"
                )


def percentile_scenarios(results: Mapping[str, BootstrapResult], countries: Sequence[str] = (),
                         links: Sequence[str] = ()) -> dict[str, PriceScenario]:
    """Build low/median/high scenarios from per-label bootstrap results.

    ``countries`` and ``links`` name the FCR and congestion-rent labels that
    must be present; extra labels of those kinds are carried along too.
    """
    required = [REGULATING] + [fcr_label(c) for c in countries] + [rent_label(l) for l in links]
    missing = [lab for lab in required if lab not in results]
    if missing:
        raise ConfigurationError(f"missing price results for: {', '.join(missing)}")
    scenarios = {}
    for level in LEVELS:
        fcr = {}
        rent = {}
        for label, res in results.items():
            kind, _, key = label.partition(":")
            if kind == "fcr":
                fcr[key] = res.percentile(level)
            elif kind == "congestion_rent":
                rent[key] = res.percentile(level)
        scenarios[level] = PriceScenario(level, results[REGULATING].percentile(level), fcr, rent)
    return scenarios


def fixed_scenarios(regulating: float, fcr: Mapping[str, float], rent: Mapping[str, float]) -> dict[str, PriceScenario]:
    """All three levels at the same observed prices (e.g. a historical replay)."""
    return {level: PriceScenario(level, regulating, fcr, rent) for level in LEVELS}


# Seasonal averages for summer 2018 and the five-summer percentiles 2015-2019.
NORDIC_2018 = {
    REGULATING: 54.06,
    "fcr:DE": 11.18, "fcr:NL": 19.53, "fcr:PL": 5.34,
    "congestion_rent:KO": 1.27, "congestion_rent:BC": 1.78,
    "congestion_rent:NN": 5.01, "congestion_rent:SP": 2.00,
}

NORDIC_FIVE_YEAR = {
    REGULATING: (34.10, 34.60, 35.10),
    "fcr:DE": (9.61, 10.78, 12.13),
    "fcr:NL": (12.15, 13.63, 15.19),
    "fcr:PL": (5.32, 5.34, 5.36),
    "congestion_rent:KO": (5.27, 5.59, 5.93),
    "congestion_rent:BC": (6.60, 6.94, 7.30),
    "congestion_rent:NN": (11.57, 11.97, 12.39),
    "congestion_rent:SP": (10.75, 11.31, 11.91),
}


def scenarios_from_table(table: Mapping[str, float | tuple[float, float, float]]) -> dict[str, PriceScenario]:
    """Scenarios from labelled prices; a scalar applies to every level."""
    scenarios = {}
    for i, level in enumerate(LEVELS):
        vals = {lab: (v[i] if isinstance(v, tuple) else v) for lab, v in table.items()}
        if REGULATING not in vals:
            raise ConfigurationError("price table has no regulating power price")
        fcr = {lab.split(":", 1)[1]: v for lab, v in vals.items() if lab.startswith("fcr:")}
        rent = {lab.split(":", 1)[1]: v for lab, v in vals.items() if lab.startswith("congestion_rent:")}
        scenarios[level] = PriceScenario(level, vals[REGULATING], fcr, rent)
    return scenarios
