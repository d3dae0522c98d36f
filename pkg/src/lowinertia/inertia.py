"""System kinetic energy from unit commitment, and its post-contingency value."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .core import EnergyGWs, HourlySeries
from .errors import ConfigurationError, InconsistencyError, RangeError

#: MW*s per GW*s
MWS_PER_GWS = 1000.0


@dataclass(frozen=True)
class UnitRecord:
    """A synchronous generating unit.

    ``h_s`` may be ``None`` when the inertia constant is unknown; call
    :func:`fill_inertia_constants` with per-category averages before use.
    ``module`` groups units that share one production schedule and
    ``p_max_mw`` is the output a unit can carry during greedy commitment
    (defaults to the apparent-power rating).
    """

    unit_id: str
    s_mva: float
    h_s: float | None
    is_dimensioning_incident: bool = False
    area: str = ""
    category: str = ""
    module: str = ""
    p_max_mw: float | None = None

    def __post_init__(self):
        if not self.s_mva > 0:
            raise ValueError(f"unit {self.unit_id}: rated power must be positive, got {self.s_mva}")
        if self.h_s is not None and not self.h_s > 0:
            raise ValueError(f"unit {self.unit_id}: inertia constant must be positive, got {self.h_s}")

    @property
    def module_id(self) -> str:
        return self.module or self.unit_id

    @property
    def capacity_mw(self) -> float:
        return self.s_mva if self.p_max_mw is None else self.p_max_mw

    @property
    def kinetic_energy(self) -> EnergyGWs:
        """Stored energy at rated speed, GWs."""
        if self.h_s is None:
            raise ConfigurationError(f"unit {self.unit_id} has no inertia constant")
        return self.h_s * self.s_mva / MWS_PER_GWS


def fill_inertia_constants(fleet: Sequence[UnitRecord], defaults: Mapping[str, float]) -> list[UnitRecord]:
    """Replace unknown inertia constants by the average of the unit's category."""
    out = []
    for u in fleet:
        if u.h_s is None:
            key = u.category or u.area
            if key not in defaults:
                raise ConfigurationError(
                    f"unit {u.unit_id}: no inertia constant and no default for category {key!r}"
                )
            u = UnitRecord(
                u.unit_id, u.s_mva, float(defaults[key]), u.is_dimensioning_incident,
                u.area, u.category, u.module, u.p_max_mw,
            )
        out.append(u)
    return out


def validate_fleet(fleet: Sequence[UnitRecord]) -> None:
    ids = [u.unit_id for u in fleet]
    if len(set(ids)) != len(ids):
        raise ConfigurationError("duplicate unit ids in fleet")
    if sum(u.is_dimensioning_incident for u in fleet) > 1:
        raise ConfigurationError("at most one unit may be flagged as the dimensioning incident")


def dimensioning_unit(fleet: Sequence[UnitRecord]) -> UnitRecord | None:
    for u in fleet:
        if u.is_dimensioning_incident:
            return u
    return None


class CommitmentSeries(dict):
    """Mapping ``unit_id -> HourlySeries[bool]`` of online status.

    All member series must share the same hourly range.
    """

    def __init__(self, data: Mapping[str, HourlySeries] | None = None, fleet: Sequence[UnitRecord] | None = None):
        super().__init__(data or {})
        ranges = {(s.start, len(s), s.step) for s in self.values()}
        if len(ranges) > 1:
            raise ConfigurationError("commitment series do not share a common hourly range")
        if fleet is not None:
            known = {u.unit_id for u in fleet}
            unknown = sorted(set(self) - known)
            if unknown:
                raise ConfigurationError(f"commitment references unknown units: {', '.join(unknown)}")

    @property
    def hours(self) -> range:
        if not self:
            return range(0)
        s = next(iter(self.values()))
        return s.hours

    def online(self, unit_id: str, t: int) -> bool:
        series = self.get(unit_id)
        if series is None:
            return False
        return bool(series.at(t))


def _scaled_products(fleet: Sequence[UnitRecord]) -> tuple[dict[str, int], int]:
    """Exact H*S of every unit as integers over one common denominator.

    A double times a double is a dyadic rational, so scaling all products to
    the largest power-of-two denominator makes each an exact integer.
    """
    exact = {u.unit_id: Fraction(u.h_s) * Fraction(u.s_mva) for u in fleet}
    denom = max((f.denominator for f in exact.values()), default=1)
    return {uid: f.numerator * (denom // f.denominator) for uid, f in exact.items()}, denom


def _to_gws(scaled_sum: int, denom: int) -> EnergyGWs:
    # int / int is correctly rounded, so the result is the exact sum rounded once.
    return scaled_sum / (denom * int(MWS_PER_GWS))


def kinetic_energy_at(fleet: Sequence[UnitRecord], commitment: CommitmentSeries, t: int) -> EnergyGWs:
    """Kinetic energy of all online units at hour ``t``, GWs.

    The sum of the ``H*S`` products is formed exactly and rounded once, so
    the result does not depend on fleet order.
    """
    if commitment and t not in commitment.hours:
        raise RangeError(f"hour {t} is outside the commitment range")
    scaled, denom = _scaled_products(fleet)
    return _to_gws(sum(scaled[u.unit_id] for u in fleet if commitment.online(u.unit_id, t)), denom)


def kinetic_energy_series(fleet: Sequence[UnitRecord], commitment: CommitmentSeries) -> HourlySeries:
    hours = commitment.hours
    if len(hours) == 0:
        raise RangeError("commitment is empty; the series range is undefined")
    first = next(iter(commitment.values()))
    scaled, denom = _scaled_products(fleet)
    members = [(scaled[uid], s.values) for uid, s in commitment.items() if uid in scaled]
    values = tuple(
        _to_gws(sum(x for x, on in members if on[i]), denom) for i in range(len(hours))
    )
    return HourlySeries(hours.start, values, hours.step, first.start_time)


def n1_kinetic_energy(e_k: EnergyGWs, di_unit: UnitRecord, di_online: bool = True) -> EnergyGWs:
    """Kinetic energy left after the dimensioning incident trips.

    Raises
    ------
    InconsistencyError
        If the incident unit stores more energy than the whole system.
    """
    if not di_online:
        return e_k
    remaining = e_k - di_unit.kinetic_energy
    if remaining < 0:
        raise InconsistencyError(
            f"system kinetic energy {e_k} GWs is smaller than the incident unit's "
            f"{di_unit.kinetic_energy} GWs"
        )
    return remaining
