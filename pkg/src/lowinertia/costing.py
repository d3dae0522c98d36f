"""Itemised costs of the two remedial actions and their comparison.

Money is accumulated as :class:`fractions.Fraction`. Float inputs are read
through their shortest decimal repr, so a price typed as ``54.06`` is
exactly 5406/100 and totals equal the sum of their items with no rounding.
EPC powers are taken at their exact binary value, the same value the
per-link shares are split from, so energy and shares stay consistent.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from numbers import Rational

from .errors import ConfigurationError
from .planner import DiPlan, EpcPlan
from .pricing import PriceScenario

DOWN_REGULATION = "Down-regulation"
UP_REGULATION = "Up-regulation"
HVDC_CAPACITY = "HVDC capacity"
PRIMARY_RESERVES = "Primary reserves"
TOTAL = "Total cost"


def exact(x) -> Fraction:
    """Exact rational value of a number; floats go through their decimal repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, Decimal):
        return Fraction(x)
    return Fraction(repr(float(x)))


@dataclass(frozen=True)
class CompensationParams:
    """Payments to the curtailed producer (EUR)."""

    opportunity_rate: float = 4.64
    fixed_per_event: float = 4740.0
    sek_per_eur: float = 10.55

    def __post_init__(self):
        if min(self.opportunity_rate, self.fixed_per_event, self.sek_per_eur) < 0:
            raise ValueError("compensation parameters must be non-negative")

    @classmethod
    def from_sek(cls, opportunity_rate_sek: float, fixed_per_event_sek: float,
                 sek_per_eur: float = 10.55) -> "CompensationParams":
        return cls(opportunity_rate_sek / sek_per_eur, fixed_per_event_sek / sek_per_eur, sek_per_eur)


@dataclass(frozen=True)
class CostBreakdown:
    strategy: str
    items: tuple[tuple[str, Fraction], ...]
    energy_gwh: Fraction

    def __post_init__(self):
        labels = [lab for lab, _ in self.items]
        if len(set(labels)) != len(labels):
            raise ValueError("cost item labels must be unique")

    @property
    def total(self) -> Fraction:
        return sum((v for _, v in self.items), Fraction(0))

    def item(self, label: str) -> Fraction:
        for lab, v in self.items:
            if lab == label:
                return v
        raise KeyError(label)

    def as_dict(self) -> dict[str, float]:
        """Table-style view in EUR, with the total and energy appended."""
        out = {lab: float(v) for lab, v in self.items}
        out[TOTAL] = float(self.total)
        out["Energy (GWh)"] = float(self.energy_gwh)
        return out

    def __add__(self, other: "CostBreakdown") -> "CostBreakdown":
        if self.strategy != other.strategy:
            raise ValueError("cannot add breakdowns of different strategies")
        mine = dict(self.items)
        theirs = dict(other.items)
        labels = list(mine) + [lab for lab in theirs if lab not in mine]
        items = tuple((lab, mine.get(lab, Fraction(0)) + theirs.get(lab, Fraction(0))) for lab in labels)
        return CostBreakdown(self.strategy, items, self.energy_gwh + other.energy_gwh)


def cost_di(plan: DiPlan, scenario: PriceScenario, comp: CompensationParams = CompensationParams()) -> CostBreakdown:
    """Cost of reducing the dimensioning incident.

    Down-regulation pays the producer's opportunity cost per MWh not produced
    plus a fixed sum per limitation event; up-regulation buys the missing
    energy at the regulating-power price.
    """
    energy_mwh = sum((exact(r) for r in plan.reduction.values), Fraction(0))
    n_events = sum(1 for ev in plan.events if ev.peak_required_reduction > 0)
    down = energy_mwh * exact(comp.opportunity_rate) + exact(comp.fixed_per_event) * n_events
    up = energy_mwh * exact(scenario.regulating)
    return CostBreakdown("di_reduction", ((DOWN_REGULATION, down), (UP_REGULATION, up)), energy_mwh / 1000)


def cost_epc(plan: EpcPlan, scenario: PriceScenario) -> CostBreakdown:
    """Cost of HVDC emergency power control.

    Every link's share is reserved at that link's congestion rent, and the
    same MW are bought as FCR in the counterpart country at its per-MW,
    per-hour reservation price.
    """
    scenario.check_covers(plan.links)
    rent_sum = sum((exact(scenario.rent[l.link_id]) for l in plan.links), Fraction(0))
    fcr_sum = sum((exact(scenario.fcr[l.counterpart_country]) for l in plan.links), Fraction(0))
    # Shares are equal, so the per-link sum factors out of the hourly sum.
    share_mwh = sum((share for _, share in plan.shares()), Fraction(0))
    total_mwh = sum((Fraction(p) for p in plan.total.values), Fraction(0))
    capacity = share_mwh * rent_sum
    reserves = share_mwh * fcr_sum
    return CostBreakdown("hvdc_epc", ((HVDC_CAPACITY, capacity), (PRIMARY_RESERVES, reserves)), total_mwh / 1000)


@dataclass(frozen=True)
class ComparisonEntry:
    level: str
    di_total: Fraction
    epc_total: Fraction

    @property
    def savings_eur(self) -> Fraction:
        return self.di_total - self.epc_total

    @property
    def savings_pct(self) -> Fraction | None:
        """Savings as a percentage of the DI cost; ``None`` when that cost is zero."""
        if self.di_total == 0:
            return None
        return 100 * self.savings_eur / self.di_total

    def as_dict(self) -> dict:
        pct = self.savings_pct
        return {
            "di_total_eur": float(self.di_total),
            "epc_total_eur": float(self.epc_total),
            "savings_eur": float(self.savings_eur),
            "savings_pct": None if pct is None else float(pct),
        }


def compare_costs(di: CostBreakdown, epc: CostBreakdown, level: str = "median") -> ComparisonEntry:
    if di.strategy != "di_reduction" or epc.strategy != "hvdc_epc":
        raise ConfigurationError("compare_costs expects a DI breakdown and an EPC breakdown")
    return ComparisonEntry(level, di.total, epc.total)


@dataclass
class ComparisonReport:
    """Costs and savings for each evaluated scenario level."""

    scenario: str
    di: dict[str, CostBreakdown]
    epc: dict[str, CostBreakdown]
    entries: dict[str, ComparisonEntry]
    violations: bool = True

    def to_json(self) -> str:
        levels = {}
        for level, entry in self.entries.items():
            levels[level] = {
                "di_reduction": self.di[level].as_dict(),
                "hvdc_epc": self.epc[level].as_dict(),
                **entry.as_dict(),
            }
        doc = {"scenario": self.scenario, "currency": "EUR", "violations": self.violations, "levels": levels}
        return json.dumps(doc, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "strategy", "item", "eur"])
        for level in self.entries:
            for bd in (self.di[level], self.epc[level]):
                for lab, v in bd.items:
                    w.writerow([level, bd.strategy, lab, repr(float(v))])
                w.writerow([level, bd.strategy, TOTAL, repr(float(bd.total))])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"Scenario: {self.scenario}"]
        if not self.violations:
            lines.append("No violations: N-1 criterion satisfied in every hour, no remedial action needed.")
        for level, e in self.entries.items():
            di, epc = self.di[level], self.epc[level]
            pct = e.savings_pct
            pct_txt = "n/a" if pct is None else f"{float(pct):.1f} %"
            lines += [
                f"[{level}]",
                f"  DI reduction  : {float(di.total) / 1e6:8.3f} MEUR  "
                f"(down {float(di.item(DOWN_REGULATION)) / 1e6:.3f}, up {float(di.item(UP_REGULATION)) / 1e6:.3f}; "
                f"{float(di.energy_gwh):.1f} GWh)",
                f"  HVDC EPC      : {float(epc.total) / 1e6:8.3f} MEUR  "
                f"(capacity {float(epc.item(HVDC_CAPACITY)) / 1e6:.3f}, reserves {float(epc.item(PRIMARY_RESERVES)) / 1e6:.3f}; "
                f"{float(epc.energy_gwh):.1f} GWh)",
                f"  Savings       : {float(e.savings_eur) / 1e6:8.3f} MEUR ({pct_txt})",
            ]
        return "\n".join(lines) + "\n"
