"""End-to-end comparison of the two remedial actions for one scenario.

screen -> detect events -> plan DI reduction and HVDC EPC -> price
scenarios -> cost both plans -> compare, for every requested level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ScenarioConfig
from .core import HourlySeries
from .costing import ComparisonReport, compare_costs, cost_di, cost_epc
from .errors import ConfigurationError, LowInertiaError
from .inertia import (
    UnitRecord,
    dimensioning_unit,
    fill_inertia_constants,
    kinetic_energy_series,
    validate_fleet,
)
from .ingest import ingest_commitment, ingest_fleet, ingest_kinetic_energy, ingest_prices, read_events
from .planner import (
    DiPlan,
    EpcPlan,
    Event,
    detect_events,
    di_plan_to_csv,
    epc_plan_to_csv,
    events_to_csv,
    flags_to_csv,
    plan_di,
    plan_epc,
    screen,
)
from .pricing import (
    LEVELS,
    BootstrapResult,
    PriceScenario,
    bootstrap_mean_distribution,
    percentile_scenarios,
    scenarios_from_table,
)


class PipelineError(LowInertiaError):
    """A stage failure; ``cause`` keeps the original error."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


class _Stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        wrap = (LowInertiaError, ValueError, OSError, ArithmeticError)
        if exc is not None and not isinstance(exc, PipelineError) and isinstance(exc, wrap):
            raise PipelineError(self.name, exc) from exc
        return False


@dataclass
class PipelineResult:
    report: ComparisonReport
    events: list[Event]
    di_plan: DiPlan
    epc_plan: EpcPlan
    flags: HourlySeries | None = None
    scenarios: dict[str, PriceScenario] = field(default_factory=dict)
    bootstrap: dict[str, BootstrapResult] = field(default_factory=dict)
    files: list[Path] = field(default_factory=list)

    @property
    def violations(self) -> bool:
        return self.report.violations


def load_fleet(cfg: ScenarioConfig) -> list[UnitRecord] | None:
    if cfg.fleet is None:
        return None
    fleet = ingest_fleet(cfg.fleet)
    if any(u.h_s is None for u in fleet):
        fleet = fill_inertia_constants(fleet, cfg.inertia_defaults)
    validate_fleet(fleet)
    return fleet


def load_kinetic_energy(cfg: ScenarioConfig, fleet: Sequence[UnitRecord] | None = None) -> HourlySeries | None:
    """Pre-fault kinetic energy from a direct series or from fleet and commitment."""
    if cfg.kinetic_energy is not None:
        return ingest_kinetic_energy(cfg.kinetic_energy, cfg.origin)
    if cfg.commitment is not None:
        fleet = fleet if fleet is not None else load_fleet(cfg)
        return kinetic_energy_series(fleet, ingest_commitment(cfg.commitment, fleet, cfg.origin))
    return None


def incident_unit(cfg: ScenarioConfig, fleet: Sequence[UnitRecord] | None) -> UnitRecord | None:
    inc = cfg.incident
    if inc.h_s is not None:
        return UnitRecord(inc.unit_id or "DI", inc.s_mva, inc.h_s, True)
    if fleet is None:
        return None
    if inc.unit_id:
        for u in fleet:
            if u.unit_id == inc.unit_id:
                return u
        raise ConfigurationError(f"[incident] unit {inc.unit_id!r} is not in the fleet")
    return dimensioning_unit(fleet)


def run_screen(cfg: ScenarioConfig, mode: str | None = None) -> tuple[HourlySeries, HourlySeries]:
    """Kinetic-energy series and per-hour violation flags."""
    with _Stage("ingest"):
        fleet = load_fleet(cfg)
        e_k = load_kinetic_energy(cfg, fleet)
        if e_k is None:
            raise ConfigurationError("screening needs a kinetic-energy series or fleet+commitment")
        di_unit = incident_unit(cfg, fleet)
    with _Stage("screen"):
        flags = screen(e_k.require_complete(), cfg.incident.delta_p_mw, cfg.limits, mode or cfg.mode,
                       di_unit=di_unit, coeffs=cfg.regression)
    return e_k.to_hourly(), flags


def build_plans(cfg: ScenarioConfig, mode: str | None = None):
    """``(events, di_plan, epc_plan, flags)``; ``flags`` is ``None`` for a replayed event file."""
    if cfg.events is not None:
        with _Stage("ingest"):
            events = read_events(cfg.events, cfg.origin)
            horizon = HourlySeries.constant(0.0, cfg.horizon_hours, 0, cfg.origin)
            for ev in events:
                if not (horizon.covers(ev.start) and horizon.covers(ev.end)):
                    raise ConfigurationError(f"event {ev.start}-{ev.end} lies outside the horizon")
        with _Stage("plan"):
            di = plan_di(events, horizon, cfg.rules)
            hours = [t for ev in events for t in range(ev.start, ev.end + 1)]
            if hours:
                epc = EpcPlan.uniform(hours, cfg.epc_energy_gwh * 1000.0, horizon, cfg.links)
            else:
                epc = EpcPlan(horizon, cfg.links)
        return events, di, epc, None
    e_k, flags = run_screen(cfg, mode)
    with _Stage("plan"):
        events = detect_events(flags)
        di = plan_di(events, e_k, cfg.rules)
        epc = plan_epc(flags, e_k, cfg.links)
    return events, di, epc, flags


def _label_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def build_scenarios(cfg: ScenarioConfig, seed: int | None = None):
    """Price scenarios per level, plus bootstrap results when resampling."""
    if cfg.price_source == "fixed":
        return scenarios_from_table(cfg.fixed_prices), {}
    seed = cfg.bootstrap.seed if seed is None else seed
    bs = cfg.bootstrap
    results = {}
    for i, label in enumerate(cfg.required_price_labels()):
        with _Stage("ingest"):
            pool = ingest_prices(cfg.price_files[label], label, bs.season)
        with _Stage("pricing"):
            results[label] = bootstrap_mean_distribution(
                pool, bs.k, bs.reps,
                _label_seed(seed, i), replace=bs.replace, workers=bs.workers,
            )
    countries = sorted({l.counterpart_country for l in cfg.links})
    return percentile_scenarios(results, countries, [l.link_id for l in cfg.links]), results


def _zero_scenarios(cfg: ScenarioConfig) -> dict[str, PriceScenario]:
    fcr = {l.counterpart_country: 0.0 for l in cfg.links}
    rent = {l.link_id: 0.0 for l in cfg.links}
    return {level: PriceScenario(level, 0.0, fcr, rent) for level in LEVELS}


def _safe(label: str) -> str:
    return label.replace(":", "_")


def run_pipeline(cfg: ScenarioConfig, out_dir=None, mode: str | None = None,
                 levels: Sequence[str] = LEVELS, seed: int | None = None) -> PipelineResult:
    """Run every stage and, when ``out_dir`` is given, write the artifacts.

    Without any violated hour pricing is skipped and every cost is zero.

    Raises
    ------
    PipelineError
        Tagged with the failing stage.
    """
    for level in levels:
        if level not in LEVELS:
            raise PipelineError("config", ConfigurationError(f"unknown scenario level {level!r}"))
    events, di, epc, flags = build_plans(cfg, mode)
    violations = bool(events)
    if violations:
        scenarios, results = build_scenarios(cfg, seed)
    else:
        scenarios, results = _zero_scenarios(cfg), {}

    with _Stage("costing"):
        di_costs, epc_costs, entries = {}, {}, {}
        for level in levels:
            di_costs[level] = cost_di(di, scenarios[level], cfg.compensation)
            epc_costs[level] = cost_epc(epc, scenarios[level])
            entries[level] = compare_costs(di_costs[level], epc_costs[level], level)
    report = ComparisonReport(cfg.name, di_costs, epc_costs, entries, violations)
    result = PipelineResult(report, events, di, epc, flags, scenarios, results)
    if out_dir is not None:
        with _Stage("output"):
            result.files = write_artifacts(result, Path(out_dir), cfg)
    return result


def write_artifacts(result: PipelineResult, out: Path, cfg: ScenarioConfig) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    texts = {
        "events.csv": events_to_csv(result.events),
        "plan_di.csv": di_plan_to_csv(result.di_plan),
        "plan_epc.csv": epc_plan_to_csv(result.epc_plan),
        "costs.json": result.report.to_json() + "\n",
        "costs.csv": result.report.to_csv(),
        "summary.txt": result.report.summary(),
    }
    if result.flags is not None:
        texts["flags.csv"] = flags_to_csv(result.flags)
    for label, res in result.bootstrap.items():
        texts[f"histogram_{_safe(label)}.csv"] = res.histogram_csv(cfg.bootstrap.bins)
    files = []
    for name, text in texts.items():
        p = out / name
        p.write_text(text, encoding="utf-8")
        files.append(p)
    return files
