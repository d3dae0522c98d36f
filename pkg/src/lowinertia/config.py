"""Scenario configuration: an INI file with one section per concern.

Paths are resolved relative to the configuration file. See
``lowinertia/data/nordic2018/scenario.ini`` for a complete example.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from .core import parse_utc
from .costing import CompensationParams
from .errors import ConfigurationError
from .frequency import (
    EpcConfig,
    FrequencyModelConfig,
    GovernorConfig,
    RegressionCoefficients,
    SecurityLimits,
    UNDER_FREQUENCY,
)
from .ingest import SeasonWindow
from .planner import NORDIC_LINKS, SCREEN_MODES, LinkRecord, PlannerRules
from .pricing import REGULATING, fcr_label, rent_label


@dataclass(frozen=True)
class BootstrapParams:
    k: int = 2232
    reps: int = 10_000
    seed: int = 0
    replace: bool = False
    season: SeasonWindow = field(default_factory=SeasonWindow)
    bins: int = 50
    workers: int = 1


@dataclass(frozen=True)
class IncidentConfig:
    delta_p_mw: float = 1450.0
    unit_id: str | None = None
    h_s: float | None = None
    s_mva: float | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    origin: datetime | None = None
    horizon_hours: int | None = None
    incident: IncidentConfig = field(default_factory=IncidentConfig)
    limits: SecurityLimits = field(default_factory=SecurityLimits)
    regression: RegressionCoefficients = UNDER_FREQUENCY
    over_regression: RegressionCoefficients | None = None
    mode: str = "curve"
    rules: PlannerRules = field(default_factory=PlannerRules)
    links: tuple[LinkRecord, ...] = NORDIC_LINKS
    compensation: CompensationParams = field(default_factory=CompensationParams)
    bootstrap: BootstrapParams = field(default_factory=BootstrapParams)
    price_source: str = "fixed"
    fixed_prices: dict = field(default_factory=dict)
    price_files: dict = field(default_factory=dict)
    kinetic_energy: Path | None = None
    fleet: Path | None = None
    commitment: Path | None = None
    events: Path | None = None
    epc_energy_gwh: float | None = None
    inertia_defaults: dict = field(default_factory=dict)
    frequency_model: FrequencyModelConfig = field(default_factory=FrequencyModelConfig)
    sim_horizon_s: float = 30.0
    base_dir: Path = Path(".")

    def required_price_labels(self) -> list[str]:
        countries = sorted({link.counterpart_country for link in self.links})
        return [REGULATING] + [fcr_label(c) for c in countries] + [rent_label(l.link_id) for l in self.links]


def _path(base: Path, value: str | None) -> Path | None:
    if not value:
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def _float(sec, key, default=None):
    if sec is None or key not in sec or sec[key].strip() == "":
        return default
    try:
        return float(sec[key])
    except ValueError:
        raise ConfigurationError(f"[{sec.name}] {key} = {sec[key]!r} is not a number") from None


def _int(sec, key, default=None):
    v = _float(sec, key, None)
    if v is None:
        return default
    if v != int(v):
        raise ConfigurationError(f"[{sec.name}] {key} must be an integer")
    return int(v)


def load_config(path) -> ScenarioConfig:
    """Parse and validate a scenario file.

    Raises
    ------
    ConfigurationError
        On unknown values, dangling references or missing files.
    """
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with path.open(encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read configuration {path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed configuration {path}: {exc}") from exc
    base = path.resolve().parent
    get = parser.get

    def section(name):
        return parser[name] if parser.has_section(name) else None

    sc = section("scenario")
    name = sc.get("name", path.stem) if sc else path.stem
    origin = parse_utc(sc["origin"]) if sc and sc.get("origin") else None
    horizon = _int(sc, "horizon_hours")

    inc = section("incident")
    incident = IncidentConfig(
        delta_p_mw=_float(inc, "delta_p_mw", 1450.0),
        unit_id=(inc.get("unit_id") or None) if inc else None,
        h_s=_float(inc, "h_s"),
        s_mva=_float(inc, "s_mva"),
    )

    lim = section("limits")
    limits = SecurityLimits(
        nominal_f0=_float(lim, "nominal_f0", 50.0),
        fcr_n_band=_float(lim, "fcr_n_band", 0.1),
        max_ifd=_float(lim, "max_ifd", 1.0),
        safety_margin=_float(lim, "safety_margin", 0.05),
        load_shed_floor=_float(lim, "load_shed_floor", 48.8),
    )

    reg = section("regression")
    regression = RegressionCoefficients(
        _float(reg, "alpha_under", UNDER_FREQUENCY.alpha), _float(reg, "beta_under", UNDER_FREQUENCY.beta), "under"
    )
    a_over, b_over = _float(reg, "alpha_over"), _float(reg, "beta_over")
    if (a_over is None) != (b_over is None):
        raise ConfigurationError("[regression] alpha_over and beta_over must be given together")
    over = RegressionCoefficients(a_over, b_over, "over") if a_over is not None else None

    scr = section("screening")
    mode = scr.get("mode", "curve") if scr else "curve"
    if mode not in SCREEN_MODES:
        raise ConfigurationError(f"[screening] mode must be one of {SCREEN_MODES}, got {mode!r}")

    pl = section("planner")
    rules = PlannerRules(_int(pl, "merge_window_h", 36), _int(pl, "lead_h", 0), _int(pl, "lag_h", 0))

    links = []
    for sec_name in parser.sections():
        if sec_name.startswith("link:"):
            sec = parser[sec_name]
            country = sec.get("country")
            if not country:
                raise ConfigurationError(f"[{sec_name}] needs a country")
            links.append(LinkRecord(sec_name.split(":", 1)[1], country, _float(sec, "capacity_mw", float("inf"))))
    links = tuple(links) or NORDIC_LINKS

    comp = section("compensation")
    if comp is not None and comp.get("currency", "EUR").upper() == "SEK":
        rate = _float(comp, "sek_per_eur", 10.55)
        compensation = CompensationParams.from_sek(
            _float(comp, "opportunity_rate", 49.0), _float(comp, "fixed_per_event", 50_000.0), rate
        )
    else:
        compensation = CompensationParams(
            _float(comp, "opportunity_rate", 4.64), _float(comp, "fixed_per_event", 4740.0),
            _float(comp, "sek_per_eur", 10.55),
        )

    bs = section("bootstrap")
    season = SeasonWindow()
    if bs is not None and bs.get("season_start"):
        try:
            month, day = (int(x) for x in bs["season_start"].split("-"))
        except ValueError:
            raise ConfigurationError("[bootstrap] season_start must look like MM-DD") from None
        season = SeasonWindow(month, day, _int(bs, "season_days", 93))
    elif bs is not None:
        season = SeasonWindow(days=_int(bs, "season_days", 93))
    bootstrap = BootstrapParams(
        k=_int(bs, "k", 2232), reps=_int(bs, "reps", 10_000), seed=_int(bs, "seed", 0),
        replace=bs.getboolean("replace", False) if bs else False, season=season,
        bins=_int(bs, "bins", 50), workers=_int(bs, "workers", 1),
    )

    pr = section("prices")
    source = pr.get("source", "fixed") if pr else "fixed"
    if source not in ("fixed", "bootstrap"):
        raise ConfigurationError(f"[prices] source must be 'fixed' or 'bootstrap', got {source!r}")
    fixed, files = {}, {}
    if pr is not None:
        for key, val in pr.items():
            if key == "source":
                continue
            label, is_file = _price_key(key)
            if is_file:
                files[label] = _path(base, val)
            else:
                fixed[label] = _float(pr, key)

    inp = section("inputs")
    inertia_defaults = {}
    if parser.has_section("inertia_defaults"):
        inertia_defaults = {k: _float(parser["inertia_defaults"], k) for k in parser["inertia_defaults"]}

    fm = section("frequency_model")
    defaults = FrequencyModelConfig()
    g = defaults.governor
    e = defaults.epc
    tw_text = fm.get("water_time_constant", "") if fm else ""
    governor = GovernorConfig(
        gain=_float(fm, "gain", g.gain),
        time_constant=_float(fm, "time_constant", g.time_constant),
        water_time_constant=(None if tw_text.strip().lower() == "none" else _float(fm, "water_time_constant", g.water_time_constant)),
        max_power_mw=_float(fm, "max_power_mw", g.max_power_mw),
    )
    epc = EpcConfig(
        trigger_frequency=_float(fm, "epc_trigger_hz", e.trigger_frequency),
        activation_delay=_float(fm, "epc_delay_s", e.activation_delay),
        injected_power=_float(fm, "epc_power_mw", e.injected_power),
        links=len(links),
    )
    try:
        freq_model = FrequencyModelConfig(
            system_base_mva=_float(fm, "system_base_mva", defaults.system_base_mva),
            regulating_strength=_float(fm, "regulating_strength", defaults.regulating_strength),
            governor=governor, epc=epc, limits=limits, step_s=_float(fm, "step_s", defaults.step_s),
        )
    except ValueError as exc:
        raise ConfigurationError(f"[frequency_model] {exc}") from None

    cfg = ScenarioConfig(
        name=name, origin=origin, horizon_hours=horizon, incident=incident, limits=limits,
        regression=regression, over_regression=over, mode=mode, rules=rules, links=links,
        compensation=compensation, bootstrap=bootstrap, price_source=source,
        fixed_prices=fixed, price_files=files,
        kinetic_energy=_path(base, inp.get("kinetic_energy")) if inp else None,
        fleet=_path(base, inp.get("fleet")) if inp else None,
        commitment=_path(base, inp.get("commitment")) if inp else None,
        events=_path(base, inp.get("events")) if inp else None,
        epc_energy_gwh=_float(inp, "epc_energy_gwh"),
        inertia_defaults=inertia_defaults, frequency_model=freq_model,
        sim_horizon_s=_float(fm, "horizon_s", 30.0), base_dir=base,
    )
    validate_config(cfg)
    return cfg


def _price_key(key: str) -> tuple[str, bool]:
    """Map ``regulating``, ``fcr.DE``, ``rent.KO`` (optionally ``_file``) to pool labels."""
    is_file = key.endswith("_file")
    stem = key[: -len("_file")] if is_file else key
    if stem == "regulating":
        return REGULATING, is_file
    kind, _, tag = stem.partition(".")
    if kind == "fcr" and tag:
        return fcr_label(tag), is_file
    if kind == "rent" and tag:
        return rent_label(tag), is_file
    raise ConfigurationError(f"[prices] unknown key {key!r}")


def validate_config(cfg: ScenarioConfig) -> None:
    for label in ("kinetic_energy", "fleet", "commitment", "events"):
        p = getattr(cfg, label)
        if p is not None and not p.exists():
            raise ConfigurationError(f"[inputs] {label} file does not exist: {p}")
    if cfg.commitment is not None and cfg.fleet is None:
        raise ConfigurationError("[inputs] a commitment file needs a fleet file")
    if cfg.kinetic_energy is None and cfg.commitment is None and cfg.events is None:
        raise ConfigurationError("[inputs] give kinetic_energy, fleet+commitment, or events")
    if cfg.kinetic_energy is not None and cfg.commitment is not None:
        raise ConfigurationError("[inputs] give either kinetic_energy or fleet+commitment, not both")
    if cfg.events is not None and (cfg.kinetic_energy is not None or cfg.commitment is not None):
        raise ConfigurationError("[inputs] an events file replays a plan and cannot be combined with a series")
    if cfg.events is not None:
        if cfg.horizon_hours is None:
            raise ConfigurationError("[scenario] horizon_hours is required when replaying events without a series")
        if cfg.epc_energy_gwh is None:
            raise ConfigurationError("[inputs] epc_energy_gwh is required when replaying events without a series")
    if (cfg.incident.h_s is None) != (cfg.incident.s_mva is None):
        raise ConfigurationError("[incident] h_s and s_mva must be given together")
    needed = cfg.required_price_labels()
    if cfg.price_source == "fixed":
        missing = [lab for lab in needed if lab not in cfg.fixed_prices]
    else:
        missing = [lab for lab in needed if lab not in cfg.price_files]
        for lab, p in cfg.price_files.items():
            if not p.exists():
                raise ConfigurationError(f"[prices] file for {lab} does not exist: {p}")
    if missing:
        raise ConfigurationError(
            f"[prices] no {cfg.price_source} price for: {', '.join(missing)} "
            "(every link needs a rent and every counterpart country an FCR price)"
        )
