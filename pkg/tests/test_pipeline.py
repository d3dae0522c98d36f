import csv
import json
from importlib import resources

import numpy as np
import pytest

from lowinertia.config import load_config
from lowinertia.ingest import read_di_plan, read_epc_plan, read_events
from lowinertia.pipeline import PipelineError, run_pipeline

from helpers import PRICES_2018, ek_scenario, scenario

FIXTURE = resources.files("lowinertia.data").joinpath("nordic2018/scenario.ini")


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_no_violations_short_circuits(tmp_path):
    cfg = load_config(ek_scenario(tmp_path, [200.0] * 48))
    res = run_pipeline(cfg, tmp_path / "out")
    assert not res.violations and res.events == []
    doc = json.loads((tmp_path / "out" / "costs.json").read_text())
    assert doc["violations"] is False
    for level in doc["levels"].values():
        assert level["di_total_eur"] == 0 and level["epc_total_eur"] == 0
        assert level["savings_pct"] is None
    assert "No violations" in (tmp_path / "out" / "summary.txt").read_text()


def test_fixture_totals(tmp_path):
    res = run_pipeline(load_config(FIXTURE), tmp_path)
    doc = json.loads((tmp_path / "costs.json").read_text())
    med = doc["levels"]["median"]
    assert med["di_reduction"]["Total cost"] / 1e6 == pytest.approx(0.988, abs=0.002)
    assert med["hvdc_epc"]["Total cost"] / 1e6 == pytest.approx(0.273, abs=0.003)
    assert [e.hours for e in res.events] == [50, 75, 41]
    assert res.di_plan.active_hours == 166


def test_seed_irrelevant_with_fixed_prices(tmp_path):
    cfg = load_config(FIXTURE)
    a = run_pipeline(cfg, seed=1).report.to_json()
    b = run_pipeline(cfg, seed=99).report.to_json()
    assert a == b


def test_artifacts_are_consistent_and_reingestable(tmp_path):
    cfg = load_config(FIXTURE)
    res = run_pipeline(cfg, tmp_path)
    di_rows = rows(tmp_path / "plan_di.csv")
    epc_rows = rows(tmp_path / "plan_epc.csv")
    med = json.loads((tmp_path / "costs.json").read_text())["levels"]["median"]
    assert sum(float(r["total_mw"]) for r in di_rows) / 1000 == pytest.approx(med["di_reduction"]["Energy (GWh)"])
    assert sum(float(r["total_mw"]) for r in epc_rows) / 1000 == pytest.approx(med["hvdc_epc"]["Energy (GWh)"])
    assert read_events(tmp_path / "events.csv") == res.events
    assert read_di_plan(tmp_path / "plan_di.csv", res.di_plan.events) == res.di_plan
    assert read_epc_plan(tmp_path / "plan_epc.csv", cfg.links) == res.epc_plan
    cost_rows = rows(tmp_path / "costs.csv")
    for level in ("low", "median", "high"):
        for strategy in ("di_reduction", "hvdc_epc"):
            items = [float(r["eur"]) for r in cost_rows
                     if r["level"] == level and r["strategy"] == strategy and r["item"] != "Total cost"]
            total = [float(r["eur"]) for r in cost_rows
                     if r["level"] == level and r["strategy"] == strategy and r["item"] == "Total cost"]
            assert sum(items) == pytest.approx(total[0])


def test_screened_series_end_to_end(tmp_path):
    ek = [200.0] * 10 + [150.0] * 5 + [200.0] * 20 + [120.0] * 3 + [200.0] * 10
    cfg = load_config(ek_scenario(tmp_path, ek))
    res = run_pipeline(cfg, tmp_path / "o", levels=("median",))
    assert [(e.start, e.end) for e in res.events] == [(10, 14), (35, 37)]
    assert [(e.start, e.end, e.peak_required_reduction) for e in res.di_plan.events] == [(10, 37, 300.0)]
    assert res.epc_plan.active_hours == 8
    assert (tmp_path / "o" / "flags.csv").exists()
    assert list(res.report.entries) == ["median"]


def test_regression_mode_with_incident(tmp_path):
    extra = "[incident]\nh_s = 6\ns_mva = 1450\n[screening]\nmode = regression\n"
    cfg = load_config(ek_scenario(tmp_path, [150.0, 143.6, 143.8, 160.0], extra))
    res = run_pipeline(cfg)
    assert [r.violated for r in res.flags.values] == [False, True, False, False]


def test_fleet_and_commitment_inputs(tmp_path):
    (tmp_path / "fleet.csv").write_text(
        "unit_id,area,s_mva,h_s,is_di,category\nO3,SE3,1450,6,1,nuclear\nH1,SE1,30000,,0,hydro\nT1,FI,10000,4,0,\n")
    (tmp_path / "commit.csv").write_text(
        "timestamp,unit_id,online\n0,O3,1\n1,O3,1\n0,H1,1\n1,H1,1\n0,T1,1\n1,T1,0\n")
    body = "[inputs]\nfleet = fleet.csv\ncommitment = commit.csv\n[inertia_defaults]\nhydro = 3.0\n"
    res = run_pipeline(load_config(scenario(tmp_path, body + PRICES_2018)))
    assert [r.e_k for r in res.flags.values] == [138.7, 98.7]
    assert [e.peak_required_reduction for e in res.events] == [500.0]


def test_out_of_range_kinetic_energy_is_stage_tagged(tmp_path):
    cfg = load_config(ek_scenario(tmp_path, [200.0, 60.0]))
    with pytest.raises(PipelineError) as info:
        run_pipeline(cfg)
    assert info.value.stage == "screen"


def test_absent_values_rejected(tmp_path):
    (tmp_path / "ek.csv").write_text("timestamp,ek_gws\n0,150\n1,\n")
    cfg = load_config(scenario(tmp_path, "[inputs]\nkinetic_energy = ek.csv\n" + PRICES_2018))
    with pytest.raises(PipelineError) as info:
        run_pipeline(cfg)
    assert info.value.stage == "screen"


def write_price_file(path, rng, label_rows):
    lines = ["timestamp,zone_or_link,value"]
    for zone, mean in label_rows:
        for t in range(400):
            lines.append(f"{t},{zone},{rng.normal(mean, 2.0)!r}")
    path.write_text("\n".join(lines) + "\n")


def test_bootstrap_prices(tmp_path):
    rng = np.random.default_rng(0)
    write_price_file(tmp_path / "reg.csv", rng, [("SE1", 34.0), ("SE2", 35.0)])
    write_price_file(tmp_path / "fcr.csv", rng, [("DE", 10.0), ("NL", 13.0), ("PL", 5.3)])
    write_price_file(tmp_path / "rent.csv", rng, [("KO", 5.6), ("BC", 6.9), ("NN", 12.0), ("SP", 11.3)])
    prices = ("[prices]\nsource = bootstrap\nregulating_file = reg.csv\n"
              + "".join(f"fcr.{c}_file = fcr.csv\n" for c in ("DE", "NL", "PL"))
              + "".join(f"rent.{l}_file = rent.csv\n" for l in ("KO", "BC", "NN", "SP"))
              + "[bootstrap]\nk = 100\nreps = 300\nseed = 5\n")
    (tmp_path / "ek.csv").write_text("timestamp,ek_gws\n0,150\n1,140\n")
    cfg = load_config(scenario(tmp_path, "[inputs]\nkinetic_energy = ek.csv\n" + prices))
    a = run_pipeline(cfg, tmp_path / "a")
    b = run_pipeline(cfg, tmp_path / "b")
    assert (tmp_path / "a" / "costs.json").read_text() == (tmp_path / "b" / "costs.json").read_text()
    hist = sorted(p.name for p in (tmp_path / "a").glob("histogram_*.csv"))
    assert len(hist) == 8 and "histogram_regulating_power.csv" in hist
    lo, med, hi = (a.scenarios[l].regulating for l in ("low", "median", "high"))
    assert lo <= med <= hi and med == pytest.approx(34.5, abs=0.5)
    c = run_pipeline(cfg, seed=6)
    assert c.scenarios["median"].regulating != a.scenarios["median"].regulating
