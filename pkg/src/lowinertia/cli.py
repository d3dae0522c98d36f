"""Command-line entry point: ``lowinertia <command> --config scenario.ini``.

Exit codes: 0 no violations, 1 violations found and processed, 2 input or
configuration error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from .config import load_config
from .errors import (
    CapacityExceededError,
    DomainError,
    InconsistencyError,
    LowInertiaError,
    NumericalInstabilityError,
    SingularFitError,
)
from .frequency import simulate_response
from .pipeline import PipelineError, _Stage, build_plans, build_scenarios, run_pipeline, run_screen
from .planner import di_plan_to_csv, epc_plan_to_csv, events_to_csv, flags_to_csv
from .pricing import LEVELS

EXIT_OK, EXIT_VIOLATIONS, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3

_NUMERICAL_ERRORS = (DomainError, NumericalInstabilityError, SingularFitError, InconsistencyError,
                     CapacityExceededError, ArithmeticError)


def exit_code_for(exc: BaseException) -> int:
    """3 for numerical failures, 2 for everything the user can fix in the inputs."""
    if isinstance(exc, PipelineError):
        exc = exc.cause
    return EXIT_NUMERICAL if isinstance(exc, _NUMERICAL_ERRORS) else EXIT_INPUT


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="scenario INI file")
    common.add_argument("--mode", choices=("regression", "curve"), help="override [screening] mode")
    common.add_argument("--level", choices=LEVELS + ("all",), default="all", help="price scenario level")
    common.add_argument("--seed", type=_u64, help="override [bootstrap] seed")
    common.add_argument("--out", type=Path, help="directory for output files")

    parser = argparse.ArgumentParser(prog="lowinertia", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("screen", parents=[common], help="flag N-1 violations hour by hour")
    sub.add_parser("plan", parents=[common], help="detect events and plan both remedial actions")
    sub.add_parser("price", parents=[common], help="build low/median/high price scenarios")
    sub.add_parser("cost", parents=[common], help="cost both plans per scenario level")
    sub.add_parser("compare", parents=[common], help="print the cost comparison")
    sub.add_parser("run", parents=[common], help="full pipeline with every artifact")
    sim = sub.add_parser("simulate", parents=[common], help="frequency response after the incident")
    sim.add_argument("--ek", type=float, required=True, help="kinetic energy after the incident, GWs")
    sim.add_argument("--delta-p", type=float, help="lost power, MW (default: [incident] delta_p_mw)")
    sim.add_argument("--epc-power", type=float, help="total EPC injection, MW")
    return parser


def _write(out: Path | None, name: str, text: str) -> None:
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8")


def _levels(args) -> tuple[str, ...]:
    return LEVELS if args.level == "all" else (args.level,)


def _cmd_screen(cfg, args) -> int:
    _, flags = run_screen(cfg, args.mode)
    n = sum(rec.violated for rec in flags.values)
    _write(args.out, "flags.csv", flags_to_csv(flags))
    print(f"{n} of {len(flags)} hours violate the N-1 frequency criterion")
    return EXIT_VIOLATIONS if n else EXIT_OK


def _cmd_plan(cfg, args) -> int:
    events, di, epc, flags = build_plans(cfg, args.mode)
    _write(args.out, "events.csv", events_to_csv(events))
    _write(args.out, "plan_di.csv", di_plan_to_csv(di))
    _write(args.out, "plan_epc.csv", epc_plan_to_csv(epc))
    if flags is not None:
        _write(args.out, "flags.csv", flags_to_csv(flags))
    print(f"{len(events)} event(s), {di.active_hours} h of DI reduction ({di.energy_mwh / 1000:.2f} GWh), "
          f"{epc.active_hours} h of EPC ({epc.energy_mwh / 1000:.2f} GWh)")
    return EXIT_VIOLATIONS if events else EXIT_OK


def _cmd_price(cfg, args) -> int:
    scenarios, results = build_scenarios(cfg, args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "label", "value"])
    for level in _levels(args):
        sc = scenarios[level]
        w.writerow([level, "regulating_power", repr(float(sc.regulating))])
        for country, v in sorted(sc.fcr.items()):
            w.writerow([level, f"fcr:{country}", repr(float(v))])
        for link, v in sorted(sc.rent.items()):
            w.writerow([level, f"congestion_rent:{link}", repr(float(v))])
    text = buf.getvalue()
    _write(args.out, "scenarios.csv", text)
    for label, res in results.items():
        _write(args.out, f"histogram_{label.replace(':', '_')}.csv", res.histogram_csv(cfg.bootstrap.bins))
    print(text, end="")
    return EXIT_OK


def _cmd_cost(cfg, args) -> int:
    result = run_pipeline(cfg, None, args.mode, _levels(args), args.seed)
    _write(args.out, "costs.json", result.report.to_json() + "\n")
    _write(args.out, "costs.csv", result.report.to_csv())
    print(result.report.to_json())
    return EXIT_VIOLATIONS if result.violations else EXIT_OK


def _cmd_compare(cfg, args) -> int:
    result = run_pipeline(cfg, None, args.mode, _levels(args), args.seed)
    _write(args.out, "summary.txt", result.report.summary())
    print(result.report.summary(), end="")
    return EXIT_VIOLATIONS if result.violations else EXIT_OK


def _cmd_run(cfg, args) -> int:
    out = args.out if args.out is not None else Path("out")
    result = run_pipeline(cfg, out, args.mode, _levels(args), args.seed)
    print(result.report.summary(), end="")
    print(f"wrote {len(result.files)} file(s) to {out}")
    return EXIT_VIOLATIONS if result.violations else EXIT_OK


def _cmd_simulate(cfg, args) -> int:
    model = cfg.frequency_model
    if args.epc_power is not None:
        model = model.with_epc_power(args.epc_power)
    delta_p = cfg.incident.delta_p_mw if args.delta_p is None else args.delta_p
    with _Stage("simulate"):
        traj = simulate_response(model, delta_p, args.ek, cfg.sim_horizon_s)
    _write(args.out, "trajectory.csv", traj.to_csv())
    ifd = traj.ifd_from_nominal(model.limits.nominal_f0)
    print(f"nadir {traj.nadir:.4f} Hz at {traj.nadir_time:.2f} s; IFD {ifd:.4f} Hz; "
          f"initial RoCoF {traj.initial_rocof:.4f} Hz/s")
    return EXIT_VIOLATIONS if ifd > model.limits.ifd_limit else EXIT_OK


_COMMANDS = {
    "screen": _cmd_screen, "plan": _cmd_plan, "price": _cmd_price, "cost": _cmd_cost,
    "compare": _cmd_compare, "run": _cmd_run, "simulate": _cmd_simulate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except (LowInertiaError, OSError, ValueError, ArithmeticError) as exc:
        print(f"lowinertia {args.command}: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
