"""Command-line front end.

Subcommands cover the pipeline stages: one trip (simulate), the outcome
cloud and its hull (feasible-set), weight estimation from a reported time
(estimate-theta), both mechanisms at one budget (mechanism), the full budget
sweep (sweep), and plotting (plot). Exit codes: 0 success, 1 validation
error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__, microsim
from .harness import (
    ScenarioConfig,
    ScenarioError,
    bundled_scenario_path,
    emit_csv,
    emit_plot,
    load_scenario,
    load_sweep_csv,
    prepare,
    run_budget_sweep,
)
from .mechanism import write_result_csv
from .microsim import SimulationHorizonError, simulate_trip
from .netgraph import NetworkSpecError
from .prefs import estimate_theta


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argument problems are validation errors
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--scenario",
        default=None,
        help="scenario file (default: the bundled two-route benchmark)",
    )
    sub.add_argument("--out", default=None, help="output directory override")
    sub.add_argument("--seed", type=int, default=None, help="seed override")
    sub.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="table format"
    )


def _load(args) -> ScenarioConfig:
    path = args.scenario if args.scenario else bundled_scenario_path()
    config = load_scenario(path)
    for note in config.applied_defaults:
        print(f"default applied: {note}")
    if args.seed is not None:
        if args.seed < 0:
            raise ScenarioError("--seed must be >= 0")
        config = dataclasses.replace(config, seed=args.seed)
    if args.out is not None:
        config = dataclasses.replace(config, out_dir=args.out)
    return config


def _first_class(setup):
    key = (
        setup.config.population[0].origin,
        setup.config.population[0].destination,
        setup.config.population[0].vehicle,
    )
    return setup.classes[key]


def _out_dir(config: ScenarioConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    config = _load(args)
    setup = prepare(config)
    cls = _first_class(setup)
    traj = simulate_trip(
        cls.routes[0],
        config.styles[0],
        config.conditions[0],
        idm=cls.vehicle.idm,
        emissions=cls.vehicle.emissions,
        dt=config.dt,
    )
    out = _out_dir(config) / "trajectory.csv"
    traj.write_csv(out)
    print(
        f"trip on {'-'.join(cls.routes[0].link_ids)}: "
        f"{traj.travel_time_s:.2f} s, {traj.emissions_g:.2f} g "
        f"({microsim.backend()} backend) -> {out}"
    )
    return 0


def cmd_feasible_set(args) -> int:
    config = _load(args)
    setup = prepare(config)
    cls = _first_class(setup)
    out = _out_dir(config)
    fs = cls.feasible_set
    written = []
    if args.format == "json":
        path = out / "feasible_set.json"
        payload = json.loads(fs.to_json())
        payload["cloud"] = [
            {
                "travel_time_s": p.travel_time_s,
                "emissions_g": p.emissions_g,
                "route": p.route_id,
                "style": p.style_label,
                "condition": p.condition_label,
            }
            for p in cls.cloud
        ]
        payload["eco_route"] = cls.eco_route_id
        path.write_text(json.dumps(payload, indent=2) + "\n")
        written.append(path)
    else:
        cloud_path = out / "cloud.csv"
        lines = ["travel_time_s,emissions_g,route,style,condition"]
        for p in cls.cloud:
            lines.append(
                f"{p.travel_time_s!r},{p.emissions_g!r},"
                f"{p.route_id},{p.style_label},{p.condition_label}"
            )
        cloud_path.write_text("\n".join(lines) + "\n")
        written.append(cloud_path)
        hull_path = out / "hull_vertices.csv"
        lines = ["travel_time_s,emissions_g"]
        for t, e in fs.vertices:
            lines.append(f"{t!r},{e!r}")
        hull_path.write_text("\n".join(lines) + "\n")
        written.append(hull_path)
        pf_path = out / "pareto.csv"
        lines = ["travel_time_s,emissions_g"]
        for t, e in fs.pareto:
            lines.append(f"{t!r},{e!r}")
        pf_path.write_text("\n".join(lines) + "\n")
        written.append(pf_path)
    print(
        f"{len(cls.cloud)} outcomes, {len(fs.vertices)} hull vertices, "
        f"{len(fs.pareto)} Pareto points; eco route {cls.eco_route_id}"
    )
    for p in written:
        print(f"wrote {p}")
    return 0


def cmd_estimate_theta(args) -> int:
    config = _load(args)
    setup = prepare(config)
    cls = _first_class(setup)
    est = estimate_theta(cls.feasible_set, args.t_report)
    print(
        json.dumps(
            {
                "t_report": args.t_report,
                "emission_weight": est.emission_weight,
                "theta": list(est.theta),
                "matched_travel_time_s": est.matched.travel_time_s,
                "matched_emissions_g": est.matched.emissions_g,
                "residual": est.residual,
                "residual_history": list(est.residual_history),
            }
        )
    )
    return 0


def cmd_mechanism(args) -> int:
    config = _load(args)
    if args.budget is None or args.budget < 0:
        raise ScenarioError("--budget must be given and >= 0")
    setup = prepare(config)
    out = _out_dir(config)
    from .mechanism import baseline_incentives, optimal_incentives

    opt = optimal_incentives(setup.participants, args.budget)
    base = baseline_incentives(
        setup.participants, args.budget, setup.eco_recommendations
    )
    for result in (opt, base):
        path = out / f"mechanism_{result.mechanism}.csv"
        write_result_csv(result, setup.participants, path)
        print(
            f"{result.mechanism}: spend {result.total_spend:.3f} / {args.budget:g}, "
            f"predicted emissions {result.predicted_total_emissions_g:.2f} g, "
            f"mean travel time {result.predicted_mean_travel_time_s:.2f} s "
            f"-> {path}"
        )
    return 0


def cmd_sweep(args) -> int:
    config = _load(args)
    setup = prepare(config)
    rows = run_budget_sweep(setup)
    out = _out_dir(config)
    csv_path = out / "sweep.csv"
    emit_csv(rows, csv_path)
    written = [csv_path]
    if args.format == "json":
        json_path = out / "sweep.json"
        json_path.write_text(
            json.dumps([dataclasses.asdict(r) for r in rows], indent=2) + "\n"
        )
        written.append(json_path)
    th = setup.eco_thresholds
    print(
        f"population n={len(setup.participants)}, eco thresholds "
        f"min {th.min():.3f} / max {th.max():.3f}, sum {th.sum():.3f}"
    )
    for p in written:
        print(f"wrote {p} ({len(rows)} rows)")
    return 0


def cmd_plot(args) -> int:
    config = _load(args)
    out = _out_dir(config)
    csv_path = out / "sweep.csv"
    if csv_path.exists():
        rows = load_sweep_csv(csv_path)
    else:
        rows = run_budget_sweep(prepare(config))
        emit_csv(rows, csv_path)
        print(f"wrote {csv_path} ({len(rows)} rows)")
    plot_path = out / "sweep.svg"
    emit_plot(rows, plot_path)
    print(f"wrote {plot_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ecoplanner", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("simulate", help="drive one trip, write its trajectory")
    _add_common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = subs.add_parser(
        "feasible-set", help="outcome cloud, hull, and Pareto front files"
    )
    _add_common(sp)
    sp.set_defaults(func=cmd_feasible_set)

    sp = subs.add_parser(
        "estimate-theta", help="weight estimate from a reported preferred time"
    )
    _add_common(sp)
    sp.add_argument(
        "--t-report", type=float, required=True, help="reported travel time (s)"
    )
    sp.set_defaults(func=cmd_estimate_theta)

    sp = subs.add_parser("mechanism", help="both mechanisms at one budget")
    _add_common(sp)
    sp.add_argument("--budget", type=float, default=None, help="total budget")
    sp.set_defaults(func=cmd_mechanism)

    sp = subs.add_parser("sweep", help="full budget sweep table")
    _add_common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = subs.add_parser("plot", help="plot an existing or fresh sweep")
    _add_common(sp)
    sp.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ScenarioError, NetworkSpecError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except (SimulationHorizonError, RuntimeError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
