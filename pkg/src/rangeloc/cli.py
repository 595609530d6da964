"""Command-line interface: generate / analyze / run / sweep."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .mirrors import detect_mirrors, generate_bands, report_to_dict
from .model import (
    ADDITIVE,
    MULTIPLICATIVE,
    NONE,
    EmbeddedGraph,
    NoiseModel,
    Point2,
    generate_scenario,
    load_scenario,
    save_scenario,
    scenario_from_dict,
)
from .rcgr import MIN_HALF_WIDTH
from .sensitivity import build_rsm, condition_number


def _add_noise_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--noise-kind",
        choices=[MULTIPLICATIVE, ADDITIVE, NONE],
        default=MULTIPLICATIVE,
        help="measurement noise family",
    )
    parser.add_argument("--noise-scale", type=float, default=0.1)
    parser.add_argument(
        "--noise-bound",
        type=float,
        default=None,
        help="hard error cap C in meters (default: 2*scale*radius)",
    )


def _noise_from_args(args: argparse.Namespace) -> NoiseModel:
    if args.noise_kind == NONE or args.noise_scale == 0:
        return NoiseModel(kind=NONE)
    return NoiseModel(kind=args.noise_kind, scale=args.noise_scale, bound=args.noise_bound)


def _cmd_generate(args: argparse.Namespace) -> int:
    scenario = generate_scenario(
        n=args.n,
        area=tuple(args.area),
        radius=args.radius,
        anchor_count=args.anchors,
        noise=_noise_from_args(args),
        seed=args.seed,
    )
    save_scenario(scenario, args.out)
    if not scenario.connected:
        print("warning: generated graph is disconnected", file=sys.stderr)
    print(f"wrote {args.out}")
    return 0


def _load_embedding(path: str) -> tuple[EmbeddedGraph, float]:
    """Scenario or embedded-graph file -> embedding over its locations.

    An embedded-graph file is a scenario document with an extra "locations"
    object mapping vertex index to [x, y]; without it the true positions are
    used.  Returns the embedding and the scenario's resolved noise bound.
    """
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    loaded = scenario_from_dict(data)
    if "locations" in data:
        locations = {
            int(v): Point2(float(x), float(y)) for v, (x, y) in data["locations"].items()
        }
    else:
        locations = {v: p for v, p in enumerate(loaded.true_positions)}
    bound = loaded.noise.resolved_bound(loaded.radius)
    return EmbeddedGraph(loaded.graph, locations), bound


def _cmd_analyze(args: argparse.Namespace) -> int:
    embedded, bound = _load_embedding(args.scenario)
    half_width = args.band_width if args.band_width is not None else max(bound, MIN_HALF_WIDTH)
    report: dict = {"band_half_width": half_width}

    bands = generate_bands(embedded, half_width)
    mirror_report = detect_mirrors(embedded, bands)
    report["mirror_count"] = mirror_report.mirror_count
    if args.mirrors:
        report["mirrors"] = report_to_dict(mirror_report)

    try:
        sens = build_rsm(embedded)
        spectrum = condition_number(sens)
        report["condition_number"] = spectrum.condition_number
        report["full_rank"] = spectrum.full_rank
        if args.rsm:
            rows, cols = sens.shape
            report["rsm"] = {
                "rows": rows,
                "cols": cols,
                "entries": [
                    [r, c, float(sens.matrix[r, c])]
                    for r in range(rows)
                    for c in range(cols)
                    if sens.matrix[r, c] != 0.0
                ],
                "singular_values": [float(s) for s in spectrum.singular_values],
            }
    except ValueError as exc:
        report["condition_number"] = None
        report["error"] = str(exc)

    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    if args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        scenario = generate_scenario(
            n=args.n,
            area=tuple(args.area),
            radius=args.radius,
            anchor_count=args.anchors,
            noise=_noise_from_args(args),
            seed=args.seed,
        )
    algorithms = harness.ALGORITHMS if args.algo == "all" else (args.algo,)
    trial = harness.run_trial(scenario, algorithms, args.t_kappa)
    harness.write_results_csv(args.out, [scenario], [trial])
    print(f"wrote {args.out}")
    for algo in algorithms:
        report = trial.runs[algo].report
        mean = "n/a" if report.errors == {} else f"{report.mean:.4f}"
        print(
            f"{algo}: mean_error={mean} m, "
            f"localized={report.localized_fraction:.2%}"
        )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = harness.load_sweep_spec(args.spec)
    sweep = harness.run_sweep(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for config in sweep.configs:
        label = config.label
        harness.write_results_csv(
            out_dir / f"results_{label}.csv",
            sweep.scenarios[label],
            sweep.trials[label],
        )
        for algo in spec.algorithms:
            harness.write_cdf_csv(
                out_dir / f"cdf_{label}_{algo}.csv", sweep.trials[label], algo
            )
    harness.write_summary_csv(out_dir / "summary.csv", sweep)
    print(f"wrote sweep outputs to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rangeloc",
        description="Robust anchor-based 2D network localization from noisy ranges",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a random scenario file")
    gen.add_argument("--n", type=int, default=30)
    gen.add_argument("--area", type=float, nargs=2, default=[100.0, 100.0])
    gen.add_argument("--radius", type=float, default=30.0)
    gen.add_argument("--anchors", type=int, default=3)
    gen.add_argument("--seed", type=int, default=0)
    _add_noise_args(gen)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_generate)

    ana = sub.add_parser("analyze", help="mirror and sensitivity analysis of a file")
    ana.add_argument("scenario", help="scenario or embedded-graph JSON file")
    ana.add_argument("--mirrors", action="store_true", help="include the full mirror report")
    ana.add_argument("--rsm", action="store_true", help="include matrix entries and spectrum")
    ana.add_argument("--band-width", type=float, default=None, help="band half-width override")
    ana.add_argument("--out", default=None)
    ana.set_defaults(func=_cmd_analyze)

    run = sub.add_parser("run", help="run algorithms on one scenario")
    run.add_argument("--scenario", default=None, help="scenario file (else generate)")
    run.add_argument("--algo", choices=["rcgr", "call", "lsq", "all"], default="all")
    run.add_argument("--t-kappa", type=float, default=4.0)
    run.add_argument("--n", type=int, default=30)
    run.add_argument("--area", type=float, nargs=2, default=[100.0, 100.0])
    run.add_argument("--radius", type=float, default=30.0)
    run.add_argument("--anchors", type=int, default=3)
    run.add_argument("--seed", type=int, default=0)
    _add_noise_args(run)
    run.add_argument("--out", default="results.csv")
    run.set_defaults(func=_cmd_run)

    swp = sub.add_parser("sweep", help="run a Monte-Carlo sweep from a spec file")
    swp.add_argument("spec", help="sweep spec JSON file")
    swp.add_argument("--out-dir", default="sweep_results")
    swp.set_defaults(func=_cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
