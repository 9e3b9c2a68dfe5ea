"""Command line interface.

Subcommands: run, analyze, compare, montecarlo, gen. Exit codes: 0 on
success, 1 on validation or input failure, 2 on a numeric fault during
simulation or analysis.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import (
    ScenarioError,
    VARIANTS,
    analyze_scenario,
    build_monte_carlo_summary,
    build_run_summary,
    generate_scenario,
    monte_carlo,
    round12,
    run_scenario,
    write_trajectory_csv,
)
from .model import NumericFault, load_scenario, save_scenario


def _add_common(p: argparse.ArgumentParser, thin: bool = True) -> None:
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--horizon", type=int, default=None, help="override the step count")
    p.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    p.add_argument("--epsilon", type=float, default=None, help="override the belief threshold")
    p.add_argument("--out-dir", default=".", help="directory for output files")
    p.add_argument("--backend", default=None, choices=("compiled", "python"),
                   help="force a simulation kernel")
    if thin:
        p.add_argument("--thin", type=int, default=None,
                       help="record every N-th step in the CSV")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sociallearn",
        description="Simulate and analyze social learning over agent networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario, write CSV and summary JSON")
    _add_common(p)

    p = sub.add_parser("analyze", help="closed-form steady-state report as JSON")
    p.add_argument("scenario")
    p.add_argument("--out-dir", default=None, help="also write the JSON next to stdout")

    p = sub.add_parser("compare", help="paired run of all three algorithms")
    _add_common(p)

    p = sub.add_parser("montecarlo", help="aggregate over consecutive seeds")
    _add_common(p, thin=False)
    p.add_argument("--seeds", type=int, default=20, help="number of seeds")

    p = sub.add_parser("gen", help="write a named benchmark scenario")
    p.add_argument("--variant", required=True, choices=VARIANTS)
    p.add_argument("--out", required=True, help="output scenario path")
    p.add_argument("--q", type=float, default=None, help="peak observation probability")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=1e-3)
    return parser


def _load(args) -> "ScenarioConfig":
    cfg = load_scenario(args.scenario)
    return cfg.override(horizon=getattr(args, "horizon", None),
                        seed=getattr(args, "seed", None),
                        epsilon=getattr(args, "epsilon", None))


def _stem(args) -> str:
    return Path(args.scenario).stem


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _cmd_run(args) -> int:
    cfg = _load(args)
    result = run_scenario(cfg, backend=args.backend)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{_stem(args)}_trajectory.csv"
    json_path = out / f"{_stem(args)}_summary.json"
    write_trajectory_csv(csv_path, cfg, result.trajectory, thin=args.thin)
    _write_json(json_path, build_run_summary(result, thin=args.thin))
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _cmd_compare(args) -> int:
    cfg = _load(args).override(algorithms=("noncooperative", "static", "adaptive"))
    if cfg.static_weights is None:
        cfg = cfg.with_uniform_static_weights()
    result = run_scenario(cfg, backend=args.backend)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{_stem(args)}_compare.csv"
    json_path = out / f"{_stem(args)}_compare_summary.json"
    write_trajectory_csv(csv_path, cfg, result.trajectory, thin=args.thin)
    _write_json(json_path, build_run_summary(result, thin=args.thin))
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _cmd_analyze(args) -> int:
    cfg = load_scenario(args.scenario)
    payload = round12(analyze_scenario(cfg))
    text = json.dumps(payload, indent=2)
    print(text)
    if args.out_dir is not None:
        path = Path(args.out_dir) / f"{_stem(args)}_analysis.json"
        _write_json(path, payload)
    return 0


def _cmd_montecarlo(args) -> int:
    cfg = _load(args)
    mc = monte_carlo(cfg, args.seeds, backend=args.backend)
    payload = build_monte_carlo_summary(cfg, mc)
    path = Path(args.out_dir) / f"{_stem(args)}_montecarlo.json"
    _write_json(path, payload)
    print(f"wrote {path}")
    return 0


def _cmd_gen(args) -> int:
    cfg = generate_scenario(args.variant, q=args.q, horizon=args.horizon,
                            seed=args.seed, epsilon=args.epsilon)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    save_scenario(cfg, out)
    print(f"wrote {out}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "analyze": _cmd_analyze,
    "compare": _cmd_compare,
    "montecarlo": _cmd_montecarlo,
    "gen": _cmd_gen,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except NumericFault as exc:
        print(f"numeric fault: {exc}", file=sys.stderr)
        return 2
    except ScenarioError as exc:
        for v in exc.violations:
            print(f"invalid scenario: {v}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
