"""Command-line entry point.

Subcommands:
  run              execute one suite (or all) from a YAML config
  validate-config  parse and validate a config without running anything
  list-presets     print the bundled model presets

``run`` writes one CSV per suite plus ``summary.json`` into the output
directory and exits 0 only if every executed suite passed.  Results are
fully determined by the config and seed; ``--workers`` changes wall time
only, never the numbers.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import ConfigError, config_hash, load_config
from .levy import ConditionError
from .presets import PRESETS, preset_names
from .suites import run_selected, write_csv

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gouflow",
        description=(
            "Simulation and verification engine for generalized "
            "Ornstein-Uhlenbeck processes: duality, inverse flows, "
            "first-passage identities and stationary laws."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one suite or all suites from a config")
    run.add_argument("--config", required=True, help="path to a YAML config file")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument(
        "--paths", type=int, default=None, help="override the Monte Carlo path count"
    )
    run.add_argument(
        "--grid-dt", type=float, default=None, help="override the Euler grid step"
    )
    run.add_argument("--out", default=None, help="override the output directory")
    run.add_argument(
        "--workers", type=int, default=None, help="worker threads (results unchanged)"
    )
    run.add_argument(
        "--suite",
        default=None,
        help="override the suite: duality, inverse-flow, ruin, stationary, "
        "monotonicity or all",
    )

    val = sub.add_parser("validate-config", help="check a config file and exit")
    val.add_argument("--config", required=True, help="path to a YAML config file")

    sub.add_parser("list-presets", help="list bundled model presets")
    return parser


def _overrides(args) -> dict:
    return {
        "seed": args.seed,
        "n_paths": args.paths,
        "grid_dt": args.grid_dt,
        "out_dir": args.out,
        "workers": args.workers,
        "suite": args.suite,
    }


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config, _overrides(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2

    out_dir = cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)

    try:
        results = run_selected(cfg, out_dir=out_dir)
    except ConditionError as exc:
        print(
            "refusing to run: a required hypothesis fails for this model.\n"
            f"  {exc}",
            file=sys.stderr,
        )
        return 3

    summary = {
        "schema_version": 1,
        "seed": cfg.seed,
        "config_hash": config_hash(cfg),
        "suites": {},
        "pass": True,
    }
    for res in results:
        write_csv(os.path.join(out_dir, res.csv_name), res)
        summary["suites"][res.name] = {"pass": res.passed, "metrics": res.metrics}
        summary["pass"] = summary["pass"] and res.passed
        print(f"suite {res.name}: {'PASS' if res.passed else 'FAIL'}")

    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2, default=_jsonable)
        fh.write("\n")
    print(f"summary written to {os.path.join(out_dir, 'summary.json')}")
    return 0 if summary["pass"] else 1


def _jsonable(obj):
    if isinstance(obj, tuple):
        return list(obj)
    if hasattr(obj, "item"):  # numpy scalars
        return obj.item()
    return str(obj)


def _cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    model = cfg.resolved_model()
    print(f"config ok: suite={cfg.suite} seed={cfg.seed} hash={config_hash(cfg)}")
    print(
        f"model: drift={model.drift} gaussian={model.has_gaussian} "
        f"jumps={model.has_jumps} condition_b={model.condition_b}"
    )
    return 0


def _cmd_list_presets() -> int:
    width = max(len(name) for name in PRESETS)
    for name in preset_names():
        preset = PRESETS[name]
        print(f"{name:<{width}}  {preset.description}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "validate-config":
        return _cmd_validate(args)
    return _cmd_list_presets()


if __name__ == "__main__":
    sys.exit(main())
