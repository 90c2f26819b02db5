#!/usr/bin/env python3
"""Run every verification suite on every preset it applies to.

Writes one report directory per (preset, suite) pair under reports/ and a
final table to stdout.  Presets that violate a suite's hypotheses are
listed as refused rather than failed — the refusal is the correct result.

Usage: python3 scripts/run_all_suites.py [--paths N] [--seed S] [--out DIR]
"""

import argparse
import os
import sys

from gouflow.cli import main as cli_main
from gouflow.presets import preset_names

SUITES = ("duality", "inverse-flow", "ruin", "stationary", "monotonicity")

CONFIG_TEMPLATE = """\
schema_version: 1
seed: {seed}
preset: {preset}
suite: {suite}
n_paths: {paths}
"""


def run(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="reports")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    rows = []
    for preset in preset_names():
        for suite in SUITES:
            out_dir = os.path.join(args.out, f"{preset}-{suite}")
            os.makedirs(out_dir, exist_ok=True)
            cfg_path = os.path.join(out_dir, "config.yaml")
            with open(cfg_path, "w") as fh:
                fh.write(
                    CONFIG_TEMPLATE.format(
                        seed=args.seed, preset=preset, suite=suite, paths=args.paths
                    )
                )
            code = cli_main(
                [
                    "run",
                    "--config",
                    cfg_path,
                    "--out",
                    out_dir,
                    "--workers",
                    str(args.workers),
                ]
            )
            verdict = {0: "pass", 1: "FAIL", 3: "refused"}.get(code, f"exit {code}")
            rows.append((preset, suite, verdict))

    width = max(len(p) for p, _, _ in rows)
    print("\npreset".ljust(width + 1), "suite".ljust(14), "result")
    for preset, suite, verdict in rows:
        print(preset.ljust(width + 1), suite.ljust(14), verdict)
    return 1 if any(v == "FAIL" for _, _, v in rows) else 0


if __name__ == "__main__":
    sys.exit(run())
