#!/usr/bin/env python3
"""Reproduce the reconstruction-error sweeps on the shipped fixture.

Two tables: mean relative error of the continuous dynamic matrix versus the
observation window (stride fixed at 3 cycles), and versus the sampling
stride (window fixed at 10 min).  Both drive the command-line interface, so
a run of this script exercises the same code path as a user session.

The acceptance suite uses 50 seeds; the default here is 10 so the script
finishes in under a minute.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from swingid.cli import main as cli

REPO_ROOT = Path(__file__).resolve().parent.parent
T_OBS_GRID = (60, 150, 300, 600, 1200)
STRIDE_GRID = (1, 2, 3, 4, 5, 6, 10, 15, 20, 30)


def print_mean_table(path: Path, axis: str) -> None:
    rows = path.read_text().splitlines()[1:]
    print(f"\n  {axis:>10}  estimator   mean eps")
    for row in rows:
        value, est, eps, _ = row.split(",")
        print(f"  {float(value):10g}  {est:<9}  {float(eps):8.4f}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", type=Path,
                        default=REPO_ROOT / "models" / "fixture10.grid")
    parser.add_argument("--out", type=Path, default=REPO_ROOT / "results")
    parser.add_argument("--seeds", type=int, default=10,
                        help="number of seeds to average over")
    args = parser.parse_args(argv)

    seeds = [str(s) for s in range(1, args.seeds + 1)]
    common = ["--model", str(args.model), "--estimator", "UML", "CML",
              "--seed", *seeds]

    t_dir = args.out / "t_obs_sweep"
    code = cli(["sweep", "--axis", "t_obs",
                "--values", *[str(v) for v in T_OBS_GRID],
                "--stride", "3", "--out", str(t_dir), *common])
    if code != 0:
        return code
    print_mean_table(t_dir / "sweep_mean.csv", "t_obs [s]")

    s_dir = args.out / "stride_sweep"
    code = cli(["sweep", "--axis", "stride",
                "--values", *[str(v) for v in STRIDE_GRID],
                "--t-obs", "600", "--out", str(s_dir), *common])
    if code != 0:
        return code
    print_mean_table(s_dir / "sweep_mean.csv", "stride")
    return 0


if __name__ == "__main__":
    sys.exit(main())
