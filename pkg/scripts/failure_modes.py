#!/usr/bin/env python3
"""Failure-mode experiments on hydrogen: two-head small component, raw-F
output, and direct minimization (variational collapse)."""

import argparse
import json
import tempfile
from pathlib import Path

from diracnn.cli import main as cli_main

CONFIG = """
[system]
kind = coulomb

[mesh]
m = {m}
r_max = 20.0

[training]
epsilon_prime = -0.51
max_epochs = {max_epochs}
window = 500
tol = 1e-9
seed = {seed}

[output]
dir = {out}
"""


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/failure-modes")
    ap.add_argument("--m", type=int, default=600)
    ap.add_argument("--max-epochs", type=int, default=120000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    with tempfile.NamedTemporaryFile("w", suffix=".ini", delete=False) as fh:
        fh.write(CONFIG.format(m=args.m, max_epochs=args.max_epochs,
                               seed=args.seed, out=args.out))
        path = fh.name
    assert cli_main(["ablation", "--config", path]) == 0

    report = json.loads((Path(args.out) / "ablation.json").read_text())["report"]
    sc = report["small_component"]
    print("small component (inverse method):")
    print(f"  one-head  max rel G err: {sc['fully_connected']['max_rel_err_G']:.3e}")
    print(f"  two-head  max rel G err: {sc['split_two_head']['max_rel_err_G']:.3e}")
    print(f"  degradation ratio:       {sc['g_error_ratio']:.1f}")
    raw = report["raw_f_output"]
    print("raw F output (no 1/r trial factor):")
    print(f"  |G| at first mesh point: {raw['abs_G_first_point']:.3e} "
          f"(analytic {raw['abs_G_first_point_analytic']:.3e}, "
          f"ratio {raw['origin_ratio']:.1e})")
    dm = report["direct_minimization"]
    print("direct minimization:")
    print(f"  two-head: collapsed={dm['split_two_head']['collapsed']} "
          f"min eps {dm['split_two_head']['min_eps']:.1f} "
          f"(sea edge {dm['sea_edge']:.1f})")
    print(f"  one-head: collapsed={dm['fully_connected']['collapsed']} "
          f"final eps {dm['fully_connected']['final_eps']:.6f}")


if __name__ == "__main__":
    main()
