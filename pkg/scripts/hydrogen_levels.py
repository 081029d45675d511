#!/usr/bin/env python3
"""Reproduce the hydrogen kappa=-1 level table with both training methods.

Runs the inverse-Hamiltonian method for n = 1..6 (each in its own box) and
the orthonormal chain for n = 1..6 in the 100 a.u. box, then prints a
side-by-side comparison against the analytic energies.
"""

import argparse
import json
import tempfile
from pathlib import Path

from diracnn.cli import main as cli_main

INVERSE_RUNS = [
    # n, box (a.u.), eps'
    (1, 20.0, -0.51),
    (2, 40.0, -0.13),
    (3, 40.0, -0.06),
    (4, 60.0, -0.04),
    (5, 90.0, -0.021),
    (6, 100.0, -0.015),
]

CONFIG = """
[system]
kind = coulomb
kappa = -1
n = {n}

[mesh]
m = {m}
r_max = {box}

[training]
method = {method}
epsilon_prime = {eps_prime}
max_epochs = {max_epochs}
window = 500
tol = 1e-8
seed = {seed}

[output]
dir = {out}
"""


def run(config_text: str) -> list[dict]:
    with tempfile.NamedTemporaryFile("w", suffix=".ini", delete=False) as fh:
        fh.write(config_text)
        path = fh.name
    assert cli_main(["solve", "--config", path]) == 0
    out_dir = [ln.split("=", 1)[1].strip() for ln in config_text.splitlines()
               if ln.startswith("dir =")][0]
    return json.loads((Path(out_dir) / "energies.json").read_text())["states"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/hydrogen")
    ap.add_argument("--m", type=int, default=1700)
    ap.add_argument("--max-epochs", type=int, default=30000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rows = []
    for n, box, eps_prime in INVERSE_RUNS:
        rows += run(CONFIG.format(n=n, m=args.m, box=box, method="inverse",
                                  eps_prime=eps_prime,
                                  max_epochs=args.max_epochs, seed=args.seed,
                                  out=f"{args.out}/inverse-n{n}"))

    # orthonormal chain: every state in the common 100 a.u. box
    rows += run(CONFIG.format(n=6, m=args.m, box=100.0, method="orthonormal",
                              eps_prime=-0.51, max_epochs=args.max_epochs,
                              seed=args.seed, out=f"{args.out}/orthonormal"))

    print(f"{'state':>6} {'method':>12} {'energy':>14} {'reference':>14} "
          f"{'rel err':>10} {'epochs':>7}")
    for r in rows:
        print(f"{r['label']:>6} {r['method']:>12} {r['epsilon']:>14.8f} "
              f"{r['reference']:>14.8f} {r['relative_error']:>10.2e} "
              f"{r['epochs']:>7}")


if __name__ == "__main__":
    main()
