#!/usr/bin/env python3
"""Full neutron spectrum of Pb-208 below the Fermi energy (all kappa blocks)."""

import argparse
import json
import tempfile
from pathlib import Path

from diracnn.cli import main as cli_main

CONFIG = """
[system]
kind = woods_saxon
a_count = 208
n_count = 126
z_count = 82
kappa_list = -1, 1, -2, 2, -3, 3, -4, 4, -5, 5, -6, 6, -7
n_fill = 126

[mesh]
m = {m}
r_max = 20.0

[training]
max_epochs = {max_epochs}
window = 500
tol = 1e-5
seed = {seed}
workers = {workers}

[output]
dir = {out}
"""


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/pb208")
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--max-epochs", type=int, default=25000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=2)
    args = ap.parse_args()

    with tempfile.NamedTemporaryFile("w", suffix=".ini", delete=False) as fh:
        fh.write(CONFIG.format(m=args.m, max_epochs=args.max_epochs,
                               seed=args.seed, workers=args.workers,
                               out=args.out))
        path = fh.name
    assert cli_main(["spectrum", "--config", path]) == 0

    doc = json.loads((Path(args.out) / "energies.json").read_text())
    rows = sorted(doc["states"], key=lambda r: r["reference"])
    print(f"{'state':>7} {'kappa':>6} {'trained (MeV)':>14} {'oracle (MeV)':>14} {'rel err':>10}")
    for r in rows:
        print(f"{r['label']:>7} {r['kappa']:>6} {r['epsilon']:>14.4f} "
              f"{r['reference']:>14.4f} {r['relative_error']:>10.2e}")
    print(f"levels: {len(rows)}   fermi energy: {rows[-1]['fermi_energy']:.4f} MeV")


if __name__ == "__main__":
    main()
