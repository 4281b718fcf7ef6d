"""R# over (tau1, psi_o) for first-order blades, with the grid optimum next to the closed form.

Writes ``ridge.csv`` (tau1, psi_o_deg, r_sharp) and ``optima.csv``.
"""
import argparse
import csv
import math
from pathlib import Path

import numpy as np

from mbcoffset.metrics import optimal_offset_grid
from mbcoffset.plant import RotorModel, TransformedPlant, analytic_offset_coupled, analytic_offset_decoupled


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omega-r", type=float, default=1.27)
    ap.add_argument("--eval-omega", type=float, default=1e-2)
    ap.add_argument("--coupled", action="store_true", help="add K2=0.1, tau2=1 cross coupling")
    ap.add_argument("--out-dir", default="results/ridge")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    taus = np.logspace(-2, 0, 21)
    with open(out / "ridge.csv", "w", newline="") as fr, open(out / "optima.csv", "w", newline="") as fo:
        ridge, opt = csv.writer(fr, lineterminator="\n"), csv.writer(fo, lineterminator="\n")
        ridge.writerow(["tau1", "psi_o_deg", "r_sharp"])
        opt.writerow(["tau1", "grid_deg", "analytic_deg"])
        for tau in taus:
            if args.coupled:
                rotor = RotorModel.first_order(1.0, tau, 0.1, 1.0)
                ref = analytic_offset_coupled(1.0, tau, 0.1, 1.0, args.omega_r)
            else:
                rotor = RotorModel.first_order(1.0, tau)
                ref = analytic_offset_decoupled(tau, args.omega_r)
            res = optimal_offset_grid(lambda p: TransformedPlant(rotor, 1, args.omega_r, p), [args.eval_omega])
            for psi, score in res.sweep[::10]:
                ridge.writerow([repr(float(tau)), repr(math.degrees(psi)), repr(score)])
            opt.writerow([repr(float(tau)), repr(math.degrees(res.psi_star)), repr(math.degrees(ref))])
            print(f"tau1={tau:7.4f}  grid {math.degrees(res.psi_star):7.2f} deg  analytic {math.degrees(ref):7.3f} deg")


if __name__ == "__main__":
    main()
