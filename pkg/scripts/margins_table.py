"""Classical and extended margins of both loops across offsets, with gain-corrected integrators."""
import argparse
import json
import math
from pathlib import Path

from mbcoffset import mimo
from mbcoffset.plant import RotorModel, TransformedPlant, analytic_offset_coupled


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omega-r", type=float, default=1.27)
    ap.add_argument("--ci", type=float, default=0.1461, help="integrator gain at zero offset")
    ap.add_argument("--offsets", type=float, nargs="+", default=[0.0, 30.0, 44.0, 58.0], help="deg")
    ap.add_argument("--out", default="results/margins.json")
    args = ap.parse_args()

    rotor = RotorModel.first_order(1.0, 0.1, 0.1, 1.0)
    star = math.degrees(analytic_offset_coupled(1.0, 0.1, 0.1, 1.0, args.omega_r))
    dc0 = TransformedPlant(rotor, 1, args.omega_r, 0.0).dc_gain()
    rows = []
    print(f"{'psi_o':>7} {'c_I':>9} {'loop':>4} {'A_m_ext':>8} {'phi_ext':>8} {'M_ext':>7} {'M_m':>7}")
    for deg in sorted(set(args.offsets) | {round(star, 3)}):
        plant = TransformedPlant(rotor, 1, args.omega_r, math.radians(deg))
        c = mimo.gain_correction(dc0, plant.dc_gain(), args.ci)
        for loop in (1, 2):
            rep = mimo.extended_margins(plant, mimo.DiagonalController(c), loop_index=loop)
            d = rep.to_dict() | {"psi_o_deg": deg, "c_I": c}
            rows.append(d)
            fmt = lambda x: "   --" if x is None else (f"{x:8.3f}" if isinstance(x, float) else f"{x:>8}")
            print(f"{deg:7.3f} {c:9.5f} {loop:4d} {fmt(d['A_m_ext'])} {fmt(d['phi_m_ext_deg'])} "
                  f"{fmt(d['M_m_ext'])} {fmt(d['M_m'])}")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(rows, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
