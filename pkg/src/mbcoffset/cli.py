"""Command-line front end. Angles are given and reported in degrees."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import metrics, mimo, sim, ssmbc
from .errors import MBCError
from .lti import frequency_grid, log_grid
from .plant import (RotorModel, TransformedPlant, analytic_offset_coupled,
                    analytic_offset_decoupled, write_frf_csv)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True)


def _emit(obj, out: Path | None = None):
    text = _dump(obj)
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n")
    print(text)


def _load_rotor(path) -> tuple[RotorModel, dict]:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ValueError("rotor model file must hold a JSON object")
    return RotorModel.from_dict(doc), doc


def _plant(args, psi_o_deg=None) -> TransformedPlant:
    rotor, _ = _load_rotor(args.model)
    psi = args.psi_o if psi_o_deg is None else psi_o_deg
    return TransformedPlant(rotor, args.n, args.omega_r, math.radians(psi))


def _offsets(args) -> np.ndarray:
    if args.step <= 0 or args.psi_max < args.psi_min:
        raise ValueError("need step > 0 and psi_max >= psi_min")
    k = int(round((args.psi_max - args.psi_min) / args.step))
    return np.radians(np.round(args.psi_min + args.step * np.arange(k + 1), 10))


def _eval_grid(args):
    if args.eval_omega is not None:
        return frequency_grid(args.eval_omega)
    return log_grid(args.w_min, args.w_max, args.points)


def cmd_offset(args):
    rotors = [_load_rotor(p) for p in args.model]
    result = {"n": args.n, "omega_r": args.omega_r}
    if args.analytic:
        if len(rotors) != 1:
            raise ValueError("--analytic takes a single model")
        _, doc = rotors[0]
        if doc.get("K2") is None:
            psi = analytic_offset_decoupled(float(doc["tau1"]), args.omega_r, args.n)
        else:
            tau2 = doc.get("tau2", doc["tau1"])
            psi = analytic_offset_coupled(float(doc["K1"]), float(doc["tau1"]), float(doc["K2"]),
                                          float(tau2), args.omega_r, args.n)
        result.update(method="analytic", psi_star_deg=math.degrees(psi))
    else:
        grid, offsets = _eval_grid(args), _offsets(args)

        def builder(rotor):
            return lambda psi: TransformedPlant(rotor, args.n, args.omega_r, psi)

        if len(rotors) == 1:
            res = metrics.optimal_offset_grid(builder(rotors[0][0]), grid, offsets)
            result.update(method="grid", psi_star_deg=math.degrees(res.psi_star), r_sharp=res.score_at_star)
            if args.out:
                res.write_csv(args.out)
        else:
            psi = metrics.median_offset_over_models([builder(r) for r, _ in rotors], grid, offsets)
            result.update(method="grid-median", psi_star_deg=math.degrees(psi), models=len(rotors))
    _emit(result)


def cmd_frf(args):
    plant = _plant(args)
    grid = log_grid(args.w_min, args.w_max, args.points)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_frf_csv(out, grid, plant.frf(grid))
    _emit({"frf": str(out), "points": len(grid)})


def cmd_rga(args):
    rotor, _ = _load_rotor(args.model)
    grid, offsets = _eval_grid(args), _offsets(args)
    res = metrics.optimal_offset_grid(lambda p: TransformedPlant(rotor, args.n, args.omega_r, p), grid, offsets)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    res.write_csv(out)
    _emit({"sweep": str(out), "psi_star_deg": math.degrees(res.psi_star), "r_sharp": res.score_at_star})


def cmd_margins(args):
    plant = _plant(args)
    ctrl = mimo.DiagonalController(args.ci)
    rep = mimo.extended_margins(plant, ctrl, loop_index=args.loop, convention=args.convention)
    if args.bands:
        band = mimo.gershgorin_bands(plant, ctrl, log_grid(args.w_min, args.w_max, args.points),
                                     args.loop, args.convention)
        band.write_csv(args.bands)
    _emit(rep.to_dict(), Path(args.out) if args.out else None)


def cmd_ssmbc(args):
    family = ssmbc.load_family(args.input)
    psi_o = math.radians(args.psi_o)
    pairs = [(ssmbc.transform_ss(m, args.n, psi_o, args.normalized_collective),
              {"psi": m.psi, "omega_r": m.omega_r}) for m in family]
    ssmbc.save_transformed(args.out, pairs, {"n": args.n, "psi_o_deg": args.psi_o})
    _emit({"models": len(pairs), "output": args.out})


def cmd_simulate(args):
    rotor, _ = _load_rotor(args.model)
    cfg = sim.SimulationConfig(omega_r=args.omega_r, n=args.n, psi_o=math.radians(args.psi_o), seed=args.seed,
                               dt=args.dt, duration=args.duration, discard=args.discard)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {}
    if args.mode == "open":
        amp = math.radians(args.amplitude_deg)
        exc = [sim.rbs_generate(cfg.steps, sim.RBSSignal(amp, args.clock_period, args.seed + k)) for k in (0, 1)]
        ts = sim.simulate_open_loop(rotor, cfg, exc)
        est = sim.spectral_frf([ts.theta_tilt, ts.theta_yaw], [ts.M_tilt, ts.M_yaw], cfg.dt,
                               nperseg=args.nperseg, band=(args.w_min, args.w_max))
        write_frf_csv(out_dir / "frf_estimate.csv", est.grid, est.frf)
        files["frf"] = "frf_estimate.csv"
    else:
        dist = sim.BladeDisturbance(args.dist_amplitude, math.radians(args.dist_phase_deg), 1, args.dist_mean,
                                    args.noise_std, args.noise_bandwidth, args.seed)
        ts = sim.simulate_closed_loop(rotor, cfg, mimo.DiagonalController(args.ci), dist)
    ts.write_csv(out_dir / "timeseries.csv")
    files["timeseries"] = "timeseries.csv"
    (out_dir / "config.json").write_text(cfg.to_json() + "\n")
    files["config"] = "config.json"
    _emit({"mode": args.mode, "samples": len(ts.t), "files": files})


def cmd_spectra(args):
    ts = sim.TimeSeries.read_csv(args.input)
    cols = {}
    omega = None
    for name in args.columns:
        if name not in sim.TimeSeries.COLUMNS:
            raise ValueError(f"unknown column {name!r}")
        omega, cols[name] = sim.psd(ts.column(name), ts.dt, nperseg=args.nperseg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    sim.write_psd_csv(out, omega, cols)
    _emit({"psd": str(out), "columns": list(cols)})


def _common(p, psi=True):
    p.add_argument("--omega-r", type=float, required=True, help="rotor speed [rad/s]")
    p.add_argument("--n", type=int, default=1, help="harmonic number")
    if psi:
        p.add_argument("--psi-o", type=float, default=0.0, help="azimuth offset [deg]")


def _grid_args(p, w_min=1e-2, w_max=1e1, points=200):
    p.add_argument("--w-min", type=float, default=w_min, help="grid start [rad/s]")
    p.add_argument("--w-max", type=float, default=w_max, help="grid end [rad/s]")
    p.add_argument("--points", type=int, default=points, help="log-spaced grid points")


def _sweep_args(p):
    p.add_argument("--eval-omega", type=float, nargs="+", help="explicit evaluation frequencies [rad/s]")
    p.add_argument("--psi-min", type=float, default=-90.0, help="sweep start [deg]")
    p.add_argument("--psi-max", type=float, default=90.0, help="sweep end [deg]")
    p.add_argument("--step", type=float, default=0.1, help="sweep step [deg]")
    _grid_args(p, 0.1, 1.0, 30)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mbcoffset", allow_abbrev=False,
                                 description="Azimuth-offset MBC analysis toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_, allow_abbrev=False, description=help_)
        p.set_defaults(func=fn)
        return p

    p = add("offset", cmd_offset, "optimal azimuth offset (analytic or grid search)")
    p.add_argument("--model", nargs="+", required=True, help="rotor JSON file(s); several give the median optimum")
    _common(p, psi=False)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--analytic", action="store_true", help="closed-form offset")
    g.add_argument("--grid-search", action="store_true", help="R# grid search")
    _sweep_args(p)
    p.add_argument("--out", help="sweep CSV (single-model grid search)")

    p = add("frf", cmd_frf, "export the transformed 2x2 plant FRF")
    p.add_argument("--model", required=True, help="rotor JSON file")
    _common(p)
    _grid_args(p)
    p.add_argument("--out", required=True, help="output CSV")

    p = add("rga", cmd_rga, "R# sweep over azimuth offsets")
    p.add_argument("--model", required=True, help="rotor JSON file")
    _common(p, psi=False)
    _sweep_args(p)
    p.add_argument("--out", required=True, help="output CSV")

    p = add("margins", cmd_margins, "classical and Gershgorin-extended loop margins")
    p.add_argument("--model", required=True, help="rotor JSON file")
    _common(p)
    p.add_argument("--ci", type=float, nargs="+", required=True, help="integrator gain(s)")
    p.add_argument("--loop", type=int, default=1, choices=(1, 2), help="loop index")
    p.add_argument("--convention", choices=("row", "column"), default="row", help="Gershgorin radius convention")
    p.add_argument("--bands", help="optional Gershgorin band CSV")
    _grid_args(p, 1e-3, 1e2, 500)
    p.add_argument("--out", help="optional report JSON file")

    p = add("ssmbc", cmd_ssmbc, "MBC-transform periodic state-space models")
    p.add_argument("--input", required=True, help="JSON model or family file")
    p.add_argument("--n", type=int, default=1, help="harmonic number")
    p.add_argument("--psi-o", type=float, default=0.0, help="azimuth offset [deg]")
    p.add_argument("--normalized-collective", action="store_true", help="use 1/3 on the collective row")
    p.add_argument("--out", required=True, help="output JSON")

    p = add("simulate", cmd_simulate, "open-loop identification or closed-loop IPC run")
    p.add_argument("--model", required=True, help="rotor JSON file")
    _common(p)
    p.add_argument("--mode", choices=("open", "closed"), default="open", help="simulation type")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--dt", type=float, default=1.0 / 125.0, help="sample time [s]")
    p.add_argument("--duration", type=float, default=2200.0, help="total time [s]")
    p.add_argument("--discard", type=float, default=200.0, help="initial transient removed [s]")
    p.add_argument("--amplitude-deg", type=float, default=1.0, help="RBS amplitude [deg] (open)")
    p.add_argument("--clock-period", type=int, default=1, help="RBS clock period [samples] (open)")
    p.add_argument("--nperseg", type=int, default=sim.WELCH_NPERSEG, help="Welch window length (open)")
    p.add_argument("--w-min", type=float, default=0.1, help="FRF estimate band start [rad/s] (open)")
    p.add_argument("--w-max", type=float, default=1.0, help="FRF estimate band end [rad/s] (open)")
    p.add_argument("--ci", type=float, nargs="+", default=[0.0], help="integrator gain(s) (closed)")
    p.add_argument("--dist-amplitude", type=float, default=0.0, help="1P blade load amplitude (closed)")
    p.add_argument("--dist-phase-deg", type=float, default=0.0, help="1P load phase [deg] (closed)")
    p.add_argument("--dist-mean", type=float, default=0.0, help="constant blade load (closed)")
    p.add_argument("--noise-std", type=float, default=0.0, help="blade load noise std (closed)")
    p.add_argument("--noise-bandwidth", type=float, default=1.0, help="noise low-pass corner [rad/s] (closed)")
    p.add_argument("--out-dir", default=".", help="output directory")

    p = add("spectra", cmd_spectra, "Welch PSDs of time-series columns")
    p.add_argument("--input", required=True, help="time-series CSV from 'simulate'")
    p.add_argument("--columns", nargs="+", default=["theta_1", "M_1"], help="columns to analyse")
    p.add_argument("--nperseg", type=int, default=sim.WELCH_NPERSEG, help="Welch window length")
    p.add_argument("--out", required=True, help="output CSV")
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except (MBCError, ValueError, KeyError, OSError, ZeroDivisionError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        for attr in ("omega", "s", "time"):
            if getattr(exc, attr, None) is not None:
                v = getattr(exc, attr)
                err[attr] = repr(v) if isinstance(v, complex) else v
        print(_dump(err), file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
