"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical or degeneracy
error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import calibration as cal
from . import config as cfgmod
from . import records
from .design import sweep, write_sweep_csv
from .gain import GainFitError, gain_table
from .model import DomainError
from .parasitic import stretch_feasible
from .reconstruction import RobotGeometry, SingularSystemError, estimate_pose, propagate_error, worst_case_error
from .simulator import run_grid_protocol, run_sine_protocol, split_sets

log = logging.getLogger("desense")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

CELL_AXIS = {"A": "y", "C": "y", "B": "x", "D": "x"}

NUMERIC_ERRORS = (
    DomainError,
    cal.DegenerateDesignError,
    cal.ModelMismatchError,
    cal.NonInvertibleError,
    SingularSystemError,
    GainFitError,
)


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def _config(args) -> dict:
    cfg = cfgmod.load_config(args.config, args.scenario)
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "noise_std", None) is not None:
        cfg["noise"]["std_dev_pF"] = args.noise_std
    return cfg


def cmd_simulate(args) -> int:
    cfg = _config(args)
    layout = cfgmod.layout_from_config(cfg)
    noise = cfgmod.noise_from_config(cfg)
    stroke = float(cfg["stroke_mm"])
    for name, geom in layout.cells().items():
        report = stretch_feasible(geom, (-stroke, stroke))
        if not report.ok:
            raise cfgmod.ConfigError(
                f"stroke +/-{stroke:g} mm infeasible for cell {name}: {report.violation}; "
                f"require 1 <= (h0 +/- y)/l0 <= lambda_max"
            )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.protocol == "grid":
        samples = run_grid_protocol(layout, cfgmod.grid_from_config(cfg), noise)
        for set_id, group in split_sets(samples).items():
            path = out / f"set{set_id}.csv"
            records.write_samples(group, path)
            caps = np.array([s.capacitances() for s in group])
            print(f"{path}: {len(group)} samples, C in [{caps.min():.1f}, {caps.max():.1f}] pF")
        if args.emit_plot_data:
            records.write_plot_data(samples, out / "plot_data.csv")
    else:
        sine = cfg["sine"]
        for run_id, freq in enumerate(sine["frequencies_hz"]):
            run = run_sine_protocol(
                layout,
                sine["axis"],
                float(sine["amplitude_mm"]),
                float(freq),
                float(sine["cycles"]),
                noise,
                samples_per_cycle=int(sine["samples_per_cycle"]),
                run_id=run_id,
            )
            path = out / f"sine_{freq:g}Hz.csv"
            records.write_sine(run, path)
            print(f"{path}: {run.t.size} samples, cell {run.cell}, C in "
                  f"[{run.capacitance.min():.1f}, {run.capacitance.max():.1f}] pF")
    return 0


def _load_sets(paths) -> dict:
    samples = []
    for p in paths:
        samples.extend(records.read_samples(p))
    if not samples:
        raise records.FormatError("no samples read")
    return split_sets(samples)


def cmd_calibrate(args) -> int:
    sets = _load_sets(args.samples)
    planes = []
    for pair in args.pairs.split(","):
        planes.extend(cal.calibrate_sets(sets, pair).values())
    parabolas = []
    everything = [s for g in sets.values() for s in g]
    for cell in filter(None, (args.one_cell or "").split(",")):
        if cell not in CELL_AXIS:
            raise cfgmod.ConfigError(f"unknown cell {cell!r}; choose from {sorted(CELL_AXIS)}")
        x, y, c = cal.cell_data(everything, cell)
        u = y if CELL_AXIS[cell] == "y" else x
        # the cell grows along +u or -u depending on mounting; take the side where C rises
        if np.polyfit(u, c, 1)[0] < 0:
            u = -u
        parabolas.append(cal.fit_parabola(u, c, cell=cell))
    if args.out:
        records.write_calibration(planes, parabolas, args.out)

    print(f"{'Cell-pair':<10}{'alpha [pF/mm]':>15}{'beta [pF/mm]':>15}{'gamma [pF]':>12}{'rms [pF]':>10}")
    for p in planes:
        if p.set_id == "all":
            print(f"{p.pair:<10}{p.alpha:>15.1f}{p.beta:>15.1f}{p.gamma:>12.0f}{p.fit_rms:>10.2f}")
    for p in parabolas:
        print(f"cell {p.cell}: C0 = {p.C0:.1f} pF, h0 = {p.h0:.2f} mm (rms {p.fit_rms:.2f} pF)")
    return 0


def cmd_evaluate(args) -> int:
    planes, _ = records.read_calibration(args.calibration)
    sets = _load_sets(args.samples)
    reports = []
    for pair in args.pairs.split(","):
        by_set = {p.set_id: p for p in planes if p.pair == pair and p.set_id != "all"}
        if not by_set:
            raise cfgmod.ConfigError(f"calibration file has no per-set planes for pair {pair}")
        for cal_id, plane in by_set.items():
            for eval_id, group in sets.items():
                reports.append(
                    cal.deviation(plane, *cal.pair_data(group, pair), calibration_set_id=cal_id,
                                  evaluation_set_id=eval_id)
                )
    if args.out:
        records.write_deviations(reports, args.out)
    eval_ids = list(sets)
    for pair in args.pairs.split(","):
        print(f"cell-pair {pair} (calibration set x evaluation set; * = self-evaluation)")
        print(f"{'cal set':<9}{'dev':<5}" + "".join(f"{'set ' + str(e):>11}" for e in eval_ids))
        rows = [r for r in reports if r.pair == pair]
        for cal_id in dict.fromkeys(r.calibration_set_id for r in rows):
            mine = {r.evaluation_set_id: r for r in rows if r.calibration_set_id == cal_id}
            for label, attr in (("max", "max_mm"), ("RMS", "rms_mm")):
                cells = []
                for e in eval_ids:
                    r = mine[str(e)]
                    mark = "*" if r.is_self_evaluation else " "
                    cells.append(f"{getattr(r, attr):>9.3f}{mark} ")
                print(f"{cal_id:<9}{label:<5}" + "".join(cells))
        print(f"mean off-diagonal RMS: {cal.mean_cross_rms(rows):.3f} mm")
    return 0


def _planes_by_pair(path, set_id: str) -> dict:
    planes, _ = records.read_calibration(path)
    chosen = {p.pair: p for p in planes if p.set_id == set_id}
    if not {"AC", "BD"} <= chosen.keys():
        raise cfgmod.ConfigError(f"{path}: need AC and BD planes for set {set_id!r}")
    return chosen


def _robot(args) -> RobotGeometry:
    cfg = cfgmod.load_config(args.config, None)
    robot = cfgmod.robot_from_config(cfg)
    l12 = args.l12 if args.l12 is not None else robot.plane_separation_l12
    lp = args.lp if args.lp is not None else robot.tip_extension_lp
    try:
        return RobotGeometry(l12, lp)
    except ValueError as exc:
        raise cfgmod.ConfigError(str(exc)) from exc


def cmd_reconstruct(args) -> int:
    geom = _robot(args)
    planes1 = _planes_by_pair(args.calibration, args.set)
    planes2 = _planes_by_pair(args.calibration2 or args.calibration, args.set)
    s1 = records.read_samples(args.samples)
    s2 = records.read_samples(args.samples2) if args.samples2 else s1
    if len(s1) != len(s2):
        raise records.FormatError("sensor sample files differ in length")
    estimates = [estimate_pose(planes1, planes2, a, b, geom, args.sigma, args.sigma) for a, b in zip(s1, s2)]
    if args.out:
        records.write_poses(estimates, args.out)
    for e in estimates[: args.show]:
        print(f"t={e.t_s:8.1f} s  s1=({e.sensor1_xy[0]:7.3f}, {e.sensor1_xy[1]:7.3f})  "
              f"tip=({e.tip_xy[0]:7.3f}, {e.tip_xy[1]:7.3f}) +/- {e.tip_sigma:.3f} mm")
    print(f"{len(estimates)} pose estimates")
    return 0


def cmd_gain(args) -> int:
    runs = [records.read_sine(p) for p in args.runs]
    rows = gain_table(runs, min_r2=args.min_r2)
    print(f"{'freq [Hz]':>10}{'G [pF/mm]':>12}{'G [dB]':>9}")
    for r in rows:
        print(f"{r.frequency:>10g}{r.gain:>12.3f}{r.gain_db:>9.3f}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("freq_hz,gain_pF_per_mm,gain_db\n")
            for r in rows:
                fh.write(f"{r.frequency:.6g},{r.gain:.6g},{r.gain_db:.6g}\n")
    return 0


def cmd_propagate(args) -> int:
    geom = _robot(args)
    sigma, max_dev = args.sigma, args.max_dev
    if args.deviations:
        reports = [r for r in records.read_deviations(args.deviations) if not r.is_self_evaluation]
        if not reports:
            raise cfgmod.ConfigError(f"{args.deviations}: no cross-set deviations")
        sigma = float(np.mean([r.rms_mm for r in reports])) if sigma is None else sigma
        max_dev = max(r.max_mm for r in reports) if max_dev is None else max_dev
    if sigma is None:
        raise cfgmod.ConfigError("give --sigma or --deviations")
    print(f"lp = {geom.tip_extension_lp:g} mm, l12 = {geom.plane_separation_l12:g} mm")
    print(f"sensor sigma: {sigma:.3f} mm -> end-effector sigma: {propagate_error(sigma, sigma, geom):.3f} mm")
    if max_dev is not None:
        print(f"max deviation: {max_dev:.3f} mm -> worst case at end effector: {worst_case_error(max_dev, geom):.3f} mm")
    return 0


def cmd_design_sweep(args) -> int:
    cfg = cfgmod.load_config(args.config, None)
    film = cfgmod.film_from_config(cfg)
    rows = sweep(
        film,
        _floats(args.ri),
        _floats(args.ro),
        _floats(args.theta),
        _floats(args.prestretch) if args.prestretch else None,
        [int(v) for v in _floats(args.layers)] if args.layers else None,
        y_stroke=args.stroke,
        mismatch=args.mismatch,
        workers=args.workers,
    )
    if args.out:
        write_sweep_csv(rows, args.out)
    print(f"{'ri':>6}{'ro':>6}{'theta':>7}{'pre':>5}{'lay':>4}{'sens':>9}{'linerr':>10}{'zgain':>9}{'ok':>4}{'C0':>9}")
    for r in rows:
        print(f"{r['ri_mm']:>6g}{r['ro_mm']:>6g}{r['theta_deg']:>7g}{r['prestretch']:>5g}{r['layers']:>4}"
              f"{r['sens_pF_per_mm']:>9.2f}{r['linerr']:>10.2e}{r['zgain_per_mm']:>9.4f}"
              f"{'y' if r['stretch_ok'] else 'n':>4}{r['C0_pF']:>9.1f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="desense", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p, scenario=True):
        p.add_argument("--config", help="sensor/experiment JSON config")
        if scenario:
            p.add_argument("--scenario", choices=sorted(cfgmod.SCENARIOS), help="built-in base scenario")
        else:
            p.set_defaults(scenario=None)

    p = sub.add_parser("simulate", help="generate synthetic capacitance samples")
    with_config(p)
    p.add_argument("--protocol", choices=("grid", "sine"), default="grid")
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-std", type=float, help="noise std in pF (overrides config)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--emit-plot-data", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="fit calibration planes (and optional one-cell parabolas)")
    p.add_argument("samples", nargs="+")
    p.add_argument("--pairs", default="AC,BD")
    p.add_argument("--one-cell", help="comma-separated cells to fit with the one-cell parabola")
    p.add_argument("--out", help="calibration JSON")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("evaluate", help="cross-set deviation matrix")
    p.add_argument("--calibration", required=True)
    p.add_argument("samples", nargs="+")
    p.add_argument("--pairs", default="AC,BD")
    p.add_argument("--out", help="deviation CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("reconstruct", help="positions of both sensor planes and the needle tip")
    with_config(p, scenario=False)
    p.add_argument("--calibration", required=True, help="sensor 1 calibration JSON")
    p.add_argument("--calibration2", help="sensor 2 calibration JSON (default: sensor 1's)")
    p.add_argument("--samples", required=True, help="sensor 1 samples CSV")
    p.add_argument("--samples2", help="sensor 2 samples CSV (default: sensor 1's)")
    p.add_argument("--set", default="all", help="which calibrated planes to use")
    p.add_argument("--sigma", type=float, help="per-sensor position sigma in mm")
    p.add_argument("--lp", type=float)
    p.add_argument("--l12", type=float)
    p.add_argument("--show", type=int, default=5)
    p.add_argument("--out", help="pose estimates, JSON lines")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("gain", help="displacement-to-capacitance gain table from sine runs")
    p.add_argument("runs", nargs="+")
    p.add_argument("--min-r2", type=float, default=0.9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gain)

    p = sub.add_parser("propagate", help="end-effector error from sensor errors")
    with_config(p, scenario=False)
    p.add_argument("--sigma", type=float)
    p.add_argument("--max-dev", type=float)
    p.add_argument("--deviations", help="deviation CSV from 'evaluate'")
    p.add_argument("--lp", type=float)
    p.add_argument("--l12", type=float)
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("design-sweep", help="score sensor geometries")
    with_config(p, scenario=False)
    p.add_argument("--ri", default="15,20,30,40")
    p.add_argument("--ro", default="75")
    p.add_argument("--theta", default="90", help="section angles in degrees")
    p.add_argument("--prestretch")
    p.add_argument("--layers")
    p.add_argument("--stroke", type=float, default=15.0)
    p.add_argument("--mismatch", type=float, default=0.02)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_design_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, records.FormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
