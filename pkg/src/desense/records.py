"""On-disk formats: sample/sine CSVs, calibration JSON, deviation CSV, pose JSON lines."""

from __future__ import annotations

import csv
import json

import numpy as np

from .calibration import CalibratedParabola, CalibratedPlane, DeviationReport
from .simulator import CapacitanceSample, FramePose, SineRun

SAMPLE_HEADER = [
    "set", "index", "t_s", "x_mm", "y_mm", "z_mm", "rotx_rad", "roty_rad", "rotz_rad",
    "cA_pF", "cB_pF", "cC_pF", "cD_pF",
]
SINE_HEADER = ["axis", "cell", "freq_hz", "t_s", "disp_mm", "c_pF"]
DEVIATION_HEADER = ["pair", "calibration_set", "evaluation_set", "max_mm", "rms_mm", "n_points", "self_evaluation"]


class FormatError(ValueError):
    pass


def _g(v: float) -> str:
    return f"{v:.6g}"


def write_samples(samples, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SAMPLE_HEADER)
        for s in samples:
            p = s.true_pose or FramePose(*(float("nan"),) * 6)
            w.writerow(
                [s.set_id, s.index, _g(s.t_s), _g(p.x), _g(p.y), _g(p.z), _g(p.rot_x), _g(p.rot_y), _g(p.rot_z)]
                + [_g(c) for c in s.capacitances()]
            )


def read_samples(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(SAMPLE_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise FormatError(f"{path}: missing columns {sorted(missing)}")
        out = []
        for row in reader:
            try:
                pose = FramePose(
                    float(row["x_mm"]), float(row["y_mm"]), float(row["z_mm"]),
                    float(row["rotx_rad"]), float(row["roty_rad"]), float(row["rotz_rad"]),
                )
                out.append(
                    CapacitanceSample(
                        float(row["cA_pF"]), float(row["cB_pF"]), float(row["cC_pF"]), float(row["cD_pF"]),
                        t_s=float(row["t_s"]),
                        true_pose=None if np.isnan(pose.x) else pose,
                        set_id=int(row["set"]),
                        index=int(row["index"]),
                    )
                )
            except ValueError as exc:
                raise FormatError(f"{path}, line {reader.line_num}: {exc}") from exc
    return out


def write_sine(run: SineRun, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SINE_HEADER)
        for t, d, c in zip(run.t, run.displacement, run.capacitance):
            w.writerow([run.axis, run.cell, _g(run.frequency), repr(float(t)), repr(float(d)), repr(float(c))])


def read_sine(path) -> SineRun:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise FormatError(f"{path}: no rows")
    try:
        freq = float(rows[0]["freq_hz"])
        t = np.array([float(r["t_s"]) for r in rows])
        d = np.array([float(r["disp_mm"]) for r in rows])
        c = np.array([float(r["c_pF"]) for r in rows])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return SineRun(freq, rows[0]["axis"], rows[0]["cell"], t, d, c)


def write_calibration(planes, parabolas, path) -> None:
    doc = {"planes": [p.to_dict() for p in planes], "parabolas": [p.to_dict() for p in parabolas]}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_calibration(path):
    with open(path) as fh:
        doc = json.load(fh)
    try:
        planes = [CalibratedPlane.from_dict(d) for d in doc["planes"]]
        parabolas = [
            CalibratedParabola(d["C0_pF"], d["h0_mm"], d["fit_rms_pF"], d["cell"], str(d["set"]))
            for d in doc.get("parabolas", [])
        ]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: malformed calibration document ({exc})") from exc
    return planes, parabolas


def write_deviations(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DEVIATION_HEADER)
        for r in reports:
            w.writerow(
                [r.pair, r.calibration_set_id, r.evaluation_set_id, _g(r.max_mm), _g(r.rms_mm), r.n_points,
                 int(r.is_self_evaluation)]
            )


def read_deviations(path) -> list:
    with open(path, newline="") as fh:
        return [
            DeviationReport(
                rms_mm=float(r["rms_mm"]),
                max_mm=float(r["max_mm"]),
                n_points=int(r["n_points"]),
                calibration_set_id=r["calibration_set"],
                evaluation_set_id=r["evaluation_set"],
                pair=r["pair"],
            )
            for r in csv.DictReader(fh)
        ]


def write_poses(estimates, path) -> None:
    with open(path, "w") as fh:
        for e in estimates:
            fh.write(json.dumps(e.to_dict(), sort_keys=True) + "\n")


def write_plot_data(samples, path) -> None:
    """Per-sample (x, y, C) and (x, y, dC) columns for external surface plots."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["set", "x_mm", "y_mm", "cA_pF", "cB_pF", "cC_pF", "cD_pF", "dC_AC_pF", "dC_BD_pF"])
        for s in samples:
            p = s.true_pose
            w.writerow(
                [s.set_id, _g(p.x), _g(p.y)] + [_g(c) for c in s.capacitances()] + [_g(s.delta_AC), _g(s.delta_BD)]
            )
