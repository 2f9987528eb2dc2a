"""Positions from calibrated planes, needle-tip extrapolation and its error budget.

Sensor 1 is the plane nearer the needle tip. With the tip ``lp`` beyond sensor 1
and the sensors ``l12`` apart, the tip lies on the line through both sensor
points:

    tip = p1 + (lp / l12) (p1 - p2)

so an error e1 at sensor 1 reaches the tip scaled by (lp + l12) / l12 and an
error e2 at sensor 2 scaled by lp / l12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calibration import CalibratedPlane

SINGULAR_TOL = 1e-9


class SingularSystemError(ValueError):
    pass


@dataclass(frozen=True)
class RobotGeometry:
    plane_separation_l12: float = 200.0
    tip_extension_lp: float = 200.0

    def __post_init__(self):
        if not self.plane_separation_l12 > 0:
            raise ValueError("plane_separation_l12 must be > 0")
        if not self.tip_extension_lp >= 0:
            raise ValueError("tip_extension_lp must be >= 0")

    @property
    def near_gain(self) -> float:
        """Tip error per unit error at sensor 1."""
        return (self.tip_extension_lp + self.plane_separation_l12) / self.plane_separation_l12

    @property
    def far_gain(self) -> float:
        """Tip error per unit error at sensor 2."""
        return self.tip_extension_lp / self.plane_separation_l12


@dataclass(frozen=True)
class PoseEstimate:
    sensor1_xy: tuple
    sensor2_xy: tuple
    tip_xy: tuple
    tip_sigma: float
    t_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "t_s": self.t_s,
            "s1": {"x": self.sensor1_xy[0], "y": self.sensor1_xy[1]},
            "s2": {"x": self.sensor2_xy[0], "y": self.sensor2_xy[1]},
            "tip": {"x": self.tip_xy[0], "y": self.tip_xy[1]},
            "tip_sigma_mm": self.tip_sigma,
        }


def reconstruct_xy(plane_AC: CalibratedPlane, plane_BD: CalibratedPlane, sample) -> tuple:
    """Solve both calibrated planes jointly for the in-plane position (mm)."""
    A = np.array([[plane_AC.alpha, plane_AC.beta], [plane_BD.alpha, plane_BD.beta]])
    scale = np.abs(A).max()
    if scale == 0 or abs(np.linalg.det(A)) < SINGULAR_TOL * scale**2:
        raise SingularSystemError(f"calibrated planes are not independent: {A.tolist()}")
    rhs = np.array([sample.delta_AC - plane_AC.gamma, sample.delta_BD - plane_BD.gamma])
    x, y = np.linalg.solve(A, rhs)
    return float(x), float(y)


def fuse_tip(est1, est2, geom: RobotGeometry):
    """Extrapolate the two sensor points to the end-effector plane."""
    p1 = np.asarray(est1, dtype=float)
    p2 = np.asarray(est2, dtype=float)
    tip = p1 + geom.far_gain * (p1 - p2)
    return tuple(float(v) for v in tip) if tip.ndim == 1 else tip


def tilt_angles(est1, est2, geom: RobotGeometry) -> tuple:
    """Inclination (rad) of the sensor-1 to sensor-2 line about y (from x) and about x (from y)."""
    d = np.asarray(est1, dtype=float) - np.asarray(est2, dtype=float)
    return float(math.atan2(d[0], geom.plane_separation_l12)), float(math.atan2(d[1], geom.plane_separation_l12))


def propagate_error(sigma1: float, sigma2: float, geom: RobotGeometry) -> float:
    """Standard deviation of the tip error for independent Gaussian sensor errors."""
    if sigma1 < 0 or sigma2 < 0:
        raise ValueError("standard deviations must be >= 0")
    return math.hypot(geom.near_gain * sigma1, geom.far_gain * sigma2)


def worst_case_error(max_dev: float, geom: RobotGeometry) -> float:
    """Tip error when both sensors err by ``max_dev`` in opposite directions."""
    if max_dev < 0:
        raise ValueError("max_dev must be >= 0")
    return max_dev * (geom.far_gain + geom.near_gain)


def axis_sigma(plane: CalibratedPlane) -> float:
    """Position noise (mm) implied by a plane's fit residual along its primary axis."""
    return plane.fit_rms / abs(plane.primary_slope)


def estimate_pose(planes1: dict, planes2: dict, sample1, sample2, geom: RobotGeometry, sigma1=None, sigma2=None):
    """Full pose estimate from one sample of each sensor plane.

    ``planes*`` map pair names ("AC", "BD") to calibrated planes. Missing
    sigmas default to the worse of the two pair fit residuals in mm.
    """
    p1 = reconstruct_xy(planes1["AC"], planes1["BD"], sample1)
    p2 = reconstruct_xy(planes2["AC"], planes2["BD"], sample2)
    if sigma1 is None:
        sigma1 = max(axis_sigma(planes1["AC"]), axis_sigma(planes1["BD"]))
    if sigma2 is None:
        sigma2 = max(axis_sigma(planes2["AC"]), axis_sigma(planes2["BD"]))
    return PoseEstimate(
        sensor1_xy=p1,
        sensor2_xy=p2,
        tip_xy=fuse_tip(p1, p2, geom),
        tip_sigma=propagate_error(sigma1, sigma2, geom),
        t_s=float(getattr(sample1, "t_s", 0.0)),
    )
