"""Least-squares calibration of cell-pair planes and single-cell parabolas."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

# smallest / largest singular value of the centered design below which the
# (x, y) points are treated as collinear
RANK_TOL = 1e-9

PAIR_AXES = {"AC": "y", "BD": "x"}


class DegenerateDesignError(ValueError):
    pass


class ModelMismatchError(ValueError):
    pass


class NonInvertibleError(ValueError):
    pass


@dataclass(frozen=True)
class CalibratedPlane:
    alpha: float
    beta: float
    gamma: float
    fit_rms: float
    condition_indicator: float
    stderr: tuple = (float("nan"),) * 3
    n_points: int = 0
    pair: str = "AC"
    set_id: str = "all"

    def predict(self, x, y):
        return self.alpha * np.asarray(x) + self.beta * np.asarray(y) + self.gamma

    @property
    def primary_axis(self) -> str:
        return PAIR_AXES[self.pair]

    @property
    def primary_slope(self) -> float:
        return self.beta if self.primary_axis == "y" else self.alpha

    @property
    def cross_slope(self) -> float:
        return self.alpha if self.primary_axis == "y" else self.beta

    def to_dict(self) -> dict:
        return {
            "pair": self.pair,
            "set": self.set_id,
            "alpha_pF_per_mm": self.alpha,
            "beta_pF_per_mm": self.beta,
            "gamma_pF": self.gamma,
            "fit_rms_pF": self.fit_rms,
            "condition": self.condition_indicator,
            "stderr": list(self.stderr),
            "n_points": self.n_points,
        }

    @classmethod
    def from_dict(cls, d: dict) -> CalibratedPlane:
        return cls(
            alpha=float(d["alpha_pF_per_mm"]),
            beta=float(d["beta_pF_per_mm"]),
            gamma=float(d["gamma_pF"]),
            fit_rms=float(d["fit_rms_pF"]),
            condition_indicator=float(d.get("condition", float("nan"))),
            stderr=tuple(d.get("stderr", (float("nan"),) * 3)),
            n_points=int(d.get("n_points", 0)),
            pair=d["pair"],
            set_id=str(d.get("set", "all")),
        )


@dataclass(frozen=True)
class CalibratedParabola:
    C0: float
    h0: float
    fit_rms: float
    cell: str = "A"
    set_id: str = "all"

    def predict(self, y):
        return self.C0 / self.h0**2 * (self.h0 + np.asarray(y)) ** 2

    def to_dict(self) -> dict:
        return {"cell": self.cell, "set": self.set_id, "C0_pF": self.C0, "h0_mm": self.h0, "fit_rms_pF": self.fit_rms}


@dataclass(frozen=True)
class DeviationReport:
    rms_mm: float
    max_mm: float
    n_points: int
    calibration_set_id: str
    evaluation_set_id: str
    pair: str = "AC"

    @property
    def is_self_evaluation(self) -> bool:
        return self.calibration_set_id == self.evaluation_set_id

    def to_dict(self) -> dict:
        return asdict(self)


def fit_plane(x, y, dc, *, pair: str = "AC", set_id="all") -> CalibratedPlane:
    """Fit dC = alpha x + beta y + gamma by least squares.

    The slopes come from the 2x2 normal equations of the mean-centered data
    (LU with partial pivoting), after which gamma restores the means. Standard
    errors use the residual variance with n - 3 degrees of freedom.
    """
    x, y, dc = (np.asarray(v, dtype=float).ravel() for v in (x, y, dc))
    n = x.size
    if not (y.size == n and dc.size == n):
        raise ValueError("x, y and dc must have equal length")
    if n < 3:
        raise DegenerateDesignError(f"need at least 3 points to fit a plane, got {n}")

    xm, ym, cm = x.mean(), y.mean(), dc.mean()
    X = np.column_stack([x - xm, y - ym])
    sv = np.linalg.svd(X, compute_uv=False)
    if sv[0] == 0 or sv[-1] / sv[0] < RANK_TOL:
        raise DegenerateDesignError(
            f"(x, y) points are collinear or coincident: n={n}, "
            f"x in [{x.min():g}, {x.max():g}], y in [{y.min():g}, {y.max():g}], singular values {sv}"
        )
    normal = X.T @ X
    alpha, beta = np.linalg.solve(normal, X.T @ (dc - cm))
    gamma = cm - alpha * xm - beta * ym

    resid = dc - (alpha * x + beta * y + gamma)
    rss = float(resid @ resid)
    full = np.column_stack([x, y, np.ones(n)])
    gram = full.T @ full
    if n > 3:
        cov = rss / (n - 3) * np.linalg.inv(gram)
        stderr = tuple(float(v) for v in np.sqrt(np.diag(cov)))
    else:
        stderr = (float("nan"),) * 3
    return CalibratedPlane(
        alpha=float(alpha),
        beta=float(beta),
        gamma=float(gamma),
        fit_rms=float(np.sqrt(rss / n)),
        condition_indicator=float(np.linalg.cond(normal)),
        stderr=stderr,
        n_points=n,
        pair=pair,
        set_id=str(set_id),
    )


def fit_parabola(y, c, *, cell: str = "A", set_id="all") -> CalibratedParabola:
    """Fit C(y) = (C0 / h0^2) (h0 + y)^2 through a quadratic least-squares fit.

    With c2 y^2 + c1 y + c0 fitted, the model identifies C0 = c0 and
    h0 = 2 c0 / c1. The reported rms is that of the reparameterized curve.
    """
    y = np.asarray(y, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    if y.size != c.size:
        raise ValueError("y and c must have equal length")
    if np.unique(y).size < 3:
        raise DegenerateDesignError("need at least 3 distinct y values")
    if np.any(c <= 0):
        raise ValueError("capacitances must be positive")
    c2, c1, c0 = np.polynomial.polynomial.polyfit(y, c, 2)[::-1]
    if c2 <= 0:
        raise ModelMismatchError(f"fitted curvature {c2:.4g} pF/mm^2 is not convex; data do not follow C ~ h^2")
    if c1 <= 0 or c0 <= 0:
        raise ModelMismatchError(f"fitted C0 = {c0:.4g} pF and slope {c1:.4g} pF/mm do not give a positive h0")
    C0 = float(c0)
    h0 = float(2 * c0 / c1)
    resid = c - C0 / h0**2 * (h0 + y) ** 2
    return CalibratedParabola(C0=C0, h0=h0, fit_rms=float(np.sqrt(np.mean(resid**2))), cell=cell, set_id=str(set_id))


def deviation(plane: CalibratedPlane, x, y, dc, *, calibration_set_id=None, evaluation_set_id="?") -> DeviationReport:
    """Position error (mm) of inverting ``plane`` along its pair's primary axis.

    The secondary coordinate is taken as known, so each reading gives
    primary = (dc - cross * secondary - gamma) / primary_slope.
    """
    x, y, dc = (np.asarray(v, dtype=float).ravel() for v in (x, y, dc))
    primary, cross = plane.primary_slope, plane.cross_slope
    if not abs(primary) > 10 * abs(cross) or primary == 0:
        raise NonInvertibleError(
            f"pair {plane.pair}: primary slope {primary:.4g} pF/mm is not dominant over cross slope {cross:.4g}"
        )
    if plane.primary_axis == "y":
        true, secondary = y, x
    else:
        true, secondary = x, y
    est = (dc - cross * secondary - plane.gamma) / primary
    err = np.abs(est - true)
    return DeviationReport(
        rms_mm=float(np.sqrt(np.mean(err**2))),
        max_mm=float(err.max()),
        n_points=int(err.size),
        calibration_set_id=str(plane.set_id if calibration_set_id is None else calibration_set_id),
        evaluation_set_id=str(evaluation_set_id),
        pair=plane.pair,
    )


def pair_data(samples: Sequence, pair: str):
    """(x, y, dC) arrays for ``pair`` from samples carrying a true pose."""
    x = np.array([s.true_pose.x for s in samples])
    y = np.array([s.true_pose.y for s in samples])
    dc = np.array([s.delta_AC if pair == "AC" else s.delta_BD for s in samples])
    return x, y, dc


def cell_data(samples: Sequence, cell: str):
    """(x, y, C) arrays for one cell."""
    x = np.array([s.true_pose.x for s in samples])
    y = np.array([s.true_pose.y for s in samples])
    c = np.array([getattr(s, f"c_{cell}") for s in samples])
    return x, y, c


def calibrate_sets(samples_by_set: dict, pair: str) -> dict:
    """Plane per set plus one fitted on all points (key ``"all"``)."""
    planes = {}
    for sid, samples in samples_by_set.items():
        planes[str(sid)] = fit_plane(*pair_data(samples, pair), pair=pair, set_id=sid)
    everything = [s for group in samples_by_set.values() for s in group]
    planes["all"] = fit_plane(*pair_data(everything, pair), pair=pair, set_id="all")
    return planes


def deviation_matrix(samples_by_set: dict, pair: str, planes: dict | None = None) -> list:
    """Every per-set calibration evaluated on every set."""
    planes = planes or calibrate_sets(samples_by_set, pair)
    out = []
    for cal_id in samples_by_set:
        plane = planes[str(cal_id)]
        for eval_id, samples in samples_by_set.items():
            out.append(
                deviation(plane, *pair_data(samples, pair), calibration_set_id=cal_id, evaluation_set_id=eval_id)
            )
    return out


def mean_cross_rms(reports: Sequence[DeviationReport]) -> float:
    off = [r.rms_mm for r in reports if not r.is_self_evaluation]
    return float(np.mean(off))
