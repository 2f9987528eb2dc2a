"""Design-space exploration over the circular-sector cell layout.

Cell shape from (ri, ro, theta): the trapezoid takes the two chords of the
annular sector as bases and the radial span as its height,

    inner base = 2 ri sin(theta/2)     (on the inner frame, grows with ri)
    outer base = 2 ro sin(theta/2)     (on the outer frame)
    h0         = ro - ri

For theta = 90 deg, ro = 75 mm, ri = 20 mm this gives (28.3, 106.1, 55) mm,
which the prototype rounds to (30, 100, 55) mm. The inner base is stored as
``lower_base_bl`` and the outer as ``upper_base_bu``, matching those values.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable

from .differential import CellPair, differential_sensitivity, linearity_error
from .model import CellGeometry, DomainError, MaterialFilm, flat_capacitance
from .parasitic import stretch_feasible

log = logging.getLogger(__name__)

R_MAX = 75.0
DEFAULT_MISMATCH = 0.02

SWEEP_HEADER = [
    "ri_mm",
    "ro_mm",
    "theta_deg",
    "prestretch",
    "layers",
    "sens_pF_per_mm",
    "linerr",
    "zgain_per_mm",
    "stretch_ok",
    "C0_pF",
]


@dataclass(frozen=True)
class DesignPoint:
    inner_radius_ri: float
    outer_radius_ro: float
    section_angle: float  # rad
    film: MaterialFilm
    y_stroke: float = 15.0
    r_max: float = R_MAX

    def __post_init__(self):
        if not 0 < self.inner_radius_ri < self.outer_radius_ro <= self.r_max:
            raise DomainError(
                f"require 0 < ri < ro <= r_max, got ri={self.inner_radius_ri}, "
                f"ro={self.outer_radius_ro}, r_max={self.r_max}"
            )
        if not 0 < self.section_angle <= math.pi / 2 + 1e-12:
            raise DomainError("section angle must lie in (0, 90] deg for four cells")


@dataclass(frozen=True)
class DesignScore:
    sensitivity: float
    linearity_error: float
    parasitic_z_gain: float
    stretch_ok: bool
    base_capacitance: float


def geometry_from_circle(point: DesignPoint) -> CellGeometry:
    half = math.sin(point.section_angle / 2)
    h0 = point.outer_radius_ro - point.inner_radius_ri
    if h0 <= 0:
        raise DomainError("inner radius leaves no room for the cell (h0 <= 0)")
    return CellGeometry(
        lower_base_bl=2 * point.inner_radius_ri * half,
        upper_base_bu=2 * point.outer_radius_ro * half,
        initial_height_h0=h0,
        film=point.film,
    )


def score_geometry(geom: CellGeometry, y_stroke: float = 15.0, mismatch: float = DEFAULT_MISMATCH) -> DesignScore:
    h0 = geom.initial_height_h0
    stroke = (-y_stroke, y_stroke)
    return DesignScore(
        sensitivity=float(differential_sensitivity(CellPair.identical(geom), 0.0)),
        linearity_error=linearity_error(CellPair.mismatched(geom, mismatch), stroke),
        # d(dh)/d(z^2) at z = 0
        parasitic_z_gain=1.0 / (2.0 * h0),
        stretch_ok=stretch_feasible(geom, stroke).ok,
        base_capacitance=float(flat_capacitance(geom.mean_base * h0, geom.film.initial_thickness_d0, geom.film)),
    )


def score(point: DesignPoint, mismatch: float = DEFAULT_MISMATCH) -> DesignScore:
    return score_geometry(geometry_from_circle(point), point.y_stroke, mismatch)


def film_with_prestretch(film: MaterialFilm, pre_stretch: float, layers: int | None = None) -> MaterialFilm:
    """Same raw sheet under a different equibiaxial pre-stretch (d0 scales as 1/stretch^2)."""
    d0 = film.initial_thickness_d0 * (film.pre_stretch_ratio / pre_stretch) ** 2
    return replace(
        film,
        initial_thickness_d0=d0,
        pre_stretch_ratio=pre_stretch,
        layer_count=film.layer_count if layers is None else layers,
    )


def _sweep_row(args):
    ri, ro, theta_deg, pre, layers, film, y_stroke, mismatch = args
    point = DesignPoint(ri, ro, math.radians(theta_deg), film_with_prestretch(film, pre, layers), y_stroke)
    s = score(point, mismatch)
    return {
        "ri_mm": ri,
        "ro_mm": ro,
        "theta_deg": theta_deg,
        "prestretch": pre,
        "layers": layers,
        "sens_pF_per_mm": s.sensitivity,
        "linerr": s.linearity_error,
        "zgain_per_mm": s.parasitic_z_gain,
        "stretch_ok": s.stretch_ok,
        "C0_pF": s.base_capacitance,
    }


def sweep(
    film: MaterialFilm,
    ri_values: Iterable[float],
    ro_values: Iterable[float] = (R_MAX,),
    theta_deg_values: Iterable[float] = (90.0,),
    prestretch_values: Iterable[float] | None = None,
    layer_values: Iterable[int] | None = None,
    *,
    y_stroke: float = 15.0,
    mismatch: float = DEFAULT_MISMATCH,
    workers: int = 1,
) -> list:
    """Score the Cartesian product of the given values, in input order.

    Points that are geometrically impossible (ri >= ro, bad angle, pre-stretch
    at or above the failure stretch) are dropped; stretch-infeasible designs
    are kept with ``stretch_ok = False``.
    """
    prestretch_values = (film.pre_stretch_ratio,) if prestretch_values is None else prestretch_values
    layer_values = (film.layer_count,) if layer_values is None else layer_values
    jobs = []
    for ri, ro, th, pre, layers in itertools.product(
        ri_values, ro_values, theta_deg_values, prestretch_values, layer_values
    ):
        try:
            DesignPoint(ri, ro, math.radians(th), film_with_prestretch(film, pre, layers), y_stroke)
        except DomainError as exc:
            log.debug("skipping design point ri=%s ro=%s theta=%s: %s", ri, ro, th, exc)
            continue
        jobs.append((ri, ro, th, pre, layers, film, y_stroke, mismatch))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_row, jobs))
    return [_sweep_row(j) for j in jobs]


def write_sweep_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_HEADER)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})
