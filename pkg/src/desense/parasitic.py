"""Height changes caused by out-of-plane motion, and the film stretch envelope."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .differential import CellPair
from .model import CellGeometry, DomainError, _as_output, cell_capacitance

# Beyond this in-plane rotation the zero-change assumption is not trusted.
SMALL_ROTATION_LIMIT = math.radians(5.0)


class NotModeledWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ParasiticPose:
    """Out-of-plane and in-plane motion of the inner frame (mm, rad)."""

    z_translation: float = 0.0
    rot_out_of_plane: float = 0.0
    rot_in_plane: float = 0.0
    inner_radius_ri: float = 20.0
    outer_radius_ro: float = 75.0

    def __post_init__(self):
        if not 0 < self.inner_radius_ri < self.outer_radius_ro:
            raise DomainError(
                f"require 0 < ri < ro, got ri={self.inner_radius_ri}, ro={self.outer_radius_ro}"
            )


def height_gain_z(h, z):
    """Height gain sqrt(h^2 + z^2) - h from an out-of-plane translation ``z``."""
    h = np.asarray(h, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(h <= 0):
        raise DomainError("cell height must be positive")
    # rationalized form avoids cancellation for z << h
    return _as_output(z**2 / (np.sqrt(h**2 + z**2) + h))


def height_gain_rotation(h, r_i, theta):
    """Height gain from tilting the inner frame of radius ``r_i`` by ``theta`` about x or y.

    The cell runs radially from r_i to r_i + h; the tilt swings the inner end on
    a circle of radius r_i while the outer end stays put (law of cosines).
    """
    h = np.asarray(h, dtype=float)
    r_i = np.asarray(r_i, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(h <= 0) or np.any(r_i <= 0):
        raise DomainError("cell height and inner radius must be positive")
    # (h+r)^2 + r^2 - 2(h+r) r cos(t) = h^2 + 4 r (h+r) sin^2(t/2)
    q = 4 * r_i * (h + r_i) * np.sin(theta / 2) ** 2
    return _as_output(q / (np.sqrt(h**2 + q) + h))


def tilt_angle(rot_x, rot_y):
    """Angle between the tilted frame normal and z for successive rotations about x then y."""
    c = np.clip(np.cos(rot_x) * np.cos(rot_y), -1.0, 1.0)
    return _as_output(np.arccos(c))


def check_in_plane_rotation(rot_z):
    if abs(rot_z) > SMALL_ROTATION_LIMIT:
        warnings.warn(
            f"in-plane rotation {math.degrees(rot_z):.1f} deg exceeds the small-angle regime; "
            "its effect on capacitance is not modeled",
            NotModeledWarning,
            stacklevel=3,
        )


def apply_parasitic(h, r_i, z=0.0, tilt=0.0):
    """Current height after a tilt then a z translation (sequential composition)."""
    h = np.asarray(h, dtype=float)
    if tilt:
        h = h + height_gain_rotation(h, r_i, tilt)
    if z:
        h = h + height_gain_z(h, z)
    return _as_output(h)


@dataclass(frozen=True)
class StretchReport:
    ok: bool
    min_stretch: float
    max_stretch: float
    max_allowed: float

    @property
    def violation(self) -> str | None:
        if self.min_stretch < 1:
            return f"stretch {self.min_stretch:.3f} < 1 (buckling bound)"
        if self.max_stretch > self.max_allowed:
            return f"stretch {self.max_stretch:.3f} > {self.max_allowed:g} (film failure bound lambda_max)"
        return None


def stretch_feasible(geom: CellGeometry, y_range) -> StretchReport:
    """Check 1 <= (h0 +/- y) / l0 <= lambda_max at both ends of ``y_range``.

    The +/- covers both cells of a facing pair, so a range is feasible only if
    the growing and the shrinking cell stay inside the envelope.
    """
    y = np.asarray(y_range, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise DomainError("displacement range must be finite")
    heights = geom.initial_height_h0 + np.concatenate([y, -y])
    stretch = heights / geom.unstretched_height_l0
    lo, hi = float(stretch.min()), float(stretch.max())
    lam_max = geom.film.max_stretch
    return StretchReport(ok=bool(lo >= 1 and hi <= lam_max), min_stretch=lo, max_stretch=hi, max_allowed=lam_max)


def parasitic_cancellation_residual(pair: CellPair, pose: ParasiticPose) -> float:
    """Change of C1 - C2 (pF) caused by ``pose`` with the frame centered in-plane."""
    check_in_plane_rotation(pose.rot_in_plane)
    c1, c2 = pair.cell_1, pair.cell_2
    h1 = apply_parasitic(c1.initial_height_h0, pose.inner_radius_ri, pose.z_translation, pose.rot_out_of_plane)
    h2 = apply_parasitic(c2.initial_height_h0, pose.inner_radius_ri, pose.z_translation, pose.rot_out_of_plane)
    moved = cell_capacitance(c1, h1 - c1.initial_height_h0) - cell_capacitance(c2, h2 - c2.initial_height_h0)
    return float(moved - pair.initial_offset_dC0)
