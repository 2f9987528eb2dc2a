"""One-cell capacitance model of a trapezoid dielectric-elastomer cell.

Lengths are in mm and capacitances in pF at every interface. The only SI
quantity is the vacuum permittivity (F/m), which is folded into
``MaterialFilm.permittivity`` (pF/mm) before any formula is evaluated.

The film is treated as incompressible: stretching a cell from its initial
height h0 to h thins it to d0 * h0 / h, which turns the flat-capacitor
relation into C = k * h**2 with k = eps_r * eps_0 * b / (h0 * d0).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

VACUUM_PERMITTIVITY = 8.854e-12  # F/m

# F/m -> pF/mm
_PF_PER_MM = 1e12 * 1e-3


class DomainError(ValueError):
    """Raised when an input lies outside a formula's physical domain."""


@dataclass(frozen=True)
class MaterialFilm:
    """Dielectric film after pre-stretch.

    Attributes:
        relative_permittivity: Relative dielectric constant of the film (-).
        initial_thickness_d0: Film thickness after pre-stretch (mm).
        pre_stretch_ratio: In-plane pre-stretch applied before mounting (-).
        max_stretch: Stretch at film failure (-). The acrylic default of 6 is
            the "film limit (6x6)" figure, never formally stated as a bound.
        layer_count: Number of stacked electrode layers; a pure multiplier on
            capacitance and sensitivity.
        vacuum_permittivity: Permittivity of free space (F/m).
    """

    relative_permittivity: float
    initial_thickness_d0: float
    pre_stretch_ratio: float = 3.0
    max_stretch: float = 6.0
    layer_count: int = 1
    vacuum_permittivity: float = VACUUM_PERMITTIVITY

    def __post_init__(self):
        if not self.relative_permittivity > 0:
            raise DomainError(f"relative_permittivity must be > 0, got {self.relative_permittivity}")
        if not self.initial_thickness_d0 > 0:
            raise DomainError(f"initial_thickness_d0 must be > 0, got {self.initial_thickness_d0}")
        if not self.pre_stretch_ratio >= 1:
            raise DomainError(f"pre_stretch_ratio must be >= 1, got {self.pre_stretch_ratio}")
        if not self.max_stretch > self.pre_stretch_ratio:
            raise DomainError(
                f"max_stretch ({self.max_stretch}) must exceed pre_stretch_ratio ({self.pre_stretch_ratio})"
            )
        if int(self.layer_count) != self.layer_count or self.layer_count < 1:
            raise DomainError(f"layer_count must be an integer >= 1, got {self.layer_count}")

    @classmethod
    def from_raw_thickness(cls, relative_permittivity, raw_thickness, pre_stretch_ratio, **kwargs):
        """Film whose thickness follows from an equibiaxial pre-stretch of a raw sheet.

        Volume conservation under an ``s x s`` pre-stretch gives d0 = raw / s**2,
        e.g. two 0.5 mm VHB layers stretched 3x3 give 1.0 / 9 = 0.111 mm.
        """
        return cls(
            relative_permittivity=relative_permittivity,
            initial_thickness_d0=raw_thickness / pre_stretch_ratio**2,
            pre_stretch_ratio=pre_stretch_ratio,
            **kwargs,
        )

    @property
    def permittivity(self) -> float:
        """Absolute permittivity eps_r * eps_0 in pF/mm."""
        return self.relative_permittivity * self.vacuum_permittivity * _PF_PER_MM


@dataclass(frozen=True)
class CellGeometry:
    """Trapezoid cell: bases fixed on the frames, height along the sensing axis (mm)."""

    lower_base_bl: float
    upper_base_bu: float
    initial_height_h0: float
    film: MaterialFilm

    def __post_init__(self):
        for name in ("lower_base_bl", "upper_base_bu", "initial_height_h0"):
            value = getattr(self, name)
            if not value > 0:
                raise DomainError(f"{name} must be > 0, got {value}")

    @property
    def mean_base(self) -> float:
        return 0.5 * (self.lower_base_bl + self.upper_base_bu)

    @property
    def k(self) -> float:
        """Capacitance per squared height, pF/mm^2 (includes the layer multiplier)."""
        film = self.film
        return film.layer_count * film.permittivity * self.mean_base / (
            self.initial_height_h0 * film.initial_thickness_d0
        )

    @property
    def base_capacitance(self) -> float:
        return self.k * self.initial_height_h0**2

    @property
    def unstretched_height_l0(self) -> float:
        """Film length along the height before pre-stretch (mm)."""
        return self.initial_height_h0 / self.film.pre_stretch_ratio

    def scaled(self, base_factor: float) -> CellGeometry:
        """Copy with both bases multiplied by ``base_factor`` (k scales identically)."""
        return CellGeometry(
            self.lower_base_bl * base_factor,
            self.upper_base_bu * base_factor,
            self.initial_height_h0,
            self.film,
        )


class CellSensitivity(NamedTuple):
    dC_dy: float
    dC_dx: float


def _as_output(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def flat_capacitance(area, thickness, film: MaterialFilm):
    """Flat-capacitor capacitance (pF) of a film patch of ``area`` mm^2 and ``thickness`` mm."""
    area = np.asarray(area, dtype=float)
    thickness = np.asarray(thickness, dtype=float)
    if np.any(area <= 0) or np.any(thickness <= 0):
        raise DomainError("area and thickness must be positive")
    return _as_output(film.layer_count * film.permittivity * area / thickness)


def _height(geom: CellGeometry, y):
    h = geom.initial_height_h0 + np.asarray(y, dtype=float)
    if np.any(h <= 0):
        raise DomainError(
            f"cell collapsed: h0 + y must be > 0 (h0 = {geom.initial_height_h0} mm, min h = {np.min(h)} mm)"
        )
    return h


def cell_capacitance(geom: CellGeometry, y_displacement):
    """Capacitance (pF) of one cell after a height change of ``y_displacement`` mm."""
    h = _height(geom, y_displacement)
    return _as_output(geom.k * h**2)


def cell_sensitivity(geom: CellGeometry, y_displacement) -> CellSensitivity:
    """Derivatives of the cell capacitance along (dC/dy) and across (dC/dx) its height.

    Sideways motion of the inner frame shears the trapezoid without changing its
    area, so dC/dx is identically zero.
    """
    h = _height(geom, y_displacement)
    film = geom.film
    dcdy = 2 * film.layer_count * film.permittivity * geom.mean_base / film.initial_thickness_d0 * (
        h / geom.initial_height_h0
    )
    return CellSensitivity(_as_output(dcdy), _as_output(np.zeros_like(dcdy)))
