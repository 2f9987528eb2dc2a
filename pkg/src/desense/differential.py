"""Differential capacitance of two facing cells.

``cell_1`` grows with +y and ``cell_2`` shrinks, so

    dC(y) = k1 (h01 + y)^2 - k2 (h02 - y)^2
          = 2 (k1 h01 + k2 h02) y + (k1 - k2) y^2 + dC0

which is exactly linear when the two cells are identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CellGeometry, DomainError, _as_output, cell_capacitance


@dataclass(frozen=True)
class CellPair:
    cell_1: CellGeometry
    cell_2: CellGeometry

    def __post_init__(self):
        d1 = self.cell_1.film.initial_thickness_d0
        d2 = self.cell_2.film.initial_thickness_d0
        if d1 != d2:
            raise DomainError(f"paired cells must share film thickness d0, got {d1} and {d2} mm")

    @property
    def initial_offset_dC0(self) -> float:
        return cell_capacitance(self.cell_1, 0.0) - cell_capacitance(self.cell_2, 0.0)

    @property
    def is_symmetric(self) -> bool:
        return (
            self.cell_1.k == self.cell_2.k
            and self.cell_1.initial_height_h0 == self.cell_2.initial_height_h0
        )

    @classmethod
    def identical(cls, cell: CellGeometry) -> CellPair:
        return cls(cell, cell)

    @classmethod
    def mismatched(cls, cell: CellGeometry, fraction: float) -> CellPair:
        """Pair whose k values differ by ``fraction`` around ``cell`` (bases scaled by 1 +/- fraction/2)."""
        return cls(cell.scaled(1 + fraction / 2), cell.scaled(1 - fraction / 2))


def _check_collapse(pair: CellPair, y):
    y = np.asarray(y, dtype=float)
    if np.any(pair.cell_1.initial_height_h0 + y <= 0) or np.any(pair.cell_2.initial_height_h0 - y <= 0):
        raise DomainError("cell collapsed: require h01 + y > 0 and h02 - y > 0")
    return y


def differential_capacitance(pair: CellPair, y):
    """C1 - C2 (pF) at in-plane displacement ``y`` (mm)."""
    y = _check_collapse(pair, y)
    return _as_output(
        np.asarray(cell_capacitance(pair.cell_1, y)) - np.asarray(cell_capacitance(pair.cell_2, -y))
    )


def differential_capacitance_expanded(pair: CellPair, y):
    """Same quantity as :func:`differential_capacitance`, from the polynomial expansion in y."""
    y = _check_collapse(pair, y)
    k1, k2 = pair.cell_1.k, pair.cell_2.k
    h1, h2 = pair.cell_1.initial_height_h0, pair.cell_2.initial_height_h0
    return _as_output(2 * (k1 * h1 + k2 * h2) * y + (k1 - k2) * y**2 + pair.initial_offset_dC0)


def differential_sensitivity(pair: CellPair, y):
    """d(C1 - C2)/dy in pF/mm.

    For a common film this is (2 eps / d0) [(b1 + b2) + (b1/h01 - b2/h02) y];
    identical cells give the constant 4 eps b / d0.
    """
    y = _check_collapse(pair, y)
    k1, k2 = pair.cell_1.k, pair.cell_2.k
    h1, h2 = pair.cell_1.initial_height_h0, pair.cell_2.initial_height_h0
    return _as_output(2 * k1 * (h1 + y) + 2 * k2 * (h2 - y))


def linearity_error(pair: CellPair, y_range, n_points: int = 201) -> float:
    """Worst deviation of dC(y) from its least-squares line, relative to the full-scale span.

    The curve is sampled on ``n_points`` evenly spaced displacements over
    ``y_range = (lo, hi)``; the result is max|residual| / (|slope| * (hi - lo)).
    """
    lo, hi = (float(v) for v in y_range)
    if not hi > lo:
        raise DomainError(f"empty displacement range ({lo}, {hi})")
    y = np.linspace(lo, hi, n_points)
    dc = differential_capacitance(pair, y)
    slope, intercept = np.polyfit(y, dc, 1)
    residual = dc - (slope * y + intercept)
    return float(np.max(np.abs(residual)) / (abs(slope) * (hi - lo)))
