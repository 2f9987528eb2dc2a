"""Virtual four-cell planar sensor.

Cell naming follows the prototype: A/C form the y pair, B/D the x pair. A and B
are ``cell_1`` of their pairs. Each pair carries an ``axis_sign``: with +1 the
first cell grows for a positive displacement along the pair's axis, with -1 it
shrinks (which is how negative calibrated slopes arise).

Every sample draws its noise from its own stream seeded by
``(noise.seed, run_id, index)``, so samples are reproducible individually and
runs can be generated in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .differential import CellPair
from .model import DomainError, cell_capacitance
from .parasitic import apply_parasitic, check_in_plane_rotation, tilt_angle

CELLS = ("A", "B", "C", "D")
MAX_MISALIGNMENT = math.radians(10.0)


class InfeasiblePoseError(DomainError):
    pass


@dataclass(frozen=True)
class SensorLayout:
    pair_y: CellPair
    pair_x: CellPair
    inner_radius_ri: float = 20.0
    outer_radius_ro: float = 75.0
    grid_misalignment: float = 0.0
    axis_sign_y: int = 1
    axis_sign_x: int = 1
    # additive read-out bias per cell (A, B, C, D), pF
    cell_bias: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.pair_y is self.pair_x:
            raise DomainError("pair_y and pair_x must be distinct pairs")
        if not 0 < self.inner_radius_ri < self.outer_radius_ro:
            raise DomainError("require 0 < inner_radius_ri < outer_radius_ro")
        if abs(self.grid_misalignment) >= MAX_MISALIGNMENT:
            raise DomainError("grid_misalignment must stay below 10 deg")
        if self.axis_sign_y not in (1, -1) or self.axis_sign_x not in (1, -1):
            raise DomainError("axis signs must be +1 or -1")
        if len(self.cell_bias) != 4:
            raise DomainError("cell_bias needs one value per cell A, B, C, D")

    def cells(self):
        return {
            "A": self.pair_y.cell_1,
            "B": self.pair_x.cell_1,
            "C": self.pair_y.cell_2,
            "D": self.pair_x.cell_2,
        }

    def to_sensor_frame(self, x, y):
        """Rotate grid coordinates into the cell-aligned frame."""
        c, s = math.cos(self.grid_misalignment), math.sin(self.grid_misalignment)
        return c * x - s * y, s * x + c * y


@dataclass(frozen=True)
class FramePose:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    rot_x: float = 0.0
    rot_y: float = 0.0
    rot_z: float = 0.0


@dataclass(frozen=True)
class NoiseModel:
    std_dev: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if not self.std_dev >= 0:
            raise DomainError("noise std_dev must be >= 0")

    @classmethod
    def on_differential(cls, std_dev: float, seed: int = 0) -> NoiseModel:
        """Per-cell noise that puts ``std_dev`` on each cell-pair difference."""
        return cls(std_dev / math.sqrt(2.0), seed)


@dataclass(frozen=True)
class CapacitanceSample:
    c_A: float
    c_B: float
    c_C: float
    c_D: float
    t_s: float = 0.0
    true_pose: FramePose | None = None
    set_id: int = 0
    index: int = 0

    @property
    def delta_AC(self) -> float:
        return self.c_A - self.c_C

    @property
    def delta_BD(self) -> float:
        return self.c_B - self.c_D

    def capacitances(self):
        return (self.c_A, self.c_B, self.c_C, self.c_D)


def cell_heights(layout: SensorLayout, pose: FramePose) -> dict:
    """Current height of each cell (mm) under ``pose``, before feasibility checks."""
    xs, ys = layout.to_sensor_frame(pose.x, pose.y)
    uy = layout.axis_sign_y * ys
    ux = layout.axis_sign_x * xs
    cells = layout.cells()
    raw = {
        "A": cells["A"].initial_height_h0 + uy,
        "C": cells["C"].initial_height_h0 - uy,
        "B": cells["B"].initial_height_h0 + ux,
        "D": cells["D"].initial_height_h0 - ux,
    }
    tilt = float(tilt_angle(pose.rot_x, pose.rot_y))
    heights = {}
    for name, h in raw.items():
        if h <= 0:
            raise InfeasiblePoseError(f"cell {name} collapsed (height {h:.3f} mm)")
        heights[name] = float(apply_parasitic(h, layout.inner_radius_ri, pose.z, tilt))
    return heights


def _check_stretch(layout: SensorLayout, heights: dict):
    for name, geom in layout.cells().items():
        stretch = heights[name] / geom.unstretched_height_l0
        if stretch < 1:
            raise InfeasiblePoseError(
                f"cell {name}: stretch {stretch:.3f} violates the buckling bound (h0 - y)/l0 >= 1"
            )
        if stretch > geom.film.max_stretch:
            raise InfeasiblePoseError(
                f"cell {name}: stretch {stretch:.3f} violates the failure bound "
                f"(h0 + y)/l0 <= lambda_max = {geom.film.max_stretch:g}"
            )


def noise_stream(noise: NoiseModel, run_id: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(noise.seed), int(run_id), int(index)])


def sample(
    layout: SensorLayout,
    pose: FramePose,
    noise: NoiseModel | None = None,
    *,
    t_s: float = 0.0,
    set_id: int = 0,
    index: int = 0,
    run_id: int | None = None,
) -> CapacitanceSample:
    """Read all four cells at ``pose``.

    Pipeline: grid-to-sensor rotation, in-plane height change per pair,
    parasitic height gains (tilt then z), stretch check, C = k h^2, read-out
    bias, i.i.d. Gaussian noise.
    """
    check_in_plane_rotation(pose.rot_z)
    heights = cell_heights(layout, pose)
    _check_stretch(layout, heights)
    cells = layout.cells()
    values = np.array(
        [
            cell_capacitance(cells[name], heights[name] - cells[name].initial_height_h0)
            for name in CELLS
        ]
    )
    values = values + np.asarray(layout.cell_bias, dtype=float)
    if noise is not None and noise.std_dev > 0:
        rng = noise_stream(noise, set_id if run_id is None else run_id, index)
        values = values + rng.normal(0.0, noise.std_dev, size=4)
    return CapacitanceSample(*map(float, values), t_s=t_s, true_pose=pose, set_id=set_id, index=index)


@dataclass(frozen=True)
class GridSpec:
    """Static positioning protocol.

    Set 1 is a square grid over +/- ``half_range``; set 2 is the same grid
    turned by ``tilt_deg`` and shrunk to stay inside the square; set 3 repeats
    set 1 on a ``shim_mm`` out-of-plane shim.
    """

    points_per_axis: int = 7
    half_range: float = 15.0
    tilt_deg: float = 22.5
    shim_mm: float = 3.0
    settle_s: float = 20.0
    sets: tuple = (1, 2, 3)

    def positions(self, set_id: int) -> np.ndarray:
        ticks = np.linspace(-self.half_range, self.half_range, self.points_per_axis)
        gx, gy = np.meshgrid(ticks, ticks, indexing="xy")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        if set_id == 2:
            t = math.radians(self.tilt_deg)
            rot = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
            shrink = 1.0 / (abs(math.cos(t)) + abs(math.sin(t)))
            pts = shrink * pts @ rot.T
        elif set_id not in (1, 3):
            raise DomainError(f"unknown grid set {set_id}")
        return pts

    def z_offset(self, set_id: int) -> float:
        return self.shim_mm if set_id == 3 else 0.0


def run_grid_protocol(
    layout: SensorLayout, grid: GridSpec | None = None, noise: NoiseModel | None = None
) -> list:
    """One sample per grid point for every set in ``grid.sets``, in set then row order."""
    grid = grid or GridSpec()
    out = []
    for set_id in grid.sets:
        z = grid.z_offset(set_id)
        for i, (x, y) in enumerate(grid.positions(set_id)):
            pose = FramePose(x=float(x), y=float(y), z=z)
            out.append(
                sample(layout, pose, noise, t_s=grid.settle_s * (i + 1), set_id=set_id, index=i)
            )
    return out


@dataclass
class SineRun:
    frequency: float
    axis: str
    cell: str
    t: np.ndarray
    displacement: np.ndarray
    capacitance: np.ndarray
    meta: dict = field(default_factory=dict)


def run_sine_protocol(
    layout: SensorLayout,
    axis: str,
    amplitude: float,
    frequency: float,
    cycles: float = 10,
    noise: NoiseModel | None = None,
    *,
    samples_per_cycle: int = 64,
    run_id: int = 0,
    capacitance_filter: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
) -> SineRun:
    """Drive the frame sinusoidally along ``axis`` and record the aligned cell.

    The model is quasi-static; ``capacitance_filter(t, c)`` is the hook for a
    user-supplied dynamic response applied to the recorded capacitance.
    """
    if axis not in ("x", "y"):
        raise DomainError("axis must be 'x' or 'y'")
    if not frequency > 0:
        raise DomainError("frequency must be positive")
    cell = "A" if axis == "y" else "B"
    n = int(round(cycles * samples_per_cycle))
    t = np.arange(n) / (samples_per_cycle * frequency)
    disp = amplitude * np.sin(2 * np.pi * frequency * t)
    cap = np.empty(n)
    for i, (ti, d) in enumerate(zip(t, disp)):
        pose = FramePose(x=float(d), y=0.0) if axis == "x" else FramePose(x=0.0, y=float(d))
        s = sample(layout, pose, noise, t_s=float(ti), index=i, run_id=run_id)
        cap[i] = getattr(s, f"c_{cell}")
    if capacitance_filter is not None:
        cap = np.asarray(capacitance_filter(t, cap), dtype=float)
    return SineRun(frequency, axis, cell, t, disp, cap, {"amplitude_mm": amplitude, "cycles": cycles})


def with_misalignment(layout: SensorLayout, angle: float) -> SensorLayout:
    return replace(layout, grid_misalignment=angle)


def split_sets(samples: Sequence[CapacitanceSample]) -> dict:
    out: dict = {}
    for s in samples:
        out.setdefault(s.set_id, []).append(s)
    return out
