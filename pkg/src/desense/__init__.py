"""Model, simulator, calibration and error analysis for a planar two-axis
dielectric-elastomer capacitive position sensor."""

from .calibration import CalibratedParabola, CalibratedPlane, DeviationReport, deviation, fit_parabola, fit_plane
from .differential import (
    CellPair,
    differential_capacitance,
    differential_capacitance_expanded,
    differential_sensitivity,
    linearity_error,
)
from .model import CellGeometry, DomainError, MaterialFilm, cell_capacitance, cell_sensitivity, flat_capacitance
from .parasitic import ParasiticPose, height_gain_rotation, height_gain_z, parasitic_cancellation_residual, stretch_feasible
from .reconstruction import RobotGeometry, fuse_tip, propagate_error, reconstruct_xy, worst_case_error
from .simulator import CapacitanceSample, FramePose, GridSpec, NoiseModel, SensorLayout, run_grid_protocol, run_sine_protocol, sample

__version__ = "0.1.0"

__all__ = [
    "CalibratedParabola", "CalibratedPlane", "CapacitanceSample", "CellGeometry", "CellPair", "DeviationReport",
    "DomainError", "FramePose", "GridSpec", "MaterialFilm", "NoiseModel", "ParasiticPose", "RobotGeometry",
    "SensorLayout", "cell_capacitance", "cell_sensitivity", "deviation", "differential_capacitance",
    "differential_capacitance_expanded", "differential_sensitivity", "fit_parabola", "fit_plane",
    "flat_capacitance", "fuse_tip", "height_gain_rotation", "height_gain_z", "linearity_error",
    "parasitic_cancellation_residual", "propagate_error", "reconstruct_xy", "run_grid_protocol",
    "run_sine_protocol", "sample", "stretch_feasible", "worst_case_error",
]
