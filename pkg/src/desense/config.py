"""Sensor/experiment configuration documents (JSON) and the prototype scenarios.

A config is a nested dict; anything omitted falls back to ``DEFAULT_CONFIG``
(the prototype geometry with an ideal, perfectly aligned read-out).
``REPLICA_CONFIG`` adds the imperfections needed to regenerate the prototype's
calibrated planes: a 69.4 pF/mm pair sensitivity, reversed axis orientation,
a grid turned by atan(0.5 / 69.4), read-out offsets of 31 and 47 pF and 10 pF
of noise on each cell-pair difference.
"""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path

from .differential import CellPair, differential_sensitivity
from .model import CellGeometry, DomainError, MaterialFilm
from .reconstruction import RobotGeometry
from .simulator import CELLS, GridSpec, NoiseModel, SensorLayout


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "film": {
        "relative_permittivity": 3.2,
        "initial_thickness_mm": 0.11,
        "pre_stretch": 3.0,
        # failure stretch of the acrylic film; implied, never stated as a bound
        "max_stretch": 6.0,
        "layer_count": 1,
    },
    "cell": {"lower_base_mm": 30.0, "upper_base_mm": 100.0, "initial_height_mm": 55.0},
    "cells": {},
    "target_sensitivity_pF_per_mm": None,
    "inner_radius_mm": 20.0,
    "outer_radius_mm": 75.0,
    "grid_misalignment_deg": 0.0,
    "axis_sign": {"AC": 1, "BD": 1},
    "cell_bias_pF": {"A": 0.0, "B": 0.0, "C": 0.0, "D": 0.0},
    "noise": {"std_dev_pF": 0.0, "applies_to": "cell"},
    "seed": 0,
    "stroke_mm": 15.0,
    "grid": {"points_per_axis": 7, "half_range_mm": 15.0, "tilt_deg": 22.5, "shim_mm": 3.0, "settle_s": 20.0},
    "sine": {
        "axis": "y",
        "amplitude_mm": 2.0,
        "frequencies_hz": [0.001, 0.01, 0.1, 1.0],
        "cycles": 10,
        "samples_per_cycle": 64,
    },
    "robot": {"plane_separation_mm": 200.0, "tip_extension_mm": 200.0},
}

REPLICA_CONFIG = {
    "target_sensitivity_pF_per_mm": math.hypot(0.5, 69.4),
    "grid_misalignment_deg": -math.degrees(math.atan2(0.5, 69.4)),
    "axis_sign": {"AC": -1, "BD": -1},
    "cell_bias_pF": {"A": 31.0, "B": 47.0, "C": 0.0, "D": 0.0},
    "noise": {"std_dev_pF": 10.0, "applies_to": "differential"},
}

SCENARIOS = {"default": {}, "replica": REPLICA_CONFIG}


def merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(path=None, scenario: str | None = None) -> dict:
    """Default config, then the named scenario, then the JSON file at ``path``."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if scenario:
        if scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {scenario!r}; choose from {sorted(SCENARIOS)}")
        cfg = merge(cfg, SCENARIOS[scenario])
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(user, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        cfg = merge(cfg, user)
    return cfg


def film_from_config(cfg: dict) -> MaterialFilm:
    f = cfg["film"]
    try:
        return MaterialFilm(
            relative_permittivity=float(f["relative_permittivity"]),
            initial_thickness_d0=float(f["initial_thickness_mm"]),
            pre_stretch_ratio=float(f["pre_stretch"]),
            max_stretch=float(f["max_stretch"]),
            layer_count=int(f["layer_count"]),
        )
    except (KeyError, TypeError, DomainError) as exc:
        raise ConfigError(f"film: {exc}") from exc


def _cell(spec: dict, film: MaterialFilm) -> CellGeometry:
    try:
        return CellGeometry(
            float(spec["lower_base_mm"]), float(spec["upper_base_mm"]), float(spec["initial_height_mm"]), film
        )
    except (KeyError, TypeError, DomainError) as exc:
        raise ConfigError(f"cell: {exc}") from exc


def layout_from_config(cfg: dict) -> SensorLayout:
    film = film_from_config(cfg)
    target = cfg.get("target_sensitivity_pF_per_mm")
    if target is not None:
        reference = _cell(merge(cfg["cell"], cfg.get("cells", {}).get("A", {})), film)
        current = differential_sensitivity(CellPair.identical(reference), 0.0)
        film = MaterialFilm(
            relative_permittivity=film.relative_permittivity * float(target) / current,
            initial_thickness_d0=film.initial_thickness_d0,
            pre_stretch_ratio=film.pre_stretch_ratio,
            max_stretch=film.max_stretch,
            layer_count=film.layer_count,
        )
    cells = {name: _cell(merge(cfg["cell"], cfg.get("cells", {}).get(name, {})), film) for name in CELLS}
    signs = cfg.get("axis_sign", {})
    bias = cfg.get("cell_bias_pF", {})
    try:
        return SensorLayout(
            pair_y=CellPair(cells["A"], cells["C"]),
            pair_x=CellPair(cells["B"], cells["D"]),
            inner_radius_ri=float(cfg["inner_radius_mm"]),
            outer_radius_ro=float(cfg["outer_radius_mm"]),
            grid_misalignment=math.radians(float(cfg["grid_misalignment_deg"])),
            axis_sign_y=int(signs.get("AC", 1)),
            axis_sign_x=int(signs.get("BD", 1)),
            cell_bias=tuple(float(bias.get(c, 0.0)) for c in CELLS),
        )
    except DomainError as exc:
        raise ConfigError(f"layout: {exc}") from exc


def noise_from_config(cfg: dict, seed: int | None = None) -> NoiseModel:
    n = cfg["noise"]
    seed = int(cfg.get("seed", 0) if seed is None else seed)
    std = float(n.get("std_dev_pF", 0.0))
    mode = n.get("applies_to", "cell")
    try:
        if mode == "cell":
            return NoiseModel(std, seed)
        if mode == "differential":
            return NoiseModel.on_differential(std, seed)
    except DomainError as exc:
        raise ConfigError(f"noise: {exc}") from exc
    raise ConfigError(f"noise.applies_to must be 'cell' or 'differential', got {mode!r}")


def grid_from_config(cfg: dict) -> GridSpec:
    g = cfg["grid"]
    return GridSpec(
        points_per_axis=int(g["points_per_axis"]),
        half_range=float(g["half_range_mm"]),
        tilt_deg=float(g["tilt_deg"]),
        shim_mm=float(g["shim_mm"]),
        settle_s=float(g["settle_s"]),
    )


def robot_from_config(cfg: dict) -> RobotGeometry:
    r = cfg["robot"]
    try:
        return RobotGeometry(float(r["plane_separation_mm"]), float(r["tip_extension_mm"]))
    except ValueError as exc:
        raise ConfigError(f"robot: {exc}") from exc


def prototype_film() -> MaterialFilm:
    return film_from_config(DEFAULT_CONFIG)


def prototype_cell() -> CellGeometry:
    return _cell(DEFAULT_CONFIG["cell"], prototype_film())


def default_layout() -> SensorLayout:
    return layout_from_config(DEFAULT_CONFIG)


def replica_layout() -> SensorLayout:
    return layout_from_config(load_config(scenario="replica"))


def replica_noise(seed: int = 0) -> NoiseModel:
    return noise_from_config(load_config(scenario="replica"), seed)


def write_config(cfg: dict, path) -> None:
    Path(path).write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
