"""Displacement-to-capacitance gain from sinusoidal runs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class GainFitError(ValueError):
    pass


@dataclass(frozen=True)
class SineFit:
    amplitude: float
    phase: float
    offset: float
    r2: float


@dataclass(frozen=True)
class GainRow:
    frequency: float
    gain: float
    gain_db: float


def fit_sinusoid(t, signal, frequency: float, min_r2: float = 0.9) -> SineFit:
    """Least-squares fit of offset + a sin(wt) + b cos(wt) at a known frequency.

    Requires more than two samples per period and at least one full period;
    rejects fits explaining less than ``min_r2`` of the signal variance.
    """
    t = np.asarray(t, dtype=float)
    signal = np.asarray(signal, dtype=float)
    if t.size < 4:
        raise GainFitError(f"need at least 4 samples, got {t.size}")
    span = t.max() - t.min()
    dt = np.median(np.diff(np.sort(t)))
    if dt * frequency >= 0.5:
        raise GainFitError(f"undersampled: {1 / (dt * frequency):.2f} samples per period at {frequency:g} Hz")
    if (span + dt) * frequency < 1 - 1e-9:
        raise GainFitError(f"record covers {span * frequency:.2f} periods; need at least one")
    w = 2 * np.pi * frequency
    design = np.column_stack([np.ones_like(t), np.sin(w * t), np.cos(w * t)])
    coef, *_ = np.linalg.lstsq(design, signal, rcond=None)
    resid = signal - design @ coef
    ss_tot = float(np.sum((signal - signal.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 0.0
    amplitude = float(math.hypot(coef[1], coef[2]))
    if ss_tot > 0 and r2 < min_r2:
        raise GainFitError(f"signal is not sinusoidal at {frequency:g} Hz (R^2 = {r2:.3f})")
    return SineFit(amplitude, float(math.atan2(coef[2], coef[1])), float(coef[0]), r2)


def run_gain(t, displacement, capacitance, frequency: float, min_r2: float = 0.9) -> float:
    """G = A_C / A_y for one run."""
    disp = fit_sinusoid(t, displacement, frequency, min_r2)
    if disp.amplitude <= 1e-12:
        raise GainFitError(f"displacement amplitude is zero at {frequency:g} Hz; gain undefined")
    cap = fit_sinusoid(t, capacitance, frequency, min_r2=0.0)
    return cap.amplitude / disp.amplitude


def gain_table(runs: Sequence, min_r2: float = 0.9) -> list:
    """Gains of every run in dB relative to the lowest-frequency run.

    ``runs`` are objects with ``frequency``, ``t``, ``displacement`` and
    ``capacitance`` attributes (e.g. :class:`desense.simulator.SineRun`).
    """
    if not runs:
        raise GainFitError("no sine runs given")
    ordered = sorted(runs, key=lambda r: r.frequency)
    gains = [run_gain(r.t, r.displacement, r.capacitance, r.frequency, min_r2) for r in ordered]
    ref = gains[0]
    return [GainRow(r.frequency, g, 20 * math.log10(g / ref)) for r, g in zip(ordered, gains)]
