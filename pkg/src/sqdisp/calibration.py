"""Planck-spectroscopy calibration of the detector gain and noise.

A heatable attenuator emits a thermal state with occupation n(T, f) given
by the Bose-Einstein law; sweeping its temperature and fitting the
measured per-path variance

    variance(T) = G * 0.25 * (2 n(T, f) + 1 + 2 N)

determines the total power gain G and the input-referred noise N of a
detection path in situ.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .devices import BOLTZMANN_K, PLANCK_H


class IllConditionedFitError(RuntimeError):
    """The temperature sweep does not constrain the fit parameters."""


@dataclass(frozen=True)
class TemperatureSweep:
    """Measured per-path variances over attenuator temperatures."""

    temperatures: np.ndarray
    variances: np.ndarray
    frequency: float

    def __post_init__(self):
        temps = np.asarray(self.temperatures, dtype=float)
        variances = np.asarray(self.variances, dtype=float)
        if temps.ndim != 1 or temps.shape != variances.shape:
            raise ValueError("temperatures and variances must be 1-d and match")
        if np.any(temps <= 0):
            raise ValueError("temperatures must be positive")
        if np.any(np.diff(temps) <= 0):
            raise ValueError("temperatures must be strictly increasing")
        if np.any(variances <= 0):
            raise ValueError("variances must be positive")
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        temps.setflags(write=False)
        variances.setflags(write=False)
        object.__setattr__(self, "temperatures", temps)
        object.__setattr__(self, "variances", variances)

    @property
    def points(self):
        return list(zip(self.temperatures, self.variances))


@dataclass(frozen=True)
class CalibrationResult:
    total_gain: float
    noise_photons: float
    fit_residual: float
    parameter_covariance: np.ndarray

    def __post_init__(self):
        if self.total_gain <= 0:
            raise ValueError("fitted gain must be positive")
        if not math.isfinite(self.fit_residual):
            raise ValueError("fit residual must be finite")
        cov = np.asarray(self.parameter_covariance, dtype=float)
        cov.setflags(write=False)
        object.__setattr__(self, "parameter_covariance", cov)


def planck_occupation(temperature, frequency):
    """Bose-Einstein occupation 1 / (exp(h f / k_B T) - 1)."""
    if temperature <= 0 or frequency <= 0:
        raise ValueError("temperature and frequency must be positive")
    return 1.0 / math.expm1(PLANCK_H * frequency / (BOLTZMANN_K * temperature))


def _variance_model(n_bar, gain, noise):
    return gain * 0.25 * (2.0 * n_bar + 1.0 + 2.0 * noise)


def simulate_sweep(
    true_gain, true_noise_photons, temperatures, frequency, n_samples, seed
):
    """Synthetic temperature sweep with finite-sample scatter.

    Each point's variance estimate is drawn from the exact sampling
    distribution of a Gaussian sample variance, i.e.
    true_variance * chi^2_(n-1) / (n - 1).
    """
    temps = np.asarray(temperatures, dtype=float)
    if temps.size < 3:
        raise ValueError("need at least 3 temperature points")
    if true_gain <= 0 or true_noise_photons < 0 or n_samples < 2:
        raise ValueError("invalid sweep parameters")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    variances = []
    for t in temps:
        truth = _variance_model(planck_occupation(t, frequency), true_gain, true_noise_photons)
        variances.append(truth * rng.chisquare(n_samples - 1) / (n_samples - 1))
    return TemperatureSweep(temps, np.array(variances), frequency)


def fit_gain_noise(sweep, min_occupation_span=0.10):
    """Least-squares fit of (gain, noise) to a temperature sweep.

    Levenberg-Marquardt on variance(T) = G*0.25*(2 n(T) + 1 + 2 N),
    initialised from the high-temperature slope (d variance / d n -> G/2).

    Raises
    ------
    IllConditionedFitError
        When the occupation varies by less than ``min_occupation_span``
        (relative) across the sweep, leaving G and N degenerate.
    """
    if sweep.temperatures.size < 3:
        raise IllConditionedFitError("need at least 3 points to fit two parameters")
    n_bar = np.array([planck_occupation(t, sweep.frequency) for t in sweep.temperatures])
    span = (n_bar.max() - n_bar.min()) / max(n_bar.max(), 1e-30)
    if span < min_occupation_span:
        raise IllConditionedFitError(
            f"occupation varies by {span:.1%} across the sweep; fit is degenerate"
        )
    slope = (sweep.variances[-1] - sweep.variances[-2]) / (n_bar[-1] - n_bar[-2])
    gain0 = max(2.0 * slope, 1e-30)
    noise0 = max(
        (sweep.variances[-1] / (0.25 * gain0) - 2.0 * n_bar[-1] - 1.0) / 2.0, 0.0
    )
    params, pcov = curve_fit(
        _variance_model,
        n_bar,
        sweep.variances,
        p0=(gain0, noise0),
        method="lm",
        maxfev=10000,
        xtol=1e-15,
        ftol=1e-15,
    )
    gain, noise = float(params[0]), float(params[1])
    residual = float(
        np.linalg.norm(sweep.variances - _variance_model(n_bar, gain, noise))
    )
    return CalibrationResult(gain, noise, residual, pcov)


def write_sweep_csv(sweep, path, n_samples=None):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["temperature_K", "variance", "n_samples"])
        for t, v in sweep.points:
            writer.writerow([repr(float(t)), repr(float(v)), n_samples or ""])


def read_sweep_csv(path, frequency):
    temps, variances = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            temps.append(float(row["temperature_K"]))
            variances.append(float(row["variance"]))
    return TemperatureSweep(np.array(temps), np.array(variances), frequency)
