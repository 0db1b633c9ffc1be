"""Dual-path heterodyne detection model and its Monte Carlo sampler.

The signal entering the detector is split on a balanced coupler; each
output path j is amplified phase-insensitively, which is modelled by the
measured complex envelope zeta_j = sqrt(g_j) (c_j + h_j^dag) with h_j a
thermal noise mode of occupation noise_photons_j. All four measured
quadratures commute, so the records (I1, Q1, I2, Q2) follow an ordinary
4-dimensional Gaussian law:

    I_j = sqrt(g_j) (q_cj + q_hj),   Q_j = sqrt(g_j) (p_cj - p_hj),

i.e. mean sqrt(g_j) * mean_cj and covariance g-scaled (signal covariance
plus (2 n_j + 1)/4 per path quadrature).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..devices import hybrid_ring_split
from ..gaussian import VACUUM_VARIANCE
from .moments import RawMomentSet, gaussian_real_moments, raw_moment_keys


@dataclass(frozen=True)
class QuadratureBatch:
    """Per-shot detector records, columns (I1, Q1, I2, Q2)."""

    samples: np.ndarray
    seed: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 4:
            raise ValueError("samples must have shape (count, 4)")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def count(self):
        return self.samples.shape[0]

    def split(self, n_parts):
        """Contiguous sub-batches for batch-means error estimation."""
        if not (1 <= n_parts <= self.count):
            raise ValueError("invalid number of parts")
        chunks = np.array_split(self.samples, n_parts)
        return [QuadratureBatch(chunk, self.seed) for chunk in chunks]


def detected_gaussian(input_state, chain):
    """Mean and covariance of the measured (I1, Q1, I2, Q2) records.

    Covariance ordering matches the record columns.
    """
    if input_state.num_modes != 1:
        raise ValueError("detection expects the single-mode state at the splitter input")
    pair = hybrid_ring_split(input_state)
    root_gains = np.array(
        [
            math.sqrt(chain.gain_1),
            math.sqrt(chain.gain_1),
            math.sqrt(chain.gain_2),
            math.sqrt(chain.gain_2),
        ]
    )
    noise = np.diag(
        [
            (2.0 * chain.noise_photons_1 + 1.0) * VACUUM_VARIANCE,
            (2.0 * chain.noise_photons_1 + 1.0) * VACUUM_VARIANCE,
            (2.0 * chain.noise_photons_2 + 1.0) * VACUUM_VARIANCE,
            (2.0 * chain.noise_photons_2 + 1.0) * VACUUM_VARIANCE,
        ]
    )
    mean = root_gains * pair.mean
    cov = (pair.cov + noise) * np.outer(root_gains, root_gains)
    return mean, cov


def simulate_detection(input_state, chain, n_samples, seed):
    """Draw detector records for a state incident at the splitter input.

    Reproducible: identical (state, chain, n_samples, seed) give identical
    batches.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    mean, cov = detected_gaussian(input_state, chain)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    samples = rng.multivariate_normal(mean, cov, size=int(n_samples), method="cholesky")
    return QuadratureBatch(samples, int(seed))


def exact_detection_moments(input_state, chain, max_order=4):
    """Analytic raw moments of the detection model (no sampling).

    The infinite-sample limit of accumulate_moments(simulate_detection(...)):
    standard errors are zero and the sample count is None.
    """
    mean, cov = detected_gaussian(input_state, chain)
    real = gaussian_real_moments(mean, cov, max_order)
    values = {}
    for key in raw_moment_keys(max_order):
        n, m, k, l = key  # exponents of (I1, I2, Q1, Q2)
        values[key] = real[(n, k, m, l)]  # engine ordering is (I1, Q1, I2, Q2)
    errors = {key: 0.0 for key in values}
    return RawMomentSet(values, errors, None, None, max_order)


def save_batch(batch, path, chain=None):
    """Persist a batch as .npz with seed, count and chain metadata."""
    meta = {"seed": batch.seed, "count": batch.count}
    if chain is not None:
        meta["chain"] = {
            "gain_1": chain.gain_1,
            "gain_2": chain.gain_2,
            "noise_photons_1": chain.noise_photons_1,
            "noise_photons_2": chain.noise_photons_2,
            "gain_error": chain.gain_error,
        }
    np.savez_compressed(path, samples=batch.samples, meta=json.dumps(meta, sort_keys=True))


def load_batch(path):
    """Load a batch saved by :func:`save_batch`; returns (batch, metadata)."""
    data = np.load(path, allow_pickle=False)
    meta = json.loads(str(data["meta"]))
    return QuadratureBatch(data["samples"], int(meta["seed"])), meta
