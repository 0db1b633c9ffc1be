"""Calibrate detector gain and noise from a thermal temperature sweep.

Heating a matched attenuator turns it into a black-body emitter whose
photon occupation follows the Bose-Einstein law, so sweeping its
temperature traces out a known family of variances at the digitizer:
variance(T) = G * 0.25 * (2 n(T) + 1 + 2 N). Fitting that curve pins the
total gain G and the input-referred noise N without any extra hardware.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from sqdisp import fit_gain_noise, planck_occupation, simulate_sweep

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

frequency = 5.573e9
true_gain, true_noise = 1.0e7, 12.0
temperatures = np.linspace(0.04, 0.8, 14)

sweep = simulate_sweep(true_gain, true_noise, temperatures, frequency, n_samples=300_000, seed=5)
result = fit_gain_noise(sweep)

print(f"true gain  {true_gain:.4e}   fitted {result.total_gain:.4e} "
      f"({result.total_gain / true_gain - 1:+.2%})")
print(f"true noise {true_noise:.3f}        fitted {result.noise_photons:.3f} "
      f"({result.noise_photons - true_noise:+.3f} photons)")
print(f"fit residual {result.fit_residual:.3e}")
print("parameter covariance:")
print(result.parameter_covariance)

dense_t = np.linspace(temperatures[0], temperatures[-1], 200)
model = np.array(
    [result.total_gain * 0.25 * (2 * planck_occupation(t, frequency) + 1 + 2 * result.noise_photons)
     for t in dense_t]
)
fig, ax = plt.subplots(figsize=(6.0, 4.2))
ax.plot(sweep.temperatures, sweep.variances / 1e6, "o", label="simulated sweep")
ax.plot(dense_t, model / 1e6, "-", label="fit")
ax.set_xlabel("attenuator temperature (K)")
ax.set_ylabel("measured variance (arb. / 1e6)")
ax.legend()
fig.tight_layout()
path = os.path.join(OUT, "planck_calibration.png")
fig.savefig(path, dpi=130)
print(f"wrote {path}")
