"""Fast analytic invariant suite: no Monte Carlo, runs in well under a second.

Every check pits an operation against an independent closed form or a
composition that must agree exactly; any violation means the algebra or
the reconstruction is broken. Used by `sqdisp selftest`.
"""

from __future__ import annotations

import math

import numpy as np

from .calibration import fit_gain_noise, planck_occupation, TemperatureSweep
from .devices import (
    CouplerParams,
    DetectionChain,
    coupler_displace,
    hybrid_ring_split,
    jpa_for_squeezing,
    jpa_emit,
    tone_for_displacement,
)
from .gaussian import (
    DisplacementParams,
    SqueezeParams,
    beam_splitter,
    beam_splitter_symplectic,
    displace,
    lossy_channel,
    negativity,
    photon_number,
    reference_covariance_eq1,
    squeeze,
    squeeze_symplectic,
    squeezing_level_db,
    symplectic_form,
    tensor,
    thermal,
    vacuum,
    wigner_grid,
)
from .tomography.detection import exact_detection_moments
from .tomography.moments import state_to_moments
from .tomography.reconstruction import dpm_reconstruct, moments_to_state, rsm_reconstruct


def _check_displacement_invariance():
    state = jpa_emit(jpa_for_squeezing(6.4, gamma_angle=math.pi / 4))
    worst = 0.0
    for theta in (math.radians(45.0), math.radians(135.0)):
        baseline_s = squeezing_level_db(state, 0)
        baseline_n = negativity(hybrid_ring_split(state))
        for alpha_sq in np.linspace(0.0, 500.0, 26):
            disp = displace(state, 0, DisplacementParams(math.sqrt(alpha_sq), theta))
            worst = max(
                worst,
                abs(squeezing_level_db(disp, 0) - baseline_s),
                abs(negativity(hybrid_ring_split(disp)) - baseline_n),
            )
    return worst <= 1e-12, f"max drift {worst:.2e}"


def _check_eq1_equivalence():
    worst = 0.0
    for r in np.linspace(0.0, 1.5, 20):
        for phi in np.linspace(0.0, 2.0 * math.pi, 20, endpoint=False):
            split = hybrid_ring_split(squeeze(vacuum(1), 0, SqueezeParams(r, phi)))
            worst = max(
                worst,
                float(np.max(np.abs(4.0 * split.cov - reference_covariance_eq1(r, phi)))),
            )
    return worst <= 1e-12, f"max |composed - closed form| = {worst:.2e}"


def _check_negativity_oracle():
    worst = 0.0
    for r in (0.0, 0.25, 0.5, 1.0):
        split = hybrid_ring_split(squeeze(vacuum(1), 0, SqueezeParams(r)))
        expected = max(0.0, (math.exp(r) - 1.0) / 2.0)
        worst = max(worst, abs(negativity(split) - expected))
    return worst <= 1e-12, f"max |N - (e^r-1)/2| = {worst:.2e}"


def _check_symplectic_validity():
    omega2 = symplectic_form(1)
    omega4 = symplectic_form(2)
    worst = 0.0
    for r in (0.0, 0.3, 1.2):
        for phi in (0.0, 1.1, 4.4):
            s = squeeze_symplectic(SqueezeParams(r, phi))
            worst = max(worst, float(np.max(np.abs(s @ omega2 @ s.T - omega2))))
    for t in (0.0, 0.3, 0.5, 0.99, 1.0):
        s = beam_splitter_symplectic(t, 2, 0, 1)
        worst = max(worst, float(np.max(np.abs(s @ omega4 @ s.T - omega4))))
    return worst <= 1e-12, f"max |S Omega S^T - Omega| = {worst:.2e}"


def _check_purity():
    worst = 0.0
    for state in (
        vacuum(1),
        squeeze(vacuum(1), 0, SqueezeParams(0.9, 2.0)),
        displace(squeeze(vacuum(1), 0, SqueezeParams(0.5, 1.0)), 0, DisplacementParams(3.0, 0.7)),
    ):
        worst = max(worst, abs(float(np.linalg.det(state.mode_cov(0))) - 0.0625))
    return worst <= 1e-12, f"max |det - 1/16| = {worst:.2e}"


def _check_energy_conservation():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(5):
        state = tensor(
            displace(
                squeeze(thermal(rng.uniform(0, 1)), 0, SqueezeParams(rng.uniform(0, 1), rng.uniform(0, 6))),
                0,
                DisplacementParams(rng.uniform(0, 3), rng.uniform(0, 6)),
            ),
            thermal(rng.uniform(0, 1)),
        )
        before = photon_number(state, 0) + photon_number(state, 1)
        mixed = beam_splitter(state, 0, 1, rng.uniform(0, 1))
        after = photon_number(mixed, 0) + photon_number(mixed, 1)
        worst = max(worst, abs(after - before))
    eta = 0.5
    lossy = lossy_channel(thermal(1.0), 0, eta)
    worst = max(worst, abs(photon_number(lossy, 0) - eta * 1.0))
    return worst <= 1e-10, f"max photon-number drift {worst:.2e}"


def _check_coupler():
    coupler = CouplerParams()
    state = jpa_emit(jpa_for_squeezing(6.4))
    target = DisplacementParams(10.0, math.radians(135.0))
    out = coupler_displace(state, tone_for_displacement(target, coupler), coupler)
    baseline = lossy_channel(displace(state, 0, target), 0, coupler.insertion_efficiency)
    drop = squeezing_level_db(baseline, 0) - squeezing_level_db(out, 0)
    mean_err = float(np.max(np.abs(out.mean - baseline.mean)))
    if not (0.0 <= drop < 0.15 and mean_err <= 1e-12):
        return False, f"drop {drop:.3f} dB, mean error {mean_err:.2e}"
    previous = math.inf
    for coupling in (-20.0, -40.0, -60.0):
        weak = CouplerParams(coupling_db=coupling, insertion_loss_db=coupler.insertion_loss_db)
        out_k = coupler_displace(state, tone_for_displacement(target, weak), weak)
        base_k = lossy_channel(displace(state, 0, target), 0, weak.insertion_efficiency)
        deviation = float(np.max(np.abs(out_k.cov - base_k.cov)))
        mean_dev = float(np.max(np.abs(out_k.mean - base_k.mean)))
        if deviation >= previous or mean_dev > 1e-10:
            return False, f"no monotone convergence at {coupling} dB"
        previous = deviation
    return True, f"drop {drop:.3f} dB at -19.5 dB; covariance deviation monotone to {previous:.2e}"


def _check_exact_reconstruction():
    chain = DetectionChain(gain_1=40.0, gain_2=55.0, noise_photons_1=3.0, noise_photons_2=7.0)
    state = displace(
        jpa_emit(jpa_for_squeezing(6.4, gamma_angle=math.pi / 4, thermal_occupation=0.05)),
        0,
        DisplacementParams(9.0, math.radians(135.0)),
    )
    raw = exact_detection_moments(state, chain)
    reference = exact_detection_moments(vacuum(1), chain)
    dpm = dpm_reconstruct(raw, chain, residual_tol=1e-8)
    rsm = rsm_reconstruct(raw, reference, chain, residual_tol=1e-8)
    truth_in = state_to_moments(state)
    truth_out = state_to_moments(hybrid_ring_split(state))
    err_d = max(abs(dpm.value(k) - truth_in.value(k)) for k in dpm.values)
    err_r = max(abs(rsm.value(k) - truth_out.value(k)) for k in rsm.values)
    split_cov_err = float(
        np.max(np.abs(moments_to_state(rsm).cov - hybrid_ring_split(state).cov))
    )
    ok = err_d <= 1e-10 and err_r <= 1e-10 and split_cov_err <= 1e-10
    return ok, f"moment errors dpm {err_d:.2e}, rsm {err_r:.2e}, cov {split_cov_err:.2e}"


def _check_planck_fit():
    gain, noise = 2.5e6, 11.0
    freq = 5.573e9
    temps = np.linspace(0.04, 0.8, 12)
    variances = np.array(
        [gain * 0.25 * (2.0 * planck_occupation(t, freq) + 1.0 + 2.0 * noise) for t in temps]
    )
    result = fit_gain_noise(TemperatureSweep(temps, variances, freq))
    err = max(abs(result.total_gain / gain - 1.0), abs(result.noise_photons - noise) / noise)
    return err <= 1e-10, f"max relative parameter error {err:.2e}"


def _check_wigner_normalisation():
    state = displace(squeeze(vacuum(1), 0, SqueezeParams(0.8, 1.3)), 0, DisplacementParams(1.5, 0.4))
    extent = 6.0 * math.sqrt(float(np.max(np.linalg.eigvalsh(state.mode_cov(0)))))
    lo_q, hi_q = state.mean[0] - extent, state.mean[0] + extent
    lo_p, hi_p = state.mean[1] - extent, state.mean[1] + extent
    resolution = 301
    grid = wigner_grid(state, (lo_q, hi_q), (lo_p, hi_p), resolution)
    dq = (hi_q - lo_q) / (resolution - 1)
    dp = (hi_p - lo_p) / (resolution - 1)
    integral = float(np.sum(grid) * dq * dp)
    return abs(integral - 1.0) <= 1e-3, f"integral = {integral:.6f}"


def _check_photon_contracts():
    checks = [
        photon_number(vacuum(1), 0),
        photon_number(displace(vacuum(1), 0, DisplacementParams(2.0, math.pi / 2)), 0) - 4.0,
        photon_number(squeeze(vacuum(1), 0, SqueezeParams(0.74)), 0) - math.sinh(0.74) ** 2,
    ]
    worst = max(abs(c) for c in checks)
    return worst <= 1e-12, f"max contract violation {worst:.2e}"


CHECKS = (
    ("displacement invariance of squeezing and negativity", _check_displacement_invariance),
    ("split-state covariance matches closed form", _check_eq1_equivalence),
    ("negativity of split squeezed vacuum equals (e^r-1)/2", _check_negativity_oracle),
    ("symplectic validity of generators", _check_symplectic_validity),
    ("purity of pure states", _check_purity),
    ("energy bookkeeping of splitters and loss", _check_energy_conservation),
    ("directional coupler matches displace + loss", _check_coupler),
    ("exact moment inversion (DPM and RSM)", _check_exact_reconstruction),
    ("calibration fit recovers exact parameters", _check_planck_fit),
    ("Wigner normalisation", _check_wigner_normalisation),
    ("photon-number contracts", _check_photon_contracts),
)


def run_selftest(verbose=True):
    """Run every analytic check; returns True when all pass."""
    all_ok = True
    for name, check in CHECKS:
        ok, detail = check()
        all_ok &= ok
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
