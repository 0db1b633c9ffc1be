"""Experiment orchestration: configuration, sweeps, panels, calibration runs.

Reproduces the two headline measurements as data files: the displacement
sweep (squeezing level, photon number and both negativities versus
displacement power, with analytic truth columns alongside the Monte Carlo
reconstructions) and the phase-space panels of the displaced squeezed
states. Runs are deterministic for a fixed configuration and seed; the
per-point random streams are derived from the point values so that
permuting the sweep lists permutes rows without changing them.
"""

from __future__ import annotations

import csv
import json
import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from . import calibration as cal
from .devices import (
    CouplerParams,
    DetectionChain,
    JpaParams,
    RfContext,
    coupler_displace,
    displacement_power_to_alpha,
    hybrid_ring_split,
    jpa_emit,
    tone_for_displacement,
)
from .gaussian import (
    DisplacementParams,
    SqueezeParams,
    UnphysicalStateError,
    displace,
    negativity,
    photon_number,
    principal_axes,
    squeezing_level_db,
    vacuum,
    wigner_grid,
)
from .tomography.detection import exact_detection_moments, simulate_detection
from .tomography.moments import accumulate_moments, merge_moment_sets
from .tomography.reconstruction import (
    ReconstructionError,
    dpm_reconstruct,
    moments_to_state,
    rsm_reconstruct,
)

OUTPUT_DIR_ENV = "SQDISP_OUT"

_SEED_MASK = (1 << 63) - 1


class ConfigError(ValueError):
    """The experiment configuration is missing or malformed."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Full parameter record of a sweep run."""

    jpa: JpaParams
    coupler: CouplerParams
    chain: DetectionChain
    rf: RfContext
    displacement_powers_dbm: tuple
    thetas_deg: tuple
    samples_per_point: int
    seed: int
    outputs: str = "out"
    n_error_batches: int = 10
    calibration: dict | None = None
    wigner_cases: tuple = ((0.0, 0.0), (225.0, 135.0), (225.0, 45.0))
    wigner_extent: float = 20.0
    wigner_resolution: int = 101

    def __post_init__(self):
        if not self.displacement_powers_dbm or not self.thetas_deg:
            raise ConfigError("sweep lists must be nonempty")
        if self.samples_per_point < 0:
            raise ConfigError("samples_per_point must be >= 0 (0 selects analytic moments)")
        if self.n_error_batches < 2:
            raise ConfigError("n_error_batches must be >= 2")


def config_from_dict(payload):
    """Build an ExperimentConfig from the JSON configuration schema."""
    try:
        jpa_in = payload["jpa"]
        jpa = JpaParams(
            squeeze=SqueezeParams(
                r=float(jpa_in["r"]),
                phi=math.radians(float(jpa_in.get("phi_deg", 0.0))),
            ),
            thermal_occupation=float(jpa_in.get("n_th", 0.0)),
        )
        coupler_in = payload.get("coupler", {})
        coupler = CouplerParams(
            coupling_db=float(coupler_in.get("coupling_db", -19.5)),
            insertion_loss_db=float(coupler_in.get("insertion_loss_db", -0.18)),
        )
        chain_in = payload["chain"]
        chain = DetectionChain(
            gain_1=float(chain_in["gain_1"]),
            gain_2=float(chain_in["gain_2"]),
            noise_photons_1=float(chain_in.get("noise_photons_1", 0.0)),
            noise_photons_2=float(chain_in.get("noise_photons_2", 0.0)),
            gain_error=float(chain_in.get("gain_error", 0.0)),
        )
        rf_in = payload.get("rf", {})
        rf = RfContext(
            carrier_frequency=float(rf_in.get("frequency_hz", 5.573e9)),
            bandwidth=float(rf_in.get("bandwidth_hz", 4.0e5)),
            photon_conversion_mode=rf_in.get("conversion_mode", "at-signal-path"),
        )
        sweep = payload["sweep"]
        powers = tuple(
            float("-inf") if p is None else float(p)
            for p in sweep["displacement_powers_dbm"]
        )
        thetas = tuple(float(t) for t in sweep["thetas_deg"])
        wigner_in = payload.get("wigner", {})
        cases = tuple(
            (float(c["photons"]), float(c["theta_deg"]))
            for c in wigner_in.get(
                "cases",
                [
                    {"photons": 0.0, "theta_deg": 0.0},
                    {"photons": 225.0, "theta_deg": 135.0},
                    {"photons": 225.0, "theta_deg": 45.0},
                ],
            )
        )
        return ExperimentConfig(
            jpa=jpa,
            coupler=coupler,
            chain=chain,
            rf=rf,
            displacement_powers_dbm=powers,
            thetas_deg=thetas,
            samples_per_point=int(payload["samples_per_point"]),
            seed=int(payload["seed"]),
            outputs=payload.get("outputs", os.environ.get(OUTPUT_DIR_ENV, "out")),
            n_error_batches=int(payload.get("n_error_batches", 10)),
            calibration=payload.get("calibration"),
            wigner_cases=cases,
            wigner_extent=float(wigner_in.get("extent", 20.0)),
            wigner_resolution=int(wigner_in.get("resolution", 101)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid configuration: {exc}") from exc


def config_to_dict(config):
    """Inverse of :func:`config_from_dict` (modulo key defaults)."""
    payload = {
        "jpa": {
            "r": config.jpa.squeeze.r,
            "phi_deg": math.degrees(config.jpa.squeeze.phi),
            "n_th": config.jpa.thermal_occupation,
        },
        "coupler": {
            "coupling_db": config.coupler.coupling_db,
            "insertion_loss_db": config.coupler.insertion_loss_db,
        },
        "chain": {
            "gain_1": config.chain.gain_1,
            "gain_2": config.chain.gain_2,
            "noise_photons_1": config.chain.noise_photons_1,
            "noise_photons_2": config.chain.noise_photons_2,
            "gain_error": config.chain.gain_error,
        },
        "rf": {
            "frequency_hz": config.rf.carrier_frequency,
            "bandwidth_hz": config.rf.bandwidth,
            "conversion_mode": config.rf.photon_conversion_mode,
        },
        "sweep": {
            "displacement_powers_dbm": [
                None if p == float("-inf") else p for p in config.displacement_powers_dbm
            ],
            "thetas_deg": list(config.thetas_deg),
        },
        "samples_per_point": config.samples_per_point,
        "seed": config.seed,
        "outputs": config.outputs,
        "n_error_batches": config.n_error_batches,
        "wigner": {
            "cases": [
                {"photons": photons, "theta_deg": theta}
                for photons, theta in config.wigner_cases
            ],
            "extent": config.wigner_extent,
            "resolution": config.wigner_resolution,
        },
    }
    if config.calibration is not None:
        payload["calibration"] = dict(config.calibration)
    return payload


def load_config(path):
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(payload)


SWEEP_COLUMNS = (
    "power_dbm",
    "theta_deg",
    "alpha_sq",
    "squeezing_db",
    "squeezing_db_err",
    "photon_number",
    "photon_number_err",
    "negativity_dpm",
    "negativity_dpm_err",
    "negativity_rsm",
    "negativity_rsm_err",
    "squeezing_db_true",
    "photon_number_true",
    "negativity_true",
    "error",
)


@dataclass(frozen=True)
class SweepRow:
    power_dbm: float
    theta_deg: float
    alpha_sq: float
    squeezing_db: float
    squeezing_db_err: float
    photon_number: float
    photon_number_err: float
    negativity_dpm: float
    negativity_dpm_err: float
    negativity_rsm: float
    negativity_rsm_err: float
    squeezing_db_true: float
    photon_number_true: float
    negativity_true: float
    error: str = ""

    def __post_init__(self):
        for name in ("squeezing_db_err", "photon_number_err", "negativity_dpm_err", "negativity_rsm_err"):
            value = getattr(self, name)
            if not math.isnan(value) and value < 0:
                raise ValueError(f"{name} must be nonnegative")


def _float_bits(value):
    return struct.unpack("<Q", struct.pack("<d", float(value)))[0]


def _derived_seed(master, *values):
    seq = np.random.SeedSequence(
        [int(master) & _SEED_MASK] + [_float_bits(v) for v in values]
    )
    return int(seq.generate_state(1, np.uint64)[0])


def _point_state(config, power_dbm, theta_deg):
    """Displaced squeezed state at the splitter input for one sweep point."""
    base = jpa_emit(config.jpa)
    alpha = displacement_power_to_alpha(power_dbm, config.coupler, config.rf)
    target = DisplacementParams(magnitude=alpha, theta=math.radians(theta_deg))
    tone = tone_for_displacement(target, config.coupler)
    return coupler_displace(base, tone, config.coupler), alpha


def _quantities(signal_moments, output_moments):
    """(squeezing_db, photon_number, negativity_dpm, negativity_rsm) of a reconstruction."""
    input_state = moments_to_state(signal_moments)
    split = hybrid_ring_split(input_state)
    output_state = moments_to_state(output_moments)
    return (
        squeezing_level_db(input_state, 0),
        photon_number(input_state, 0),
        negativity(split, unphysical_tol=0.5),
        negativity(output_state, unphysical_tol=0.5),
    )


def run_displacement_sweep(config):
    """Execute the displacement sweep; returns one SweepRow per point.

    With samples_per_point = 0 the detector moments are computed
    analytically (infinite-sample limit) and the statistical errors are
    zero. Failed points are recorded with an error tag and the run
    continues.
    """
    rows = []
    exact = config.samples_per_point == 0
    if exact:
        reference = exact_detection_moments(vacuum(1), config.chain)
        ref_parts = None
    else:
        ref_batch = simulate_detection(
            vacuum(1),
            config.chain,
            config.samples_per_point,
            _derived_seed(config.seed, math.inf),
        )
        reference = accumulate_moments(ref_batch)
        ref_parts = [
            accumulate_moments(part)
            for part in ref_batch.split(config.n_error_batches)
        ]
    for power in config.displacement_powers_dbm:
        for theta in config.thetas_deg:
            try:
                rows.append(
                    _sweep_point(config, power, theta, reference, ref_parts, exact)
                )
            except (UnphysicalStateError, ReconstructionError, ValueError) as exc:
                nan = float("nan")
                rows.append(
                    SweepRow(
                        power, theta, nan, nan, nan, nan, nan, nan, nan, nan, nan,
                        nan, nan, nan, error=str(exc) or type(exc).__name__,
                    )
                )
    return rows


def _sweep_point(config, power, theta, reference, ref_parts, exact):
    state, alpha = _point_state(config, power, theta)
    truth_s = squeezing_level_db(state, 0)
    truth_n = photon_number(state, 0)
    truth_neg = negativity(hybrid_ring_split(state))
    if exact:
        raw = exact_detection_moments(state, config.chain)
        dpm = dpm_reconstruct(raw, config.chain)
        rsm = rsm_reconstruct(raw, reference, config.chain)
        s, n, neg_d, neg_r = _quantities(dpm, rsm)
        zeros = (0.0, 0.0, 0.0, 0.0)
        return SweepRow(
            power, theta, alpha**2,
            s, zeros[0], n, zeros[1], neg_d, zeros[2], neg_r, zeros[3],
            truth_s, truth_n, truth_neg,
        )
    batch = simulate_detection(
        state, config.chain, config.samples_per_point,
        _derived_seed(config.seed, power, theta),
    )
    raw = accumulate_moments(batch)
    dpm = dpm_reconstruct(raw, config.chain)
    rsm = rsm_reconstruct(raw, reference, config.chain)
    s, n, neg_d, neg_r = _quantities(dpm, rsm)
    # jackknife over sub-batches: each replicate merges all but one
    # sub-batch, so replicates stay in the statistically stable regime
    sub_raws = [accumulate_moments(part) for part in batch.split(config.n_error_batches)]
    replicates = []
    for drop in range(len(sub_raws)):
        raw_i = merge_moment_sets(sub_raws[:drop] + sub_raws[drop + 1 :])
        ref_i = merge_moment_sets(ref_parts[:drop] + ref_parts[drop + 1 :])
        dpm_i = dpm_reconstruct(raw_i, config.chain)
        rsm_i = rsm_reconstruct(raw_i, ref_i, config.chain)
        replicates.append(_quantities(dpm_i, rsm_i))
    jack = np.array(replicates)
    k = jack.shape[0]
    se = np.sqrt((k - 1) / k * np.sum((jack - jack.mean(axis=0)) ** 2, axis=0))
    return SweepRow(
        power, theta, alpha**2,
        s, float(se[0]), n, float(se[1]),
        neg_d, float(se[2]), neg_r, float(se[3]),
        truth_s, truth_n, truth_neg,
    )


def write_sweep_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    repr(getattr(row, col)) if col != "error" else row.error
                    for col in SWEEP_COLUMNS
                ]
            )


def read_sweep_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for record in csv.DictReader(fh):
            kwargs = {
                col: float(record[col]) for col in SWEEP_COLUMNS if col != "error"
            }
            rows.append(SweepRow(error=record["error"], **kwargs))
    return rows


def export_wigner_panels(config, cases=None, out_dir=None):
    """Write one phase-space grid file per displacement case.

    Each file carries the squeezing level, photon number and the 1/e
    contour ellipse of the state in '#'-prefixed header lines, followed by
    the Wigner function matrix (rows: p axis, columns: q axis).
    """
    out_dir = out_dir or config.outputs
    os.makedirs(out_dir, exist_ok=True)
    cases = cases if cases is not None else [
        DisplacementParams(magnitude=math.sqrt(photons), theta=math.radians(theta))
        for photons, theta in config.wigner_cases
    ]
    extent, resolution = config.wigner_extent, config.wigner_resolution
    paths = []
    for index, params in enumerate(cases):
        state = displace(jpa_emit(config.jpa), 0, params)
        v_min, v_max, axis_angle = principal_axes(state, 0)
        grid = wigner_grid(state, (-extent, extent), (-extent, extent), resolution)
        path = os.path.join(out_dir, f"wigner_panel_{index}.txt")
        header = [
            f"displacement_photons = {repr(params.magnitude ** 2)}",
            f"displacement_theta_deg = {repr(math.degrees(params.theta))}",
            f"squeezing_db = {repr(squeezing_level_db(state, 0))}",
            f"photon_number = {repr(photon_number(state, 0))}",
            f"ellipse_center_q = {repr(float(state.mean[0]))}",
            f"ellipse_center_p = {repr(float(state.mean[1]))}",
            f"ellipse_semiaxis_minor = {repr(math.sqrt(2.0 * v_min))}",
            f"ellipse_semiaxis_major = {repr(math.sqrt(2.0 * v_max))}",
            f"ellipse_angle_from_p_deg = {repr(math.degrees(axis_angle))}",
            f"q_range = {repr(-extent)} {repr(extent)}",
            f"p_range = {repr(-extent)} {repr(extent)}",
            f"resolution = {resolution}",
        ]
        np.savetxt(path, grid, fmt="%.17e", header="\n".join(header))
        paths.append(path)
    return paths


def run_calibration(config, out_dir=None):
    """Simulate and fit the calibration temperature sweep; write JSON result."""
    if not config.calibration:
        raise ConfigError("configuration has no calibration section")
    section = config.calibration
    try:
        true_gain = float(section["true_gain"])
        true_noise = float(section["true_noise_photons"])
        temperatures = [float(t) for t in section["temperatures_k"]]
        n_samples = int(section["n_samples"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid calibration section: {exc}") from exc
    sweep = cal.simulate_sweep(
        true_gain,
        true_noise,
        temperatures,
        config.rf.carrier_frequency,
        n_samples,
        _derived_seed(config.seed, -math.inf),
    )
    result = cal.fit_gain_noise(sweep)
    out_dir = out_dir or config.outputs
    os.makedirs(out_dir, exist_ok=True)
    payload = {
        "total_gain": result.total_gain,
        "noise_photons": result.noise_photons,
        "fit_residual": result.fit_residual,
        "parameter_covariance": result.parameter_covariance.tolist(),
        "true_gain": true_gain,
        "true_noise_photons": true_noise,
        "n_samples": n_samples,
        "temperatures_k": temperatures,
    }
    path = os.path.join(out_dir, "calibration.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return result, path
