"""Parameterised models of the experiment hardware chain.

Covers the flux-pumped parametric amplifier used as a squeezer, the
directional coupler realising displacement, the 180-degree hybrid ring
producing path entanglement, the per-path amplification chains, and the
dBm <-> photon unit conversions. The simulation lives in the rotating
frame; carrier and IF frequencies only enter unit conversions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .gaussian import (
    DisplacementParams,
    SqueezeParams,
    beam_splitter,
    displace,
    lossy_channel,
    squeeze,
    tensor,
    thermal,
    vacuum,
)

PLANCK_H = 6.62607015e-34  # J s
BOLTZMANN_K = 1.380649e-23  # J / K

CONVERSION_MODES = ("at-coupled-port", "at-signal-path")


@dataclass(frozen=True)
class JpaParams:
    """Squeezer settings: squeezing amplitude plus input thermal occupation.

    ``thermal_occupation`` models the impurity of the emitted state (the
    squeezer acts on a thermal rather than vacuum input when > 0).
    """

    squeeze: SqueezeParams
    thermal_occupation: float = 0.0

    def __post_init__(self):
        if self.thermal_occupation < 0:
            raise ValueError("thermal occupation must be nonnegative")


@dataclass(frozen=True)
class CouplerParams:
    """Directional-coupler power coupling and insertion loss, both in dB."""

    coupling_db: float = -19.5
    insertion_loss_db: float = -0.18

    def __post_init__(self):
        if not self.coupling_db < 0:
            raise ValueError("coupling_db must be negative")
        if self.insertion_loss_db > 0:
            raise ValueError("insertion_loss_db must be <= 0")

    @property
    def transmissivity(self):
        """Signal-path power transmissivity T = 1 - 10^(coupling/10)."""
        return 1.0 - 10.0 ** (self.coupling_db / 10.0)

    @property
    def insertion_efficiency(self):
        return 10.0 ** (self.insertion_loss_db / 10.0)


@dataclass(frozen=True)
class DetectionChain:
    """Per-path linear power gains and input-referred noise occupations.

    ``gain_error`` models limited calibration precision of the
    cross-correlation gain: the true path-1 gain exceeds the gain assumed
    by reconstruction by that fraction (the simulated detector always uses
    the true gains). Applying it to one path only is what makes auto- and
    cross-correlations mutually inconsistent, which is the mechanism that
    distorts reconstructions of states with large photon numbers.
    """

    gain_1: float
    gain_2: float
    noise_photons_1: float = 0.0
    noise_photons_2: float = 0.0
    gain_error: float = 0.0

    def __post_init__(self):
        if self.gain_1 <= 0 or self.gain_2 <= 0:
            raise ValueError("gains must be positive")
        if self.noise_photons_1 < 0 or self.noise_photons_2 < 0:
            raise ValueError("noise occupations must be nonnegative")
        if self.gain_error <= -1.0:
            raise ValueError("gain_error must be > -1")

    @property
    def assumed_gains(self):
        """(g1, g2) used by reconstruction, including the miscalibration."""
        return self.gain_1 / (1.0 + self.gain_error), self.gain_2


@dataclass(frozen=True)
class RfContext:
    """Carrier frequency and measurement bandwidth for unit conversions."""

    carrier_frequency: float = 5.573e9
    bandwidth: float = 4.0e5
    photon_conversion_mode: str = "at-signal-path"

    def __post_init__(self):
        if self.carrier_frequency <= 0 or self.bandwidth <= 0:
            raise ValueError("frequency and bandwidth must be positive")
        if self.photon_conversion_mode not in CONVERSION_MODES:
            raise ValueError(
                f"photon_conversion_mode must be one of {CONVERSION_MODES}"
            )


def jpa_emit(params):
    """Emitted state of the squeezer: squeeze applied to a thermal input.

    Pure squeezed vacuum iff thermal_occupation = 0.
    """
    return squeeze(thermal(params.thermal_occupation), 0, params.squeeze)


def jpa_for_squeezing(level_db, gamma_angle=0.0, thermal_occupation=0.0):
    """JpaParams whose emitted state has exactly ``level_db`` of squeezing.

    Accounts for the thermal input: r is chosen so that
    (2 n_th + 1) exp(-2r) = 10^(-level_db/10). ``gamma_angle`` sets the
    anti-squeezed axis relative to the p-axis via phi = -2*gamma.
    """
    r = 0.5 * (
        level_db * math.log(10.0) / 10.0 + math.log(2.0 * thermal_occupation + 1.0)
    )
    if r < 0:
        raise ValueError("requested squeezing level not reachable for this impurity")
    return JpaParams(
        squeeze=SqueezeParams(r=r, phi=-2.0 * gamma_angle),
        thermal_occupation=thermal_occupation,
    )


def dbm_to_photon_rate(power_dbm, ctx):
    """Photon flux (photons/s) of a tone of the given power at the carrier.

    Accepts -inf as an exact 'tone off'.
    """
    if math.isnan(power_dbm) or power_dbm == math.inf:
        raise ValueError("power_dbm must be finite or -inf")
    watts = 10.0 ** ((power_dbm - 30.0) / 10.0)
    return watts / (PLANCK_H * ctx.carrier_frequency)


def displacement_power_to_alpha(power_dbm, coupler, ctx):
    """Displacement amplitude |alpha| produced by a tone of the given power.

    In mode 'at-coupled-port' the power is referenced to the coupled port
    and the coupler's power coupling is applied; in mode 'at-signal-path'
    the power is interpreted directly in the signal path. Either way
    |alpha|^2 = photon rate / measurement bandwidth.
    """
    rate = dbm_to_photon_rate(power_dbm, ctx)
    if ctx.photon_conversion_mode == "at-coupled-port":
        rate *= 10.0 ** (coupler.coupling_db / 10.0)
    return math.sqrt(rate / ctx.bandwidth)


def tone_for_displacement(target, coupler):
    """Tone amplitude at the coupled port coupling over into ``target``.

    Inverts the coupling factor sqrt(1-T) only; the coupler's insertion
    loss then acts on the displaced state as a whole, exactly as it does
    on an ideally displaced state followed by the same loss.
    """
    scale = math.sqrt(1.0 - coupler.transmissivity)
    return DisplacementParams(magnitude=target.magnitude / scale, theta=target.theta)


def coupler_displace(signal, tone, coupler):
    """Displace a single-mode state with a directional coupler.

    Mixes the signal with a coherent tone of amplitude ``tone`` (incident at
    the coupled port) on a beam splitter of transmissivity
    T = 1 - 10^(coupling/10), discards the coupled port, then applies the
    insertion loss. The effective displacement is
    sqrt(eta) * sqrt(1-T) * tone.
    """
    if signal.num_modes != 1:
        raise ValueError("coupler_displace expects a single-mode signal")
    ancilla = displace(vacuum(1), 0, tone)
    mixed = beam_splitter(tensor(signal, ancilla), 0, 1, coupler.transmissivity)
    out = mixed.reduced([0])
    return lossy_channel(out, 0, coupler.insertion_efficiency)


def hybrid_ring_split(signal):
    """Split a single-mode state on a balanced coupler against vacuum.

    Outputs the path-entangled pair (signal + vacuum)/sqrt(2),
    (signal - vacuum)/sqrt(2).
    """
    if signal.num_modes != 1:
        raise ValueError("hybrid_ring_split expects a single-mode signal")
    return beam_splitter(tensor(signal, vacuum(1)), 0, 1, 0.5)
