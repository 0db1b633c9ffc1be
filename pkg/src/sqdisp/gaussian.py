"""Gaussian-state algebra for propagating bosonic modes.

A state is a mean vector and covariance matrix over the quadratures
(q1, p1, q2, p2, ...) with q = (a + a^dag)/2 and p = (a - a^dag)/(2i),
so [q, p] = i/2 and the vacuum variance is 0.25 per quadrature.

Angle bookkeeping: the squeezing angle gamma = -phi/2 locates the
*anti*-squeezed quadrature relative to the p-axis, and displacement
angles theta are measured from the p-axis as well, i.e. a displacement
of magnitude m at angle theta shifts the mean by (m sin(theta), m cos(theta)).

All operations are pure functions returning new states; states are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

VACUUM_VARIANCE = 0.25

_SYMMETRY_RTOL = 1e-12
_PSD_FLOOR = -1e-10


class UnphysicalStateError(ValueError):
    """Covariance matrix violates a physicality requirement."""


class DegenerateStateError(ValueError):
    """Covariance matrix is singular to working precision."""


def symplectic_form(num_modes):
    """Standard symplectic form: block-diagonal [[0, 1], [-1, 0]] per mode."""
    omega = np.zeros((2 * num_modes, 2 * num_modes))
    for k in range(num_modes):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix of ``num_modes`` bosonic modes.

    Attributes
    ----------
    num_modes : int
        Number of modes.
    mean : ndarray, shape (2*num_modes,)
        Quadrature means, ordered (q1, p1, q2, p2, ...).
    cov : ndarray, shape (2*num_modes, 2*num_modes)
        Symmetric covariance matrix in the same ordering. The vacuum is
        0.25 * identity.
    """

    num_modes: int
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        if not isinstance(self.num_modes, (int, np.integer)) or self.num_modes < 1:
            raise ValueError("num_modes must be a positive integer")
        dim = 2 * self.num_modes
        mean = np.array(self.mean, dtype=float).reshape(-1)
        if mean.shape != (dim,):
            raise ValueError(f"mean must have length {dim}, got {mean.shape}")
        cov = np.array(self.cov, dtype=float)
        if cov.shape != (dim, dim):
            raise ValueError(f"cov must be {dim}x{dim}, got {cov.shape}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("mean and cov must be finite")
        scale = max(float(np.max(np.abs(cov))), VACUUM_VARIANCE)
        if np.max(np.abs(cov - cov.T)) > _SYMMETRY_RTOL * scale:
            raise ValueError("cov is not symmetric within tolerance")
        cov = 0.5 * (cov + cov.T)
        if np.linalg.eigvalsh(cov).min() < _PSD_FLOOR * max(1.0, scale):
            raise UnphysicalStateError("cov is not positive semidefinite")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def mode_mean(self, mode):
        """(mean_q, mean_p) of one mode."""
        self._check_mode(mode)
        return self.mean[2 * mode : 2 * mode + 2]

    def mode_cov(self, mode):
        """2x2 covariance block of one mode."""
        self._check_mode(mode)
        s = slice(2 * mode, 2 * mode + 2)
        return self.cov[s, s]

    def reduced(self, modes):
        """State of a subset of modes (partial trace over the rest)."""
        modes = list(modes)
        for m in modes:
            self._check_mode(m)
        idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
        return GaussianState(len(modes), self.mean[idx], self.cov[np.ix_(idx, idx)])

    def _check_mode(self, mode):
        if not (0 <= mode < self.num_modes):
            raise ValueError(f"mode {mode} out of range for {self.num_modes} modes")


@dataclass(frozen=True)
class SqueezeParams:
    """Squeezing amplitude xi = r * exp(i*phi).

    ``phi`` is normalised into [0, 2*pi); the derived squeezing angle
    ``gamma_angle`` = -phi/2 is the angle between the anti-squeezed
    quadrature and the p-axis.
    """

    r: float
    phi: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("squeezing factor r must be nonnegative")
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * math.pi))

    @property
    def gamma_angle(self):
        return -self.phi / 2.0


@dataclass(frozen=True)
class DisplacementParams:
    """Displacement of magnitude |alpha| at angle theta from the p-axis."""

    magnitude: float
    theta: float = 0.0

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError("displacement magnitude must be nonnegative")

    @property
    def delta_qp(self):
        """Mean-vector shift (delta_q, delta_p) produced by this displacement."""
        return np.array(
            [self.magnitude * math.sin(self.theta), self.magnitude * math.cos(self.theta)]
        )


def vacuum(num_modes=1):
    """Vacuum state of ``num_modes`` modes: zero mean, cov = 0.25 * I."""
    if num_modes < 1:
        raise ValueError("num_modes must be >= 1")
    dim = 2 * num_modes
    return GaussianState(num_modes, np.zeros(dim), VACUUM_VARIANCE * np.eye(dim))


def thermal(n_mean):
    """Single-mode thermal state with mean occupation ``n_mean``.

    cov = (2*n_mean + 1) * 0.25 * I, zero mean.
    """
    if n_mean < 0:
        raise ValueError("thermal occupation must be nonnegative")
    return GaussianState(1, np.zeros(2), (2.0 * n_mean + 1.0) * VACUUM_VARIANCE * np.eye(2))


def tensor(state_a, state_b):
    """Tensor product of two states (block-diagonal covariance)."""
    n = state_a.num_modes + state_b.num_modes
    mean = np.concatenate([state_a.mean, state_b.mean])
    cov = np.zeros((2 * n, 2 * n))
    da = 2 * state_a.num_modes
    cov[:da, :da] = state_a.cov
    cov[da:, da:] = state_b.cov
    return GaussianState(n, mean, cov)


def squeeze_symplectic(params):
    """Single-mode symplectic matrix of S(xi) acting on (q, p).

    For phi = 0 the q variance scales by exp(-2r) and p by exp(+2r);
    general phi rotates the squeezed axis so that the anti-squeezed
    quadrature sits at gamma = -phi/2 from the p-axis.
    """
    r, phi = params.r, params.phi
    ch, sh = math.cosh(r), math.sinh(r)
    return np.array(
        [
            [ch - sh * math.cos(phi), -sh * math.sin(phi)],
            [-sh * math.sin(phi), ch + sh * math.cos(phi)],
        ]
    )


def _embed_single_mode(mat, num_modes, mode):
    full = np.eye(2 * num_modes)
    s = slice(2 * mode, 2 * mode + 2)
    full[s, s] = mat
    return full


def squeeze(state, mode, params):
    """Apply the squeezing operator S(xi) to one mode.

    Parameters
    ----------
    state : GaussianState
    mode : int
        Target mode index.
    params : SqueezeParams

    Returns
    -------
    GaussianState
    """
    state._check_mode(mode)
    s = _embed_single_mode(squeeze_symplectic(params), state.num_modes, mode)
    return GaussianState(state.num_modes, s @ state.mean, s @ state.cov @ s.T)


def displace(state, mode, params):
    """Apply the displacement operator D(alpha) to one mode.

    Shifts the mean by (|alpha| sin(theta), |alpha| cos(theta)) and leaves
    the covariance matrix untouched, so the photon number of a displaced
    vacuum is exactly |alpha|^2.
    """
    state._check_mode(mode)
    mean = state.mean.copy()
    mean[2 * mode : 2 * mode + 2] += params.delta_qp
    return GaussianState(state.num_modes, mean, state.cov)


def beam_splitter_symplectic(transmissivity, num_modes, mode_a, mode_b):
    """Symplectic matrix of a beam splitter with power transmissivity T.

    Convention: out_a = sqrt(T) a + sqrt(1-T) b, out_b = sqrt(1-T) a - sqrt(T) b
    (the 180-degree hybrid convention, so a balanced splitter produces the
    sum and difference modes (a+b)/sqrt(2), (a-b)/sqrt(2)).
    """
    t = math.sqrt(transmissivity)
    rfl = math.sqrt(1.0 - transmissivity)
    full = np.eye(2 * num_modes)
    sa, sb = slice(2 * mode_a, 2 * mode_a + 2), slice(2 * mode_b, 2 * mode_b + 2)
    eye2 = np.eye(2)
    full[sa, sa] = t * eye2
    full[sa, sb] = rfl * eye2
    full[sb, sa] = rfl * eye2
    full[sb, sb] = -t * eye2
    return full


def beam_splitter(state, mode_a, mode_b, transmissivity):
    """Mix two modes on a beam splitter of power transmissivity T in [0, 1].

    Energy conserving: the total photon number over all modes is invariant.
    """
    if mode_a == mode_b:
        raise ValueError("beam splitter needs two distinct modes")
    state._check_mode(mode_a)
    state._check_mode(mode_b)
    if not (0.0 <= transmissivity <= 1.0):
        raise ValueError("transmissivity must lie in [0, 1]")
    s = beam_splitter_symplectic(transmissivity, state.num_modes, mode_a, mode_b)
    return GaussianState(state.num_modes, s @ state.mean, s @ state.cov @ s.T)


def lossy_channel(state, mode, efficiency):
    """Pure-loss channel on one mode with power efficiency eta in (0, 1].

    Equivalent to mixing with a vacuum ancilla on a beam splitter of
    transmissivity eta and discarding the ancilla: the mean scales by
    sqrt(eta) and the mode covariance goes to eta*cov + (1-eta)*0.25*I.
    """
    state._check_mode(mode)
    if not (0.0 < efficiency <= 1.0):
        raise ValueError("efficiency must lie in (0, 1]")
    dim = 2 * state.num_modes
    x = np.eye(dim)
    s = slice(2 * mode, 2 * mode + 2)
    x[s, s] = math.sqrt(efficiency) * np.eye(2)
    cov = x @ state.cov @ x.T
    cov[s, s] += (1.0 - efficiency) * VACUUM_VARIANCE * np.eye(2)
    return GaussianState(state.num_modes, x @ state.mean, cov)


def squeezing_level_db(state, mode=0):
    """Squeezing level in dB: -10*log10(v_min / 0.25).

    ``v_min`` is the smallest eigenvalue of the single-mode covariance
    block; the value is positive iff the mode is squeezed below vacuum.
    """
    v_min = float(np.linalg.eigvalsh(state.mode_cov(mode)).min())
    if v_min <= 0.0:
        raise UnphysicalStateError("mode covariance is not positive definite")
    return -10.0 * math.log10(v_min / VACUUM_VARIANCE)


def photon_number(state, mode=0):
    """Mean photon number <a^dag a> of one mode.

    Equals var_q + var_p + mean_q^2 + mean_p^2 - 0.5 in this convention,
    so vacuum -> 0, displaced vacuum -> |alpha|^2, squeezed vacuum -> sinh^2 r.
    """
    block = state.mode_cov(mode)
    mq, mp = state.mode_mean(mode)
    return float(block[0, 0] + block[1, 1] + mq * mq + mp * mp - 0.5)


def principal_axes(state, mode=0):
    """(v_min, v_max, angle) of the single-mode covariance ellipse.

    ``angle`` locates the anti-squeezed (largest-variance) axis relative to
    the p-axis, measured toward +q, folded into (-pi/2, pi/2]. For a state
    squeezed with phase phi this equals gamma = -phi/2 (mod pi).
    """
    evals, evecs = np.linalg.eigh(state.mode_cov(mode))
    vq, vp = evecs[0, 1], evecs[1, 1]
    angle = math.atan2(vq, vp)
    while angle <= -math.pi / 2:
        angle += math.pi
    while angle > math.pi / 2:
        angle -= math.pi
    return float(evals[0]), float(evals[1]), angle


def _symplectic_eig_min(delta, det_sigma, context):
    disc = delta * delta - 4.0 * det_sigma
    if disc < 0.0:
        if disc < -1e-9 * max(1.0, delta * delta):
            raise UnphysicalStateError(f"{context}: no real symplectic spectrum")
        disc = 0.0
    inner = 0.5 * (delta - math.sqrt(disc))
    if inner < 0.0:
        if inner < -1e-9 * max(1.0, abs(delta)):
            raise UnphysicalStateError(f"{context}: negative symplectic eigenvalue")
        inner = 0.0
    return math.sqrt(inner)


def negativity(state, unphysical_tol=0.05):
    """Entanglement negativity of a two-mode Gaussian state.

    Computed from the 2x2 blocks of the covariance matrix rescaled to the
    vacuum-variance-1 convention: with Delta = det A + det B - 2 det C and
    nu = sqrt((Delta - sqrt(Delta^2 - 4 det sigma))/2), the negativity is
    N = max(0, (1 - nu)/(2 nu)). N > 0 iff the state is entangled.

    Raises
    ------
    UnphysicalStateError
        If the smallest symplectic eigenvalue of the *untransposed*
        covariance falls below 1 - unphysical_tol, i.e. the matrix does
        not describe a physical state within tolerance.
    """
    if state.num_modes != 2:
        raise ValueError("negativity is defined for two-mode states")
    sigma = 4.0 * state.cov
    det_a = float(np.linalg.det(sigma[:2, :2]))
    det_b = float(np.linalg.det(sigma[2:, 2:]))
    det_c = float(np.linalg.det(sigma[:2, 2:]))
    det_s = float(np.linalg.det(sigma))
    nu_phys = _symplectic_eig_min(det_a + det_b + 2.0 * det_c, det_s, "covariance")
    if nu_phys < 1.0 - unphysical_tol:
        raise UnphysicalStateError(
            f"state violates the uncertainty relation (nu = {nu_phys:.6f})"
        )
    nu = _symplectic_eig_min(det_a + det_b - 2.0 * det_c, det_s, "partial transpose")
    if nu <= 0.0:
        raise UnphysicalStateError("partial transpose has zero symplectic eigenvalue")
    return max(0.0, (1.0 - nu) / (2.0 * nu))


def wigner_grid(state, q_range, p_range, resolution):
    """Evaluate the Wigner function of a single-mode state on a grid.

    Parameters
    ----------
    state : GaussianState
        Single-mode state.
    q_range, p_range : (float, float)
        Axis limits (min, max).
    resolution : int
        Number of grid points per axis, >= 2.

    Returns
    -------
    ndarray, shape (resolution, resolution)
        W[i, j] = W(q_j, p_i) with q, p sampled on linspace over the ranges.
        Integrates to 1 over the plane.
    """
    if state.num_modes != 1:
        raise ValueError("wigner_grid expects a single-mode state")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    cov = state.mode_cov(0)
    evals = np.linalg.eigvalsh(cov)
    if evals.min() < 1e-12:
        raise DegenerateStateError("covariance is singular; Wigner function diverges")
    inv = np.linalg.inv(cov)
    norm = 1.0 / (2.0 * math.pi * math.sqrt(float(np.linalg.det(cov))))
    qs = np.linspace(q_range[0], q_range[1], resolution)
    ps = np.linspace(p_range[0], p_range[1], resolution)
    dq = qs[None, :] - state.mean[0]
    dp = ps[:, None] - state.mean[1]
    quad = inv[0, 0] * dq**2 + 2.0 * inv[0, 1] * dq * dp + inv[1, 1] * dp**2
    return norm * np.exp(-0.5 * quad)


def reference_covariance_eq1(r, phi):
    """Two-mode covariance of a squeezed state split on a balanced coupler.

    Written in the vacuum-variance-1 convention, built from the closed
    forms A_pm = exp(+-2r) cos^2(phi/2) + exp(-+2r) sin^2(phi/2) and
    B = -sinh(2r) sin(phi). Serves as an independent cross-check of the
    symplectic composition squeeze -> balanced splitter (which lives in
    the 0.25 convention, hence the factor-4 rescale when comparing).
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    c2, s2 = math.cos(phi / 2.0) ** 2, math.sin(phi / 2.0) ** 2
    a_plus = math.exp(2.0 * r) * c2 + math.exp(-2.0 * r) * s2
    a_minus = math.exp(-2.0 * r) * c2 + math.exp(2.0 * r) * s2
    b = -math.sinh(2.0 * r) * math.sin(phi)
    alpha = 0.5 * np.array([[a_minus + 1.0, b], [b, a_plus + 1.0]])
    gamma = 0.5 * np.array([[a_minus - 1.0, b], [b, a_plus - 1.0]])
    out = np.zeros((4, 4))
    out[:2, :2] = alpha
    out[2:, 2:] = alpha
    out[:2, 2:] = gamma
    out[2:, :2] = gamma.T
    return out


def uncertainty_min_eigenvalue(state):
    """Smallest eigenvalue of cov + (i/4)*Omega; >= 0 for physical states."""
    omega = symplectic_form(state.num_modes)
    herm = state.cov.astype(complex) + 0.25j * omega
    return float(np.linalg.eigvalsh(herm).min())


def is_physical(state, tol=1e-10):
    """Whether the covariance satisfies the uncertainty relation within tol."""
    return uncertainty_min_eigenvalue(state) >= -tol


def r_for_squeezing_db(level_db):
    """Squeezing factor r producing a given pure-state squeezing level in dB."""
    return level_db * math.log(10.0) / 20.0


def state_to_dict(state):
    """JSON-ready dict with a row-major covariance and convention tag."""
    return {
        "convention": "vacuum-0.25",
        "num_modes": state.num_modes,
        "mean": state.mean.tolist(),
        "cov": state.cov.reshape(-1).tolist(),
    }


def state_from_dict(payload):
    if payload.get("convention") != "vacuum-0.25":
        raise ValueError(f"unsupported covariance convention: {payload.get('convention')!r}")
    n = int(payload["num_modes"])
    cov = np.array(payload["cov"], dtype=float).reshape(2 * n, 2 * n)
    return GaussianState(n, np.array(payload["mean"], dtype=float), cov)


def state_to_json(state):
    return json.dumps(state_to_dict(state), sort_keys=True)


def state_from_json(text):
    return state_from_dict(json.loads(text))
