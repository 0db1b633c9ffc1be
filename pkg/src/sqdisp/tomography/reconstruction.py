"""Moment reconstruction for the dual-path detector.

Two independent routes recover quantum moments from the measured raw
correlation moments:

* dual-path (DPM): uses the splitter relations c1 = (a + v)/sqrt(2),
  c2 = (a - v)/sqrt(2) and the independence of the signal, the splitter
  vacuum v and the two path noise modes to solve, order by order, for the
  symmetric moments of the mode *entering* the splitter (noise moments are
  by-products; noise means are assumed zero).
* reference-state (RSM): first determines the noise moments of both paths
  from a reference measurement whose input is known (two-mode vacuum),
  then deconvolves them from the signal measurement to obtain the
  two-mode moments of the splitter *outputs*.

Both solvers work on the scaled complex envelopes chi_j = zeta_j/sqrt(g_j)
and are plain per-order linear least squares with residual tracking;
symmetric moments are converted to normal ordering at the end.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..gaussian import GaussianState
from .detection import QuadratureBatch
from .moments import (
    MAX_ORDER,
    MalformedMomentsError,
    SignalMomentSet,
    hermitize,
    poly_add,
    poly_atom,
    poly_conj,
    poly_mul,
    poly_pow,
    poly_scalar,
    normal_to_weyl,
    signal_moment_keys,
    weyl_to_normal,
)


class ReconstructionError(RuntimeError):
    """Moment inversion failed; carries per-order residual norms."""

    def __init__(self, message, residuals=()):
        super().__init__(message)
        self.residuals = tuple(residuals)


def _measured_keys(max_order):
    keys = []
    for n in range(max_order + 1):
        for m in range(max_order + 1 - n):
            for p in range(max_order + 1 - n - m):
                for q in range(max_order + 1 - n - m - p):
                    if n + m + p + q > 0:
                        keys.append((n, m, p, q))
    return keys


def _complex_envelope_moments(raw, gains, max_order):
    """Moments E[chi1^n chi1*^m chi2^p chi2*^q] from raw quadrature moments.

    chi_j = (I_j + i Q_j)/sqrt(g_j); returns dict key -> (value, propagated se).
    """
    g1, g2 = gains
    if g1 <= 0 or g2 <= 0:
        raise ValueError("chain gains must be positive")
    # real atoms ordered (I1, Q1, I2, Q2)
    z1 = {(1, 0, 0, 0): 1.0 + 0.0j, (0, 1, 0, 0): 1.0j}
    z2 = {(0, 0, 1, 0): 1.0 + 0.0j, (0, 0, 0, 1): 1.0j}
    z1c = {(1, 0, 0, 0): 1.0 + 0.0j, (0, 1, 0, 0): -1.0j}
    z2c = {(0, 0, 1, 0): 1.0 + 0.0j, (0, 0, 0, 1): -1.0j}
    out = {}
    for key in _measured_keys(max_order):
        n, m, p, q = key
        poly = {(0, 0, 0, 0): 1.0 + 0.0j}
        for factor, power in ((z1, n), (z1c, m), (z2, p), (z2c, q)):
            for _ in range(power):
                poly = poly_mul(poly, factor)
        scale = g1 ** (0.5 * (n + m)) * g2 ** (0.5 * (p + q))
        value = 0.0 + 0.0j
        var = 0.0
        for (a, b, c, d), coeff in poly.items():
            raw_key = (a, c, b, d)  # raw keys index (I1, I2, Q1, Q2)
            value += coeff * raw.value(raw_key)
            var += abs(coeff) ** 2 * raw.error(raw_key) ** 2
        out[key] = (value / scale, math.sqrt(var) / scale)
    return out


def _block_keys(n_vars, order):
    """Exponent tuples (var and conjugate powers interleaved) of a given total order."""
    slots = 2 * n_vars
    keys = []

    def fill(prefix, remaining):
        if len(prefix) == slots - 1:
            keys.append(tuple(prefix) + (remaining,))
            return
        for k in range(remaining + 1):
            fill(prefix + [k], remaining - k)

    fill([], order)
    return keys


def _extract_block(exps, var_indices):
    key = []
    for v in var_indices:
        key.extend((exps[2 * v], exps[2 * v + 1]))
    return tuple(key)


def _solve_orders(measured, chi_polys, block_vars, known, is_unknown, max_order):
    """Per-order linear least-squares inversion of the envelope moments.

    ``block_vars`` maps a block name to the indices of the jointly
    distributed variables it contains; factors across blocks are
    independent. ``known`` holds already-fixed block moments and is
    extended in place with the solutions. Returns per-order residuals.
    """
    chi1, chi2 = chi_polys
    residuals = []
    for order in range(1, max_order + 1):
        columns = {}
        for block, vars_ in block_vars.items():
            if is_unknown(block, order):
                for key in _block_keys(len(vars_), order):
                    columns[(block, key)] = len(columns)
        rows, rhs = [], []
        for mkey, (mval, _mse) in measured.items():
            if sum(mkey) != order:
                continue
            poly = poly_scalar(1.0, len(next(iter(chi1))) // 2)
            for factor, power in (
                (chi1, mkey[0]),
                (poly_conj(chi1), mkey[1]),
                (chi2, mkey[2]),
                (poly_conj(chi2), mkey[3]),
            ):
                poly = poly_mul(poly, poly_pow(factor, power))
            row = np.zeros(len(columns), dtype=complex)
            acc = mval
            for exps, coeff in poly.items():
                factor_val = coeff
                unknown = None
                for block, vars_ in block_vars.items():
                    bkey = _extract_block(exps, vars_)
                    if sum(bkey) == 0:
                        continue
                    if (block, bkey) in known:
                        factor_val *= known[(block, bkey)]
                    else:
                        unknown = (block, bkey)
                if unknown is None:
                    acc -= factor_val
                else:
                    row[columns[unknown]] += factor_val
            rows.append(row)
            rhs.append(acc)
        a = np.array(rows)
        b = np.array(rhs)
        solution = np.linalg.lstsq(a, b, rcond=None)[0]
        residuals.append(float(np.linalg.norm(a @ solution - b)))
        for key, col in columns.items():
            known[key] = solution[col]
    return residuals


def _circular_moments(occupation, max_order):
    """Symmetric moments of a thermal mode: E[|eta|^(2i)] = i! (n + 1/2)^i."""
    out = {}
    for i in range(max_order + 1):
        for j in range(max_order + 1 - i):
            out[(i, j)] = (
                math.factorial(i) * (occupation + 0.5) ** i if i == j else 0.0
            )
    return out


def _check_raw(raw, max_order):
    if raw.max_order < max_order:
        raise ValueError(
            f"raw moments cover order {raw.max_order}, need {max_order}"
        )


def dpm_reconstruct(raw, chain, max_order=MAX_ORDER, residual_tol=None):
    """Dual-path reconstruction of the mode entering the splitter.

    Parameters
    ----------
    raw : RawMomentSet
        Measured (or analytic) raw correlation moments.
    chain : DetectionChain
        Supplies the gains assumed by the inversion (including any
        configured miscalibration).
    residual_tol : float, optional
        If given, raise :class:`ReconstructionError` when any per-order
        least-squares residual exceeds it; by default residuals are only
        reported on the returned set.

    Returns
    -------
    SignalMomentSet
        Normal-ordered single-mode moments up to ``max_order``.
    """
    _check_raw(raw, max_order)
    measured = _complex_envelope_moments(raw, chain.assumed_gains, max_order)
    root_half = 1.0 / math.sqrt(2.0)
    chi1 = poly_add(
        poly_atom(0, False, 4, root_half),
        poly_atom(1, False, 4, root_half),
        poly_atom(2, True, 4),
    )
    chi2 = poly_add(
        poly_atom(0, False, 4, root_half),
        poly_atom(1, False, 4, -root_half),
        poly_atom(3, True, 4),
    )
    block_vars = {"sig": [0], "vac": [1], "n1": [2], "n2": [3]}
    known = {}
    for key, val in _circular_moments(0.0, max_order).items():
        known[("vac", key)] = val
    for blk in ("sig", "n1", "n2"):
        known[(blk, (0, 0))] = 1.0
    for blk in ("n1", "n2"):  # zero-mean noise assumption
        known[(blk, (1, 0))] = 0.0
        known[(blk, (0, 1))] = 0.0

    def is_unknown(block, order):
        if block == "sig":
            return True
        if block in ("n1", "n2"):
            return order >= 2
        return False

    residuals = _solve_orders(measured, (chi1, chi2), block_vars, known, is_unknown, max_order)
    if residual_tol is not None and max(residuals) > residual_tol:
        raise ReconstructionError(
            f"moment inversion residuals {residuals} exceed {residual_tol}", residuals
        )
    weyl = {
        key: known[("sig", key)] for key in signal_moment_keys(1, max_order)
    }
    values = hermitize(weyl_to_normal(weyl, 1, max_order))
    return SignalMomentSet(1, values, max_order, tuple(residuals))


def rsm_reconstruct(raw_signal, raw_reference, chain, max_order=MAX_ORDER, residual_tol=None):
    """Reference-state reconstruction of the two splitter output modes.

    The reference measurement must be taken with the same chain and a
    known (two-mode vacuum) input; its inversion yields the noise moments
    of both paths, which are then deconvolved from the signal measurement.

    Returns
    -------
    SignalMomentSet
        Normal-ordered two-mode moments up to ``max_order``.
    """
    _check_raw(raw_signal, max_order)
    _check_raw(raw_reference, max_order)
    if raw_signal.max_order != raw_reference.max_order:
        raise ValueError("signal and reference moment sets cover different orders")
    gains = chain.assumed_gains
    meas_ref = _complex_envelope_moments(raw_reference, gains, max_order)
    meas_sig = _complex_envelope_moments(raw_signal, gains, max_order)
    chi1 = poly_add(poly_atom(0, False, 4), poly_atom(2, True, 4))
    chi2 = poly_add(poly_atom(1, False, 4), poly_atom(3, True, 4))
    block_vars = {"sig2": [0, 1], "n1": [2], "n2": [3]}

    # pass 1: two-mode vacuum input pins the noise moments of both paths
    vac = _circular_moments(0.0, max_order)
    known = {}
    for k1, v1 in vac.items():
        for k2, v2 in vac.items():
            if sum(k1) + sum(k2) <= max_order:
                known[("sig2", k1 + k2)] = v1 * v2
    known[("n1", (0, 0))] = 1.0
    known[("n2", (0, 0))] = 1.0
    res_ref = _solve_orders(
        meas_ref,
        (chi1, chi2),
        block_vars,
        known,
        lambda block, order: block in ("n1", "n2"),
        max_order,
    )

    # pass 2: noise moments now known, solve for the joint output moments
    known_sig = {k: v for k, v in known.items() if k[0] in ("n1", "n2")}
    known_sig[("sig2", (0, 0, 0, 0))] = 1.0
    res_sig = _solve_orders(
        meas_sig,
        (chi1, chi2),
        block_vars,
        known_sig,
        lambda block, order: block == "sig2",
        max_order,
    )
    residuals = tuple(res_ref) + tuple(res_sig)
    if residual_tol is not None and max(residuals) > residual_tol:
        raise ReconstructionError(
            f"moment inversion residuals {residuals} exceed {residual_tol}", residuals
        )
    weyl = {
        key: known_sig[("sig2", key)] for key in signal_moment_keys(2, max_order)
    }
    values = hermitize(weyl_to_normal(weyl, 2, max_order))
    return SignalMomentSet(2, values, max_order, residuals)


def moments_to_state(moments, symmetry_tol=1e-6):
    """Gaussian state with the mean and covariance implied by the moments.

    Uses the order-1 moments for the mean and the symmetrised order-2
    central moments for the covariance; works for one- and two-mode sets.

    Raises
    ------
    MalformedMomentsError
        If the set breaks Hermitian symmetry beyond ``symmetry_tol``
        (relative to its largest low-order entry).
    """
    scale = max(
        [1.0]
        + [
            abs(v)
            for k, v in moments.values.items()
            if sum(k) <= 2
        ]
    )
    if moments.hermitian_defect() > symmetry_tol * scale:
        raise MalformedMomentsError("moment set is not symmetric-completable")

    def single_mode_stats(mean_amp, occupancy, square):
        mq, mp = mean_amp.real, mean_amp.imag
        var_q = 0.25 * (1.0 + 2.0 * occupancy.real + 2.0 * square.real) - mq * mq
        var_p = 0.25 * (1.0 + 2.0 * occupancy.real - 2.0 * square.real) - mp * mp
        cov_qp = 0.5 * square.imag - mq * mp
        return np.array([mq, mp]), np.array([[var_q, cov_qp], [cov_qp, var_p]])

    if moments.num_modes == 1:
        mean, cov = single_mode_stats(
            moments.value((0, 1)), moments.value((1, 1)), moments.value((0, 2))
        )
        return GaussianState(1, mean, cov)

    m1, c1 = single_mode_stats(
        moments.value((0, 1, 0, 0)), moments.value((1, 1, 0, 0)), moments.value((0, 2, 0, 0))
    )
    m2, c2 = single_mode_stats(
        moments.value((0, 0, 0, 1)), moments.value((0, 0, 1, 1)), moments.value((0, 0, 0, 2))
    )
    s = moments.value((0, 1, 0, 1))  # <c1 c2>
    u = moments.value((1, 0, 0, 1))  # <c1^dag c2>
    cross = 0.5 * np.array(
        [
            [s.real + u.real, s.imag + u.imag],
            [s.imag - u.imag, u.real - s.real],
        ]
    )
    cross -= np.outer(m1, m2)
    mean = np.concatenate([m1, m2])
    cov = np.zeros((4, 4))
    cov[:2, :2] = c1
    cov[2:, 2:] = c2
    cov[:2, 2:] = cross
    cov[2:, :2] = cross.T
    return GaussianState(2, mean, cov)


# ---------------------------------------------------------------------------
# physicality and Gaussianity checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeisenbergReport:
    passed: bool
    min_eigenvalue: float
    order2_min_eigenvalue: float
    hermitian_defect: float


def _mode_basis(num_modes, degree):
    """Normal-ordered monomial exponents (adag-power, a-power per mode), total <= degree."""
    single = [
        (p, q)
        for total in range(degree + 1)
        for p in range(total + 1)
        for q in [total - p]
    ]
    if num_modes == 1:
        return single
    return [
        k1 + k2 for k1 in single for k2 in single if sum(k1) + sum(k2) <= degree
    ]


def _normal_ordered_entry(moments, left, right):
    """<B_left^dag B_right> with B = prod_modes (a^dag)^p a^q, normal-ordered per mode."""
    num_modes = moments.num_modes
    terms = [(1.0, [])]
    for mode in range(num_modes):
        pj, qj = left[2 * mode], left[2 * mode + 1]
        pk, qk = right[2 * mode], right[2 * mode + 1]
        new_terms = []
        for coeff, exps in terms:
            # a^pj (a^dag)^pk = sum_i C(pj,i) C(pk,i) i! (a^dag)^(pk-i) a^(pj-i)
            for i in range(min(pj, pk) + 1):
                c = coeff * math.comb(pj, i) * math.comb(pk, i) * math.factorial(i)
                new_terms.append((c, exps + [qj + pk - i, pj + qk - i]))
        terms = new_terms
    total = 0.0 + 0.0j
    for coeff, exps in terms:
        total += coeff * moments.value(tuple(exps))
    return total


def heisenberg_check(moments, atol=1e-8):
    """Positive-semidefiniteness of the moment matrix <B_j^dag B_k>.

    The basis runs over normal-ordered monomials up to degree 2 per the
    full (order-4) check; the degree-1 sub-matrix is the usual
    second-order uncertainty test. The check fails when the matrix is not
    Hermitian within tolerance (broken moment symmetry) or when either
    matrix has an eigenvalue below -atol * scale.

    ``atol`` should be widened to the statistical scale of the moments
    when checking sampled reconstructions.
    """
    if moments.max_order < MAX_ORDER:
        raise ValueError("heisenberg_check needs the full order-4 moment set")

    def moment_matrix(degree):
        basis = _mode_basis(moments.num_modes, degree)
        dim = len(basis)
        mat = np.zeros((dim, dim), dtype=complex)
        for j in range(dim):
            for k in range(dim):
                mat[j, k] = _normal_ordered_entry(moments, basis[j], basis[k])
        return mat

    full = moment_matrix(2)
    sub = moment_matrix(1)
    scale = max(1.0, float(np.max(np.abs(full))))
    defect = float(np.max(np.abs(full - full.conj().T)))
    min_full = float(np.linalg.eigvalsh(0.5 * (full + full.conj().T)).min())
    min_sub = float(np.linalg.eigvalsh(0.5 * (sub + sub.conj().T)).min())
    passed = (
        defect <= atol * scale
        and min_full >= -atol * scale
        and min_sub >= -atol * scale
    )
    return HeisenbergReport(passed, min_full, min_sub, defect)


@dataclass(frozen=True)
class GaussianityReport:
    passed: bool
    cumulants_3: dict
    cumulants_4: dict
    standard_errors: dict | None


def _cumulants_from_central(central, dim):
    """Third and fourth multivariate cumulants from central moments.

    ``central`` maps exponent tuples to values. kappa3 = mu3;
    kappa4_ijkl = mu4 - mu2_ij mu2_kl - mu2_ik mu2_jl - mu2_il mu2_jk.
    """

    def mu(indices):
        exps = [0] * dim
        for i in indices:
            exps[i] += 1
        return central[tuple(exps)]

    kappa3, kappa4 = {}, {}
    for idx in itertools.combinations_with_replacement(range(dim), 3):
        kappa3[idx] = mu(idx)
    for idx in itertools.combinations_with_replacement(range(dim), 4):
        i, j, k, l = idx
        kappa4[idx] = (
            mu(idx)
            - mu((i, j)) * mu((k, l))
            - mu((i, k)) * mu((j, l))
            - mu((i, l)) * mu((j, k))
        )
    return kappa3, kappa4


def _batch_cumulants(samples):
    centred = samples - samples.mean(axis=0)
    dim = samples.shape[1]
    central = {}

    def fill(prefix, remaining):
        if len(prefix) == dim:
            mono = np.ones(centred.shape[0])
            for v, k in enumerate(prefix):
                if k:
                    mono = mono * centred[:, v] ** k
            central[prefix] = float(mono.mean())
            return
        for k in range(remaining + 1):
            fill(prefix + (k,), remaining - k)

    fill((), 4)
    return _cumulants_from_central(central, dim)


def gaussianity_check(obj, k_sigma=5.0, atol=1e-8, n_error_batches=16):
    """Cumulant-based Gaussianity test.

    For a :class:`QuadratureBatch`, computes all third- and fourth-order
    multivariate cumulants of the four measured channels with standard
    errors estimated from ``n_error_batches`` contiguous sub-batches; the
    test passes when every cumulant lies within ``k_sigma`` standard
    errors of zero (with an ``atol`` floor). For a
    :class:`SignalMomentSet`, the cumulants of the implied quadrature
    distribution are computed exactly and compared against ``atol``.
    """
    if isinstance(obj, QuadratureBatch):
        kappa3, kappa4 = _batch_cumulants(obj.samples)
        parts = obj.split(min(n_error_batches, obj.count))
        sub3, sub4 = zip(*(_batch_cumulants(p.samples) for p in parts))
        errors = {}
        for key in kappa3:
            vals = [s[key] for s in sub3]
            errors[key] = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
        for key in kappa4:
            vals = [s[key] for s in sub4]
            errors[key] = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
        passed = all(
            abs(kappa) <= max(atol, k_sigma * errors[key])
            for group in (kappa3, kappa4)
            for key, kappa in group.items()
        )
        return GaussianityReport(passed, kappa3, kappa4, errors)

    if isinstance(obj, SignalMomentSet):
        weyl = normal_to_weyl(obj.values, obj.num_modes, obj.max_order)
        dim = 2 * obj.num_modes
        raw_real = {}

        def real_moment(exps):
            # q_v = (alpha + alpha*)/2, p_v = (alpha - alpha*)/(2i)
            poly = poly_scalar(1.0, obj.num_modes)
            for v in range(obj.num_modes):
                q_poly = poly_add(
                    poly_atom(v, False, obj.num_modes, 0.5),
                    poly_atom(v, True, obj.num_modes, 0.5),
                )
                p_poly = poly_add(
                    poly_atom(v, False, obj.num_modes, -0.5j),
                    poly_atom(v, True, obj.num_modes, 0.5j),
                )
                poly = poly_mul(poly, poly_pow(q_poly, exps[2 * v]))
                poly = poly_mul(poly, poly_pow(p_poly, exps[2 * v + 1]))
            return complex(sum(c * weyl[e] for e, c in poly.items()))

        def fill(prefix, remaining):
            if len(prefix) == dim:
                raw_real[prefix] = real_moment(prefix)
                return
            for k in range(remaining + 1):
                fill(prefix + (k,), remaining - k)

        fill((), 4)
        means = [raw_real[tuple(1 if i == v else 0 for i in range(dim))] for v in range(dim)]
        central = {}
        for exps in raw_real:
            poly = {(0,) * dim: 1.0 + 0.0j}
            for v, k in enumerate(exps):
                atom = {
                    tuple(1 if i == v else 0 for i in range(dim)): 1.0 + 0.0j,
                    (0,) * dim: -means[v],
                }
                for _ in range(k):
                    poly = poly_mul(poly, atom)
            central[exps] = float(
                sum(c * raw_real[e] for e, c in poly.items()).real
            )
        kappa3, kappa4 = _cumulants_from_central(central, dim)
        passed = all(
            abs(kappa) <= atol
            for group in (kappa3, kappa4)
            for kappa in group.values()
        )
        return GaussianityReport(passed, kappa3, kappa4, None)

    raise TypeError("gaussianity_check expects a QuadratureBatch or SignalMomentSet")
