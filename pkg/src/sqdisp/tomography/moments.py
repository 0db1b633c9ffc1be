"""Moment containers and moment algebra for dual-path tomography.

Raw detector moments are means of monomials in the measured quadratures
(I1, Q1, I2, Q2); signal moments are normal-ordered expectations
<(a^dag)^n a^m> of one or two reconstructed modes. The module also hosts
the exact multivariate-Gaussian moment engine and the conversions between
symmetric (Weyl) and normal operator ordering used throughout the
reconstruction code.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

MAX_ORDER = 4


class MalformedMomentsError(ValueError):
    """A moment set is incomplete or violates its symmetry contract."""


def raw_moment_keys(max_order=MAX_ORDER):
    """All exponent tuples (n, m, k, l) over (I1, I2, Q1, Q2) with sum <= max_order."""
    keys = []
    for n in range(max_order + 1):
        for m in range(max_order + 1 - n):
            for k in range(max_order + 1 - n - m):
                for l in range(max_order + 1 - n - m - k):
                    keys.append((n, m, k, l))
    return sorted(keys)


@dataclass(frozen=True)
class RawMomentSet:
    """Raw correlation moments <I1^n I2^m Q1^k Q2^l> up to total order 4.

    ``values`` maps the exponent tuple (n, m, k, l) to the sample (or
    analytic) mean of the monomial; ``standard_errors`` carries the
    standard error of each mean (zero for analytic sets);
    ``second_moments`` stores the raw mean of the squared monomial, which
    makes merges exact. ``sample_count`` is None for analytic sets.
    """

    values: dict
    standard_errors: dict
    sample_count: int | None
    second_moments: dict | None = None
    max_order: int = MAX_ORDER

    def __post_init__(self):
        expected = raw_moment_keys(self.max_order)
        missing = [k for k in expected if k not in self.values]
        if missing:
            raise MalformedMomentsError(f"missing raw moment entries: {missing[:4]}...")
        if abs(self.values[(0, 0, 0, 0)] - 1.0) > 1e-12:
            raise MalformedMomentsError("entry (0,0,0,0) must equal 1")
        for key in expected:
            if not math.isfinite(self.values[key]):
                raise MalformedMomentsError(f"non-finite raw moment at {key}")

    def value(self, key):
        return self.values[key]

    def error(self, key):
        return self.standard_errors.get(key, 0.0)


def accumulate_moments(batch, max_order=MAX_ORDER):
    """Monomial means (and standard errors) of a quadrature batch.

    Single pass over the samples per monomial; sums are taken in extended
    precision so that merged sub-batch results agree with a whole-batch
    pass to roundoff.
    """
    samples = batch.samples
    n = samples.shape[0]
    if n < 1:
        raise ValueError("batch must contain at least one sample")
    # column order of the batch is (I1, Q1, I2, Q2); keys index (I1, I2, Q1, Q2)
    cols = (samples[:, 0], samples[:, 2], samples[:, 1], samples[:, 3])
    powers = []
    for col in cols:
        pw = [np.ones_like(col)]
        for _ in range(max_order):
            pw.append(pw[-1] * col)
        powers.append(pw)
    values, errors, seconds = {}, {}, {}
    for key in raw_moment_keys(max_order):
        mono = powers[0][key[0]] * powers[1][key[1]] * powers[2][key[2]] * powers[3][key[3]]
        mean = float(np.sum(mono, dtype=np.longdouble) / n)
        mean_sq = float(np.sum(mono * mono, dtype=np.longdouble) / n)
        values[key] = mean
        seconds[key] = mean_sq
        errors[key] = math.sqrt(max(mean_sq - mean * mean, 0.0) / n)
    return RawMomentSet(values, errors, n, seconds, max_order)


def merge_moment_sets(sets):
    """Combine disjoint sub-batch moment sets (in the order given).

    Exact for means up to roundoff; the caller fixes the order (e.g. by
    sub-batch index) to keep parallel runs bit-stable.
    """
    sets = list(sets)
    if not sets:
        raise ValueError("nothing to merge")
    for s in sets:
        if s.sample_count is None or s.second_moments is None:
            raise ValueError("only sampled moment sets can be merged")
    max_order = sets[0].max_order
    total = sum(s.sample_count for s in sets)
    values, errors, seconds = {}, {}, {}
    for key in raw_moment_keys(max_order):
        vsum = math.fsum(s.values[key] * s.sample_count for s in sets)
        ssum = math.fsum(s.second_moments[key] * s.sample_count for s in sets)
        mean = vsum / total
        mean_sq = ssum / total
        values[key] = mean
        seconds[key] = mean_sq
        errors[key] = math.sqrt(max(mean_sq - mean * mean, 0.0) / total)
    return RawMomentSet(values, errors, total, seconds, max_order)


def signal_moment_keys(num_modes, max_order=MAX_ORDER):
    """Exponent tuples of normal-ordered moments with total order <= max_order.

    Single mode: (n, m) for <(a^dag)^n a^m>. Two modes: (n1, m1, n2, m2)
    for <(a^dag)^n1 a^m1 (b^dag)^n2 b^m2>.
    """
    if num_modes == 1:
        return [
            (n, m)
            for n in range(max_order + 1)
            for m in range(max_order + 1 - n)
        ]
    if num_modes == 2:
        keys = []
        for n1 in range(max_order + 1):
            for m1 in range(max_order + 1 - n1):
                for n2 in range(max_order + 1 - n1 - m1):
                    for m2 in range(max_order + 1 - n1 - m1 - n2):
                        keys.append((n1, m1, n2, m2))
        return keys
    raise ValueError("only one- and two-mode moment sets are supported")


def _conjugate_key(key):
    if len(key) == 2:
        return (key[1], key[0])
    return (key[1], key[0], key[3], key[2])


@dataclass(frozen=True)
class SignalMomentSet:
    """Normal-ordered moments of the reconstructed signal mode(s).

    Values are stored exactly as given: the Hermitian symmetry
    <(a^dag)^n a^m> = conj(<(a^dag)^m a^n>) is a property of correctly
    reconstructed sets (the reconstruction code symmetrises its output),
    not a constructor constraint, so that physicality checks can be
    exercised on deliberately broken sets. ``residuals`` optionally
    carries the per-order least-squares residual norms of the
    reconstruction that produced the set.
    """

    num_modes: int
    values: dict
    max_order: int = MAX_ORDER
    residuals: tuple = ()

    def __post_init__(self):
        keys = signal_moment_keys(self.num_modes, self.max_order)
        missing = [k for k in keys if k not in self.values]
        if missing:
            raise MalformedMomentsError(f"missing signal moment entries: {missing[:4]}")
        values = {k: complex(self.values[k]) for k in keys}
        if abs(values[(0,) * len(keys[0])] - 1.0) > 1e-9:
            raise MalformedMomentsError("<1> must equal 1")
        object.__setattr__(self, "values", values)

    def value(self, key):
        return self.values[key]

    def hermitian_defect(self):
        """Largest |<M> - conj(<M^dag>)| over all entries."""
        return max(
            abs(self.values[k] - self.values[_conjugate_key(k)].conjugate())
            for k in self.values
        )


def hermitize(values):
    """Average each entry with the conjugate of its adjoint partner."""
    return {
        k: 0.5 * (complex(v) + complex(values[_conjugate_key(k)]).conjugate())
        for k, v in values.items()
    }


def _key_to_text(key):
    return ",".join(str(k) for k in key)


def _key_from_text(text):
    return tuple(int(part) for part in text.split(","))


def raw_moments_to_json(raw):
    """JSON text keyed by exponent strings like "2,0,1,1"."""
    payload = {
        "kind": "raw-moments",
        "max_order": raw.max_order,
        "sample_count": raw.sample_count,
        "values": {_key_to_text(k): raw.values[k] for k in sorted(raw.values)},
        "standard_errors": {
            _key_to_text(k): raw.standard_errors.get(k, 0.0) for k in sorted(raw.values)
        },
    }
    if raw.second_moments is not None:
        payload["second_moments"] = {
            _key_to_text(k): raw.second_moments[k] for k in sorted(raw.second_moments)
        }
    return json.dumps(payload, sort_keys=True)


def raw_moments_from_json(text):
    payload = json.loads(text)
    if payload.get("kind") != "raw-moments":
        raise MalformedMomentsError("not a raw moment set")
    seconds = payload.get("second_moments")
    return RawMomentSet(
        {_key_from_text(k): v for k, v in payload["values"].items()},
        {_key_from_text(k): v for k, v in payload["standard_errors"].items()},
        payload["sample_count"],
        {_key_from_text(k): v for k, v in seconds.items()} if seconds else None,
        payload["max_order"],
    )


def signal_moments_to_json(moments):
    """JSON text with complex entries stored as [re, im] pairs."""
    payload = {
        "kind": "signal-moments",
        "num_modes": moments.num_modes,
        "max_order": moments.max_order,
        "residuals": list(moments.residuals),
        "values": {
            _key_to_text(k): [v.real, v.imag] for k, v in sorted(moments.values.items())
        },
    }
    return json.dumps(payload, sort_keys=True)


def signal_moments_from_json(text):
    payload = json.loads(text)
    if payload.get("kind") != "signal-moments":
        raise MalformedMomentsError("not a signal moment set")
    values = {
        _key_from_text(k): complex(re, im) for k, (re, im) in payload["values"].items()
    }
    return SignalMomentSet(
        payload["num_modes"], values, payload["max_order"], tuple(payload["residuals"])
    )


# ---------------------------------------------------------------------------
# exact moments of a multivariate Gaussian
# ---------------------------------------------------------------------------


def gaussian_real_moments(mean, cov, max_order):
    """Moments E[prod_i x_i^{k_i}] of a real Gaussian vector, sum(k) <= max_order.

    Uses the recursion E[x_i M] = mu_i E[M] + sum_j k_j Sigma_ij E[M / x_j]
    (Isserlis with drift). Returns a dict keyed by exponent tuples.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    dim = mean.shape[0]
    cache = {(0,) * dim: 1.0}

    def moment(key):
        if key in cache:
            return cache[key]
        i = next(idx for idx, k in enumerate(key) if k > 0)
        rest = list(key)
        rest[i] -= 1
        rest = tuple(rest)
        total = mean[i] * moment(rest)
        for j in range(dim):
            if rest[j] > 0:
                lower = list(rest)
                lower[j] -= 1
                total += rest[j] * cov[i, j] * moment(tuple(lower))
        cache[key] = total
        return total

    out = {}

    def fill(prefix, remaining):
        if len(prefix) == dim:
            out[prefix] = moment(prefix)
            return
        for k in range(remaining + 1):
            fill(prefix + (k,), remaining - k)

    fill((), max_order)
    return out


# ---------------------------------------------------------------------------
# polynomials over complex mode amplitudes and their conjugates
# ---------------------------------------------------------------------------
#
# A polynomial is a dict mapping an exponent tuple of length 2*V to a complex
# coefficient; slot 2*v holds the power of variable v, slot 2*v + 1 the power
# of its conjugate.


def poly_scalar(value, num_vars):
    return {(0,) * (2 * num_vars): complex(value)}


def poly_atom(var, conj, num_vars, coeff=1.0):
    exp = [0] * (2 * num_vars)
    exp[2 * var + (1 if conj else 0)] = 1
    return {tuple(exp): complex(coeff)}


def poly_add(*polys):
    out = {}
    for p in polys:
        for exp, c in p.items():
            out[exp] = out.get(exp, 0.0) + c
    return {e: c for e, c in out.items() if c != 0.0}


def poly_mul(pa, pb):
    out = {}
    for ea, ca in pa.items():
        for eb, cb in pb.items():
            exp = tuple(x + y for x, y in zip(ea, eb))
            out[exp] = out.get(exp, 0.0) + ca * cb
    return out


def poly_pow(p, n):
    num_vars = len(next(iter(p))) // 2
    out = poly_scalar(1.0, num_vars)
    for _ in range(n):
        out = poly_mul(out, p)
    return out


def poly_conj(p):
    out = {}
    for exp, c in p.items():
        swapped = list(exp)
        for v in range(len(exp) // 2):
            swapped[2 * v], swapped[2 * v + 1] = exp[2 * v + 1], exp[2 * v]
        out[tuple(swapped)] = c.conjugate()
    return out


# ---------------------------------------------------------------------------
# operator-ordering conversions
# ---------------------------------------------------------------------------


def weyl_to_normal(weyl, num_modes, max_order=MAX_ORDER):
    """Normal-ordered moments from symmetric (Weyl) classical moments.

    ``weyl`` maps exponent tuples over (alpha, alpha*) per mode (slot 2*v
    for alpha_v, slot 2*v+1 for alpha_v*) to classical expectations over
    the Wigner distribution. Per mode,
    <(a^dag)^n a^m> = sum_k C(n,k) C(m,k) k! (-1/2)^k E[alpha^(m-k) alpha*^(n-k)].
    """
    out = {}
    for key in signal_moment_keys(num_modes, max_order):
        pairs = [(key[0], key[1])] if num_modes == 1 else [(key[0], key[1]), (key[2], key[3])]
        total = 0.0 + 0.0j
        for combo in _commutator_terms(pairs, -0.5):
            coeff, exps = combo
            total += coeff * weyl[tuple(exps)]
        out[key] = total
    return out


def normal_to_weyl(values, num_modes, max_order=MAX_ORDER):
    """Symmetric (Weyl) classical moments from normal-ordered moments.

    Inverse of :func:`weyl_to_normal`; the correction terms carry +1/2.
    """
    out = {}
    for key in signal_moment_keys(num_modes, max_order):
        pairs = [(key[0], key[1])] if num_modes == 1 else [(key[0], key[1]), (key[2], key[3])]
        total = 0.0 + 0.0j
        for coeff, exps in _commutator_terms(pairs, +0.5):
            nkey = []
            for v in range(len(pairs)):
                nkey.extend((exps[2 * v + 1], exps[2 * v]))
            total += coeff * complex(values[tuple(nkey)])
        weyl_key = []
        for n, m in pairs:
            weyl_key.extend((m, n))
        out[tuple(weyl_key)] = total
    return out


def _commutator_terms(pairs, half):
    """Expansion terms for per-mode ordering conversion.

    For each mode with exponents (n, m) the sum runs over k with coefficient
    C(n,k) C(m,k) k! half^k and reduced exponents; the returned exponent
    tuples are over (alpha, alpha*) per mode, alpha power first.
    """
    terms = [(1.0, [])]
    for n, m in pairs:
        new_terms = []
        for coeff, exps in terms:
            for k in range(min(n, m) + 1):
                c = coeff * math.comb(n, k) * math.comb(m, k) * math.factorial(k) * (half**k)
                new_terms.append((c, exps + [m - k, n - k]))
        terms = new_terms
    return [(c, tuple(e)) for c, e in terms]


def state_to_moments(state, max_order=MAX_ORDER):
    """Exact normal-ordered moments of a Gaussian state (one or two modes).

    The Weyl moments are the classical moments of the Wigner distribution,
    i.e. of a Gaussian with the state's mean and covariance; they are then
    converted to normal ordering.
    """
    if state.num_modes not in (1, 2):
        raise ValueError("state_to_moments supports one- or two-mode states")
    real = gaussian_real_moments(state.mean, state.cov, max_order)
    nv = state.num_modes
    weyl = {}
    for key in _weyl_keys(nv, max_order):
        poly = poly_scalar(1.0, nv)
        for v in range(nv):
            alpha = poly_add(
                poly_atom_real(2 * v, nv),  # q_v
                _scale(poly_atom_real(2 * v + 1, nv), 1j),  # + i p_v
            )
            poly = poly_mul(poly, poly_pow_real(alpha, key[2 * v]))
            poly = poly_mul(poly, poly_pow_real(_conj_real(alpha), key[2 * v + 1]))
        weyl[key] = sum(c * real[e] for e, c in poly.items())
    return SignalMomentSet(nv, weyl_to_normal(weyl, nv, max_order), max_order)


def _weyl_keys(num_modes, max_order):
    # same index structure as signal keys: (e_alpha, e_alpha*, ...) per mode
    return signal_moment_keys(num_modes, max_order)


# small helpers for polynomials over *real* variables (q1, p1, q2, p2, ...)


def poly_atom_real(idx, num_modes):
    exp = [0] * (2 * num_modes)
    exp[idx] = 1
    return {tuple(exp): 1.0 + 0.0j}


def poly_pow_real(p, n):
    dim = len(next(iter(p)))
    out = {(0,) * dim: 1.0 + 0.0j}
    for _ in range(n):
        out = poly_mul(out, p)
    return out


def _scale(p, factor):
    return {e: c * factor for e, c in p.items()}


def _conj_real(p):
    # conjugation over real variables only conjugates coefficients
    return {e: c.conjugate() for e, c in p.items()}
