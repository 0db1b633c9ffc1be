"""Shared test oracles.

The truncated-Fock-space oracle applies the bosonic operators as dense
matrices and exponentiates generators numerically; it shares nothing with
the package's symplectic algebra, so agreement between the two is a real
check. Truncation dim=48 keeps occupation leakage far below the tolerances
used (states tested stay below ~10 photons).
"""

import numpy as np
import pytest
from scipy.linalg import expm

FOCK_DIM = 48


def fock_destroy(dim=FOCK_DIM):
    return np.diag(np.sqrt(np.arange(1.0, dim)), k=1)


def fock_vacuum_dm(dim=FOCK_DIM):
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def fock_thermal_dm(n_mean, dim=FOCK_DIM):
    if n_mean == 0:
        return fock_vacuum_dm(dim)
    weights = (n_mean / (1.0 + n_mean)) ** np.arange(dim) / (1.0 + n_mean)
    weights /= weights.sum()  # renormalise the truncated tail
    return np.diag(weights).astype(complex)


def fock_squeeze_op(r, phi=0.0, dim=FOCK_DIM):
    a = fock_destroy(dim)
    xi = r * np.exp(1j * phi)
    return expm(0.5 * (np.conj(xi) * a @ a - xi * a.conj().T @ a.conj().T))


def fock_displace_op(alpha, dim=FOCK_DIM):
    a = fock_destroy(dim)
    return expm(alpha * a.conj().T - np.conj(alpha) * a)


def fock_normal_moment(rho, n, m, dim=FOCK_DIM):
    """<(a^dag)^n a^m> evaluated by dense matrix products."""
    a = fock_destroy(dim)
    op = np.linalg.matrix_power(a.conj().T, n) @ np.linalg.matrix_power(a, m)
    return complex(np.trace(rho @ op))


def fock_quadrature_stats(rho, dim=FOCK_DIM):
    """Mean vector and symmetrised covariance of q=(a+a^dag)/2, p=(a-a^dag)/2i."""
    a = fock_destroy(dim)
    q = 0.5 * (a + a.conj().T)
    p = (a - a.conj().T) / 2.0j

    def ev(op):
        return float(np.real(np.trace(rho @ op)))

    mean = np.array([ev(q), ev(p)])
    cov = np.empty((2, 2))
    cov[0, 0] = ev(q @ q) - mean[0] ** 2
    cov[1, 1] = ev(p @ p) - mean[1] ** 2
    cov[0, 1] = cov[1, 0] = ev(0.5 * (q @ p + p @ q)) - mean[0] * mean[1]
    return mean, cov


@pytest.fixture
def fock():
    """Bundle of the Fock-space oracle helpers."""

    class Oracle:
        dim = FOCK_DIM
        destroy = staticmethod(fock_destroy)
        vacuum_dm = staticmethod(fock_vacuum_dm)
        thermal_dm = staticmethod(fock_thermal_dm)
        squeeze_op = staticmethod(fock_squeeze_op)
        displace_op = staticmethod(fock_displace_op)
        normal_moment = staticmethod(fock_normal_moment)
        quadrature_stats = staticmethod(fock_quadrature_stats)

    return Oracle
