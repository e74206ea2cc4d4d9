import math

import numpy as np
import pytest

from tracedown.channel import QuantumOperation, dual_on_identity
from tracedown.matcore import KET_H, KET_V, projector


def random_hermitian(rng, n):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return x + x.conj().T


def random_density(rng, n, rank=None):
    rank = n if rank is None else rank
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, n):
    """Product of random complex Givens (Jacobi) rotations and phases."""
    u = np.diag(np.exp(1j * rng.uniform(0, 2 * math.pi, n)))
    for _ in range(3):
        for p in range(n - 1):
            for q in range(p + 1, n):
                theta, phi = rng.uniform(0, 2 * math.pi, 2)
                g = np.eye(n, dtype=complex)
                g[p, p] = g[q, q] = math.cos(theta)
                g[p, q] = -np.exp(1j * phi) * math.sin(theta)
                g[q, p] = np.exp(-1j * phi) * math.sin(theta)
                u = u @ g
    return u


def random_operation(rng, d_in=2, d_out=None, n_kraus=3, scale=None):
    """Random trace non-increasing operation with ``lambda_max(sum K^dag K) = scale``."""
    d_out = d_in if d_out is None else d_out
    ks = [rng.normal(size=(d_out, d_in)) + 1j * rng.normal(size=(d_out, d_in)) for _ in range(n_kraus)]
    lam = np.linalg.eigvalsh(sum(k.conj().T @ k for k in ks)).max()
    scale = rng.uniform(0.2, 1.0) if scale is None else scale
    ks = [k * math.sqrt(scale / lam) for k in ks]
    return QuantumOperation(ks)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def rho_h():
    return projector(KET_H)


@pytest.fixture
def rho_v():
    return projector(KET_V)


@pytest.fixture
def rho_diag():
    return projector((KET_H + KET_V) / math.sqrt(2))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance")
        for line in RESULTS:
            terminalreporter.write_line(line)
