"""Two-qubit entanglement of postselected system-ancilla states."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matcore
from .channel import QuantumOperation, apply, normalize_conditional, tensor_with_identity
from .dynamics import PdlParams, survival_H, survival_V
from .errors import DimensionMismatch, NotPSD

ZERO_THRESHOLD = 1e-9
SEPARABILITY_TOL = 1e-8
STATE_TOL = 1e-9

SPIN_FLIP = np.kron(matcore.SIGMA_2, matcore.SIGMA_2)


def _wootters_values(rho: np.ndarray) -> np.ndarray:
    """Descending ``mu_i``: square roots of the eigenvalues of ``sqrt(rho) R sqrt(rho)``.

    ``R = (s2 x s2) rho* (s2 x s2)``.  The ``mu_i`` are the singular values of
    ``A = sqrt(rho) (s2 x s2) conj(sqrt(rho)) (s2 x s2)`` because ``A A^dagger``
    is the matrix above.  They are read off the Hermitian dilation
    ``[[0, A], [A^dagger, 0]]``, whose spectrum is ``+/- mu_i``; this keeps
    small ``mu_i`` accurate instead of taking square roots of rounding noise.
    """
    root = matcore.psd_sqrt(rho)
    a = root @ SPIN_FLIP @ root.conj() @ SPIN_FLIP
    dilation = np.block([[np.zeros((4, 4)), a], [a.conj().T, np.zeros((4, 4))]])
    w = matcore.eigvalsh(dilation)
    return np.clip(w[:4], 0.0, None)


def concurrence(rho_ab) -> float:
    """Wootters concurrence of a two-qubit density operator.

    Complex conjugation is taken in the ``|H>, |V>`` product basis.

    Raises:
        NotPSD: an eigenvalue below ``-1e-9``.
        ValueError: trace differs from one by more than ``1e-9``.
    """
    rho = np.asarray(rho_ab, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionMismatch(f"expected a 4x4 two-qubit state, got {rho.shape}")
    tr = float(np.real(np.trace(rho)))
    if abs(tr - 1.0) > STATE_TOL:
        raise ValueError(f"state trace {tr:.12g} is not 1")
    lam = matcore.min_eigenvalue(rho)
    if lam < -STATE_TOL:
        raise NotPSD(f"state has eigenvalue {lam:.3e}")
    mu = _wootters_values(rho)
    return max(0.0, float(mu[0] - mu[1] - mu[2] - mu[3]))


def concurrence_pure(psi) -> float:
    psi = matcore.normalize(psi)
    return concurrence(matcore.projector(psi))


def concurrence_closed_form(params: PdlParams, t: float) -> float:
    """Concurrence of the postselected pure state, ``sqrt((g^2 cos^2 wt + w^2) / (g^2 + w^2))``."""
    g, w = params.gamma, params.omega
    return math.sqrt((g * g * math.cos(w * t) ** 2 + w * w) / (g * g + w * w))


def concurrence_from_survival(params: PdlParams, t: float) -> float:
    """The same quantity written as ``2 sqrt(p_H p_V) / (p_H + p_V)``."""
    ph, pv = survival_H(params, t), survival_V(params, t)
    return 2.0 * math.sqrt(ph * pv) / (ph + pv)


def postselected_state(op: QuantumOperation, rho_sa0) -> np.ndarray:
    """``(op x Id)[rho_SA] / tr[(op x Id)[rho_SA]]`` for a two-dimensional ancilla."""
    rho_sa0 = np.asarray(rho_sa0, dtype=complex)
    d_anc = rho_sa0.shape[0] // op.dim_in
    return normalize_conditional(apply(tensor_with_identity(op, d_anc), rho_sa0))


def ppt_min_eigenvalue(rho_ab) -> float:
    return matcore.min_eigenvalue(matcore.partial_transpose(rho_ab, (2, 2), "B"))


def is_ppt_separable(rho_ab, tol: float = SEPARABILITY_TOL) -> tuple[bool, float]:
    """PPT test; for two qubits PPT is equivalent to separability (Peres-Horodecki)."""
    lam = ppt_min_eigenvalue(rho_ab)
    return lam >= -tol, lam


def schmidt_rank_pure(psi, tol: float = 1e-12) -> int:
    """Schmidt rank of a two-qubit pure state.

    The largest singular value of the amplitude matrix comes from its Gram
    matrix; the smaller one from ``s1 s2 = |det|``, which stays accurate where
    the square root of a rounding-level Gram eigenvalue would not.
    """
    m = np.asarray(psi, dtype=complex).reshape(2, 2)
    s1 = math.sqrt(max(float(matcore.eigvalsh(m @ m.conj().T)[0]), 0.0))
    if s1 == 0.0:
        return 0
    s2 = abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]) / s1
    return 1 + int(s2 > tol * s1)


@dataclass
class ConcurrenceSeries:
    times: np.ndarray
    values: np.ndarray
    zero_threshold: float
    death_time: float | None
    revival_detected: bool
    revival_time: float | None = None
    claimed_cp_divisible: bool | None = None

    @property
    def contradiction(self) -> bool:
        """Revival after death although the map is claimed CP-divisible."""
        return bool(self.revival_detected and self.claimed_cp_divisible)


def death_revival(times, values, zero_threshold: float = ZERO_THRESHOLD,
                  claimed_cp_divisible: bool | None = None) -> ConcurrenceSeries:
    """Locate entanglement death (first value below threshold) and any later revival."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    dead = np.flatnonzero(values < zero_threshold)
    death_time = revival_time = None
    if dead.size:
        k = int(dead[0])
        death_time = float(times[k])
        later = np.flatnonzero(values[k + 1:] >= zero_threshold)
        if later.size:
            revival_time = float(times[k + 1 + later[0]])
    return ConcurrenceSeries(times, values, zero_threshold, death_time, revival_time is not None,
                             revival_time, claimed_cp_divisible)
