"""Polarization-dependent loss (PDL) dynamics of a polarization qubit.

Three families are covered:

* constant rates ``gamma_H, gamma_V`` (a semigroup);
* the oscillating rates ``gamma_H(t), gamma_V(t)`` built from ``gamma, omega``,
  whose survival probabilities have the closed forms
  ``p_{H,V}(t) = exp(-gamma t) (1 +/- gamma sin(omega t) / sqrt(gamma^2 + omega^2))``;
* the same losses with an added depolarizing term of rate ``lambda_depol``,
  for which no closed form is used and the fixed-step RK4 integrator is the
  reference.

Basis order is ``(|H>, |V>)``; the ancilla, when present, is the second tensor
factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import matcore
from .channel import KRAUS_CUTOFF, QuantumOperation, kraus_from_choi, choi_from_superoperator
from .errors import DimensionMismatch, IntegrationUnstable

SUBSTEPS = 50
NEGATIVITY_LIMIT = -1e-7


@dataclass(frozen=True)
class PdlParams:
    """Rate parameters of the oscillating PDL model.

    ``gamma`` and ``lambda_depol`` are rates (1/time), ``omega`` an angular
    frequency (rad/time).
    """

    gamma: float
    omega: float = 1.0
    lambda_depol: float = 0.0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.omega > 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if not self.lambda_depol >= 0:
            raise ValueError(f"lambda_depol must be >= 0, got {self.lambda_depol}")

    @property
    def radius(self) -> float:
        return math.hypot(self.gamma, self.omega)

    def without_depolarization(self) -> PdlParams:
        return PdlParams(self.gamma, self.omega, 0.0)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform samples ``t_k = k t_max / (steps - 1)``, ``k = 0..steps-1``."""

    t_max: float
    steps: int

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError(f"t_max must be > 0, got {self.t_max}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError(f"steps must be an integer >= 2, got {self.steps}")

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps) * (self.t_max / (self.steps - 1))

    @property
    def dt(self) -> float:
        return self.t_max / (self.steps - 1)

    def __len__(self) -> int:
        return self.steps

    def __iter__(self):
        return iter(self.times)


# -- rates and survival probabilities ------------------------------------------------


def rate_H(params: PdlParams, t: float) -> float:
    g, w = params.gamma, params.omega
    return g * (1.0 - w * math.cos(w * t) / (params.radius + g * math.sin(w * t)))


def rate_V(params: PdlParams, t: float) -> float:
    g, w = params.gamma, params.omega
    return g * (1.0 + w * math.cos(w * t) / (params.radius - g * math.sin(w * t)))


def integrated_rate_H(params: PdlParams, t: float) -> float:
    """Closed form of the integral of ``rate_H`` over ``[0, t]``."""
    g, w = params.gamma, params.omega
    return g * t - math.log1p(g / params.radius * math.sin(w * t))


def integrated_rate_V(params: PdlParams, t: float) -> float:
    g, w = params.gamma, params.omega
    return g * t - math.log1p(-g / params.radius * math.sin(w * t))


def survival_H(params: PdlParams, t: float) -> float:
    g, w = params.gamma, params.omega
    return math.exp(-g * t) * (1.0 + g / params.radius * math.sin(w * t))


def survival_V(params: PdlParams, t: float) -> float:
    g, w = params.gamma, params.omega
    return math.exp(-g * t) * (1.0 - g / params.radius * math.sin(w * t))


# -- closed-form maps ----------------------------------------------------------------


def diagonal_loss(p_H: float, p_V: float, *, check: bool = True) -> QuantumOperation:
    """Single-Kraus loss ``diag(sqrt(p_H), sqrt(p_V))``."""
    return QuantumOperation([np.diag([math.sqrt(p_H), math.sqrt(p_V)])], check=check)


def pdl_map(params: PdlParams, t: float) -> QuantumOperation:
    """Exact map of the oscillating-rate PDL master equation (no depolarization)."""
    if params.lambda_depol != 0:
        raise ValueError("pdl_map has no closed form for lambda_depol > 0; use integrate_map")
    if t < 0:
        raise ValueError("t must be >= 0")
    return diagonal_loss(survival_H(params, t), survival_V(params, t))


def constant_pdl_map(gamma_H: float, gamma_V: float, t: float) -> QuantumOperation:
    """Semigroup map ``exp(L t)`` for constant attenuation rates."""
    if gamma_H < 0 or gamma_V < 0:
        raise ValueError("attenuation rates must be nonnegative")
    return QuantumOperation([np.diag([math.exp(-gamma_H * t / 2), math.exp(-gamma_V * t / 2)])])


def negative_rate_map(gamma: float, omega: float, t: float) -> QuantumOperation:
    """Synthetic PDL with ``gamma_H(t) = gamma (1 - 2 cos(omega t))`` and ``gamma_V = gamma``.

    ``gamma_H`` is negative whenever ``cos(omega t) > 1/2``, so the family is
    not CP-divisible.  Early-time members amplify ``|H>`` and are not even
    trace non-increasing; they are built unchecked.
    """
    big_gamma_H = gamma * (t - 2.0 * math.sin(omega * t) / omega)
    big_gamma_V = gamma * t
    return diagonal_loss(math.exp(-big_gamma_H), math.exp(-big_gamma_V), check=False)


def negative_rate_H(gamma: float, omega: float, t: float) -> float:
    return gamma * (1.0 - 2.0 * math.cos(omega * t))


# -- generator -----------------------------------------------------------------------


def generator_rhs(params: PdlParams, t: float, rho, ancilla: bool = False) -> np.ndarray:
    """Right-hand side of the PDL(+depolarization) master equation.

    ``-1/2 {gamma_H(t)|H><H| + gamma_V(t)|V><V|, rho} + lambda/4 sum_i (s_i rho s_i - rho)``,
    with every system operator lifted as ``X kron I`` when ``ancilla`` is true.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = 4 if ancilla else 2
    if rho.shape != (dim, dim):
        raise DimensionMismatch(f"expected a {dim}x{dim} state, got {rho.shape}")
    loss = np.diag([rate_H(params, t), rate_V(params, t)]).astype(complex)
    paulis = matcore.PAULIS
    if ancilla:
        loss = np.kron(loss, matcore.I2)
        paulis = tuple(np.kron(s, matcore.I2) for s in paulis)
    out = -0.5 * (loss @ rho + rho @ loss)
    lam = params.lambda_depol
    if lam:
        out += (lam / 4.0) * sum(s @ rho @ s - rho for s in paulis)
    return out


class _GeneratorSuperoperator:
    """Row-stacked ``L(t) = rate_H(t) A_H + rate_V(t) A_V + lambda D`` with constant parts precomputed."""

    def __init__(self, params: PdlParams, ancilla: bool):
        self.params = params
        eye_a = matcore.I2 if ancilla else np.eye(1, dtype=complex)
        d = 4 if ancilla else 2
        eye = np.eye(d, dtype=complex)

        def anticomm(proj):
            x = np.kron(proj, eye_a)
            return -0.5 * (np.kron(x, eye) + np.kron(eye, x.T))

        self.a_h = anticomm(matcore.projector(matcore.KET_H))
        self.a_v = anticomm(matcore.projector(matcore.KET_V))
        depol = np.zeros((d * d, d * d), dtype=complex)
        for s in matcore.PAULIS:
            x = np.kron(s, eye_a)
            depol += np.kron(x, x.conj()) - np.eye(d * d)
        self.depol = (params.lambda_depol / 4.0) * depol

    def __call__(self, t: float) -> np.ndarray:
        return rate_H(self.params, t) * self.a_h + rate_V(self.params, t) * self.a_v + self.depol


def generator_superoperator(params: PdlParams, t: float, ancilla: bool = False) -> np.ndarray:
    return _GeneratorSuperoperator(params, ancilla)(t)


# -- integration ---------------------------------------------------------------------


def _rk4(rhs: Callable[[float, np.ndarray], np.ndarray], y0: np.ndarray, times: np.ndarray,
         substeps: int, on_sample: Callable[[np.ndarray], np.ndarray] | None = None) -> list[np.ndarray]:
    """Classical RK4 with ``substeps`` equal steps per sampling interval."""
    y = np.array(y0, dtype=complex)
    out = [on_sample(y) if on_sample else y.copy()]
    for t0, t1 in zip(times[:-1], times[1:]):
        h = (t1 - t0) / substeps
        t = t0
        for _ in range(substeps):
            k1 = rhs(t, y)
            k2 = rhs(t + h / 2, y + (h / 2) * k1)
            k3 = rhs(t + h / 2, y + (h / 2) * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        if on_sample:
            y = on_sample(y)
        out.append(y.copy())
    return out


def _sample_fix(d: int, conditional: bool):
    def fix(y: np.ndarray) -> np.ndarray:
        m = y.reshape(d, d)
        m = 0.5 * (m + m.conj().T)
        if conditional:
            m = m / np.real(np.trace(m))
        return m.reshape(-1)
    return fix


def integrate(params: PdlParams, rho0, grid: TimeGrid, ancilla: bool = False,
              substeps: int = SUBSTEPS, conditional: bool = False) -> list[tuple[float, np.ndarray]]:
    """Integrate the master equation with fixed-step RK4.

    Each sampling interval is split into ``substeps`` RK4 steps; every stored
    state is re-Hermitized.  With ``conditional`` true each stored state is
    also divided by its trace before integration continues.  The equation is
    linear, so this yields the postselected states exactly while avoiding
    success probabilities that underflow the postselection floor at long times.

    If a stored state has an eigenvalue below ``-1e-7`` the whole run is
    repeated once with half the step, after which :class:`IntegrationUnstable`
    is raised.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    d = 4 if ancilla else 2
    if rho0.shape != (d, d):
        raise DimensionMismatch(f"expected a {d}x{d} initial state, got {rho0.shape}")
    generator = _GeneratorSuperoperator(params, ancilla)

    def rhs(t, y):
        return generator(t) @ y

    times = grid.times
    for n_sub in (substeps, 2 * substeps):
        ys = _rk4(rhs, rho0.reshape(-1), times, n_sub, _sample_fix(d, conditional))
        states = [y.reshape(d, d) for y in ys]
        worst = min(matcore.min_eigenvalue(s) for s in states)
        if worst >= NEGATIVITY_LIMIT:
            return list(zip(times.tolist(), states))
    raise IntegrationUnstable(f"state eigenvalue {worst:.3e} below {NEGATIVITY_LIMIT} even at half step")


def integrate_superoperator(params: PdlParams, grid: TimeGrid, substeps: int = SUBSTEPS) -> list[np.ndarray]:
    """Row-stacked superoperators ``S(t_k)`` of the system map, from ``dS/dt = L(t) S``."""
    generator = _GeneratorSuperoperator(params, ancilla=False)
    return _rk4(lambda t, s: generator(t) @ s, np.eye(4, dtype=complex), grid.times, substeps)


class SampledDynamics:
    """A dynamical map known only at grid times, callable as ``t -> QuantumOperation``.

    Lookup tolerates floating-point noise in ``t`` (relative ``1e-9`` of the
    grid spacing); other times raise ``KeyError``.
    """

    def __init__(self, times, superoperators, dim: int = 2):
        self.times = np.asarray(times, dtype=float)
        self.superoperators = list(superoperators)
        self.dim = dim
        self._ops: dict[int, QuantumOperation] = {}

    def index(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        spacing = self.times[1] - self.times[0] if len(self.times) > 1 else 1.0
        if abs(self.times[k] - t) > 1e-9 * spacing:
            raise KeyError(f"time {t} is not on the sampling grid")
        return k

    def operation(self, k: int) -> QuantumOperation:
        if k not in self._ops:
            c = choi_from_superoperator(self.superoperators[k], self.dim)
            c = 0.5 * (c + c.conj().T)
            self._ops[k] = QuantumOperation(kraus_from_choi(c, self.dim, self.dim, KRAUS_CUTOFF), check=False)
        return self._ops[k]

    def __call__(self, t: float) -> QuantumOperation:
        return self.operation(self.index(t))


def integrate_map(params: PdlParams, grid: TimeGrid, substeps: int = SUBSTEPS) -> SampledDynamics:
    """Numerical dynamical map of the PDL(+depolarization) equation sampled on ``grid``."""
    return SampledDynamics(grid.times, integrate_superoperator(params, grid, substeps))


# -- system-ancilla states -----------------------------------------------------------


def psi_plus() -> np.ndarray:
    """``(|HH> + |VV>) / sqrt(2)``."""
    return np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)


def conditional_pure_state(params: PdlParams, t: float) -> np.ndarray:
    """Postselected system-ancilla state ``(sqrt(p_H)|HH> + sqrt(p_V)|VV>) / sqrt(p_H + p_V)``."""
    ph, pv = survival_H(params, t), survival_V(params, t)
    return np.array([math.sqrt(ph), 0, 0, math.sqrt(pv)], dtype=complex) / math.sqrt(ph + pv)
