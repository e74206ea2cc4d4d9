"""Generalized erasure lift of a trace non-increasing operation.

A qudit operation ``Lambda`` is embedded in a trace-preserving channel on
``d + 1`` levels.  The extra level ``|e>`` (index ``d``) is an erasure flag
that collects the failure probability ``tr[(I - Lambda^dagger[I]) rho]``:

    Gamma[rho (+) c] = Lambda[rho] (+) (c + tr[(I - Lambda^dagger[I]) rho]) |e><e|

Coherences between the qudit block and the flag are sent to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matcore
from .channel import (
    OPERATION_TOL,
    QuantumOperation,
    apply,
    dual_on_identity,
    is_trace_nonincreasing,
)
from .errors import DimensionMismatch, NotAnOperation
from .indicators import discrimination_success

DEFECT_CUTOFF = 1e-12


@dataclass(frozen=True)
class ErasureLiftedChannel:
    inner: QuantumOperation
    lifted: QuantumOperation

    @property
    def flag_index(self) -> int:
        return self.inner.dim_out

    def __call__(self, rho) -> np.ndarray:
        return apply(self.lifted, rho)


def failure_probability(op: QuantumOperation, rho) -> float:
    """``1 - tr Lambda[rho]``, cross-checked against ``tr[(I - Lambda^dagger[I]) rho]``."""
    rho = np.asarray(rho, dtype=complex)
    direct = 1.0 - float(np.real(np.trace(apply(op, rho))))
    dual = float(np.real(np.trace((np.eye(op.dim_in) - dual_on_identity(op)) @ rho)))
    if abs(direct - dual) > 1e-10:
        raise ArithmeticError(f"failure probability mismatch: {direct!r} vs {dual!r}")
    return direct


def pad_state(rho, flag_population: float = 0.0) -> np.ndarray:
    """Embed a qudit operator in ``d + 1`` levels with the given flag population."""
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    out = np.zeros((d + 1, d + 1), dtype=complex)
    out[:d, :d] = rho
    out[d, d] = flag_population
    return out


def _lifted_kraus(op: QuantumOperation, tol: float) -> list[np.ndarray]:
    if op.dim_in != op.dim_out:
        raise DimensionMismatch("the erasure lift needs a map with equal input and output dimension")
    ok, lam = is_trace_nonincreasing(op, tol)
    if not ok:
        raise NotAnOperation(f"cannot lift: sum K^dagger K has eigenvalue {lam:.6g} > 1")
    d = op.dim_in
    kraus = []
    for k in op.kraus:
        big = np.zeros((d + 1, d + 1), dtype=complex)
        big[:d, :d] = k
        kraus.append(big)

    defect = np.eye(d) - dual_on_identity(op)
    nu, m = matcore.hermitian_eig(0.5 * (defect + defect.conj().T))
    for j in range(d):
        if nu[j] > DEFECT_CUTOFF:
            inflow = np.zeros((d + 1, d + 1), dtype=complex)
            inflow[d, :d] = math.sqrt(nu[j]) * m[:, j].conj()
            kraus.append(inflow)

    keep_flag = np.zeros((d + 1, d + 1), dtype=complex)
    keep_flag[d, d] = 1.0
    kraus.append(keep_flag)
    return kraus


def lift(op: QuantumOperation, tol: float = OPERATION_TOL) -> ErasureLiftedChannel:
    """Trace-preserving erasure channel built from ``op``.

    Kraus operators: each ``K_i`` embedded in the qudit block,
    ``sqrt(nu_j) |e><m_j|`` for the spectral decomposition
    ``I - Lambda^dagger[I] = sum_j nu_j |m_j><m_j|``, and ``|e><e|``.
    """
    return ErasureLiftedChannel(op, QuantumOperation(_lifted_kraus(op, tol), check=False))


def lift_intermediate(theta: QuantumOperation, tol: float = OPERATION_TOL) -> QuantumOperation:
    """Lift of an intermediate map: ``theta`` on the block, flag absorbs the deficit and stays put."""
    return QuantumOperation(_lifted_kraus(theta, tol), check=False)


def lifted_trace_distance(channel: ErasureLiftedChannel, rho1, rho2) -> float:
    """``1/2 || Gamma[rho1] - Gamma[rho2] ||_1`` for qudit inputs (zero flag population)."""
    out = channel(pad_state(rho1)) - channel(pad_state(rho2))
    return 0.5 * matcore.trace_norm_hermitian(out)


def distinguishability_gain(op: QuantumOperation, rho1, rho2) -> float:
    """Excess of ``1/2 + 1/4 || Gamma[rho1] - Gamma[rho2] ||_1`` over the postselected optimum.

    Equals ``(1 - min_i tr Lambda[rho_i]) / 2``: the lifted difference has trace
    norm ``|| Lambda[rho1] - Lambda[rho2] ||_1 + |p1 - p2|``.
    """
    channel = lift(op)
    lifted = 0.5 + 0.5 * lifted_trace_distance(channel, rho1, rho2)
    return lifted - discrimination_success(op, rho1, rho2)
