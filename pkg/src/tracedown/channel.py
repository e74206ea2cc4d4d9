"""Quantum operations: completely positive, trace non-increasing maps.

A :class:`QuantumOperation` is stored in Kraus form.  Choi matrices and
superoperators are derived views:

* superoperators use row-stacking vectorization, ``vec(rho) = rho.reshape(-1)``,
  so that ``vec(A rho B) = (A kron B^T) vec(rho)`` and ``S = sum_i K_i kron conj(K_i)``;
* the Choi matrix is ``sum_ij Lambda[|i><j|] kron |i><j|`` (output factor first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import matcore
from .errors import DimensionMismatch, NotAnOperation, PostselectionImpossible

OPERATION_TOL = 1e-9
KRAUS_CUTOFF = 1e-10
MAX_CONDITION = 1e12
POSTSELECTION_FLOOR = 1e-12


class QuantumOperation:
    """A CP trace non-increasing map ``rho -> sum_i K_i rho K_i^dagger``.

    Construction verifies trace non-increase at ``tol`` unless ``check`` is
    false; complete positivity holds by the Kraus form itself.  Instances are
    treated as immutable.
    """

    __slots__ = ("kraus", "dim_in", "dim_out")

    def __init__(self, kraus: Sequence[np.ndarray], *, check: bool = True, tol: float = OPERATION_TOL):
        ops = tuple(np.array(k, dtype=complex) for k in kraus)
        if not ops:
            raise ValueError("a quantum operation needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise DimensionMismatch("Kraus operators must be matrices of a common shape")
        for k in ops:
            k.setflags(write=False)
        self.kraus = ops
        self.dim_out, self.dim_in = shape
        if check:
            ok, lam = is_trace_nonincreasing(self, tol)
            if not ok:
                raise NotAnOperation(f"sum K^dagger K has eigenvalue {lam:.6g} > 1 + {tol:g}")

    @classmethod
    def identity(cls, dim: int) -> QuantumOperation:
        return cls([np.eye(dim)])

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)

    def __repr__(self) -> str:
        return f"QuantumOperation(dim_in={self.dim_in}, dim_out={self.dim_out}, rank={len(self.kraus)})"


@dataclass(frozen=True)
class ChoiMatrix:
    matrix: np.ndarray
    dim_in: int
    dim_out: int


@dataclass(frozen=True)
class Intermediate:
    """Outcome of reconstructing ``Theta`` with ``Lambda2 = Theta Lambda1``.

    ``status`` is ``"ok"`` (``operation`` holds a valid quantum operation),
    ``"not_an_operation"`` (CP or trace non-increase failed; the eigenvalue
    margins say which), or ``"indeterminate"`` (``Lambda1`` is numerically
    singular and no unique ``Theta`` exists).
    """

    status: str
    operation: QuantumOperation | None
    superoperator: np.ndarray | None
    min_choi_eigenvalue: float
    max_dual_eigenvalue: float
    condition: float
    tol: float = OPERATION_TOL

    @property
    def cp_ok(self) -> bool:
        return self.status != "indeterminate" and self.min_choi_eigenvalue >= -self.tol

    @property
    def tni_ok(self) -> bool:
        return self.status != "indeterminate" and self.max_dual_eigenvalue <= 1.0 + self.tol


def apply(op: QuantumOperation, rho) -> np.ndarray:
    """Subnormalized output ``sum_i K_i rho K_i^dagger``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (op.dim_in, op.dim_in):
        raise DimensionMismatch(f"state of shape {rho.shape} does not match operation input dim {op.dim_in}")
    out = np.zeros((op.dim_out, op.dim_out), dtype=complex)
    for k in op.kraus:
        out += k @ rho @ k.conj().T
    return out


def normalize_conditional(rho_sub) -> np.ndarray:
    """Conditional (postselected) state ``rho / tr(rho)``."""
    rho_sub = np.asarray(rho_sub, dtype=complex)
    tr = float(np.real(np.trace(rho_sub)))
    if tr <= POSTSELECTION_FLOOR:
        raise PostselectionImpossible(f"success probability {tr:.3e} is not positive")
    return rho_sub / tr


def success_probability(op: QuantumOperation, rho) -> float:
    return float(np.real(np.trace(apply(op, rho))))


def dual_on_identity(op: QuantumOperation) -> np.ndarray:
    """``Lambda^dagger[I] = sum_i K_i^dagger K_i``."""
    out = np.zeros((op.dim_in, op.dim_in), dtype=complex)
    for k in op.kraus:
        out += k.conj().T @ k
    return out


def is_trace_nonincreasing(op: QuantumOperation, tol: float = OPERATION_TOL) -> tuple[bool, float]:
    """Return ``(ok, lambda_max)`` for ``sum K^dagger K``."""
    lam = matcore.max_eigenvalue(dual_on_identity(op))
    return lam <= 1.0 + tol, lam


def to_superoperator(op: QuantumOperation) -> np.ndarray:
    return sum(np.kron(k, k.conj()) for k in op.kraus)


def superoperator_from_function(fn, dim_in: int, dim_out: int | None = None) -> np.ndarray:
    """Superoperator of an arbitrary linear map given as a Python callable."""
    dim_out = dim_in if dim_out is None else dim_out
    s = np.zeros((dim_out * dim_out, dim_in * dim_in), dtype=complex)
    for i in range(dim_in):
        for j in range(dim_in):
            e = np.zeros((dim_in, dim_in), dtype=complex)
            e[i, j] = 1.0
            s[:, i * dim_in + j] = np.asarray(fn(e), dtype=complex).reshape(-1)
    return s


def apply_superoperator(s: np.ndarray, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    d_out = math.isqrt(s.shape[0])
    return (s @ rho.reshape(-1)).reshape(d_out, d_out)


def choi_from_superoperator(s: np.ndarray, dim_in: int, dim_out: int | None = None) -> np.ndarray:
    dim_out = dim_in if dim_out is None else dim_out
    t = np.asarray(s, dtype=complex).reshape(dim_out, dim_out, dim_in, dim_in)
    # S[(a,b),(i,j)] = Lambda[|i><j|]_{ab}  ->  C[(a,i),(b,j)]
    return t.transpose(0, 2, 1, 3).reshape(dim_out * dim_in, dim_out * dim_in)


def superoperator_from_choi(c: np.ndarray, dim_in: int, dim_out: int | None = None) -> np.ndarray:
    dim_out = dim_in if dim_out is None else dim_out
    t = np.asarray(c, dtype=complex).reshape(dim_out, dim_in, dim_out, dim_in)
    return t.transpose(0, 2, 1, 3).reshape(dim_out * dim_out, dim_in * dim_in)


def choi(op: QuantumOperation) -> ChoiMatrix:
    c = np.zeros((op.dim_out * op.dim_in,) * 2, dtype=complex)
    for k in op.kraus:
        v = k.reshape(-1)
        c += np.outer(v, v.conj())
    return ChoiMatrix(c, op.dim_in, op.dim_out)


def _choi_matrix(op_or_superop, dim_in: int | None, dim_out: int | None) -> np.ndarray:
    if isinstance(op_or_superop, QuantumOperation):
        return choi(op_or_superop).matrix
    if isinstance(op_or_superop, ChoiMatrix):
        return op_or_superop.matrix
    s = np.asarray(op_or_superop, dtype=complex)
    if dim_in is None:
        dim_in = math.isqrt(s.shape[1])
    if dim_out is None:
        dim_out = math.isqrt(s.shape[0])
    return choi_from_superoperator(s, dim_in, dim_out)


def is_cp(op_or_superop, tol: float = OPERATION_TOL, *, dim_in: int | None = None,
          dim_out: int | None = None) -> tuple[bool, float]:
    """Return ``(ok, lambda_min)`` of the Choi matrix.

    Accepts a :class:`QuantumOperation`, a :class:`ChoiMatrix`, or a raw
    superoperator matrix, so that maps without a Kraus form (such as the
    transpose) can be tested too.
    """
    lam = matcore.min_eigenvalue(_choi_matrix(op_or_superop, dim_in, dim_out))
    return lam >= -tol, lam


def dual_on_identity_from_choi(c: np.ndarray, dim_in: int, dim_out: int) -> np.ndarray:
    """``Lambda^dagger[I]`` for any linear map: the transposed output-partial-trace of its Choi."""
    return matcore.partial_trace(c, (dim_out, dim_in), keep="B").T


def kraus_from_choi(c: np.ndarray, dim_in: int, dim_out: int, cutoff: float = KRAUS_CUTOFF) -> list[np.ndarray]:
    """Kraus operators from the eigenpairs of a Choi matrix with eigenvalue above ``cutoff``.

    For maps whose Choi spectrum lies entirely below one (strongly attenuated
    dynamics) the cutoff is taken relative to the largest eigenvalue.
    """
    w, v = matcore.hermitian_eig(0.5 * (c + c.conj().T))
    threshold = cutoff * min(1.0, max(float(w[0]), 0.0))
    kraus = [math.sqrt(lam) * v[:, i].reshape(dim_out, dim_in) for i, lam in enumerate(w) if lam > threshold]
    if not kraus:
        kraus = [np.zeros((dim_out, dim_in), dtype=complex)]
    return kraus


def from_superoperator(s: np.ndarray, dim_in: int, dim_out: int | None = None, *, check: bool = True,
                       tol: float = OPERATION_TOL) -> QuantumOperation:
    """Build a Kraus-form operation from a superoperator, rejecting non-CP input."""
    dim_out = dim_in if dim_out is None else dim_out
    c = choi_from_superoperator(s, dim_in, dim_out)
    if check:
        ok, lam = is_cp(ChoiMatrix(c, dim_in, dim_out), tol)
        if not ok:
            raise NotAnOperation(f"Choi matrix has eigenvalue {lam:.6g} < -{tol:g}")
    return QuantumOperation(kraus_from_choi(c, dim_in, dim_out), check=check, tol=tol)


def intermediate_map(op2: QuantumOperation, op1: QuantumOperation, tol: float = OPERATION_TOL) -> Intermediate:
    """Reconstruct ``Theta`` such that ``op2 = Theta o op1``.

    The superoperator is ``S2 S1^{-1}``.  A numerically singular ``S1``
    (condition estimate at or above ``1e12``) yields status ``"indeterminate"``
    rather than a guessed pseudo-inverse branch.  CP and trace non-increase
    failures are reported in the result, never raised.
    """
    if op1.dim_in != op2.dim_in:
        raise DimensionMismatch("operations must share an input space")
    s1 = to_superoperator(op1)
    s2 = to_superoperator(op2)
    cond = matcore.condition_estimate(s1)
    if not cond < MAX_CONDITION:
        return Intermediate("indeterminate", None, None, math.nan, math.nan, cond, tol)

    theta = np.linalg.solve(s1.T, s2.T).T
    d_mid, d_out = op1.dim_out, op2.dim_out
    c = choi_from_superoperator(theta, d_mid, d_out)
    c = 0.5 * (c + c.conj().T)
    lam_min = matcore.min_eigenvalue(c)
    lam_dual = matcore.max_eigenvalue(dual_on_identity_from_choi(c, d_mid, d_out))
    if lam_min >= -tol and lam_dual <= 1.0 + tol:
        op = QuantumOperation(kraus_from_choi(c, d_mid, d_out), check=False)
        return Intermediate("ok", op, theta, lam_min, lam_dual, cond, tol)
    return Intermediate("not_an_operation", None, theta, lam_min, lam_dual, cond, tol)


def compose(op2: QuantumOperation, op1: QuantumOperation) -> QuantumOperation:
    """``op2 o op1`` with Kraus set ``{K2 K1}``."""
    if op2.dim_in != op1.dim_out:
        raise DimensionMismatch(f"cannot compose: {op1.dim_out} -> {op2.dim_in}")
    return QuantumOperation([k2 @ k1 for k2 in op2.kraus for k1 in op1.kraus], check=False)


def tensor_with_identity(op: QuantumOperation, d_ancilla: int) -> QuantumOperation:
    """``op kron Id`` acting on system (first factor) and ancilla (second factor)."""
    eye = np.eye(d_ancilla, dtype=complex)
    return QuantumOperation([np.kron(k, eye) for k in op.kraus], check=False)


def kraus_union(*ops: QuantumOperation) -> QuantumOperation:
    """Sum of maps, realized by concatenating Kraus sets."""
    return QuantumOperation([k for op in ops for k in op.kraus], check=False)
