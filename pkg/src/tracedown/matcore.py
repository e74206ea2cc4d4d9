"""Dense complex linear algebra for small matrices (dimension <= 16).

Matrices are plain ``numpy`` complex arrays.  Composite systems use the
row-major Kronecker convention: the pair of indices ``(i_A, i_B)`` maps to the
flat index ``i_A * d_B + i_B``.  Every other module relies on this ordering.

The only eigensolver in the package is :func:`hermitian_eig`, a cyclic Jacobi
method for Hermitian matrices.  Positivity checks, trace norms, square roots
and condition estimates are all routed through it.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from .errors import ConvergenceError, DimensionMismatch, HermiticityViolation, NotPSD

HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
ZERO_EIGENVALUE = 1e-12
PSD_TOL = 1e-10

# Pauli operators in the (|H>, |V>) basis.
I2 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_1, SIGMA_2, SIGMA_3)

KET_H = np.array([1, 0], dtype=complex)
KET_V = np.array([0, 1], dtype=complex)


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a square complex array, raising on non-square input."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def projector(ket) -> np.ndarray:
    """Return ``|ket><ket|``."""
    v = np.asarray(ket, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def _scale(m: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0


def hermiticity_error(m) -> float:
    """Largest entry of ``|M - M^dagger|``."""
    a = as_matrix(m)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    a = as_matrix(m)
    return hermiticity_error(a) < tol * _scale(a)


def _check_hermitian(a: np.ndarray, tol: float) -> None:
    err = hermiticity_error(a)
    if err >= tol * _scale(a):
        raise HermiticityViolation(f"max |M - M^dagger| = {err:.3e} exceeds {tol:.1e}")


@functools.lru_cache(maxsize=None)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Tournament ordering of all index pairs into rounds of disjoint pairs."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        rounds.append((np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return tuple(rounds)


def hermitian_eig(m, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Each sweep visits every off-diagonal pair once, in round-robin order so
    that the rotations of a round act on disjoint index pairs and can be
    applied together.  Iteration stops once the off-diagonal Frobenius mass
    drops below ``1e-13`` times the Frobenius norm of the input.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted in
    descending order and eigenvectors as the columns of a unitary matrix, so
    that ``M = V @ diag(w) @ V^dagger``.

    Raises:
        HermiticityViolation: if ``M`` is not Hermitian within ``tol``
            (relative to its largest entry when that exceeds one).
        ConvergenceError: if not converged after ``JACOBI_MAX_SWEEPS`` sweeps.
    """
    a = as_matrix(m)
    _check_hermitian(a, tol)
    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)

    norm = float(np.linalg.norm(a))
    if n == 1 or norm == 0.0:
        return np.real(np.diag(a)).copy(), v
    threshold = JACOBI_TOL * norm
    negligible = 1e-18 * norm
    rounds = _round_robin(n)
    diag_idx = np.arange(n)

    for _ in range(JACOBI_MAX_SWEEPS):
        off = a.copy()
        off[diag_idx, diag_idx] = 0.0
        if np.linalg.norm(off) < threshold:
            break
        for p, q in rounds:
            apq = a[p, q]
            mag = np.abs(apq)
            active = mag > negligible
            if not active.any():
                continue
            safe = np.where(active, mag, 1.0)
            phase = np.where(active, apq / safe, 1.0)
            theta = (a[q, q].real - a[p, p].real) / (2.0 * safe)
            t = np.where(theta < 0.0, -1.0, 1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # U with U^dagger A U zeroing every (p, q) of this round.
            u = np.eye(n, dtype=complex)
            u[p, p] = c
            u[p, q] = s
            u[q, p] = -s * phase.conj()
            u[q, q] = c * phase.conj()
            a = u.conj().T @ a @ u
            a[p, q] = 0.0
            a[q, p] = 0.0
            a[diag_idx, diag_idx] = a[diag_idx, diag_idx].real
            v = v @ u
    else:
        raise ConvergenceError(f"Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps")

    w = np.real(np.diag(a))
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def eigvalsh(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Descending eigenvalues of a Hermitian matrix."""
    return hermitian_eig(m, tol)[0]


def min_eigenvalue(m, tol: float = HERMITIAN_TOL) -> float:
    return float(eigvalsh(m, tol)[-1])


def max_eigenvalue(m, tol: float = HERMITIAN_TOL) -> float:
    return float(eigvalsh(m, tol)[0])


def trace_norm_hermitian(m, tol: float = HERMITIAN_TOL) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(eigvalsh(m, tol))))


def tensor(a, b) -> np.ndarray:
    """Kronecker product in the row-major convention."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _split(m, dims: tuple[int, int]) -> tuple[np.ndarray, int, int]:
    a = as_matrix(m)
    da, db = dims
    if da * db != a.shape[0]:
        raise DimensionMismatch(f"dims {dims} incompatible with matrix of size {a.shape[0]}")
    return a.reshape(da, db, da, db), da, db


def partial_trace(m, dims: tuple[int, int], keep: str = "A") -> np.ndarray:
    """Trace out one factor of a bipartite operator; ``keep`` is ``"A"`` or ``"B"``."""
    t, _, _ = _split(m, dims)
    if keep == "A":
        return np.einsum("ibjb->ij", t)
    if keep == "B":
        return np.einsum("aiaj->ij", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_transpose(m, dims: tuple[int, int], subsystem: str = "B") -> np.ndarray:
    """Transpose one factor of a bipartite operator."""
    t, da, db = _split(m, dims)
    if subsystem == "B":
        out = t.transpose(0, 3, 2, 1)
    elif subsystem == "A":
        out = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return out.reshape(da * db, da * db)


def psd_sqrt(m, tol: float = PSD_TOL) -> np.ndarray:
    """Hermitian square root of a positive semidefinite matrix.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero; anything more negative
    raises :class:`NotPSD`.
    """
    w, v = hermitian_eig(m)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[-1] < -tol * scale:
        raise NotPSD(f"minimum eigenvalue {w[-1]:.3e} below -{tol:.1e}")
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root) @ v.conj().T


def numerical_rank(m, tol: float = ZERO_EIGENVALUE) -> int:
    """Number of eigenvalues of a Hermitian matrix with magnitude above ``tol``."""
    return int(np.sum(np.abs(eigvalsh(m)) > tol))


def condition_estimate(s) -> float:
    """Ratio of extreme singular values, from the eigenvalues of ``S^dagger S``.

    Returns ``inf`` when the smallest eigenvalue of ``S^dagger S`` is not
    positive.
    """
    s = np.asarray(s, dtype=complex)
    gram = s.conj().T @ s
    w = eigvalsh(0.5 * (gram + gram.conj().T))
    if w[0] <= 0.0:
        return math.inf
    if w[-1] <= 0.0:
        return math.inf
    return math.sqrt(w[0] / w[-1])


def normalize(ket) -> np.ndarray:
    v = np.asarray(ket, dtype=complex).reshape(-1)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / n
