"""Information-flow quantities for trace-decreasing dynamics and divisibility checks.

``map_at`` arguments are callables ``t -> QuantumOperation``.  Three
distinguishability quantities are provided:

* :func:`naive_trace_distance` between the postselected (renormalized) states;
* :func:`weighted_trace_distance`, weighting each conditional state by its
  relative success probability;
* :func:`success_prob_distinguish`, the joint probability of implementing the
  operation and guessing correctly.  Only this one is guaranteed
  nonincreasing under CP-divisible dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .channel import QuantumOperation, apply, intermediate_map, normalize_conditional
from .errors import PostselectionImpossible
from .matcore import trace_norm_hermitian

MONOTONICITY_SLACK = 1e-9
DIVISIBILITY_TOL = 1e-8

MapAt = Callable[[float], QuantumOperation]


def _outputs(map_at: MapAt, rho1, rho2, t: float) -> tuple[np.ndarray, np.ndarray]:
    op = map_at(t)
    return apply(op, rho1), apply(op, rho2)


def _trace(m: np.ndarray) -> float:
    return float(np.real(np.trace(m)))


def naive_trace_distance(map_at: MapAt, rho1, rho2, t: float) -> float:
    """``1/2 || Lambda_D(t)[rho1] - Lambda_D(t)[rho2] ||_1`` between conditional states."""
    out1, out2 = _outputs(map_at, rho1, rho2, t)
    diff = normalize_conditional(out1) - normalize_conditional(out2)
    return 0.5 * trace_norm_hermitian(diff)


def weighted_trace_distance(map_at: MapAt, rho1, rho2, t: float) -> float:
    """``|| Lambda[rho1] - Lambda[rho2] ||_1 / (p1 + p2)``."""
    out1, out2 = _outputs(map_at, rho1, rho2, t)
    total = _trace(out1) + _trace(out2)
    if total <= 1e-12:
        raise PostselectionImpossible(f"total success probability {total:.3e} is not positive")
    return trace_norm_hermitian(out1 - out2) / total


def conditional_success_probability(map_at: MapAt, rho1, rho2, t: float) -> float:
    """Success probability of discrimination given that the operation succeeded."""
    return 0.5 * (1.0 + weighted_trace_distance(map_at, rho1, rho2, t))


def discrimination_success(op: QuantumOperation, rho1, rho2) -> float:
    """``1/4 (tr Lambda[rho1] + tr Lambda[rho2] + || Lambda[rho1] - Lambda[rho2] ||_1)``.

    Probability that ``op`` is implemented and the equiprobable inputs are
    then identified correctly.
    """
    out1, out2 = apply(op, rho1), apply(op, rho2)
    return 0.25 * (_trace(out1) + _trace(out2) + trace_norm_hermitian(out1 - out2))


def success_prob_distinguish(map_at: MapAt, rho1, rho2, t: float) -> float:
    return discrimination_success(map_at(t), rho1, rho2)


def series(quantity, map_at: MapAt, rho1, rho2, times: Iterable[float]) -> np.ndarray:
    return np.array([quantity(map_at, rho1, rho2, t) for t in times])


@dataclass
class MonotonicityReport:
    name: str
    times: np.ndarray
    values: np.ndarray
    slack: float
    violations: list[tuple[float, float, float]] = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        return not self.violations

    @property
    def increases_everywhere(self) -> bool:
        return len(self.violations) == len(self.values) - 1


def scan_monotonicity(values: Sequence[float], times: Sequence[float] | None = None, slack: float = MONOTONICITY_SLACK,
                      name: str = "") -> MonotonicityReport:
    """Record each adjacent pair with ``values[k+1] > values[k] + slack``."""
    values = np.asarray(values, dtype=float)
    times = np.arange(len(values), dtype=float) if times is None else np.asarray(times, dtype=float)
    if len(times) != len(values):
        raise ValueError("times and values must have equal length")
    report = MonotonicityReport(name, times, values, slack)
    for k in range(len(values) - 1):
        rise = values[k + 1] - values[k]
        if rise > slack:
            report.violations.append((float(times[k]), float(times[k + 1]), float(rise)))
    return report


@dataclass(frozen=True)
class IntervalVerdict:
    t_start: float
    t_end: float
    status: str  # "ok" | "not_an_operation" | "indeterminate"
    cp_ok: bool
    tni_ok: bool
    min_choi_eigenvalue: float
    max_dual_eigenvalue: float
    condition: float


@dataclass
class DivisibilityReport:
    times: np.ndarray
    intervals: list[IntervalVerdict]
    tol: float

    @property
    def verdict(self) -> str:
        if all(iv.cp_ok and iv.tni_ok for iv in self.intervals):
            return "CP-divisible"
        if self.failures:
            return "Indivisible"
        return "Indeterminate"

    @property
    def failures(self) -> list[IntervalVerdict]:
        return [iv for iv in self.intervals if iv.status == "not_an_operation"]

    @property
    def worst_margin(self) -> float:
        """Largest violation of either check over all intervals (<= 0 means none)."""
        margins = [
            max(-iv.min_choi_eigenvalue, iv.max_dual_eigenvalue - 1.0)
            for iv in self.intervals
            if iv.status != "indeterminate"
        ]
        return max(margins) if margins else float("nan")


def divisibility_verdict(map_at: MapAt, times: Sequence[float], tol: float = DIVISIBILITY_TOL) -> DivisibilityReport:
    """Reconstruct ``Theta(t_{k+1}, t_k)`` on each adjacent interval and test it.

    Adjacent intervals suffice on a fixed grid since compositions of valid
    operations are valid.  Singular intervals are reported as indeterminate,
    never skipped.
    """
    times = np.asarray(times, dtype=float)
    ops = [map_at(t) for t in times]
    intervals = []
    for k in range(len(times) - 1):
        r = intermediate_map(ops[k + 1], ops[k], tol)
        intervals.append(IntervalVerdict(float(times[k]), float(times[k + 1]), r.status, r.cp_ok, r.tni_ok,
                                         r.min_choi_eigenvalue, r.max_dual_eigenvalue, r.condition))
    return DivisibilityReport(times, intervals, tol)
