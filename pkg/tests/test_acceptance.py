"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a single ``criterion N: PASS|FAIL`` line; the lines are
repeated in the terminal summary by ``conftest.py``.
"""

import math
import time

import numpy as np
import pytest

from tracedown import channel as ch
from tracedown import dynamics as dy
from tracedown import entanglement as ent
from tracedown import erasure as er
from tracedown import indicators as ind
from tracedown import matcore as mc
from tracedown.cli import naive_closed_form, weighted_closed_form

RESULTS: list[str] = []

RHO_H = mc.projector(mc.KET_H)
RHO_D = mc.projector((mc.KET_H + mc.KET_V) / math.sqrt(2))
PSI_PLUS = mc.projector(dy.psi_plus())
PARAMS = dy.PdlParams(gamma=2.0, omega=1.0)
PARAMS_DEPOL = dy.PdlParams(gamma=2.0, omega=1.0, lambda_depol=0.05)


def report(n: int, checks: dict[str, bool], detail: str) -> None:
    passed = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    line = f"criterion {n}: {'PASS' if passed else 'FAIL'} {detail}" + (f" failed={failed}" if failed else "")
    RESULTS.append(line)
    print(line)
    assert passed, line


def _constant_example(quantity, closed_form):
    start = time.perf_counter()
    times = dy.TimeGrid(3.0, 301).times
    map_at = lambda t: dy.constant_pdl_map(2.0, 1.0, t)
    sim = ind.series(quantity, map_at, RHO_H, RHO_D, times)
    exact = np.array([closed_form(2.0, 1.0, t) for t in times])
    rep = ind.scan_monotonicity(sim, times)
    return sim, float(np.abs(sim - exact).max()), rep, time.perf_counter() - start


def test_criterion_1_naive_distance():
    sim, err, rep, elapsed = _constant_example(ind.naive_trace_distance, naive_closed_form)
    report(1, {"error": err < 1e-6, "increases": rep.increases_everywhere, "runtime": elapsed < 1.0},
           f"max_err={err:.2e} rises={len(rep.violations)}/300 runtime={elapsed:.3f}s")


def test_criterion_2_weighted_distance():
    sim, err, rep, elapsed = _constant_example(ind.weighted_trace_distance, weighted_closed_form)
    # 0.7071068 is 1/sqrt(2) to seven places; the 1e-9 band is applied to the exact value
    t0_ok = abs(sim[0] - 1 / math.sqrt(2)) <= 1e-9 and round(float(sim[0]), 7) == 0.7071068
    report(2, {"error": err < 1e-6, "t0": t0_ok, "increases": bool(rep.violations), "runtime": elapsed < 1.0},
           f"max_err={err:.2e} value_t0={sim[0]:.10f} rises={len(rep.violations)}/300 runtime={elapsed:.3f}s")


def test_criterion_3_corrected_indicator():
    start = time.perf_counter()
    grid = dy.TimeGrid(3 * math.pi, 601)
    exact = lambda t: dy.pdl_map(PARAMS, t)
    sampled = dy.integrate_map(PARAMS_DEPOL, grid)
    reps = {}
    for name, map_at in (("pdl", exact), ("pdl_depol", sampled)):
        values = ind.series(ind.success_prob_distinguish, map_at, RHO_H, RHO_D, grid.times)
        reps[name] = ind.scan_monotonicity(values, grid.times, slack=1e-9)
    elapsed = time.perf_counter() - start
    report(3, {"pdl": reps["pdl"].monotone, "pdl_depol": reps["pdl_depol"].monotone, "runtime": elapsed < 5.0},
           f"rises pdl={len(reps['pdl'].violations)} pdl_depol={len(reps['pdl_depol'].violations)} "
           f"points=601 runtime={elapsed:.3f}s")


def test_criterion_4_survival_probabilities():
    grid = dy.TimeGrid(3 * math.pi, 601)
    traj_h = dy.integrate(PARAMS, RHO_H, grid)
    traj_v = dy.integrate(PARAMS, mc.projector(mc.KET_V), grid)
    p_h = np.array([r[0, 0].real for _, r in traj_h])
    p_v = np.array([r[1, 1].real for _, r in traj_v])
    err_h = max(abs(p - dy.survival_H(PARAMS, t)) for p, t in zip(p_h, grid.times))
    err_v = max(abs(p - dy.survival_V(PARAMS, t)) for p, t in zip(p_v, grid.times))
    mono_h = ind.scan_monotonicity(p_h, grid.times, slack=1e-12)
    mono_v = ind.scan_monotonicity(p_v, grid.times, slack=1e-12)
    report(4, {"p_H": err_h < 1e-6, "p_V": err_v < 1e-6, "mono_H": mono_h.monotone, "mono_V": mono_v.monotone},
           f"err_H={err_h:.2e} err_V={err_v:.2e} rises_H={len(mono_h.violations)} rises_V={len(mono_v.violations)}")


def test_criterion_5_concurrence_closed_form():
    grid = dy.TimeGrid(3 * math.pi, 601)
    traj = dy.integrate(PARAMS, PSI_PLUS, grid, ancilla=True, conditional=True)
    conc = np.array([ent.concurrence(r) for _, r in traj])
    closed = np.array([ent.concurrence_closed_form(PARAMS, t) for t in grid.times])
    gap = float(np.abs(conc - closed).max())
    peaks = [k for k, t in enumerate(grid.times) if abs(t / math.pi - round(t / math.pi)) < 1e-12]
    peak_err = max(abs(conc[k] - 1.0) for k in peaks)
    expected_min = PARAMS.omega / PARAMS.radius
    k_min = int(np.argmin(conc))
    report(5, {"closed_form": gap < 1e-8, "peaks": peak_err <= 1e-9 and len(peaks) == 4,
               "min": abs(conc[k_min] - expected_min) <= 1e-6 and round(expected_min, 7) == 0.4472136},
           f"max_gap={gap:.2e} peak_err={peak_err:.2e} at {len(peaks)} peaks "
           f"min={conc[k_min]:.9f}@t={grid.times[k_min]:.6f}")


def test_criterion_6_depolarized_death():
    grid = dy.TimeGrid(6 * math.pi, 601)
    traj = dy.integrate(PARAMS_DEPOL, PSI_PLUS, grid, ancilla=True, conditional=True)
    states = [r for _, r in traj]
    conc = np.array([ent.concurrence(r) for r in states])
    series = ent.death_revival(grid.times, conc, zero_threshold=1e-9)
    mono = ind.scan_monotonicity(conc, grid.times)
    agree = sum((c < 1e-9) == ent.is_ppt_separable(r, 1e-8)[0] for c, r in zip(conc, states))
    report(6, {"nonmonotone": bool(mono.violations), "death": series.death_time is not None,
               "no_revival": not series.revival_detected, "ppt": agree == len(states)},
           f"rises={len(mono.violations)} death_time={series.death_time} revival={series.revival_detected} "
           f"ppt_agree={agree}/{len(states)}")


def test_criterion_7_divisibility():
    grid = dy.TimeGrid(4 * math.pi, 201)
    tol = 1e-8
    reps = {
        "pdl": ind.divisibility_verdict(lambda t: dy.pdl_map(PARAMS, t), grid.times, tol),
        "pdl_depol": ind.divisibility_verdict(dy.integrate_map(PARAMS_DEPOL, grid), grid.times, tol),
        "negative": ind.divisibility_verdict(lambda t: dy.negative_rate_map(2.0, 1.0, t), grid.times, tol),
    }

    def bounds_ok(rep):
        return all(iv.min_choi_eigenvalue >= -tol and iv.max_dual_eigenvalue <= 1 + tol for iv in rep.intervals)

    neg = reps["negative"]
    report(7, {"pdl": reps["pdl"].verdict == "CP-divisible" and bounds_ok(reps["pdl"]),
               "pdl_depol": reps["pdl_depol"].verdict == "CP-divisible" and bounds_ok(reps["pdl_depol"]),
               "intervals": all(len(r.intervals) == 200 for r in reps.values()),
               "negative": neg.verdict == "Indivisible" and neg.worst_margin > 1e-3},
           f"pdl={reps['pdl'].verdict} pdl_depol={reps['pdl_depol'].verdict} negative={neg.verdict} "
           f"margin={neg.worst_margin:.3e} failing={len(neg.failures)}/200")


def test_criterion_8_erasure_lift():
    rng = np.random.default_rng(8)
    grid = dy.TimeGrid(4 * math.pi, 201)
    checks, worst = {}, {}
    for name, map_at in (("pdl", lambda t: dy.pdl_map(PARAMS, t)), ("pdl_depol", dy.integrate_map(PARAMS_DEPOL, grid))):
        ops = [map_at(t) for t in grid.times]
        lifted = [er.lift(op).lifted for op in ops]
        tp = max(float(np.linalg.norm(ch.dual_on_identity(g) - np.eye(3), 2)) for g in lifted)
        cp = min(ch.is_cp(g)[1] for g in lifted)
        comp = 0.0
        for _ in range(50):
            k1, k2 = sorted(rng.choice(len(ops), size=2, replace=False))
            theta = ch.intermediate_map(ops[k2], ops[k1], 1e-8)
            if theta.operation is None:
                comp = math.inf
                break
            xi = er.lift_intermediate(theta.operation, 1e-8)
            diff = ch.to_superoperator(lifted[k2]) - ch.to_superoperator(ch.compose(xi, lifted[k1]))
            comp = max(comp, float(np.abs(diff).max()))
        dist = [er.lifted_trace_distance(er.ErasureLiftedChannel(op, g), RHO_H, RHO_D) for op, g in zip(ops, lifted)]
        mono = ind.scan_monotonicity(dist, grid.times, slack=1e-9)
        checks.update({f"{name}_tp": tp < 1e-9, f"{name}_cp": cp >= -1e-9, f"{name}_composition": comp <= 1e-8,
                       f"{name}_monotone": mono.monotone})
        worst[name] = f"tp={tp:.1e} cp={cp:.1e} comp={comp:.1e} rises={len(mono.violations)}"
    report(8, checks, " ".join(f"[{k}: {v}]" for k, v in worst.items()))


def test_criterion_9_gain_identity():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(100):
        t = float(rng.uniform(0, 4 * math.pi))
        op = dy.pdl_map(PARAMS, t)
        states = []
        for _ in range(2):
            g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            rho = g @ g.conj().T
            states.append(rho / np.trace(rho).real)
        p = [ch.success_probability(op, r) for r in states]
        worst = max(worst, abs(er.distinguishability_gain(op, *states) - 0.5 * (1 - min(p))))
    report(9, {"identity": worst < 1e-10}, f"max_residual={worst:.2e} draws=100")


def test_criterion_10_oracles():
    werner_err = 0.0
    for w in np.linspace(0, 1, 50):
        rho = w * PSI_PLUS + (1 - w) * np.eye(4) / 4
        werner_err = max(werner_err, abs(ent.concurrence(rho) - max(0.0, (3 * w - 1) / 2)))
    rng = np.random.default_rng(10)
    eig_err = 0.0
    for k in range(100):
        n = 1 + k % 9
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        m = x + x.conj().T
        w, v = mc.hermitian_eig(m)
        eig_err = max(eig_err, float(np.abs(v @ np.diag(w) @ v.conj().T - m).max()))
    report(10, {"werner": werner_err < 1e-9, "eigensolver": eig_err < 1e-9},
           f"werner_err={werner_err:.2e} reconstruction_err={eig_err:.2e}")
