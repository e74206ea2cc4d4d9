import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tracedown import channel as ch
from tracedown import dynamics as dy
from tracedown import indicators as ind

from conftest import random_density, random_operation


def constant(gh=2.0, gv=1.0):
    return lambda t: dy.constant_pdl_map(gh, gv, t)


def naive_oracle(gh, gv, t):
    # pure conditional states |H> and cos(a)|H> + sin(a)|V> with tan(a) = e^{(gh-gv)t/2}; distance sin(a)
    a = math.atan(math.exp((gh - gv) * t / 2))
    return math.sin(a)


def test_naive_distance_at_zero(rho_h, rho_diag):
    assert ind.naive_trace_distance(constant(), rho_h, rho_diag, 0.0) == pytest.approx(0.7071068, abs=1e-7)


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 2.2, 3.0])
def test_naive_distance_closed_form(rho_h, rho_diag, t):
    closed = (1 + math.exp((1.0 - 2.0) * t)) ** -0.5
    assert ind.naive_trace_distance(constant(), rho_h, rho_diag, t) == pytest.approx(closed, abs=1e-12)
    assert naive_oracle(2.0, 1.0, t) == pytest.approx(closed, abs=1e-12)


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 2.2, 3.0])
def test_weighted_distance_closed_form(rho_h, rho_diag, t):
    a, b = math.exp(-2.0 * t), math.exp(-1.0 * t)
    closed = math.sqrt(1 - 8 * a * a / (3 * a + b) ** 2)
    assert ind.weighted_trace_distance(constant(), rho_h, rho_diag, t) == pytest.approx(closed, abs=1e-12)


def test_discrimination_at_identity(rho_h, rho_diag):
    op = ch.QuantumOperation.identity(2)
    assert ind.discrimination_success(op, rho_h, rho_diag) == pytest.approx(0.8535534, abs=1e-7)
    assert ind.discrimination_success(op, rho_h, rho_h) == pytest.approx(0.5)


def test_identical_states(rho_h):
    m = constant()
    for t in (0.0, 1.0, 2.0):
        assert ind.naive_trace_distance(m, rho_h, rho_h, t) == 0.0
        assert ind.weighted_trace_distance(m, rho_h, rho_h, t) == 0.0
        assert ind.conditional_success_probability(m, rho_h, rho_h, t) == 0.5


def test_weighted_matches_naive_for_equal_success(rho_h, rho_diag):
    # equal rates: no postselection bias, every measure agrees up to normalization
    m = constant(1.0, 1.0)
    for t in (0.0, 0.5, 2.0):
        assert ind.weighted_trace_distance(m, rho_h, rho_diag, t) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        assert ind.naive_trace_distance(m, rho_h, rho_diag, t) == pytest.approx(1 / math.sqrt(2), abs=1e-12)


def test_postselection_impossible(rho_h):
    from tracedown.errors import PostselectionImpossible
    dead = lambda t: ch.QuantumOperation([np.zeros((2, 2))])
    with pytest.raises(PostselectionImpossible):
        ind.weighted_trace_distance(dead, rho_h, rho_h, 0.0)
    with pytest.raises(PostselectionImpossible):
        ind.naive_trace_distance(dead, rho_h, rho_h, 0.0)


def test_series_and_scan(rho_h, rho_diag):
    times = np.linspace(0, 3, 31)
    vals = ind.series(ind.naive_trace_distance, constant(), rho_h, rho_diag, times)
    rep = ind.scan_monotonicity(vals, times)
    assert rep.increases_everywhere and not rep.monotone
    dec = ind.series(ind.success_prob_distinguish, constant(), rho_h, rho_diag, times)
    assert ind.scan_monotonicity(dec, times).monotone


def test_scan_details():
    rep = ind.scan_monotonicity([1.0, 0.5, 0.5 + 1e-10, 0.7, 0.1], slack=1e-9)
    assert rep.violations == [(2.0, 3.0, pytest.approx(0.2 - 1e-10))]
    assert not rep.increases_everywhere
    assert ind.scan_monotonicity([1.0]).monotone
    with pytest.raises(ValueError):
        ind.scan_monotonicity([1.0, 2.0], [0.0])


def test_divisibility_verdicts():
    times = np.linspace(0, 4 * math.pi, 101)
    p = dy.PdlParams(2.0, 1.0)
    rep = ind.divisibility_verdict(lambda t: dy.pdl_map(p, t), times)
    assert rep.verdict == "CP-divisible"
    assert rep.worst_margin <= 1e-8
    neg = ind.divisibility_verdict(lambda t: dy.negative_rate_map(2.0, 1.0, t), times)
    assert neg.verdict == "Indivisible"
    assert neg.worst_margin > 1e-3
    # every failing interval sits where the H rate is negative somewhere inside
    for iv in neg.failures:
        inside = np.linspace(iv.t_start, iv.t_end, 11)
        assert min(dy.negative_rate_H(2.0, 1.0, s) for s in inside) < 0


def test_indeterminate_verdict():
    dead_h = lambda t: ch.QuantumOperation([np.diag([0.0, math.exp(-t)])])
    rep = ind.divisibility_verdict(dead_h, [0.0, 1.0, 2.0])
    assert rep.verdict == "Indeterminate"
    assert all(iv.status == "indeterminate" for iv in rep.intervals)
    assert math.isnan(rep.worst_margin)


def test_success_is_conditional_times_mean_probability(rng):
    for _ in range(20):
        op = random_operation(rng, 2)
        r1, r2 = random_density(rng, 2), random_density(rng, 2)
        m = lambda t: op
        p1, p2 = ch.success_probability(op, r1), ch.success_probability(op, r2)
        lhs = ind.success_prob_distinguish(m, r1, r2, 0.0)
        assert lhs == pytest.approx(0.5 * (p1 + p2) * ind.conditional_success_probability(m, r1, r2, 0.0), abs=1e-12)


def test_scale_invariance_of_conditional_quantities(rng):
    op = random_operation(rng, 2, scale=1.0)
    scaled = ch.QuantumOperation([k * math.sqrt(0.3) for k in op.kraus])
    r1, r2 = random_density(rng, 2), random_density(rng, 2)
    for q in (ind.naive_trace_distance, ind.weighted_trace_distance):
        assert q(lambda t: scaled, r1, r2, 0) == pytest.approx(q(lambda t: op, r1, r2, 0), abs=1e-12)
    assert ind.success_prob_distinguish(lambda t: scaled, r1, r2, 0) == pytest.approx(
        0.3 * ind.success_prob_distinguish(lambda t: op, r1, r2, 0), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_success_nonincreasing_under_composition(seed):
    rng = np.random.default_rng(seed)
    lam = random_operation(rng, 2, n_kraus=3)
    theta = random_operation(rng, 2, n_kraus=2)
    r1, r2 = random_density(rng, 2), random_density(rng, 2)
    before = ind.discrimination_success(lam, r1, r2)
    after = ind.discrimination_success(ch.compose(theta, lam), r1, r2)
    assert after <= before + 1e-12
