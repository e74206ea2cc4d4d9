"""Command-line reproduction driver.

Usage::

    tracedown example1   [--gamma-h 2 --gamma-v 1 --t-max 3 --steps 301]
    tracedown example2   [...]
    tracedown fig3       [--gamma 2 --omega 1 --lambda 0.05 --t-max 9.42 --steps 601]
    tracedown divisibility --dynamics {pdl,pdl-depol,negative-rate-demo}
    tracedown erasure    [--dynamics {pdl,pdl-depol}]
    tracedown entanglement [--lambda 0.05]

Every subcommand writes CSV (to ``--out`` or stdout) preceded by a ``#``
header recording the configuration, the gated checks and their outcome.  The
exit status is 0 iff every gated check passes.  Settings are resolved as
command-line flags, then a ``key=value`` config file (``--config`` or the
``TRACEDOWN_CONFIG`` environment variable), then per-subcommand defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import asdict, dataclass, fields
from typing import Callable

import numpy as np

from . import __version__
from . import channel as ch
from . import dynamics as dy
from . import entanglement as ent
from . import erasure as er
from . import indicators as ind
from .matcore import KET_H, KET_V, projector

ENV_CONFIG = "TRACEDOWN_CONFIG"
NUMBER_FORMAT = "{:.12g}"


@dataclass(frozen=True)
class RunConfig:
    gamma: float = 2.0
    omega: float = 1.0
    lambda_depol: float = 0.05
    gamma_H: float = 2.0
    gamma_V: float = 1.0
    t_max: float = 3.0
    steps: int = 301
    tol: float = 1e-6
    out: str | None = None

    def __post_init__(self):
        for name in ("gamma", "lambda_depol", "gamma_H", "gamma_V"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.omega > 0:
            raise ValueError("omega must be > 0")
        if not self.t_max > 0:
            raise ValueError("t_max must be > 0")
        if self.steps < 2:
            raise ValueError("steps must be >= 2")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")

    @property
    def params(self) -> dy.PdlParams:
        return dy.PdlParams(self.gamma, self.omega, self.lambda_depol)

    @property
    def grid(self) -> dy.TimeGrid:
        return dy.TimeGrid(self.t_max, self.steps)


DEFAULTS = {
    "example1": dict(gamma_H=2.0, gamma_V=1.0, t_max=3.0, steps=301, tol=1e-6),
    "example2": dict(gamma_H=2.0, gamma_V=1.0, t_max=3.0, steps=301, tol=1e-6),
    "fig3": dict(gamma=2.0, omega=1.0, lambda_depol=0.05, t_max=3 * math.pi, steps=601, tol=1e-6),
    "divisibility": dict(gamma=2.0, omega=1.0, lambda_depol=0.05, t_max=4 * math.pi, steps=201, tol=1e-8),
    "erasure": dict(gamma=2.0, omega=1.0, lambda_depol=0.05, t_max=4 * math.pi, steps=201, tol=1e-8),
    "entanglement": dict(gamma=2.0, omega=1.0, lambda_depol=0.05, t_max=6 * math.pi, steps=601, tol=1e-8),
}

# config-file / flag spelling -> RunConfig field
KEY_ALIASES = {
    "gamma": "gamma",
    "omega": "omega",
    "lambda": "lambda_depol",
    "lambda_depol": "lambda_depol",
    "gamma_h": "gamma_H",
    "gamma_v": "gamma_V",
    "t_max": "t_max",
    "steps": "steps",
    "tol": "tol",
    "out": "out",
}


def read_config_file(path: str) -> dict:
    """Parse flat ``key=value`` lines; blank lines and ``#`` comments are ignored."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            norm = key.lower().replace("-", "_")
            if norm not in KEY_ALIASES:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[KEY_ALIASES[norm]] = value
    return values


def _coerce(values: dict) -> dict:
    types = {f.name: f.type for f in fields(RunConfig)}
    out = {}
    for key, value in values.items():
        if key == "out":
            out[key] = None if value in (None, "", "-") else str(value)
        elif types[key] in ("int", int):
            out[key] = int(value)
        else:
            out[key] = float(value)
    return out


def resolve_config(command: str, flags: dict, config_path: str | None) -> RunConfig:
    merged = dict(DEFAULTS[command])
    path = config_path or os.environ.get(ENV_CONFIG)
    if path:
        merged.update(read_config_file(path))
    merged.update({k: v for k, v in flags.items() if v is not None})
    return RunConfig(**_coerce(merged))


# -- shared pieces -------------------------------------------------------------------


@dataclass
class Gate:
    name: str
    passed: bool
    detail: str


@dataclass
class Outcome:
    columns: list[str]
    rows: list[list]
    gates: list[Gate]
    notes: list[str]

    @property
    def ok(self) -> bool:
        return all(g.passed for g in self.gates)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return NUMBER_FORMAT.format(float(x))
    return "" if x is None else str(x)


def render(command: str, config: RunConfig, outcome: Outcome, extra: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# tracedown {__version__} {command}\n")
    settings = {k: v for k, v in asdict(config).items() if k != "out"}
    settings.update(extra or {})
    buf.write("# config: " + " ".join(f"{k}={_fmt(v)}" for k, v in settings.items()) + "\n")
    for gate in outcome.gates:
        buf.write(f"# gate {gate.name}: {'PASS' if gate.passed else 'FAIL'} ({gate.detail})\n")
    for note in outcome.notes:
        buf.write(f"# {note}\n")
    buf.write(f"# status: {'PASS' if outcome.ok else 'FAIL'}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(outcome.columns)
    for row in outcome.rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _example_states() -> tuple[np.ndarray, np.ndarray]:
    """``|H><H|`` and the +45 degree state ``(|H> + |V>)(<H| + <V|) / 2``."""
    return projector(KET_H), projector((KET_H + KET_V) / math.sqrt(2))


# -- subcommands ---------------------------------------------------------------------


def naive_closed_form(gamma_H: float, gamma_V: float, t: float) -> float:
    return (1.0 + math.exp((gamma_V - gamma_H) * t)) ** -0.5


def weighted_closed_form(gamma_H: float, gamma_V: float, t: float) -> float:
    a, b = math.exp(-gamma_H * t), math.exp(-gamma_V * t)
    return math.sqrt(1.0 - 8.0 * a * a / (3.0 * a + b) ** 2)


def _constant_rate_example(config: RunConfig, quantity, closed_form, label: str, identical: bool) -> Outcome:
    rho1, rho2 = _example_states()
    if identical:
        rho2 = rho1
    times = config.grid.times

    def map_at(t):
        return dy.constant_pdl_map(config.gamma_H, config.gamma_V, t)

    simulated = ind.series(quantity, map_at, rho1, rho2, times)
    exact = np.zeros_like(simulated) if identical else np.array(
        [closed_form(config.gamma_H, config.gamma_V, t) for t in times])
    err = np.abs(simulated - exact)
    rows = [[t, s, e, d] for t, s, e, d in zip(times, simulated, exact, err)]
    report = ind.scan_monotonicity(simulated, times, name=label)
    gates = [Gate("closed_form_match", float(err.max()) <= config.tol,
                  f"max abs_error {err.max():.3e} <= {config.tol:g}")]
    notes = [f"increase intervals: {len(report.violations)} of {len(times) - 1} (slack {report.slack:g})"]
    if config.gamma_H > config.gamma_V and not identical:
        gates.append(Gate("increase_detected", report.increases_everywhere,
                          f"{label} rises on {len(report.violations)} of {len(times) - 1} intervals"))
    else:
        notes.append("monotonic-increase gate not applied (requires gamma_H > gamma_V and distinct states)")
    return Outcome(["t", f"{label}_simulated", f"{label}_closed_form", "abs_error"], rows, gates, notes)


def cmd_example1(config: RunConfig, identical: bool = False) -> Outcome:
    """Naive trace distance between postselected states under constant PDL."""
    return _constant_rate_example(config, ind.naive_trace_distance, naive_closed_form, "naive_dist", identical)


def cmd_example2(config: RunConfig, identical: bool = False) -> Outcome:
    """Success-weighted trace distance under constant PDL."""
    return _constant_rate_example(config, ind.weighted_trace_distance, weighted_closed_form, "weighted_dist",
                                  identical)


def _concurrence_track(params: dy.PdlParams, grid: dy.TimeGrid) -> list[float]:
    rho0 = projector(dy.psi_plus())
    trajectory = dy.integrate(params, rho0, grid, ancilla=True, conditional=True)
    return [ent.concurrence(ch.normalize_conditional(r)) for _, r in trajectory]


def cmd_fig3(config: RunConfig) -> Outcome:
    params, grid = config.params, config.grid
    times = grid.times
    p_h = np.array([dy.survival_H(params, t) for t in times])
    p_v = np.array([dy.survival_V(params, t) for t in times])
    e_closed = np.array([ent.concurrence_closed_form(params, t) for t in times])
    e_pure = np.array(_concurrence_track(params.without_depolarization(), grid))
    e_depol = np.array(_concurrence_track(params, grid))
    rows = [list(r) for r in zip(times, p_h, p_v, e_closed, e_pure, e_depol)]
    gap = float(np.max(np.abs(e_closed - e_pure)))
    mono_h = ind.scan_monotonicity(p_h, times, slack=1e-12)
    mono_v = ind.scan_monotonicity(p_v, times, slack=1e-12)
    gates = [
        Gate("p_H_nonincreasing", mono_h.monotone, f"{len(mono_h.violations)} rises, slack 1e-12"),
        Gate("p_V_nonincreasing", mono_v.monotone, f"{len(mono_v.violations)} rises, slack 1e-12"),
        Gate("E_pure_numeric_match", gap <= config.tol, f"max |closed - numeric| {gap:.3e} <= {config.tol:g}"),
    ]
    notes = [
        f"E_pure range [{e_closed.min():.12g}, {e_closed.max():.12g}];"
        f" expected [{params.omega / params.radius:.12g}, 1]",
        f"E_depol minimum {e_depol.min():.12g}",
    ]
    return Outcome(["t", "p_H", "p_V", "E_pure_closed", "E_pure_numeric", "E_depol_numeric"], rows, gates, notes)


DYNAMICS = ("pdl", "pdl-depol", "negative-rate-demo")


def dynamics_map(config: RunConfig, dynamics: str) -> Callable[[float], ch.QuantumOperation]:
    if dynamics == "pdl":
        params = config.params.without_depolarization()
        return lambda t: dy.pdl_map(params, t)
    if dynamics == "pdl-depol":
        return dy.integrate_map(config.params, config.grid)
    if dynamics == "negative-rate-demo":
        return lambda t: dy.negative_rate_map(config.gamma, config.omega, t)
    raise ValueError(f"unknown dynamics {dynamics!r}")


def cmd_divisibility(config: RunConfig, dynamics: str = "pdl") -> Outcome:
    map_at = dynamics_map(config, dynamics)
    report = ind.divisibility_verdict(map_at, config.grid.times, tol=config.tol)
    rows = [[iv.t_start, iv.t_end, iv.status, iv.min_choi_eigenvalue, iv.max_dual_eigenvalue, iv.condition]
            for iv in report.intervals]
    expected = "Indivisible" if dynamics == "negative-rate-demo" else "CP-divisible"
    gates = [Gate("verdict", report.verdict == expected,
                  f"{report.verdict}, expected {expected}; worst margin {report.worst_margin:.3e}")]
    notes = [f"verdict: {report.verdict}", f"failing intervals: {len(report.failures)} of {len(report.intervals)}"]
    return Outcome(["t_start", "t_end", "status", "min_choi_eigenvalue", "max_dual_eigenvalue", "condition"],
                   rows, gates, notes)


def erasure_checks(map_at, times, rho1, rho2, tol: float, pairs=None) -> list[Gate]:
    """Trace preservation, CP, lifted composition, gain identity and lifted-distance monotonicity."""
    ops = [map_at(t) for t in times]
    lifted = [er.lift(op) for op in ops]
    tp = max(float(np.max(np.abs(ch.dual_on_identity(g.lifted) - np.eye(g.lifted.dim_in)))) for g in lifted)
    cp = min(ch.is_cp(g.lifted)[1] for g in lifted)

    if pairs is None:
        pairs = [(k, k + 1) for k in range(len(times) - 1)]
    comp = 0.0
    xi_tp = 0.0
    for k1, k2 in pairs:
        inter = ch.intermediate_map(ops[k2], ops[k1], tol)
        if inter.operation is None:
            comp = math.inf
            continue
        xi = er.lift_intermediate(inter.operation, tol)
        xi_tp = max(xi_tp, float(np.max(np.abs(ch.dual_on_identity(xi) - np.eye(xi.dim_in)))))
        lhs = ch.to_superoperator(lifted[k2].lifted)
        rhs = ch.to_superoperator(ch.compose(xi, lifted[k1].lifted))
        comp = max(comp, float(np.max(np.abs(lhs - rhs))))

    gain_resid = 0.0
    for op in ops:
        p1, p2 = ch.success_probability(op, rho1), ch.success_probability(op, rho2)
        gain_resid = max(gain_resid, abs(er.distinguishability_gain(op, rho1, rho2) - 0.5 * (1 - min(p1, p2))))

    dist = [er.lifted_trace_distance(g, rho1, rho2) for g in lifted]
    mono = ind.scan_monotonicity(dist, times)
    return [
        Gate("lifted_trace_preserving", tp < 1e-9, f"max |sum K^dag K - I| {tp:.3e} < 1e-9"),
        Gate("lifted_cp", cp >= -1e-9, f"min Choi eigenvalue {cp:.3e} >= -1e-9"),
        Gate("intermediate_trace_preserving", xi_tp < 1e-8, f"max |Xi^dag[I] - I| {xi_tp:.3e} < 1e-8"),
        Gate("composition_identity", comp <= 1e-8, f"max |Gamma(t2) - Xi Gamma(t1)| {comp:.3e} <= 1e-8"),
        Gate("gain_identity", gain_resid < 1e-10, f"max residual {gain_resid:.3e} < 1e-10"),
        Gate("lifted_distance_nonincreasing", mono.monotone, f"{len(mono.violations)} rises, slack {mono.slack:g}"),
    ]


def cmd_erasure(config: RunConfig, dynamics: str = "pdl") -> Outcome:
    map_at = dynamics_map(config, dynamics)
    rho1, rho2 = _example_states()
    gates = erasure_checks(map_at, config.grid.times, rho1, rho2, config.tol)
    # a trace-preserving inner operation gains nothing
    unitary = ch.QuantumOperation([np.array([[0, 1], [1, 0]])])
    zero_gain = er.distinguishability_gain(unitary, rho1, rho2)
    gates.append(Gate("trace_preserving_gain_zero", abs(zero_gain) < 1e-10, f"gain {zero_gain:.3e}"))
    rows = [[g.name, g.passed, g.detail] for g in gates]
    return Outcome(["check", "passed", "detail"], rows, gates, [])


def cmd_entanglement(config: RunConfig) -> Outcome:
    params, grid = config.params, config.grid
    times = grid.times
    rho0 = projector(dy.psi_plus())
    trajectory = dy.integrate(params, rho0, grid, ancilla=True, conditional=True)
    states = [ch.normalize_conditional(r) for _, r in trajectory]
    conc = np.array([ent.concurrence(s) for s in states])
    ppt = [ent.is_ppt_separable(s, ent.SEPARABILITY_TOL) for s in states]

    sampled = dy.integrate_map(params, grid)
    verdict = ind.divisibility_verdict(sampled, times).verdict
    series = ent.death_revival(times, conc, ent.ZERO_THRESHOLD, claimed_cp_divisible=verdict == "CP-divisible")
    agree = sum(1 for c, (sep, _) in zip(conc, ppt) if (c < ent.ZERO_THRESHOLD) == sep)
    mono = ind.scan_monotonicity(conc, times)

    gates = [Gate("ppt_agreement", agree == len(times), f"{agree} of {len(times)} grid points")]
    if params.lambda_depol > 0:
        gates.append(Gate("death_observed", series.death_time is not None, f"death_time {series.death_time}"))
        gates.append(Gate("no_revival", not series.revival_detected, f"revival_time {series.revival_time}"))
    else:
        gates.append(Gate("no_death", series.death_time is None, f"minimum concurrence {conc.min():.12g}"))
    notes = [
        f"death_time: {_fmt(series.death_time) or 'none'}",
        f"revival_detected: {_fmt(series.revival_detected)}",
        f"divisibility_verdict: {verdict}",
        f"contradiction: {_fmt(series.contradiction)}",
        f"concurrence rises on {len(mono.violations)} of {len(times) - 1} intervals",
    ]
    rows = [[t, c, lam, sep] for t, c, (sep, lam) in zip(times, conc, ppt)]
    return Outcome(["t", "concurrence", "ppt_min_eigenvalue", "ppt_separable"], rows, gates, notes)


# -- argument parsing ----------------------------------------------------------------


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gamma", type=float, help="PDL rate scale gamma (1/time)")
    p.add_argument("--omega", type=float, help="PDL angular frequency omega (rad/time)")
    p.add_argument("--lambda", dest="lambda_depol", type=float, help="depolarization rate (1/time)")
    p.add_argument("--gamma-h", dest="gamma_H", type=float, help="constant H attenuation rate")
    p.add_argument("--gamma-v", dest="gamma_V", type=float, help="constant V attenuation rate")
    p.add_argument("--t-max", dest="t_max", type=float, help="end of the time grid")
    p.add_argument("--steps", type=int, help="number of grid points (>= 2)")
    p.add_argument("--tol", type=float, help="gate tolerance")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--config", help=f"key=value config file (fallback: ${ENV_CONFIG})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tracedown", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"tracedown {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("example1", "naive trace distance of postselected states (constant PDL)"),
        ("example2", "success-weighted trace distance (constant PDL)"),
        ("fig3", "survival probabilities and concurrence curves"),
        ("divisibility", "CP-divisibility verdict over a time grid"),
        ("erasure", "generalized erasure lift checks"),
        ("entanglement", "concurrence death/revival and PPT agreement"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _common_flags(p)
        if name in ("example1", "example2"):
            p.add_argument("--identical-states", action="store_true", help="use rho2 = rho1")
        if name == "divisibility":
            p.add_argument("--dynamics", choices=DYNAMICS, default="pdl")
        if name == "erasure":
            p.add_argument("--dynamics", choices=DYNAMICS[:2], default="pdl")
    return parser


def run(argv: list[str] | None = None) -> tuple[int, str, RunConfig, Outcome]:
    args = build_parser().parse_args(argv)
    flags = {k: getattr(args, k) for k in ("gamma", "omega", "lambda_depol", "gamma_H", "gamma_V", "t_max", "steps",
                                           "tol", "out")}
    config = resolve_config(args.command, flags, args.config)
    extra = {}
    if args.command == "example1":
        outcome = cmd_example1(config, args.identical_states)
        extra["identical_states"] = args.identical_states
    elif args.command == "example2":
        outcome = cmd_example2(config, args.identical_states)
        extra["identical_states"] = args.identical_states
    elif args.command == "fig3":
        outcome = cmd_fig3(config)
    elif args.command == "divisibility":
        outcome = cmd_divisibility(config, args.dynamics)
        extra["dynamics"] = args.dynamics
    elif args.command == "erasure":
        outcome = cmd_erasure(config, args.dynamics)
        extra["dynamics"] = args.dynamics
    else:
        outcome = cmd_entanglement(config)
    text = render(args.command, config, outcome, extra)
    return (0 if outcome.ok else 1), text, config, outcome


def main(argv: list[str] | None = None) -> int:
    try:
        status, text, config, outcome = run(argv)
    except (ValueError, OSError) as exc:
        print(f"tracedown: error: {exc}", file=sys.stderr)
        return 2
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    summary = sys.stdout if config.out else sys.stderr
    for gate in outcome.gates:
        print(f"{'PASS' if gate.passed else 'FAIL'} {gate.name}: {gate.detail}", file=summary)
    for note in outcome.notes:
        if note.startswith(("verdict", "death_time", "revival", "contradiction", "divisibility_verdict")):
            print(note, file=summary)
    return status


if __name__ == "__main__":
    sys.exit(main())
