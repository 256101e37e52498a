"""Quick oracle-equivalence and invariant battery behind ``energywalk selftest``."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..classical import (
    build_transition_matrix,
    classical_step,
    kraus_operators,
    level_formula_rates,
    stationary_closed_form,
    stationary_numeric,
    stationary_currents,
)
from ..collision import (
    ChannelConfig,
    apply_channel,
    collision_step_closed,
    collision_step_dilated,
    first_order_state,
    iterate_channel,
    trace_norm,
)
from ..diagnostics import asymptotic_deviation, trace_distance
from ..ladder import (
    DensityOperator,
    TransitionRates,
    embed_diagonal,
    gaussian_population,
    random_density_operator,
)

RATES = (0.2, 0.1, 0.7)


def _dilation_matches_closed():
    rng = np.random.default_rng(0)
    worst = 0.0
    for levels in (5, 9):
        for mu in (0.0, 0.3, 1.0):
            cfg = ChannelConfig.from_probs(*RATES, mu, levels)
            for _ in range(10):
                rho = DensityOperator(random_density_operator(levels, rng))
                a = collision_step_closed(rho, cfg).matrix
                b = collision_step_dilated(rho, cfg).matrix
                worst = max(worst, trace_norm(a - b))
    return worst < 1e-12, f"max trace-norm gap {worst:.2e}"


def _classical_routes_agree():
    rates = TransitionRates.constant(*RATES, 51)
    pop = gaussian_population(2, 2, 51)
    t = build_transition_matrix(rates).matrix
    kraus = kraus_operators(rates)
    rho = embed_diagonal(pop).matrix
    p = pop
    worst = 0.0
    for _ in range(50):
        nxt = classical_step(p, rates).probs
        worst = max(worst, np.abs(nxt - t @ p.probs).max(), np.abs(nxt - np.diag(kraus.apply(rho)).real).max())
        rho = np.diag(nxt).astype(complex)
        p = type(pop)(nxt)
    return worst < 1e-12, f"max deviation {worst:.2e}"


def _stationary_routes_agree():
    rates = TransitionRates.constant(*RATES, 60)
    a = stationary_closed_form(rates).probs
    b = stationary_numeric(build_transition_matrix(rates)).probs
    err = np.abs(a - b).max()
    return err < 1e-10 and abs(a[0] - 5 / 7) < 1e-10, f"max deviation {err:.2e}"


def _zero_current():
    rates = level_formula_rates((0.15, 0.05, 1), (0.55, -0.10, 2), 30)
    p = stationary_numeric(build_transition_matrix(rates))
    j = np.abs(stationary_currents(p, rates)).max()
    return j < 1e-10, f"max current {j:.2e}"


def _population_decoupling():
    pop = gaussian_population(2, 2, 21)
    diags = []
    for mu in (0.0, 0.5, 1.0):
        cfg = ChannelConfig.from_probs(*RATES, mu, 21)
        diags.append(np.array([np.diag(m).real for m in iterate_channel(np.diag(pop.probs), cfg, 200)]))
    err = max(np.abs(d - diags[0]).max() for d in diags)
    return err < 1e-12, f"max population spread {err:.2e}"


def _gibbs_not_fixed():
    worst = 0.0
    for mu in (0.1, 1.0):
        cfg = ChannelConfig.from_probs(*RATES, mu, 31)
        rho = embed_diagonal(stationary_closed_form(cfg.rates))
        moved = trace_norm(collision_step_closed(rho, cfg).matrix - rho.matrix)
        worst = max(worst, abs(moved - 2 * cfg.coupling * rho.matrix[0, 0].real))
    return worst < 1e-12, f"max deviation {worst:.2e}"


def _cptp_on_random_states():
    rng = np.random.default_rng(1)
    cfg = ChannelConfig.from_probs(*RATES, 0.7, 8)
    up, lazy, down = RATES
    worst_eig, worst_tr = 0.0, 0.0
    for _ in range(20):
        out = apply_channel(random_density_operator(8, rng), up, lazy, down, cfg.coupling)
        worst_tr = max(worst_tr, abs(np.trace(out) - 1))
        worst_eig = min(worst_eig, np.linalg.eigvalsh(0.5 * (out + out.conj().T)).min())
    return worst_tr < 1e-12 and worst_eig >= -1e-10, f"trace err {worst_tr:.1e}, min eig {worst_eig:.1e}"


def _contractivity():
    rng = np.random.default_rng(2)
    cfg = ChannelConfig.from_probs(*RATES, 1.0, 8)
    worst = -math.inf
    for _ in range(20):
        a = DensityOperator(random_density_operator(8, rng))
        b = DensityOperator(random_density_operator(8, rng))
        worst = max(worst, trace_distance(collision_step_closed(a, cfg), collision_step_closed(b, cfg))
                    - trace_distance(a, b))
    return worst <= 1e-12, f"max distance increase {worst:.2e}"


def _first_order_scaling():
    pop = gaussian_population(2, 2, 21)
    errs = []
    for mu in (0.1, 0.05):
        cfg = ChannelConfig.from_probs(*RATES, mu, 21)
        exact = None
        for exact in iterate_channel(np.diag(pop.probs), cfg, 100):
            pass
        errs.append(trace_norm(exact - first_order_state(pop, cfg, 100).matrix))
    ratio = errs[0] / errs[1]
    return 3.5 <= ratio <= 4.5, f"halving ratio {ratio:.3f}"


def _fixed_point_vs_plateau():
    cfg = ChannelConfig.from_probs(*RATES, 0.3, 21)
    pop = gaussian_population(2, 2, 21)
    a = asymptotic_deviation(cfg, pop, method="fixed_point")
    b = asymptotic_deviation(cfg, pop, method="plateau")
    return abs(a - b) < 1e-6, f"difference {abs(a - b):.2e}"


CHECKS: list[tuple[str, Callable]] = [
    ("dilation equals closed form", _dilation_matches_closed),
    ("recurrence = matrix = Kraus diagonal", _classical_routes_agree),
    ("closed-form stationary = power iteration", _stationary_routes_agree),
    ("zero stationary current", _zero_current),
    ("population decoupling across mu", _population_decoupling),
    ("Gibbs state moved by 2 mu sqrt(p+p-) p(0)", _gibbs_not_fixed),
    ("trace preservation and positivity", _cptp_on_random_states),
    ("trace-distance contractivity", _contractivity),
    ("first-order error scales as mu^2", _first_order_scaling),
    ("fixed point vs plateau asymptotics", _fixed_point_vs_plateau),
]


def run_selftest(echo: Callable[[str], None] = print) -> tuple[int, int]:
    passed = failed = 0
    for name, check in CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # report and keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        echo(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
        passed += ok
        failed += not ok
    echo(f"{passed} passed, {failed} failed")
    return passed, failed
