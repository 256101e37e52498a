"""Acceptance criteria, one test each, at the stated tolerances and runtime limits.

Every test records a PASS/FAIL line that is printed in the terminal summary.
"""
import filecmp
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_RESULTS, BASE_RATES
from energywalk.classical import (
    build_transition_matrix,
    classical_step,
    detailed_balance_rates,
    kraus_operators,
    stationary_closed_form,
    stationary_numeric,
)
from energywalk.collision import (
    ChannelConfig,
    collision_step_closed,
    collision_step_dilated,
    first_order_state,
    iterate_channel,
    trace_norm,
)
from energywalk.diagnostics import (
    TOP_GUARD,
    asymptotic_deviation,
    boundary_excess,
    fit_decay_rate,
    run_classical_trajectory,
    run_quantum_trajectory,
    spectral_decay_rate,
)
from energywalk.harness.presets import list_presets, load_preset
from energywalk.harness.runner import run_scenario
from energywalk.ladder import (
    DensityOperator,
    EnergySpectrum,
    PopulationVector,
    TransitionRates,
    embed_diagonal,
    gaussian_population,
    random_density_operator,
)

PLATEAU_WINDOW = 200


def verdict(number, name, ok, detail, elapsed, limit):
    passed = bool(ok) and elapsed < limit
    detail = f"{detail}; runtime {elapsed:.2f} s (limit {limit:g} s)"
    ACCEPTANCE_RESULTS.append((number, name, passed, detail))
    print(f"[{'PASS' if passed else 'FAIL'}] {number}. {name}: {detail}")
    assert passed, detail


def fig2_channel(mu, levels=21):
    return ChannelConfig(TransitionRates.constant(*BASE_RATES, levels), mu)


def test_01_channel_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for levels in (4, 8, 12):
        for mu in (0.0, 0.3, 0.7, 1.0):
            cfg = ChannelConfig.from_probs(*BASE_RATES, mu, levels)
            for _ in range(100):
                rho = DensityOperator(random_density_operator(levels, rng))
                gap = collision_step_closed(rho, cfg).matrix - collision_step_dilated(rho, cfg).matrix
                worst = max(worst, trace_norm(gap))
    verdict(1, "closed-form channel equals dilation", worst < 1e-12,
            f"max trace-norm gap {worst:.2e} over 1200 states", time.perf_counter() - start, 10)


def test_02_classical_oracle():
    start = time.perf_counter()
    levels = 51
    rates = TransitionRates.constant(*BASE_RATES, levels)
    matrix = build_transition_matrix(rates).matrix
    kraus = kraus_operators(rates)
    pop = gaussian_population(2, 2, levels)
    worst = 0.0
    for _ in range(500):
        nxt = classical_step(pop, rates).probs
        via_matrix = matrix @ pop.probs
        via_kraus = np.diag(kraus.apply(np.diag(pop.probs).astype(complex))).real
        worst = max(worst, np.abs(nxt - via_matrix).max(), np.abs(nxt - via_kraus).max())
        pop = PopulationVector(nxt)
    verdict(2, "recurrence = matrix product = Kraus diagonal", worst < 1e-12,
            f"max deviation {worst:.2e} over 500 steps", time.perf_counter() - start, 5)


def test_03_stationary_closed_form():
    start = time.perf_counter()
    rates = TransitionRates.constant(*BASE_RATES, 201)
    numeric = stationary_numeric(build_transition_matrix(rates)).probs
    closed = stationary_closed_form(rates).probs
    err = float(np.abs(numeric - closed).max())
    ground = abs(numeric[0] - 5 / 7)
    verdict(3, "geometric stationary law", err < 1e-10 and ground < 1e-10,
            f"max deviation {err:.2e}, |p(0) - 5/7| = {ground:.2e}", time.perf_counter() - start, 5)


def test_04_gibbs_under_detailed_balance():
    start = time.perf_counter()
    beta = 0.8
    n = np.arange(30.0)
    spectrum = EnergySpectrum(n + 0.3 * n**2)
    rates = detailed_balance_rates(beta, spectrum)
    numeric = stationary_numeric(build_transition_matrix(rates)).probs
    w = np.exp(-beta * spectrum.energies)
    gibbs = w / math.fsum(w)
    err = float(np.abs(numeric - gibbs).max())
    verdict(4, "Gibbs stationarity for a non-uniform spectrum", err < 1e-10,
            f"max deviation {err:.2e}", time.perf_counter() - start, 5)


def test_05_bias_sweep_decay_rates():
    start = time.perf_counter()
    cfg = load_preset("fig1a")
    pop0 = cfg.initial_population()
    fitted, spectral, rel = [], [], []
    for _, rates in cfg.rate_variants():
        series = run_classical_trajectory(pop0, rates, cfg.steps)
        fitted.append(fit_decay_rate(series))
        spectral.append(spectral_decay_rate(rates))
        rel.append(abs(fitted[-1] - spectral[-1]) / spectral[-1])
    ordered = fitted[0] > fitted[1] > fitted[2]
    detail = ", ".join(f"b={b:g}: fit {f:.5g} vs {s:.5g} ({100 * r:.1f}%)"
                       for b, f, s, r in zip(cfg.rates["bias"], fitted, spectral, rel))
    verdict(5, "decay rates track -ln|lambda_2| within 5% and slow as b -> 1",
            ordered and max(rel) < 0.05, f"{detail}; ordered={ordered}", time.perf_counter() - start, 30)


def test_06_constant_vs_level_dependent():
    start = time.perf_counter()
    cfg = load_preset("fig1b")
    pop0 = cfg.initial_population()
    runs = {label: run_classical_trajectory(pop0, rates, cfg.steps) for label, rates in cfg.rate_variants()}
    const = runs["constant"].d_th[2000]
    tail = runs["level_dependent"].d_th[-PLATEAU_WINDOW:]
    spread = float(tail.max() - tail.min())
    ok = const < 1e-6 and tail[-1] > 1e-3 and spread < 1e-9
    verdict(6, "constant rates thermalize, level-dependent rates saturate", ok,
            f"constant d_th(2000) = {const:.2e}, level-dependent plateau {tail[-1]:.6g} "
            f"(spread {spread:.1e})", time.perf_counter() - start, 30)


def test_07_population_decoupling():
    start = time.perf_counter()
    pop0 = gaussian_population(2, 2, 21)
    diagonals = []
    for mu in (0.0, 0.25, 0.5, 1.0):
        states = iterate_channel(np.diag(pop0.probs).astype(complex), fig2_channel(mu), 1000)
        diagonals.append(np.array([np.diag(m).real for m in states]))
    err = max(float(np.abs(d - diagonals[0]).max()) for d in diagonals)
    verdict(7, "populations independent of mu", err < 1e-12,
            f"max population spread {err:.2e} for t <= 1000", time.perf_counter() - start, 20)


def test_08_populations_thermalize_state_does_not():
    start = time.perf_counter()
    cfg = load_preset("fig2")
    s = run_quantum_trajectory(cfg.initial_population(), fig2_channel(cfg.mu), cfg.steps)
    diag_final = s.d_th_diag[1000]
    tail = s.d_th[-PLATEAU_WINDOW:]
    spread = float(tail.max() - tail.min())
    ok = diag_final < 1e-6 and tail[-1] > 0 and spread < 1e-9
    verdict(8, "d_th_diag -> 0 while d_th stays finite", ok,
            f"d_th_diag(1000) = {diag_final:.2e}, d_th plateau {tail[-1]:.6g} (spread {spread:.1e})",
            time.perf_counter() - start, 20)


def test_09_plateau_grows_with_mu():
    start = time.perf_counter()
    cfg = load_preset("fig3")
    pop0 = cfg.initial_population()
    plateaus = []
    for mu in cfg.mu:
        d_th = run_quantum_trajectory(pop0, fig2_channel(mu), cfg.steps).d_th
        plateaus.append(float(d_th[-1]))
    increasing = all(a < b for a, b in zip(plateaus, plateaus[1:]))
    detail = ", ".join(f"mu={m:g}: {p:.4g}" for m, p in zip(cfg.mu, plateaus))
    verdict(9, "plateau strictly increasing in mu", increasing and plateaus[0] < 1e-6,
            detail, time.perf_counter() - start, 60)


def test_10_linear_small_mu():
    start = time.perf_counter()
    pop0 = gaussian_population(2, 2, 21)
    mus = np.array([0.02, 0.05, 0.1, 0.15, 0.2])
    fixed = np.array([asymptotic_deviation(fig2_channel(mu), method="fixed_point") for mu in mus])
    plateau = np.array([asymptotic_deviation(fig2_channel(mu), pop0, method="plateau") for mu in mus])
    slope = float(mus @ fixed / (mus @ mus))
    residual = float(np.abs(fixed - slope * mus).max())
    methods = float(np.abs(fixed - plateau).max())
    ok = residual < 0.1 * fixed.max() and methods < 1e-6
    verdict(10, "d_inf linear in small mu; fixed point agrees with plateau", ok,
            f"slope {slope:.6g}, max residual {residual:.2e} vs 10% = {0.1 * fixed.max():.2e}, "
            f"method gap {methods:.1e}", time.perf_counter() - start, 60)


def test_11_upper_bound():
    start = time.perf_counter()
    pop0 = gaussian_population(2, 2, 21)
    worst, raw = -math.inf, -math.inf
    for mu in (0.02, 0.05, 0.1):
        s = run_quantum_trajectory(pop0, fig2_channel(mu), 2000)
        worst = max(worst, float(np.max(s.d_th - s.bound - 5 * mu**2)))
        raw = max(raw, float(np.max(s.d_th - s.bound)))
    verdict(11, "d_th <= d_cl + mu sqrt(p+p-) sum p_j(0) + 5 mu^2", worst <= 0,
            f"max(d_th - bound) = {raw:.2e} before the 5 mu^2 allowance, t <= 2000",
            time.perf_counter() - start, 30)


def test_12_boundary_occupation_asymptotics():
    start = time.perf_counter()
    est = boundary_excess(gaussian_population(2, 2, 21), TransitionRates.constant(*BASE_RATES, 21),
                          steps=10**4, t_min=100)
    verdict(12, "boundary cumsum is t p_inf(0) + O(1)", est.excess_range < est.geometric_bound,
            f"range {est.excess_range:.3e} vs estimate {est.geometric_bound:.3e} "
            f"(C = {est.c_est:.3g}, delta = {est.delta:.4g})", time.perf_counter() - start, 20)


def test_13_gibbs_not_fixed():
    start = time.perf_counter()
    worst, top = 0.0, 0.0
    for mu in (0.1, 0.5, 1.0):
        cfg = fig2_channel(mu, levels=31)
        rho = embed_diagonal(stationary_closed_form(cfg.rates))
        top = max(top, rho.matrix[-1, -1].real)
        moved = trace_norm(collision_step_closed(rho, cfg).matrix - rho.matrix)
        worst = max(worst, abs(moved - 2 * cfg.coupling * rho.matrix[0, 0].real))
    verdict(13, "Gibbs state moved by 2 mu sqrt(p+p-) p(0)", worst < 1e-12 and top < TOP_GUARD,
            f"max deviation {worst:.2e}, top occupation {top:.1e}", time.perf_counter() - start, 5)


def test_14_first_order_scaling():
    start = time.perf_counter()
    pop0 = gaussian_population(2, 2, 21)
    errors = []
    for mu in (0.1, 0.05):
        cfg = fig2_channel(mu)
        exact = None
        for exact in iterate_channel(np.diag(pop0.probs).astype(complex), cfg, 200):
            pass
        errors.append(trace_norm(exact - first_order_state(pop0, cfg, 200).matrix))
    ratio = errors[0] / errors[1]
    verdict(14, "first-order error scales as mu^2", 3.5 <= ratio <= 4.5,
            f"errors {errors[0]:.4e} / {errors[1]:.4e}, ratio {ratio:.3f}", time.perf_counter() - start, 20)


def test_15_determinism(tmp_path):
    names = [n for n, _ in list_presets()]
    for tag in ("a", "b"):
        for n in names:
            run_scenario(load_preset(n), tmp_path / tag / n, svg_enabled=False)
    start = time.perf_counter()
    differing = []
    for n in names:
        files = sorted(p.name for p in (tmp_path / "a" / n).glob("*.csv"))
        _, mismatch, errors = filecmp.cmpfiles(tmp_path / "a" / n, tmp_path / "b" / n, files, shallow=False)
        differing += mismatch + errors
    verdict(15, "presets produce byte-identical CSV", not differing,
            f"{len(names)} presets, differing files: {differing or 'none'}", time.perf_counter() - start, 5)
