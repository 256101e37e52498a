import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from energywalk.classical import level_formula_rates, stationary_closed_form
from energywalk.collision import (
    ChannelConfig,
    ancilla_state,
    apply_channel,
    build_collision_unitary,
    channel_fixed_point,
    coherent_part,
    collision_step_closed,
    collision_step_dilated,
    evolve,
    first_order_state,
    iterate_channel,
    superoperator,
    trace_norm,
)
from energywalk.errors import LevelDependentUnsupported, MuOutOfRange, UnbiasedRates
from energywalk.ladder import (
    DensityOperator,
    TransitionRates,
    delta_population,
    embed_diagonal,
    random_density_operator,
)

PLUS, ZERO, MINUS = 0, 1, 2


def idx(n, c):
    return 3 * n + c


def basis(levels, n, c):
    v = np.zeros(3 * levels)
    v[idx(n, c)] = 1.0
    return v


class TestUnitary:
    def test_conditional_shift(self):
        u = build_collision_unitary(5)
        assert np.array_equal(u @ basis(5, 1, PLUS), basis(5, 2, MINUS))
        assert np.array_equal(u @ basis(5, 2, MINUS), basis(5, 1, PLUS))
        assert np.array_equal(u @ basis(5, 3, ZERO), basis(5, 3, ZERO))

    def test_edges_fixed(self):
        u = build_collision_unitary(5)
        assert np.array_equal(u @ basis(5, 0, MINUS), basis(5, 0, MINUS))
        assert np.array_equal(u @ basis(5, 4, PLUS), basis(5, 4, PLUS))

    @pytest.mark.parametrize("levels", [2, 3, 9])
    def test_permutation(self, levels):
        u = build_collision_unitary(levels)
        assert np.array_equal(u @ u.T, np.eye(3 * levels))
        assert set(np.unique(u)) == {0.0, 1.0}


class TestAncilla:
    def test_offdiagonal(self):
        r = ancilla_state(TransitionRates.constant(0.2, 0.1, 0.7, 3), 0.5).matrix
        assert r[PLUS, MINUS] == pytest.approx(0.187083, abs=1e-6)
        assert np.allclose(np.diag(r), (0.2, 0.1, 0.7))

    def test_pure_at_mu_one(self):
        r = ancilla_state(TransitionRates.constant(0.2, 0.1, 0.7, 3), 1.0)
        assert r.purity == pytest.approx(1.0, abs=1e-14)

    def test_mu_range(self):
        with pytest.raises(MuOutOfRange):
            ancilla_state(TransitionRates.constant(0.2, 0.1, 0.7, 3), 1.2)
        with pytest.raises(MuOutOfRange):
            ChannelConfig.from_probs(0.2, 0.1, 0.7, -0.1, 4)


def test_level_dependent_rejected():
    rates = level_formula_rates((0.15, 0.05, 1), (0.55, -0.10, 2), 6)
    with pytest.raises(LevelDependentUnsupported):
        ChannelConfig(rates, 0.5)


def test_one_step_from_ground():
    cfg = ChannelConfig.from_probs(0.2, 0.1, 0.7, 1.0, 6)
    out = collision_step_dilated(embed_diagonal(delta_population(0, 6)), cfg).matrix
    assert out[0, 0].real == pytest.approx(0.8)
    assert out[1, 1].real == pytest.approx(0.2)
    assert out[1, 0].real == pytest.approx(math.sqrt(0.14), abs=1e-15)
    assert out[1, 0] == pytest.approx(0.374166, abs=1e-6)


@pytest.mark.parametrize("levels", [4, 8])
@pytest.mark.parametrize("mu", [0.0, 0.3, 0.7, 1.0])
def test_dilation_matches_closed_form(levels, mu, rng):
    cfg = ChannelConfig.from_probs(0.2, 0.1, 0.7, mu, levels)
    for _ in range(10):
        rho = DensityOperator(random_density_operator(levels, rng))
        gap = trace_norm(collision_step_closed(rho, cfg).matrix - collision_step_dilated(rho, cfg).matrix)
        assert gap < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.45), st.floats(0.0, 1.0), st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_channel_is_cptp_on_random_states(up, mu, levels, seed):
    down = 0.9 - up
    cfg = ChannelConfig.from_probs(up, 0.1, down, mu, levels)
    rho = random_density_operator(levels, np.random.default_rng(seed))
    out = apply_channel(rho, up, 0.1, down, cfg.coupling)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.allclose(out, out.conj().T, atol=1e-14)
    assert np.linalg.eigvalsh(out).min() > -1e-10


def test_choi_matrix_positive():
    levels = 5
    cfg = ChannelConfig.from_probs(0.2, 0.1, 0.7, 1.0, levels)
    choi = np.zeros((levels * levels, levels * levels), dtype=complex)
    for i in range(levels):
        for j in range(levels):
            e = np.zeros((levels, levels), dtype=complex)
            e[i, j] = 1.0
            choi += np.kron(e, apply_channel(e, 0.2, 0.1, 0.7, cfg.coupling))
    assert np.linalg.eigvalsh(choi).min() > -1e-12


def test_linear_in_mu(rng):
    rho = DensityOperator(random_density_operator(7, rng))
    outs = [collision_step_closed(rho, ChannelConfig.from_probs(0.2, 0.1, 0.7, mu, 7)).matrix
            for mu in (0.0, 0.4, 1.0)]
    assert np.allclose(outs[1], 0.6 * outs[0] + 0.4 * outs[2], atol=1e-15)


def test_coherent_part_vanishes_without_coherence(rng):
    rho = DensityOperator(random_density_operator(6, rng))
    assert np.all(coherent_part(rho, ChannelConfig.from_probs(0.2, 0.1, 0.7, 0.0, 6)) == 0)


def test_populations_decouple_from_coherent_part():
    rho = embed_diagonal(delta_population(2, 6))
    part = coherent_part(rho, ChannelConfig.from_probs(0.2, 0.1, 0.7, 1.0, 6))
    assert np.allclose(np.diag(part), 0.0)


def test_superoperator_matches_map(rng):
    cfg = ChannelConfig.from_probs(0.2, 0.1, 0.7, 0.6, 5)
    rho = random_density_operator(5, rng)
    s = superoperator(cfg)
    assert np.allclose((s @ rho.ravel()).reshape(5, 5), collision_step_closed(DensityOperator(rho), cfg).matrix,
                       atol=1e-15)


def test_evolve_matches_iterate():
    cfg = ChannelConfig.from_probs(0.2, 0.1, 0.7, 0.5, 8)
    rho0 = embed_diagonal(delta_population(3, 8))
    last = None
    for last in iterate_channel(rho0.matrix, cfg, 25):
        pass
    assert np.allclose(evolve(rho0, cfg, 25).matrix, last, atol=1e-15)


class TestFixedPoint:
    def test_mu_zero_is_classical_stationary(self):
        cfg = ChannelConfig.from_probs(0.2, 0.1, 0.7, 0.0, 12)
        fp = channel_fixed_point(cfg).matrix
        assert np.allclose(fp, np.diag(stationary_closed_form(cfg.rates).probs), atol=1e-12)

    def test_is_fixed(self):
        cfg = ChannelConfig.from_probs(0.2, 0.1, 0.7, 0.7, 12)
        fp = channel_fixed_point(cfg)
        assert trace_norm(collision_step_closed(fp, cfg).matrix - fp.matrix) < 1e-12

    def test_populations_equal_classical(self):
        cfg = ChannelConfig.from_probs(0.2, 0.1, 0.7, 1.0, 12)
        fp = channel_fixed_point(cfg).matrix
        assert np.allclose(np.diag(fp).real, stationary_closed_form(cfg.rates).probs, atol=1e-12)
        assert abs(fp[1, 0]) > 1e-3

    def test_unbiased_rejected(self):
        with pytest.raises(UnbiasedRates):
            channel_fixed_point(ChannelConfig.from_probs(0.45, 0.1, 0.45, 0.5, 6))


def test_gibbs_not_fixed():
    cfg = ChannelConfig.from_probs(0.2, 0.1, 0.7, 0.5, 31)
    rho = embed_diagonal(stationary_closed_form(cfg.rates))
    moved = trace_norm(collision_step_closed(rho, cfg).matrix - rho.matrix)
    assert moved == pytest.approx(2 * 0.5 * math.sqrt(0.14) * rho.matrix[0, 0].real, abs=1e-12)


def test_first_order_state_at_mu_zero_is_classical():
    cfg = ChannelConfig.from_probs(0.2, 0.1, 0.7, 0.0, 10)
    pop = delta_population(1, 10)
    assert np.allclose(first_order_state(pop, cfg, 30).matrix, evolve(embed_diagonal(pop), cfg, 30).matrix,
                       atol=1e-15)
