"""Collision-model embedding of the ladder walk.

A three-level ancilla with basis order ``(+, 0, -)`` selects the up, lazy and
down channels. The joint space is ordered ``|n> (x) |c>`` (flat index
``3 n + c``). After every collision the ancilla is traced out and replaced by
a fresh copy of ``rho_mu``, the family interpolating between the incoherent
mixture of channels (``mu = 0``) and the pure superposition (``mu = 1``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .classical import step_array
from .errors import (
    DimensionMismatch,
    InvalidState,
    LevelDependentUnsupported,
    MuOutOfRange,
    NonUniqueFixedPoint,
    NoUnitEigenvalue,
    UnbiasedRates,
)
from .ladder import DensityOperator, PopulationVector, TransitionRates

PLUS, ZERO, MINUS = 0, 1, 2
FIRST_ORDER_PSD_FLOOR = -1e-6


@dataclass(frozen=True)
class ChannelConfig:
    rates: TransitionRates
    mu: float

    def __post_init__(self):
        if not self.rates.is_constant:
            raise LevelDependentUnsupported("the quantum channel needs constant rates")
        if not 0.0 <= self.mu <= 1.0:
            raise MuOutOfRange(f"mu={self.mu} outside [0, 1]")

    @classmethod
    def from_probs(cls, p_plus: float, p_zero: float, p_minus: float, mu: float, levels: int):
        return cls(TransitionRates.constant(p_plus, p_zero, p_minus, levels), mu)

    @property
    def levels(self) -> int:
        return self.rates.levels

    @property
    def coupling(self) -> float:
        """Amplitude ``mu sqrt(p_plus p_minus)`` of the injected coherence."""
        up, _, down = self.rates.triple()
        return self.mu * math.sqrt(up * down)

    def with_mu(self, mu: float) -> "ChannelConfig":
        return ChannelConfig(self.rates, mu)


@dataclass(frozen=True, eq=False)
class AncillaState:
    matrix: np.ndarray
    params: tuple

    @property
    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


def ancilla_state(rates: TransitionRates, mu: float) -> AncillaState:
    """``(1 - mu) diag(p) + mu |chi><chi|`` with ``chi = sqrt(p)``."""
    if not 0.0 <= mu <= 1.0:
        raise MuOutOfRange(f"mu={mu} outside [0, 1]")
    up, lazy, down = rates.triple()
    p = np.array([up, lazy, down])
    amp = np.sqrt(p)
    m = (1.0 - mu) * np.diag(p) + mu * np.outer(amp, amp)
    m.setflags(write=False)
    return AncillaState(m, (up, lazy, down, mu))


def build_collision_unitary(levels: int) -> np.ndarray:
    """Permutation unitary of the conditional shift with reflecting edges."""
    if levels < 2:
        raise InvalidState("need at least 2 levels")
    dim = 3 * levels
    u = np.zeros((dim, dim))

    def idx(n, c):
        return 3 * n + c

    top = levels - 1
    for n in range(levels):
        u[idx(n, ZERO), idx(n, ZERO)] = 1.0
        if n < top:
            u[idx(n + 1, MINUS), idx(n, PLUS)] = 1.0
        else:
            u[idx(n, PLUS), idx(n, PLUS)] = 1.0
        if n >= 1:
            u[idx(n - 1, PLUS), idx(n, MINUS)] = 1.0
        else:
            u[idx(n, MINUS), idx(n, MINUS)] = 1.0
    return u


def _matrix(rho, levels: int) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    if m.shape != (levels, levels):
        raise DimensionMismatch(f"state is {m.shape}, channel acts on {levels} levels")
    return m


def collision_step_dilated(rho: DensityOperator, cfg: ChannelConfig) -> DensityOperator:
    """Reduced step computed from the joint unitary: ``Tr_A[U (rho x rho_mu) U^dag]``."""
    levels = cfg.levels
    m = _matrix(rho, levels)
    u = build_collision_unitary(levels)
    joint = u @ np.kron(m, ancilla_state(cfg.rates, cfg.mu).matrix) @ u.T
    reduced = np.einsum("icjc->ij", joint.reshape(levels, 3, levels, 3))
    return DensityOperator(reduced)


def apply_channel(m: np.ndarray, up: float, lazy: float, down: float, coupling: float) -> np.ndarray:
    """Closed-form reduced map on a raw matrix.

    Incoherent part: shifts weighted by ``up``/``down``, the lazy copy, and the
    edge projections. Coherent part (weight ``coupling``): the ground level
    feeds column/row 0 from ``S+ rho`` and the mirrored top-edge terms.
    """
    out = lazy * m
    out[1:, 1:] += up * m[:-1, :-1]
    out[:-1, :-1] += down * m[1:, 1:]
    out[0, 0] += down * m[0, 0]
    out[-1, -1] += up * m[-1, -1]
    if coupling:
        out[1:, 0] += coupling * m[:-1, 0]
        out[0, 1:] += coupling * m[0, :-1]
        out[:-1, -1] += coupling * m[1:, -1]
        out[-1, :-1] += coupling * m[-1, 1:]
    return out


def coherent_array(m: np.ndarray, coupling: float) -> np.ndarray:
    out = np.zeros_like(m, dtype=complex)
    out[1:, 0] += coupling * m[:-1, 0]
    out[0, 1:] += coupling * m[0, :-1]
    out[:-1, -1] += coupling * m[1:, -1]
    out[-1, :-1] += coupling * m[-1, 1:]
    return out


def collision_step_closed(rho: DensityOperator, cfg: ChannelConfig) -> DensityOperator:
    m = _matrix(rho, cfg.levels).astype(complex)
    up, lazy, down = cfg.rates.triple()
    return DensityOperator(apply_channel(m, up, lazy, down, cfg.coupling))


def coherent_part(rho: DensityOperator, cfg: ChannelConfig) -> np.ndarray:
    """``Phi_mu(rho) - Phi_0(rho)``: traceless, linear in ``mu``."""
    m = _matrix(rho, cfg.levels).astype(complex)
    return coherent_array(m, cfg.coupling)


def iterate_channel(m0: np.ndarray, cfg: ChannelConfig, steps: int) -> Iterator[np.ndarray]:
    """Yield ``rho_0, rho_1, ..., rho_steps`` as raw complex matrices."""
    up, lazy, down = cfg.rates.triple()
    k = cfg.coupling
    m = np.array(_matrix(m0, cfg.levels), dtype=complex)
    yield m
    for _ in range(steps):
        m = apply_channel(m, up, lazy, down, k)
        yield m


def evolve(rho0: DensityOperator, cfg: ChannelConfig, steps: int) -> DensityOperator:
    m = None
    for m in iterate_channel(rho0.matrix, cfg, steps):
        pass
    return DensityOperator(m)


def first_order_state(pop0: PopulationVector, cfg: ChannelConfig, steps: int) -> DensityOperator:
    """Classical evolution plus the first-order coherence correction.

    Returns ``Phi_0^t(rho_0) + mu * sum_j Phi_0^{t-1-j} Xi Phi_0^j (rho_0)`` with
    ``Xi = d Phi_mu / d mu``. The correction is accumulated with the recursion
    ``sigma_{t+1} = Phi_0(sigma_t) + Xi(rho_t^cl)``.
    """
    if steps < 0:
        raise InvalidState("steps must be >= 0")
    levels = cfg.levels
    if pop0.levels != levels:
        raise DimensionMismatch("initial populations do not match the channel")
    up, lazy, down = cfg.rates.triple()
    unit = math.sqrt(up * down)
    p = np.array(pop0.probs)
    sigma = np.zeros((levels, levels), dtype=complex)
    for _ in range(steps):
        sigma = apply_channel(sigma, up, lazy, down, 0.0) + coherent_array(np.diag(p).astype(complex), unit)
        p = step_array(p, cfg.rates)
    return DensityOperator(np.diag(p) + cfg.mu * sigma, psd_floor=FIRST_ORDER_PSD_FLOOR)


def superoperator(cfg: ChannelConfig) -> np.ndarray:
    """Matrix of the channel on row-major vectorized operators."""
    levels = cfg.levels
    up, lazy, down = cfg.rates.triple()
    dim = levels * levels
    sup = np.zeros((dim, dim), dtype=complex)
    basis = np.zeros((levels, levels), dtype=complex)
    for col in range(dim):
        i, j = divmod(col, levels)
        basis[i, j] = 1.0
        sup[:, col] = apply_channel(basis, up, lazy, down, cfg.coupling).ravel()
        basis[i, j] = 0.0
    return sup


def channel_fixed_point(cfg: ChannelConfig, eig_tol: float = 1e-10) -> DensityOperator:
    """Unique unit-trace fixed point of the channel.

    The unit eigenspace is counted on the dense superoperator spectrum; the
    state itself comes from solving ``(S - 1) v = 0`` with one balance row
    replaced by the trace condition, which is more accurate than taking the
    eigenvector directly.
    """
    up, _, down = cfg.rates.triple()
    if not down > up:
        raise UnbiasedRates("fixed point analysis assumes p_minus > p_plus")
    levels = cfg.levels
    sup = superoperator(cfg)
    lam = np.linalg.eigvals(sup)
    n_unit = int(np.sum(np.abs(lam - 1.0) < eig_tol))
    if n_unit == 0:
        raise NoUnitEigenvalue("no eigenvalue within tolerance of 1")
    if n_unit > 1:
        raise NonUniqueFixedPoint(f"unit eigenspace has dimension {n_unit}")
    a = sup - np.eye(sup.shape[0])
    rhs = np.zeros(sup.shape[0], dtype=complex)
    a[0, :] = np.eye(levels).ravel()
    rhs[0] = 1.0
    v = np.linalg.solve(a, rhs).reshape(levels, levels)
    v = 0.5 * (v + v.conj().T)
    return DensityOperator(v / np.trace(v).real)


def trace_norm(m: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    h = 0.5 * (m + m.conj().T)
    return float(np.abs(np.linalg.eigvalsh(h)).sum())
