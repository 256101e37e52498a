"""Incoherent birth-death-lazy transport on the truncated energy ladder.

Probability moves one level up with ``p_plus(n)``, one level down with
``p_minus(n)`` and stays with ``p_zero(n)``. Downward moves out of the ground
level are blocked (the weight stays at ``n = 0``) and upward moves out of the
top level ``N`` are reflected the same way, so every map here is exactly
stochastic on ``0..N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import (
    EmptyTrajectory,
    InfeasibleRates,
    InvalidState,
    LevelDependentUnsupported,
    NoConvergence,
    NonUniqueFixedPoint,
    NotNormalizable,
    RateShapeMismatch,
    UnbiasedRates,
    ZeroUpRate,
)
from .ladder import (
    EnergySpectrum,
    PopulationVector,
    TransitionRates,
    ladder_operators,
)

STOCHASTIC_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Column-stochastic tridiagonal matrix, ``T[m, n] = P(n -> m)``."""

    matrix: np.ndarray

    def __post_init__(self):
        t = np.array(self.matrix, dtype=float, copy=True)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise InvalidState("transition matrix must be square")
        if np.any(t < 0) or np.any(t > 1):
            raise InvalidState("transition probabilities outside [0, 1]")
        if np.max(np.abs(t.sum(axis=0) - 1.0)) > STOCHASTIC_TOL:
            raise InvalidState("columns do not sum to 1")
        if np.any(np.triu(t, 2)) or np.any(np.tril(t, -2)):
            raise InvalidState("transition matrix is not tridiagonal")
        t.setflags(write=False)
        object.__setattr__(self, "matrix", t)

    @property
    def levels(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class KrausSet:
    operators: tuple
    labels: tuple

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho, dtype=complex)
        for k in self.operators:
            out += k @ rho @ k.conj().T
        return out

    def completeness(self) -> np.ndarray:
        return sum(k.conj().T @ k for k in self.operators)


def _check_shape(p: np.ndarray, rates: TransitionRates) -> None:
    if p.shape != (rates.levels,):
        raise RateShapeMismatch(
            f"rates cover {rates.levels} levels but population has {p.size}")


def step_array(p: np.ndarray, rates: TransitionRates) -> np.ndarray:
    """One application of the recurrences to a raw probability array."""
    up, lazy, down = rates.p_plus, rates.p_zero, rates.p_minus
    out = lazy * p
    out[1:] += up[:-1] * p[:-1]
    out[:-1] += down[1:] * p[1:]
    out[0] += down[0] * p[0]
    out[-1] += up[-1] * p[-1]
    return out


def classical_step(pop: PopulationVector, rates: TransitionRates) -> PopulationVector:
    p = pop.probs
    _check_shape(p, rates)
    return PopulationVector(step_array(p, rates))


def classical_trajectory(pop0: PopulationVector, rates: TransitionRates, steps: int) -> np.ndarray:
    """Array of shape ``(steps + 1, levels)`` holding ``p_0 .. p_steps``."""
    p = np.array(pop0.probs)
    _check_shape(p, rates)
    out = np.empty((steps + 1, p.size))
    out[0] = p
    for t in range(steps):
        p = step_array(p, rates)
        out[t + 1] = p
    return out


def build_transition_matrix(rates: TransitionRates, levels: Optional[int] = None) -> TransitionMatrix:
    if levels is not None and levels != rates.levels:
        raise RateShapeMismatch(f"rates cover {rates.levels} levels, asked for {levels}")
    up, lazy, down = rates.p_plus, rates.p_zero, rates.p_minus
    t = np.diag(lazy.copy())
    idx = np.arange(rates.levels - 1)
    t[idx + 1, idx] = up[:-1]
    t[idx, idx + 1] = down[1:]
    t[0, 0] += down[0]
    t[-1, -1] += up[-1]
    return TransitionMatrix(t)


def kraus_operators(rates: TransitionRates, levels: Optional[int] = None) -> KrausSet:
    """Diagonality-preserving Kraus operators of the constant-rate channel.

    Operators with zero weight are dropped. The extra top-edge operator
    ``sqrt(p_plus) |N><N|`` makes the set complete on the truncation.
    """
    if not rates.is_constant:
        raise LevelDependentUnsupported("Kraus form requires constant rates")
    levels = rates.levels if levels is None else levels
    up, lazy, down = rates.triple()
    ops = ladder_operators(levels)
    candidates = [
        ("minus_boundary", down, ops.ground_projector),
        ("minus", down, ops.lower_op),
        ("zero", lazy, np.eye(levels)),
        ("plus", up, ops.raise_op),
        ("plus_boundary", up, ops.top_projector),
    ]
    kept = [(name, math.sqrt(w) * m.astype(complex)) for name, w, m in candidates if w > 0]
    return KrausSet(tuple(m for _, m in kept), tuple(name for name, _ in kept))


def unitality_defect(rates: TransitionRates, levels: Optional[int] = None) -> np.ndarray:
    """``Phi(1) - 1``; nonzero only on the two edge levels."""
    kraus = kraus_operators(rates, levels)
    dim = kraus.operators[0].shape[0]
    return (kraus.apply(np.eye(dim, dtype=complex)) - np.eye(dim)).real


def stationary_closed_form(
    rates: TransitionRates,
    spectrum: Optional[EnergySpectrum] = None,
    infinite_ladder: bool = False,
) -> PopulationVector:
    """Zero-current stationary distribution.

    Constant rates give a geometric law with ratio ``p_plus / p_minus``,
    normalized on the truncation (or, with ``infinite_ladder``, with the
    semi-infinite weight ``(1 - r)``). Level-dependent rates use the product
    of ``p_plus(k) / p_minus(k+1)``.
    """
    if spectrum is not None and spectrum.levels != rates.levels:
        raise RateShapeMismatch("spectrum and rates cover different ladders")
    levels = rates.levels
    n = np.arange(levels)
    if rates.is_constant:
        up, _, down = rates.triple()
        if infinite_ladder:
            if not down > up:
                raise NotNormalizable(f"p_plus={up} >= p_minus={down}: geometric series diverges")
            r = up / down
            return PopulationVector((1.0 - r) * r ** n)
        if down == 0:
            raise NotNormalizable("p_minus = 0: all weight escapes to the top level")
        r = up / down
        if r == 1.0:
            return PopulationVector(np.full(levels, 1.0 / levels))
        return PopulationVector((1.0 - r) * r ** n / (1.0 - r ** levels))

    if infinite_ladder:
        raise LevelDependentUnsupported("infinite-ladder form needs constant rates")
    up = rates.p_plus[:-1]
    down = rates.p_minus[1:]
    if np.any((down == 0) & (up > 0)):
        raise NotNormalizable("zero downward rate above a level with upward flux")
    with np.errstate(divide="ignore"):
        log_ratio = np.where(up > 0, np.log(up) - np.log(np.where(down > 0, down, 1.0)), -np.inf)
    log_w = np.concatenate([[0.0], np.cumsum(log_ratio)])
    w = np.exp(log_w - log_w.max())
    return PopulationVector(w / math.fsum(w))


def stationary_numeric(
    T: TransitionMatrix,
    tol: float = 1e-13,
    max_iter: int = 10**6,
    check_unique: bool = True,
) -> PopulationVector:
    """Power iteration from the uniform vector until the per-sweep TV change < ``tol``.

    With ``check_unique`` a chain whose spectral gap is below 1e-12 raises
    :class:`NonUniqueFixedPoint`; otherwise the converged vector is returned.
    """
    if check_unique and spectral_gap(T) < 1e-12:
        raise NonUniqueFixedPoint("second eigenvalue has unit modulus")
    m = T.matrix
    v = np.full(T.levels, 1.0 / T.levels)
    for _ in range(max_iter):
        w = m @ v
        w /= w.sum()
        change = 0.5 * np.abs(w - v).sum()
        v = w
        if change < tol:
            return PopulationVector(np.clip(v, 0.0, None) / np.clip(v, 0.0, None).sum())
    raise NoConvergence(f"power iteration did not reach tol={tol} in {max_iter} sweeps")


def transition_eigenvalues(T: TransitionMatrix) -> np.ndarray:
    """Eigenvalues of ``T`` sorted by decreasing modulus.

    When every off-diagonal pair is positive the tridiagonal matrix is
    similar to a symmetric one, which is far better conditioned for strongly
    biased chains than the raw nonsymmetric problem.
    """
    m = T.matrix
    lower = np.diag(m, -1)
    upper = np.diag(m, 1)
    prod = lower * upper
    if m.shape[0] == 1:
        lam = np.diag(m).copy()
    elif np.all(prod > 0):
        lam = eigvalsh_tridiagonal(np.diag(m).copy(), np.sqrt(prod))
    else:
        lam = np.linalg.eigvals(m)
    return lam[np.argsort(-np.abs(lam), kind="stable")]


def spectral_gap(T: TransitionMatrix) -> float:
    lam = transition_eigenvalues(T)
    if lam.size < 2:
        return 1.0
    return float(1.0 - abs(lam[1]))


def second_eigenvalue_modulus(T: TransitionMatrix) -> float:
    return float(abs(transition_eigenvalues(T)[1]))


def _as_array(trajectory) -> np.ndarray:
    if isinstance(trajectory, np.ndarray):
        arr = trajectory
    else:
        arr = np.array([p.probs if isinstance(p, PopulationVector) else p for p in trajectory], dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise EmptyTrajectory("trajectory is empty")
    return arr


def cesaro_average(trajectory: Union[np.ndarray, Sequence[PopulationVector]]) -> PopulationVector:
    arr = _as_array(trajectory)
    return PopulationVector(arr.mean(axis=0))


def boundary_cumsum(trajectory: Union[np.ndarray, Sequence[PopulationVector]]) -> np.ndarray:
    """Entry ``t - 1`` holds ``sum_{j < t} p_j(0)`` for ``t = 1..len(trajectory)``."""
    arr = _as_array(trajectory)
    return np.cumsum(arr[:, 0])


def stationary_currents(pop: PopulationVector, rates: TransitionRates) -> np.ndarray:
    """Net upward flux ``p_plus(n) p(n) - p_minus(n+1) p(n+1)`` across each gap."""
    p = pop.probs
    _check_shape(p, rates)
    return rates.p_plus[:-1] * p[:-1] - rates.p_minus[1:] * p[1:]


def detailed_balance_rates(
    beta: float,
    spectrum: EnergySpectrum,
    lazy_profile: Union[float, Sequence[float]] = 0.1,
) -> TransitionRates:
    """Rates obeying ``p_plus(n) / p_minus(n+1) = exp(-beta (E_{n+1} - E_n))``.

    ``p_minus(n) = c`` on every level and ``p_plus(n) = c exp(-beta gap_n)``,
    with ``c`` the largest value keeping ``p_zero(n) >= lazy_profile(n)``.
    The top level, which has no gap above it, reuses the last gap.
    """
    if beta < 0:
        raise InvalidState(f"beta must be non-negative, got {beta}")
    levels = spectrum.levels
    if levels < 2:
        raise InvalidState("need at least 2 levels")
    lazy = np.broadcast_to(np.asarray(lazy_profile, dtype=float), (levels,))
    if np.any(lazy < 0) or np.any(lazy > 1):
        raise InfeasibleRates("lazy profile outside [0, 1]")
    if spectrum.uniform_gap is not None:
        gaps = np.full(levels, spectrum.uniform_gap)
    else:
        g = spectrum.gaps
        gaps = np.concatenate([g, g[-1:]])
    boltz = np.exp(-beta * gaps)
    c = float(np.min((1.0 - lazy) / (1.0 + boltz)))
    if not c > 0:
        raise InfeasibleRates("lazy profile leaves no room for transitions")
    up = c * boltz
    down = np.full(levels, c)
    zero = 1.0 - up - down
    if np.all(up == up[0]) and np.all(zero == zero[0]):
        return TransitionRates(up, zero, down, mode="constant")
    return TransitionRates.level_dependent(up, zero, down)


def gibbs_populations(beta: float, spectrum: EnergySpectrum) -> PopulationVector:
    log_w = -beta * spectrum.energies
    w = np.exp(log_w - log_w.max())
    return PopulationVector(w / math.fsum(w))


def effective_temperature(rates: TransitionRates, gap: float) -> tuple[float, float]:
    """Temperature ``gap / ln(p_minus / p_plus)`` and its inverse."""
    up, _, down = rates.triple()
    if up == 0:
        raise ZeroUpRate("p_plus = 0 corresponds to zero temperature")
    if up >= down:
        raise UnbiasedRates(f"p_plus={up} >= p_minus={down} has no finite positive temperature")
    if not gap > 0:
        raise InvalidState("gap must be positive")
    temperature = gap / math.log(down / up)
    return temperature, 1.0 / temperature


def level_formula_rates(plus_abc, minus_abc, levels: int) -> TransitionRates:
    """Rates of the form ``a + b / (c + n)`` for both channels; lazy fills the rest."""
    n = np.arange(levels, dtype=float)
    a, b, c = plus_abc
    up = a + b / (c + n)
    a, b, c = minus_abc
    down = a + b / (c + n)
    return TransitionRates.level_dependent(up, 1.0 - up - down, down)
