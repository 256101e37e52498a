"""Truncated energy ladder: spectra, transition rates, populations and states.

Every object here is an immutable value. Constructors validate their
invariants and raise instead of repairing bad input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateWidth,
    InvalidRates,
    InvalidState,
    LevelDependentUnsupported,
    NegativePopulation,
    NonPositiveGap,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_FLOOR = -1e-10
RATE_SUM_TOL = 1e-12
PROB_FLOOR = -1e-14
NORM_TOL = 1e-12


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EnergySpectrum:
    """Level energies ``E_0 = 0 < E_1 < ... < E_N``."""

    energies: np.ndarray
    uniform_gap: Optional[float] = None

    def __post_init__(self):
        e = _frozen(self.energies)
        if e.ndim != 1 or e.size < 1:
            raise InvalidState("energies must be a non-empty 1-d sequence")
        if e[0] != 0.0:
            raise InvalidState(f"ground energy must be 0, got {e[0]}")
        if np.any(np.diff(e) <= 0):
            raise InvalidState("energies must be strictly increasing")
        object.__setattr__(self, "energies", e)

    @property
    def levels(self) -> int:
        return self.energies.size

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.energies)

    def __eq__(self, other):
        if not isinstance(other, EnergySpectrum):
            return NotImplemented
        return (np.array_equal(self.energies, other.energies)
                and self.uniform_gap == other.uniform_gap)


def make_uniform_spectrum(gap: float, levels: int) -> EnergySpectrum:
    """Equally spaced spectrum ``E_n = n * gap`` for ``n = 0..levels-1``."""
    if not gap > 0:
        raise NonPositiveGap(f"gap must be positive, got {gap}")
    if levels < 2:
        raise InvalidState(f"need at least 2 levels, got {levels}")
    return EnergySpectrum(np.arange(levels) * float(gap), uniform_gap=float(gap))


@dataclass(frozen=True, eq=False)
class TransitionRates:
    """Per-level probabilities for moving up, staying and moving down.

    ``p_minus[0]`` is kept for bookkeeping; at the ground level the downward
    channel cannot fire and its weight stays at ``n = 0``. Likewise the
    upward channel reflects at the top of the truncated ladder.
    """

    p_plus: np.ndarray
    p_zero: np.ndarray
    p_minus: np.ndarray
    mode: str = "level-dependent"

    def __post_init__(self):
        arrs = [_frozen(a) for a in (self.p_plus, self.p_zero, self.p_minus)]
        if any(a.ndim != 1 for a in arrs) or len({a.size for a in arrs}) != 1:
            raise InvalidRates("rate arrays must be 1-d and of equal length")
        if arrs[0].size < 1:
            raise InvalidRates("rates need at least one level")
        for name, a in zip(("p_plus", "p_zero", "p_minus"), arrs):
            if np.any(a < 0) or np.any(a > 1):
                raise InvalidRates(f"{name} outside [0, 1]")
        total = arrs[0] + arrs[1] + arrs[2]
        bad = np.flatnonzero(np.abs(total - 1.0) > RATE_SUM_TOL)
        if bad.size:
            n = int(bad[0])
            raise InvalidRates(f"rates at level {n} sum to {total[n]!r}, not 1")
        if self.mode not in ("constant", "level-dependent"):
            raise InvalidRates(f"unknown mode {self.mode!r}")
        if self.mode == "constant" and not all(np.all(a == a[0]) for a in arrs):
            raise InvalidRates("constant mode requires identical rates on every level")
        object.__setattr__(self, "p_plus", arrs[0])
        object.__setattr__(self, "p_zero", arrs[1])
        object.__setattr__(self, "p_minus", arrs[2])

    @classmethod
    def constant(cls, p_plus: float, p_zero: float, p_minus: float, levels: int) -> "TransitionRates":
        ones = np.ones(levels)
        return cls(p_plus * ones, p_zero * ones, p_minus * ones, mode="constant")

    @classmethod
    def level_dependent(cls, p_plus, p_zero, p_minus) -> "TransitionRates":
        return cls(p_plus, p_zero, p_minus, mode="level-dependent")

    @property
    def levels(self) -> int:
        return self.p_plus.size

    @property
    def is_constant(self) -> bool:
        return self.mode == "constant"

    def triple(self) -> tuple[float, float, float]:
        """``(p_plus, p_zero, p_minus)`` of a constant-rate set."""
        if not self.is_constant:
            raise LevelDependentUnsupported("rates are level-dependent")
        return float(self.p_plus[0]), float(self.p_zero[0]), float(self.p_minus[0])

    def resized(self, levels: int) -> "TransitionRates":
        return TransitionRates.constant(*self.triple(), levels=levels)

    def __eq__(self, other):
        if not isinstance(other, TransitionRates):
            return NotImplemented
        return (self.mode == other.mode
                and np.array_equal(self.p_plus, other.p_plus)
                and np.array_equal(self.p_zero, other.p_zero)
                and np.array_equal(self.p_minus, other.p_minus))


@dataclass(frozen=True, eq=False)
class PopulationVector:
    """Classical probability distribution over levels ``0..N``."""

    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs)
        if p.ndim != 1 or p.size < 1:
            raise InvalidState("populations must be a non-empty 1-d vector")
        if not np.all(np.isfinite(p)):
            raise InvalidState("populations must be finite")
        if p.min() < PROB_FLOOR:
            n = int(np.argmin(p))
            raise NegativePopulation(f"population {p[n]!r} at level {n}")
        s = math.fsum(p)
        if abs(s - 1.0) > NORM_TOL:
            raise InvalidState(f"populations sum to {s!r}, not 1")
        object.__setattr__(self, "probs", p)

    @property
    def levels(self) -> int:
        return self.probs.size

    def mean_occupation(self) -> float:
        return float(np.dot(np.arange(self.levels), self.probs))

    def __len__(self):
        return self.levels

    def __eq__(self, other):
        if not isinstance(other, PopulationVector):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)


def delta_population(level: int, levels: int) -> PopulationVector:
    p = np.zeros(levels)
    p[level] = 1.0
    return PopulationVector(p)


def gaussian_population(center: float, width: float, levels: int) -> PopulationVector:
    """Discrete Gaussian ``exp(-(n-center)^2 / (2 width^2))`` normalized on ``0..levels-1``.

    Normalization uses a correctly rounded sum so the result does not depend
    on summation order.
    """
    if not width > 0:
        raise DegenerateWidth(f"width must be positive, got {width}")
    if levels < 1:
        raise InvalidState("levels must be >= 1")
    n = np.arange(levels, dtype=float)
    log_w = -((n - center) ** 2) / (2.0 * width * width)
    w = np.exp(log_w - log_w.max())
    return PopulationVector(w / math.fsum(w))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, positive, unit-trace matrix on the truncated ladder.

    ``psd_floor`` relaxes the eigenvalue check for perturbative objects.
    """

    matrix: np.ndarray
    psd_floor: float = field(default=PSD_FLOOR, repr=False)

    def __post_init__(self):
        m = _frozen(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidState("density operator must be a square matrix")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise InvalidState("density operator is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidState(f"trace {tr!r} differs from 1")
        lam = np.linalg.eigvalsh(m).min()
        if lam < self.psd_floor:
            raise InvalidState(f"smallest eigenvalue {lam!r} below {self.psd_floor}")
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other):
        if not isinstance(other, DensityOperator):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)


def embed_diagonal(pop: PopulationVector) -> DensityOperator:
    return DensityOperator(np.diag(pop.probs).astype(complex))


def dephase(rho: DensityOperator) -> DensityOperator:
    return DensityOperator(np.diag(np.diag(rho.matrix)))


def extract_populations(rho: DensityOperator) -> PopulationVector:
    d = np.diag(rho.matrix).real
    if d.min() < PSD_FLOOR:
        n = int(np.argmin(d))
        raise NegativePopulation(f"diagonal entry {d[n]!r} at level {n}")
    return PopulationVector(d)


@dataclass(frozen=True, eq=False)
class LadderOperators:
    raise_op: np.ndarray
    lower_op: np.ndarray
    ground_projector: np.ndarray
    top_projector: np.ndarray

    @property
    def levels(self) -> int:
        return self.raise_op.shape[0]


def ladder_operators(levels: int) -> LadderOperators:
    """Truncated shift ``S+ = sum_n |n+1><n|`` with its adjoint and edge projectors."""
    if levels < 2:
        raise InvalidState("need at least 2 levels")
    s_plus = np.eye(levels, k=-1)
    p0 = np.zeros((levels, levels))
    p0[0, 0] = 1.0
    pn = np.zeros((levels, levels))
    pn[-1, -1] = 1.0
    return LadderOperators(*(_frozen(a) for a in (s_plus, s_plus.T, p0, pn)))


def random_density_operator(dim: int, rng: np.random.Generator) -> np.ndarray:
    """``G G^dag / tr`` with i.i.d. standard complex normal ``G``."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real
