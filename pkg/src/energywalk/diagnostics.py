"""Distances, Gibbs matching and trajectory diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .classical import (
    build_transition_matrix,
    classical_trajectory,
    second_eigenvalue_modulus,
    stationary_closed_form,
)
from .collision import (
    ChannelConfig,
    apply_channel,
    channel_fixed_point,
    coherent_array,
    iterate_channel,
    superoperator,
)
from .errors import (
    DimensionMismatch,
    InsufficientTail,
    InvalidState,
    LengthMismatch,
    NoConvergence,
)
from .ladder import (
    DensityOperator,
    EnergySpectrum,
    PopulationVector,
    TransitionRates,
    embed_diagonal,
    make_uniform_spectrum,
)

TOP_GUARD = 1e-8
FIT_LOW, FIT_HIGH = 1e-10, 0.1
MIN_FIT_SAMPLES = 20
PLATEAU_WINDOW = 200
PLATEAU_SPREAD = 1e-9
PLATEAU_MAX_STEPS = 10**5
FIXED_POINT_MAX_LEVELS = 41
BISECT_LO, BISECT_HI, BISECT_TOL = 1e-8, 1e3, 1e-12


def _as_matrix(x) -> np.ndarray:
    return x.matrix if isinstance(x, DensityOperator) else np.asarray(x)


def _as_probs(x) -> np.ndarray:
    return x.probs if isinstance(x, PopulationVector) else np.asarray(x, dtype=float)


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b``."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"{ma.shape} vs {mb.shape}")
    diff = ma - mb
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum())


def total_variation(p, q) -> float:
    pa, qa = _as_probs(p), _as_probs(q)
    if pa.shape != qa.shape:
        raise LengthMismatch(f"{pa.size} vs {qa.size}")
    return 0.5 * float(np.abs(pa - qa).sum())


@dataclass(frozen=True)
class GibbsMatch:
    beta_t: float
    q_t: float
    populations: PopulationVector


def _geometric(q: float, levels: int) -> np.ndarray:
    if q == 0.0:
        w = np.zeros(levels)
        w[0] = 1.0
        return w
    w = q ** np.arange(levels)
    return w / math.fsum(w)


def gibbs_match(mean_n: float, spectrum: EnergySpectrum) -> GibbsMatch:
    """Geometric Gibbs law whose (semi-infinite) mean occupation is ``mean_n``.

    ``mean_n = 0`` maps to ``beta = inf`` and the ground state.
    """
    if spectrum.uniform_gap is None:
        raise InvalidState("closed-form matching needs a uniform spectrum")
    if mean_n < 0:
        raise InvalidState(f"negative mean occupation {mean_n}")
    gap = spectrum.uniform_gap
    q = mean_n / (1.0 + mean_n)
    beta = math.inf if mean_n == 0 else math.log1p(1.0 / mean_n) / gap
    return GibbsMatch(beta, q, PopulationVector(_geometric(q, spectrum.levels)))


def _gibbs_weights(beta: float, energies: np.ndarray) -> np.ndarray:
    log_w = -beta * energies
    w = np.exp(log_w - log_w.max())
    return w / math.fsum(w)


def match_beta_bisection(mean_energy: float, spectrum: EnergySpectrum) -> tuple[float, np.ndarray]:
    """Solve ``<H>_beta = mean_energy`` by bisection on ``[1e-8, 1e3]``.

    Targets outside the reachable range are clamped to the interval ends.
    """
    e = spectrum.energies

    def mean(beta):
        return float(np.dot(e, _gibbs_weights(beta, e)))

    lo, hi = BISECT_LO, BISECT_HI
    if mean_energy >= mean(lo):
        return lo, _gibbs_weights(lo, e)
    if mean_energy <= mean(hi):
        return hi, _gibbs_weights(hi, e)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        m = mean(mid)
        if abs(m - mean_energy) < BISECT_TOL:
            break
        if m > mean_energy:
            lo = mid
        else:
            hi = mid
    return mid, _gibbs_weights(mid, e)


def matched_gibbs(mean_probs: np.ndarray, spectrum: EnergySpectrum) -> tuple[float, np.ndarray]:
    """``(beta_t, populations)`` of the Gibbs law sharing the mean energy of ``mean_probs``."""
    if spectrum.uniform_gap is not None:
        mean_n = max(float(np.dot(np.arange(mean_probs.size), mean_probs)), 0.0)
        g = gibbs_match(mean_n, spectrum)
        return g.beta_t, g.populations.probs
    return match_beta_bisection(float(np.dot(spectrum.energies, mean_probs)), spectrum)


def _thermal_distance_matrix(m: np.ndarray, spectrum: EnergySpectrum) -> tuple[float, float]:
    beta, gibbs = matched_gibbs(np.diag(m).real, spectrum)
    diff = m - np.diag(gibbs)
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum()), beta


def thermal_distance(rho: DensityOperator, spectrum: Optional[EnergySpectrum] = None) -> float:
    """Trace distance to the Gibbs state with the same mean energy."""
    m = _as_matrix(rho)
    spectrum = spectrum or make_uniform_spectrum(1.0, m.shape[0])
    if spectrum.levels != m.shape[0]:
        raise DimensionMismatch("spectrum and state sizes differ")
    return _thermal_distance_matrix(m, spectrum)[0]


@dataclass
class DiagnosticsSeries:
    """Per-step diagnostics; classical runs leave the quantum-only columns as ``None``."""

    t: np.ndarray
    d_inf: np.ndarray
    d_th: np.ndarray
    mean_n: np.ndarray
    beta_t: np.ndarray
    boundary_occ: np.ndarray
    boundary_cumsum: np.ndarray
    top_occ: np.ndarray
    d_th_diag: Optional[np.ndarray] = None
    d_cl: Optional[np.ndarray] = None
    bound: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    @property
    def guard_tripped(self) -> bool:
        return bool(np.max(self.top_occ) >= TOP_GUARD)

    def columns(self) -> dict:
        cols = {"t": self.t, "d_inf": self.d_inf, "d_th": self.d_th}
        if self.d_th_diag is not None:
            cols["d_th_diag"] = self.d_th_diag
            cols["d_cl"] = self.d_cl
        cols.update(mean_n=self.mean_n, beta_t=self.beta_t,
                    boundary_occ=self.boundary_occ, boundary_cumsum=self.boundary_cumsum)
        if self.bound is not None:
            cols["bound"] = self.bound
            # Pinching never increases trace distance, so this is expected to hold.
            cols["lower_bound_holds"] = (self.d_cl <= self.d_th + 1e-12).astype(int)
        return cols


def _diag_series(traj: np.ndarray, spectrum: EnergySpectrum):
    n = np.arange(traj.shape[1])
    d_th = np.empty(traj.shape[0])
    beta = np.empty(traj.shape[0])
    for t, p in enumerate(traj):
        beta[t], g = matched_gibbs(p, spectrum)
        d_th[t] = 0.5 * np.abs(p - g).sum()
    return d_th, beta, traj @ n


def run_classical_trajectory(
    pop0: PopulationVector,
    rates: TransitionRates,
    steps: int,
    spectrum: Optional[EnergySpectrum] = None,
) -> DiagnosticsSeries:
    if steps < 1:
        raise InvalidState("steps must be >= 1")
    spectrum = spectrum or make_uniform_spectrum(1.0, rates.levels)
    traj = classical_trajectory(pop0, rates, steps)
    stationary = stationary_closed_form(rates).probs
    d_inf = 0.5 * np.abs(traj - stationary).sum(axis=1)
    d_th, beta, mean_n = _diag_series(traj, spectrum)
    occ = traj[:, 0]
    return DiagnosticsSeries(
        t=np.arange(steps + 1),
        d_inf=d_inf,
        d_th=d_th,
        mean_n=mean_n,
        beta_t=beta,
        boundary_occ=occ,
        boundary_cumsum=np.concatenate([[0.0], np.cumsum(occ)[:-1]]),
        top_occ=traj[:, -1],
        meta={"stationary": stationary},
    )


def run_quantum_trajectory(
    pop0: PopulationVector,
    cfg: ChannelConfig,
    steps: int,
    spectrum: Optional[EnergySpectrum] = None,
    keep_states: bool = False,
) -> DiagnosticsSeries:
    """Evolve a diagonal initial state under the channel and its incoherent limit."""
    if steps < 1:
        raise InvalidState("steps must be >= 1")
    levels = cfg.levels
    if pop0.levels != levels:
        raise DimensionMismatch("initial populations do not match the channel")
    spectrum = spectrum or make_uniform_spectrum(1.0, levels)
    cl = run_classical_trajectory(pop0, cfg.rates, steps, spectrum)
    stationary = np.diag(cl.meta["stationary"])
    n = np.arange(levels)

    size = steps + 1
    d_th, d_diag, d_inf, beta, mean_n = (np.empty(size) for _ in range(5))
    occ, top = np.empty(size), np.empty(size)
    states = []
    for t, m in enumerate(iterate_channel(np.diag(pop0.probs).astype(complex), cfg, steps)):
        p = np.diag(m).real
        beta[t], g = matched_gibbs(p, spectrum)
        diff = m - np.diag(g)
        d_th[t] = 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())
        d_diag[t] = 0.5 * float(np.abs(p - g).sum())
        diff = m - stationary
        d_inf[t] = 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())
        mean_n[t] = float(p @ n)
        occ[t], top[t] = p[0], p[-1]
        if keep_states:
            states.append(m)
    cumsum = np.concatenate([[0.0], np.cumsum(occ)[:-1]])
    meta = {"stationary": cl.meta["stationary"], "classical": cl}
    if keep_states:
        meta["states"] = states
    return DiagnosticsSeries(
        t=np.arange(size),
        d_inf=d_inf,
        d_th=d_th,
        mean_n=mean_n,
        beta_t=beta,
        boundary_occ=occ,
        boundary_cumsum=cumsum,
        top_occ=top,
        d_th_diag=d_diag,
        d_cl=cl.d_th,
        bound=cl.d_th + cfg.coupling * cumsum,
        meta=meta,
    )


def plateau_deviation(
    pop0: PopulationVector,
    cfg: ChannelConfig,
    spectrum: Optional[EnergySpectrum] = None,
    window: int = PLATEAU_WINDOW,
    spread: float = PLATEAU_SPREAD,
    max_steps: int = PLATEAU_MAX_STEPS,
) -> float:
    """Iterate until ``d_th`` varies by less than ``spread`` over ``window`` steps."""
    spectrum = spectrum or make_uniform_spectrum(1.0, cfg.levels)
    recent = np.empty(window)
    m0 = np.diag(pop0.probs).astype(complex)
    for t, m in enumerate(iterate_channel(m0, cfg, max_steps)):
        recent[t % window] = _thermal_distance_matrix(m, spectrum)[0]
        if t + 1 >= window and recent.max() - recent.min() < spread:
            return float(recent.mean())
    raise NoConvergence(f"d_th did not plateau within {max_steps} steps")


def asymptotic_deviation(
    cfg: ChannelConfig,
    pop0: Optional[PopulationVector] = None,
    spectrum: Optional[EnergySpectrum] = None,
    method: str = "auto",
) -> float:
    """Long-time thermal distance ``lim d_th(t)``.

    ``method`` is ``"fixed_point"`` (dense superoperator, default up to 41
    levels), ``"plateau"`` (iteration from ``pop0``) or ``"auto"``.
    """
    if method == "auto":
        method = "fixed_point" if cfg.levels <= FIXED_POINT_MAX_LEVELS else "plateau"
    if method == "fixed_point":
        spectrum = spectrum or make_uniform_spectrum(1.0, cfg.levels)
        return _thermal_distance_matrix(channel_fixed_point(cfg).matrix, spectrum)[0]
    if method == "plateau":
        if pop0 is None:
            raise InvalidState("plateau method needs an initial population")
        return plateau_deviation(pop0, cfg, spectrum)
    raise ValueError(f"unknown method {method!r}")


def first_order_coherence(cfg: ChannelConfig) -> np.ndarray:
    """Stationary first-order correction ``sigma`` with ``rho* = rho_inf + mu sigma + O(mu^2)``.

    Solves ``sigma = Phi_0(sigma) + Xi(rho_inf)`` with ``tr sigma = 0``.
    """
    levels = cfg.levels
    up, _, down = cfg.rates.triple()
    base = superoperator(cfg.with_mu(0.0))
    rho_inf = np.diag(stationary_closed_form(cfg.rates).probs).astype(complex)
    source = coherent_array(rho_inf, math.sqrt(up * down)).ravel()
    a = np.eye(levels * levels) - base
    a[0, :] = np.eye(levels).ravel()
    source[0] = 0.0
    return np.linalg.solve(a, source).reshape(levels, levels)


def first_order_deviation(cfg: ChannelConfig) -> float:
    """Linear prediction ``mu * ||sigma||_1 / 2`` for ``d_inf(mu)``."""
    sigma = first_order_coherence(cfg)
    return cfg.mu * 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (sigma + sigma.conj().T))).sum())


def fit_decay_rate(series: Union[DiagnosticsSeries, np.ndarray], column: str = "d_inf") -> float:
    """Exponential rate from a least-squares fit of ``log`` values in ``(1e-10, 0.1)``.

    The window starts at the first sample below 0.1 and ends before the
    first sample at or below 1e-10.
    """
    values = getattr(series, column) if isinstance(series, DiagnosticsSeries) else np.asarray(series, dtype=float)
    t = np.arange(values.size, dtype=float)
    below = np.flatnonzero(values < FIT_HIGH)
    if below.size == 0:
        raise InsufficientTail("series never drops below 0.1")
    start = below[0]
    floor = np.flatnonzero(values[start:] <= FIT_LOW)
    stop = start + floor[0] if floor.size else values.size
    y = values[start:stop]
    if y.size < MIN_FIT_SAMPLES:
        raise InsufficientTail(f"only {y.size} usable samples in the fit window")
    slope, _ = np.polyfit(t[start:stop], np.log(y), 1)
    return float(-slope)


def spectral_decay_rate(rates: TransitionRates) -> float:
    """``-ln |lambda_2|`` of the transition matrix."""
    return -math.log(second_eigenvalue_modulus(build_transition_matrix(rates)))


@dataclass(frozen=True)
class BoundaryEstimate:
    delta: float
    c_est: float
    geometric_bound: float
    excess_range: float


def boundary_excess(
    pop0: PopulationVector,
    rates: TransitionRates,
    steps: int = 10**4,
    t_min: int = 100,
) -> BoundaryEstimate:
    """Range of ``sum_{j<t} p_j(0) - t p_inf(0)`` against its geometric estimate.

    ``delta`` is the spectral rate; ``c_est`` is the smallest constant with
    ``|p_t(0) - p_inf(0)| <= c_est exp(-delta t)`` over samples above 1e-12.
    """
    traj = classical_trajectory(pop0, rates, steps)
    p_inf0 = stationary_closed_form(rates).probs[0]
    delta = spectral_decay_rate(rates)
    dev = traj[:, 0] - p_inf0
    t = np.arange(dev.size)
    usable = np.abs(dev) > 1e-12
    c_est = float(np.max(np.abs(dev[usable]) * np.exp(delta * t[usable]))) if usable.any() else 0.0
    cumsum = np.concatenate([[0.0], np.cumsum(traj[:, 0])[:-1]])
    excess = cumsum - t * p_inf0
    window = excess[t_min:]
    return BoundaryEstimate(delta, c_est, c_est / (1.0 - math.exp(-delta)),
                            float(window.max() - window.min()))
