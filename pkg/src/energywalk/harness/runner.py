"""Execute scenarios and write CSV/SVG artifacts."""
from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from ..collision import ChannelConfig
from ..diagnostics import (
    TOP_GUARD,
    DiagnosticsSeries,
    asymptotic_deviation,
    first_order_deviation,
    fit_decay_rate,
    run_classical_trajectory,
    run_quantum_trajectory,
    spectral_decay_rate,
)
from ..classical import stationary_closed_form
from ..errors import EnergyWalkError, InsufficientTail
from ..ladder import make_uniform_spectrum
from . import svg
from .config import ScenarioConfig

log = logging.getLogger(__name__)

WORKERS_ENV = "ENERGYWALK_WORKERS"
DISTANCE_COLUMNS = {"d_inf", "d_th", "d_th_diag", "d_cl", "d_infinity"}
PROBABILITY_COLUMNS = {"boundary_occ", "top_occ"}
LOG_SERIES = {"d_inf"}


class InvariantViolation(EnergyWalkError):
    pass


@dataclass
class RunReport:
    scenario: str
    files: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def lines(self) -> list:
        out = [f"scenario {self.scenario}: {len(self.files)} file(s) written"]
        out += [f"  wrote {f}" for f in self.files]
        out += [f"  WARNING {w}" for w in self.warnings]
        return out


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", WORKERS_ENV, raw)
    return os.cpu_count() or 1


def parallel_map(fn: Callable, items: Sequence, workers: Optional[int] = None) -> list:
    """Order-preserving map; uses a process pool when more than one worker is available."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def check_columns(columns: dict, where: str) -> None:
    for name, values in columns.items():
        arr = np.asarray(values, dtype=float)
        if name in DISTANCE_COLUMNS:
            bad = np.flatnonzero(~((arr >= 0) & (arr <= 1 + 1e-12)))
        elif name in PROBABILITY_COLUMNS:
            bad = np.flatnonzero(~((arr >= -1e-14) & (arr <= 1 + 1e-12)))
        else:
            continue
        if bad.size:
            i = int(bad[0])
            raise InvariantViolation(f"{where}: {name}={arr[i]!r} outside [0, 1] at step index {i}")


def write_csv(path: Path, columns: dict) -> Path:
    names = list(columns)
    rows = zip(*(columns[n] for n in names))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def _series_columns(series: DiagnosticsSeries) -> tuple[dict, Optional[str]]:
    cols = series.columns()
    warning = None
    if series.guard_tripped:
        cols["top_occ"] = series.top_occ
        cols["guard_flag"] = (series.top_occ >= TOP_GUARD).astype(int)
        warning = f"max top-level occupation {series.top_occ.max():.3e} >= {TOP_GUARD:g}"
    return cols, warning


def _classical_member(args):
    pop0, rates, steps, spectrum = args
    return run_classical_trajectory(pop0, rates, steps, spectrum)


def _quantum_member(args):
    pop0, cfg, steps, spectrum = args
    return run_quantum_trajectory(pop0, cfg, steps, spectrum)


def _deviation_member(args):
    cfg, pop0, spectrum = args
    return asymptotic_deviation(cfg, pop0, spectrum), first_order_deviation(cfg)


class _Writer:
    def __init__(self, cfg: ScenarioConfig, out_dir: Path, svg_enabled: bool):
        self.cfg = cfg
        self.out_dir = out_dir
        self.svg_enabled = svg_enabled
        self.report = RunReport(cfg.name)

    def csv(self, suffix: str, columns: dict, warning: Optional[str] = None) -> Path:
        stem = f"{self.cfg.name}_{suffix}" if suffix else self.cfg.name
        path = self.out_dir / f"{stem}.csv"
        check_columns(columns, path.name)
        write_csv(path, columns)
        self.report.files.append(path)
        if warning:
            self.report.warnings.append(f"{path.name}: {warning}")
        return path

    def plot(self, suffix: str, series, title, xlabel, ylabel, logy=False, markers=False):
        if not self.svg_enabled:
            return
        path = self.out_dir / f"{self.cfg.name}_{suffix}.svg"
        svg.line_plot(path, series, title, xlabel, ylabel, logy=logy, markers=markers)
        self.report.files.append(path)


def _trajectory_plots(w: _Writer, labelled: list, log_extra: Iterable[str] = ()):
    logs = LOG_SERIES | set(log_extra)
    if len(labelled) == 1:
        (_, s), = labelled
        cols = s.columns()
        names = [n for n in w.cfg.outputs if n in cols]
        if names:
            w.plot("trajectory", [(n, s.t, cols[n]) for n in names], w.cfg.name, "t", "distance",
                   logy=any(n in logs for n in names))
        return
    for name in w.cfg.outputs:
        if name == "d_infinity":
            continue
        series = []
        for label, s in labelled:
            values = s.columns().get(name)
            if values is not None:
                series.append((label or name, s.t, values))
        if series:
            w.plot(name, series, f"{w.cfg.name}: {name}", "t", name, logy=name in logs)


def run_scenario(cfg: ScenarioConfig, out_dir, svg_enabled: bool = True,
                 workers: Optional[int] = None) -> RunReport:
    """Run one scenario; every numeric CSV is byte-identical across runs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    w = _Writer(cfg, out_dir, svg_enabled)
    spectrum = make_uniform_spectrum(cfg.gap, cfg.levels)
    pop0 = cfg.initial_population()

    if cfg.kind in ("classical", "bias_sweep"):
        variants = cfg.rate_variants()
        results = parallel_map(_classical_member,
                               [(pop0, r, cfg.steps, spectrum) for _, r in variants], workers)
        labelled = []
        for (label, _), s in zip(variants, results):
            cols, warn = _series_columns(s)
            w.csv(label, cols, warn)
            labelled.append((label, s))
        if cfg.kind == "bias_sweep":
            fitted, spectral = [], []
            for (_, rates), s in zip(variants, results):
                try:
                    fitted.append(fit_decay_rate(s))
                except InsufficientTail:
                    fitted.append(math.nan)
                spectral.append(spectral_decay_rate(rates))
            w.csv("summary", {"bias": cfg.rates["bias"], "fitted_rate": fitted, "spectral_rate": spectral})
        _trajectory_plots(w, labelled, log_extra={"d_th"} if cfg.kind == "classical" else ())

    elif cfg.kind == "quantum":
        (_, rates), = cfg.rate_variants()
        s = run_quantum_trajectory(pop0, ChannelConfig(rates, cfg.mu), cfg.steps, spectrum)
        cols, warn = _series_columns(s)
        w.csv("", cols, warn)
        _trajectory_plots(w, [("", s)])

    elif cfg.kind == "mu_sweep":
        (_, rates), = cfg.rate_variants()
        channels = [ChannelConfig(rates, mu) for mu in cfg.mu]
        if cfg.steps > 0:
            results = parallel_map(_quantum_member,
                                   [(pop0, c, cfg.steps, spectrum) for c in channels], workers)
            labelled = []
            for c, s in zip(channels, results):
                label = f"mu{c.mu!r}"
                cols, warn = _series_columns(s)
                w.csv(label, cols, warn)
                labelled.append((label, s))
            _trajectory_plots(w, labelled)
        devs = parallel_map(_deviation_member, [(c, pop0, spectrum) for c in channels], workers)
        d_inf = [d for d, _ in devs]
        first = [f for _, f in devs]
        top = stationary_closed_form(rates).probs[-1]
        w.csv("summary", {"mu": cfg.mu, "d_infinity": d_inf, "bound_first_order": first},
              f"stationary top-level occupation {top:.3e} >= {TOP_GUARD:g}" if top >= TOP_GUARD else None)
        if "d_infinity" in cfg.outputs:
            w.plot("d_infinity", [("numerical", cfg.mu, d_inf), ("first order", cfg.mu, first)],
                   f"{cfg.name}: asymptotic thermal distance", "mu", "d_infinity", markers=True)
    else:  # pragma: no cover - rejected at load time
        raise ValueError(cfg.kind)

    for warning in w.report.warnings:
        log.warning("%s: %s", cfg.name, warning)
    return w.report
