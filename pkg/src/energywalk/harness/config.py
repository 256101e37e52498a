"""Scenario configuration: strict JSON schema, loading and normalization.

A scenario is one JSON object::

    {
      "name": "fig2",
      "kind": "quantum",              # classical | quantum | mu_sweep | bias_sweep
      "levels": 21,
      "gap": 1.0,                     # optional, default 1
      "rates": {"p_plus": 0.2, "p_zero": 0.1, "p_minus": 0.7},
      "mu": 0.5,                      # quantum: number, mu_sweep: list
      "initial": {"type": "gaussian", "center": 2, "width": 2},
      "steps": 1000,
      "outputs": ["d_th", "d_th_diag"],   # series to plot, optional
      "seed": 0                       # optional
    }

Rate entries are either a constant triple (``p_zero`` defaults to 0.1),
level-dependent formulas ``{"p_plus_formula": [a, b, c], "p_minus_formula":
[a, b, c]}`` meaning ``a + b / (c + n)``, or for ``bias_sweep``
``{"p_zero": 0.1, "bias": [4, 2, 1.1]}`` with ``p_minus / p_plus = bias``.
``classical`` scenarios also accept a list of labelled rate entries.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from ..classical import level_formula_rates
from ..errors import EnergyWalkError
from ..ladder import (
    PopulationVector,
    TransitionRates,
    delta_population,
    gaussian_population,
)

KINDS = ("classical", "quantum", "mu_sweep", "bias_sweep")
DEFAULT_P_ZERO = 0.1
RATE_SUM_TOL = 1e-12

TOP_FIELDS = {"name", "kind", "levels", "gap", "rates", "mu", "initial", "steps", "outputs", "seed"}
REQUIRED = {
    "classical": {"name", "kind", "levels", "rates", "initial", "steps"},
    "quantum": {"name", "kind", "levels", "rates", "mu", "initial", "steps"},
    "mu_sweep": {"name", "kind", "levels", "rates", "mu", "initial", "steps"},
    "bias_sweep": {"name", "kind", "levels", "rates", "initial", "steps"},
}
FORBIDDEN = {
    "classical": {"mu"},
    "quantum": set(),
    "mu_sweep": set(),
    "bias_sweep": {"mu"},
}
DEFAULT_OUTPUTS = {
    "classical": ["d_inf", "d_th"],
    "quantum": ["d_th", "d_th_diag"],
    "mu_sweep": ["d_th", "d_infinity"],
    "bias_sweep": ["d_inf"],
}
SERIES_NAMES = {"d_inf", "d_th", "d_th_diag", "d_cl", "bound", "mean_n", "beta_t",
                "boundary_occ", "boundary_cumsum", "d_infinity"}


class ConfigError(EnergyWalkError):
    pass


class ParseError(ConfigError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{loc}")
        self.line = line
        self.column = column


class SchemaViolation(ConfigError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class UnknownField(SchemaViolation):
    pass


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(where, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise SchemaViolation(where, "must be finite")
    return float(value)


def _integer(value: Any, where: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(where, f"expected an integer, got {value!r}")
    if value < minimum:
        raise SchemaViolation(where, f"must be >= {minimum}")
    return value


def _check_keys(obj: dict, allowed: set, required: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaViolation(where, "expected an object")
    for key in obj:
        if key not in allowed:
            raise UnknownField(f"{where}.{key}" if where else key, "unknown field")
    for key in sorted(required):
        if key not in obj:
            raise SchemaViolation(f"{where}.{key}" if where else key, "missing required field")


def _formula(value: Any, where: str) -> list:
    if not isinstance(value, list) or len(value) != 3:
        raise SchemaViolation(where, "expected [a, b, c]")
    return [_number(v, f"{where}[{i}]") for i, v in enumerate(value)]


def _normalize_rate(entry: Any, where: str, levels: int, kind: str, labelled: bool) -> dict:
    if not isinstance(entry, dict):
        raise SchemaViolation(where, "expected an object")
    extra = {"label"} if labelled else set()
    if kind == "bias_sweep":
        _check_keys(entry, {"p_zero", "bias"}, {"bias"}, where)
        p0 = _number(entry.get("p_zero", DEFAULT_P_ZERO), f"{where}.p_zero")
        if not 0 <= p0 < 1:
            raise SchemaViolation(f"{where}.p_zero", "must lie in [0, 1)")
        biases = entry["bias"]
        if not isinstance(biases, list) or not biases:
            raise SchemaViolation(f"{where}.bias", "expected a non-empty list")
        out = [_number(b, f"{where}.bias[{i}]") for i, b in enumerate(biases)]
        if any(b <= 0 for b in out):
            raise SchemaViolation(f"{where}.bias", "biases must be positive")
        return {"p_zero": p0, "bias": out}

    if "p_plus_formula" in entry or "p_minus_formula" in entry:
        if kind != "classical":
            raise SchemaViolation(where, "level-dependent rates are only allowed for classical scenarios")
        _check_keys(entry, {"p_plus_formula", "p_minus_formula"} | extra,
                    {"p_plus_formula", "p_minus_formula"}, where)
        norm = {"p_plus_formula": _formula(entry["p_plus_formula"], f"{where}.p_plus_formula"),
                "p_minus_formula": _formula(entry["p_minus_formula"], f"{where}.p_minus_formula")}
    else:
        _check_keys(entry, {"p_plus", "p_zero", "p_minus"} | extra, {"p_plus", "p_minus"}, where)
        norm = {"p_plus": _number(entry["p_plus"], f"{where}.p_plus"),
                "p_zero": _number(entry.get("p_zero", DEFAULT_P_ZERO), f"{where}.p_zero"),
                "p_minus": _number(entry["p_minus"], f"{where}.p_minus")}
        total = norm["p_plus"] + norm["p_zero"] + norm["p_minus"]
        if abs(total - 1.0) > RATE_SUM_TOL:
            raise SchemaViolation(where, f"p_plus + p_zero + p_minus = {total!r}, must be 1")
    if labelled:
        label = entry.get("label")
        if not isinstance(label, str) or not label:
            raise SchemaViolation(f"{where}.label", "each rate entry in a list needs a label")
        norm = {"label": label, **norm}
    try:
        rates_from_entry(norm, levels)
    except EnergyWalkError as exc:
        raise SchemaViolation(where, str(exc)) from exc
    return norm


def rates_from_entry(entry: dict, levels: int) -> TransitionRates:
    if "p_plus_formula" in entry:
        return level_formula_rates(entry["p_plus_formula"], entry["p_minus_formula"], levels)
    return TransitionRates.constant(entry["p_plus"], entry["p_zero"], entry["p_minus"], levels)


def bias_rates(p_zero: float, bias: float, levels: int) -> TransitionRates:
    """Constant rates with ``p_minus / p_plus = bias`` and the given lazy probability."""
    up = (1.0 - p_zero) / (1.0 + bias)
    return TransitionRates.constant(up, p_zero, 1.0 - p_zero - up, levels)


def _normalize_initial(entry: Any, levels: int) -> dict:
    where = "initial"
    if not isinstance(entry, dict) or "type" not in entry:
        raise SchemaViolation(where, "expected an object with a 'type'")
    kind = entry["type"]
    if kind == "gaussian":
        _check_keys(entry, {"type", "center", "width"}, {"center", "width"}, where)
        width = _number(entry["width"], "initial.width")
        if width <= 0:
            raise SchemaViolation("initial.width", "must be positive")
        return {"type": kind, "center": _number(entry["center"], "initial.center"), "width": width}
    if kind == "delta":
        _check_keys(entry, {"type", "level"}, {"level"}, where)
        level = _integer(entry["level"], "initial.level", 0)
        if level >= levels:
            raise SchemaViolation("initial.level", f"must be < levels={levels}")
        return {"type": kind, "level": level}
    if kind == "gibbs":
        _check_keys(entry, {"type", "beta"}, {"beta"}, where)
        beta = _number(entry["beta"], "initial.beta")
        if beta <= 0:
            raise SchemaViolation("initial.beta", "must be positive")
        return {"type": kind, "beta": beta}
    raise SchemaViolation("initial.type", f"unknown initial state {kind!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    kind: str
    levels: int
    gap: float
    rates: Union[dict, list]
    mu: Union[None, float, list]
    initial: dict
    steps: int
    outputs: list = field(default_factory=list)
    seed: int = 0

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "levels": self.levels, "gap": self.gap,
             "rates": self.rates}
        if self.mu is not None:
            d["mu"] = self.mu
        d.update(initial=self.initial, steps=self.steps, outputs=self.outputs, seed=self.seed)
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def initial_population(self) -> PopulationVector:
        ini = self.initial
        if ini["type"] == "gaussian":
            return gaussian_population(ini["center"], ini["width"], self.levels)
        if ini["type"] == "delta":
            return delta_population(ini["level"], self.levels)
        w = np.exp(-ini["beta"] * self.gap * np.arange(self.levels))
        return PopulationVector(w / math.fsum(w))

    def rate_variants(self) -> list:
        """``[(label, TransitionRates)]`` for every trajectory this scenario runs."""
        if self.kind == "bias_sweep":
            return [(f"b{b!r}", bias_rates(self.rates["p_zero"], b, self.levels))
                    for b in self.rates["bias"]]
        if isinstance(self.rates, list):
            return [(e["label"], rates_from_entry(e, self.levels)) for e in self.rates]
        return [("", rates_from_entry(self.rates, self.levels))]


def config_from_dict(raw: Any) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise SchemaViolation("<root>", "expected a JSON object")
    for key in raw:
        if key not in TOP_FIELDS:
            raise UnknownField(key, "unknown field")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise SchemaViolation("kind", f"must be one of {', '.join(KINDS)}")
    _check_keys(raw, TOP_FIELDS - FORBIDDEN[kind], REQUIRED[kind], "")
    name = raw["name"]
    if not isinstance(name, str) or not name or any(c in name for c in "/\\"):
        raise SchemaViolation("name", "expected a non-empty string without path separators")
    levels = _integer(raw["levels"], "levels", 2)
    gap = _number(raw.get("gap", 1.0), "gap")
    if gap <= 0:
        raise SchemaViolation("gap", "must be positive")
    steps = _integer(raw["steps"], "steps", 0 if kind == "mu_sweep" else 1)

    rates_raw = raw["rates"]
    if isinstance(rates_raw, list):
        if kind != "classical":
            raise SchemaViolation("rates", "a list of rate entries is only allowed for classical scenarios")
        if not rates_raw:
            raise SchemaViolation("rates", "empty list")
        rates = [_normalize_rate(e, f"rates[{i}]", levels, kind, True) for i, e in enumerate(rates_raw)]
        labels = [e["label"] for e in rates]
        if len(set(labels)) != len(labels):
            raise SchemaViolation("rates", "labels must be unique")
    else:
        rates = _normalize_rate(rates_raw, "rates", levels, kind, False)

    mu = None
    if kind == "quantum":
        mu = _number(raw["mu"], "mu")
        if not 0 <= mu <= 1:
            raise SchemaViolation("mu", "must lie in [0, 1]")
    elif kind == "mu_sweep":
        if not isinstance(raw["mu"], list) or not raw["mu"]:
            raise SchemaViolation("mu", "mu_sweep needs a non-empty list")
        mu = [_number(m, f"mu[{i}]") for i, m in enumerate(raw["mu"])]
        if any(not 0 <= m <= 1 for m in mu):
            raise SchemaViolation("mu", "values must lie in [0, 1]")

    outputs = raw.get("outputs", DEFAULT_OUTPUTS[kind])
    if not isinstance(outputs, list) or any(not isinstance(o, str) for o in outputs):
        raise SchemaViolation("outputs", "expected a list of series names")
    for o in outputs:
        if o not in SERIES_NAMES:
            raise SchemaViolation("outputs", f"unknown series {o!r}")
    seed = _integer(raw.get("seed", 0), "seed", 0)

    return ScenarioConfig(
        name=name, kind=kind, levels=levels, gap=gap, rates=rates, mu=mu,
        initial=_normalize_initial(raw["initial"], levels), steps=steps,
        outputs=list(outputs), seed=seed,
    )


def loads_config(text: str) -> ScenarioConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    return config_from_dict(raw)


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return loads_config(text)
