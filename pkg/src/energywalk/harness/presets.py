"""Built-in scenarios reproducing the published figures."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from .config import ScenarioConfig, SchemaViolation, loads_config

DESCRIPTIONS = {
    "fig1a": "classical relaxation d_inf(t) for biases p_-/p_+ = 4, 2, 1.1 (N=50, p_0=0.1)",
    "fig1b": "classical thermal distance d_th(t): constant vs level-dependent rates (N=50)",
    "fig2": "quantum d_th(t) and its dephased counterpart at mu=0.5 (N=20, rates 0.2/0.1/0.7)",
    "fig3": "mu-sweep of d_th(t) for mu in {0, 0.1, 0.25, 0.5, 1} (N=20)",
    "fig4": "asymptotic thermal distance d_inf(mu) with first-order prediction (N=20)",
}


def list_presets() -> list[tuple[str, str]]:
    return sorted(DESCRIPTIONS.items())


def preset_path(name: str) -> Path:
    if name not in DESCRIPTIONS:
        raise SchemaViolation("preset", f"unknown preset {name!r}; choose from {', '.join(sorted(DESCRIPTIONS))}")
    return Path(str(resources.files(__package__) / "presets" / f"{name}.json"))


def load_preset(name: str) -> ScenarioConfig:
    return loads_config(preset_path(name).read_text())
