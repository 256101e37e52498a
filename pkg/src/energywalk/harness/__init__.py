from .config import (
    ConfigError,
    ParseError,
    ScenarioConfig,
    SchemaViolation,
    UnknownField,
    config_from_dict,
    load_config,
    loads_config,
)
from .presets import list_presets, load_preset
from .runner import InvariantViolation, RunReport, run_scenario
