"""Deterministic network simulation: config, engine, scenarios, reports."""

from .config import (
    ConfigParseError,
    ConfigValidationError,
    DelaySpec,
    ScriptEntry,
    SimConfig,
    TopologySpec,
    parse_data,
    parse_file,
)
from .engine import (
    InvalidDistributionError,
    InvalidTopologyError,
    Simulation,
    build_sim,
    build_topology,
    derive_rng,
    run,
)
from .report import SimReport, build_report, diff_reports, reports_equal
from .scenarios import (
    SCENARIOS,
    from_data,
    scenario_duplicate_flood,
    scenario_early_withdrawal,
    scenario_honest_baseline,
    scenario_invalid_proof,
    scenario_multi_registration,
    scenario_slash_race,
    scenario_spammer,
    scenario_spammer_duplicate,
    scenario_stale_epoch,
)


def load_config(path: str) -> SimConfig:
    """Read a JSON config file, expanding a scenario name when present."""
    return from_data(parse_file(path))


def load_config_text(text: str) -> SimConfig:
    return from_data(parse_data(text))


__all__ = [
    "ConfigParseError",
    "ConfigValidationError",
    "DelaySpec",
    "InvalidDistributionError",
    "InvalidTopologyError",
    "SCENARIOS",
    "ScriptEntry",
    "SimConfig",
    "SimReport",
    "Simulation",
    "TopologySpec",
    "build_report",
    "build_sim",
    "build_topology",
    "derive_rng",
    "diff_reports",
    "from_data",
    "load_config",
    "load_config_text",
    "parse_data",
    "parse_file",
    "reports_equal",
    "run",
    "scenario_duplicate_flood",
    "scenario_early_withdrawal",
    "scenario_honest_baseline",
    "scenario_invalid_proof",
    "scenario_multi_registration",
    "scenario_slash_race",
    "scenario_spammer",
    "scenario_spammer_duplicate",
    "scenario_stale_epoch",
]
