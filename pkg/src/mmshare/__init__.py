"""Monte Carlo simulator for spectrum and infrastructure sharing between mmWave operators."""

from .config import ChannelModel, ModelParams, Scenario, SimulationConfig, load_config, save_config, validate
from .engine import DropResult, run_campaign, run_drop
from .metrics import CoverageCurve, coverage, rate_of

__all__ = [
    "ChannelModel", "ModelParams", "Scenario", "SimulationConfig", "load_config", "save_config", "validate",
    "DropResult", "run_campaign", "run_drop", "CoverageCurve", "coverage", "rate_of",
]
