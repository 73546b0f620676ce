"""Sum-rate optimization for RIS-aided multiuser MISO downlinks with movable antennas."""

from .model import (ConfigError, Scenario, SystemConfig, effective_channel,
                    field_response_matrix, path_loss, sample_scenario, sinr, sum_rate)
from .solver import SolverError, SolverState, SolverTrace, initialize, solve

__all__ = [
    "ConfigError", "Scenario", "SystemConfig", "effective_channel", "field_response_matrix",
    "path_loss", "sample_scenario", "sinr", "sum_rate", "SolverError", "SolverState",
    "SolverTrace", "initialize", "solve",
]
