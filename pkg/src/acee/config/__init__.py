"""Configuration management for acee."""

from .experiment import (
    ArchitectureConfig,
    CsvSchema,
    DagQuery,
    ExperimentConfig,
    TrainConfig,
    load_experiment_config,
)
from .settings import Settings, load_settings, validate_configuration

__all__ = [
    "ArchitectureConfig",
    "CsvSchema",
    "DagQuery",
    "ExperimentConfig",
    "Settings",
    "TrainConfig",
    "load_experiment_config",
    "load_settings",
    "validate_configuration",
]
