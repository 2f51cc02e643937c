"""Ponderomotive scattering of electrons by a focused, asymmetric Gaussian laser pulse."""

from .core import (
    ConfigError,
    DomainError,
    EmptyError,
    ParameterError,
    PhysicalConfig,
    SimParams,
    StateError,
    StepError,
    derive_initial_state,
    derive_sim_params,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "EmptyError",
    "ParameterError",
    "PhysicalConfig",
    "SimParams",
    "StateError",
    "StepError",
    "derive_initial_state",
    "derive_sim_params",
    "__version__",
]
