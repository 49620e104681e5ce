"""Markov chain approximation for optimal reinsurance and dividend policies
on regime-switching surplus diffusions."""

from .chain import Grid, KernelTable, TransitionKernel, regular_kernel, reflect, singular_step
from .errors import ConfigError, DivMcaError
from .kernels import BACKEND
from .mc_verify import (
    McEstimate,
    SimConfig,
    oracle_barrier_value,
    oracle_optimal_barrier,
    simulate_payoff,
)
from .model import (
    ClaimDistribution,
    ControlSet,
    ModelSpec,
    PayoffSpec,
    RegimeSet,
    drift_vol,
    example_model,
    pure_singular_model,
    single_regime_model,
    truncated_moments,
    validate,
)
from .solver import (
    Solution,
    bellman_value,
    extract_barrier,
    qvi_residual,
    solve,
    solve_policy_iteration,
    solve_value_iteration,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ClaimDistribution",
    "ConfigError",
    "ControlSet",
    "DivMcaError",
    "Grid",
    "KernelTable",
    "McEstimate",
    "ModelSpec",
    "PayoffSpec",
    "RegimeSet",
    "SimConfig",
    "Solution",
    "TransitionKernel",
    "bellman_value",
    "drift_vol",
    "example_model",
    "extract_barrier",
    "oracle_barrier_value",
    "oracle_optimal_barrier",
    "pure_singular_model",
    "qvi_residual",
    "reflect",
    "regular_kernel",
    "simulate_payoff",
    "single_regime_model",
    "singular_step",
    "solve",
    "solve_policy_iteration",
    "solve_value_iteration",
    "truncated_moments",
    "validate",
]
