"""Position-unraveling non-Markovian stochastic Schrodinger equation for a
two-level atom coupled to a bosonic bath, with exact oracles."""

from .bath import BathConfiguration, BathSpec, alpha, gamma, noise_z, sample_initial, trajectory_rng
from .bohm import bohmian_bundle, bohmian_trajectory, continuity_residual, velocity_field, velocity_operator
from .ensemble import compare, convergence_study, oracle_rho_series, run_ensemble
from .errors import (
    ConfigError,
    ContractViolation,
    DegenerateStateError,
    NodeError,
    SingularityError,
    TrajectoryError,
    UnsupportedRegimeError,
)
from .oracle import (
    JointState,
    analytic_tla,
    conditional_state,
    evolve_sector,
    exact_series,
    integrate_conditional,
    reduced_state,
    sector_series,
)
from .qcore import SIGMA, SIGMA_DAG, SystemState, bloch, excited, expectation, ground, normalize, outer_product
from .sse import (
    IntegratorConfig,
    ansatz_coeffs_analytic,
    ansatz_coeffs_ode_step,
    drift,
    integrate_batch,
    run_trajectory,
    step_linear,
    step_nonlinear,
)

__version__ = "0.1.0"

__all__ = [
    "BathConfiguration",
    "BathSpec",
    "ConfigError",
    "ContractViolation",
    "DegenerateStateError",
    "IntegratorConfig",
    "JointState",
    "NodeError",
    "SIGMA",
    "SIGMA_DAG",
    "SingularityError",
    "SystemState",
    "TrajectoryError",
    "UnsupportedRegimeError",
    "alpha",
    "analytic_tla",
    "ansatz_coeffs_analytic",
    "ansatz_coeffs_ode_step",
    "bloch",
    "bohmian_bundle",
    "bohmian_trajectory",
    "compare",
    "conditional_state",
    "continuity_residual",
    "convergence_study",
    "drift",
    "evolve_sector",
    "exact_series",
    "excited",
    "expectation",
    "gamma",
    "ground",
    "integrate_batch",
    "integrate_conditional",
    "noise_z",
    "normalize",
    "oracle_rho_series",
    "outer_product",
    "reduced_state",
    "run_ensemble",
    "run_trajectory",
    "sample_initial",
    "sector_series",
    "step_linear",
    "step_nonlinear",
    "trajectory_rng",
    "velocity_field",
    "velocity_operator",
]
