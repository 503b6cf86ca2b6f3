"""Pontryagin sweeps for plant-optimal and penalized model-based control, with equivalence checks."""
from .core_types import (
    AdmissibleSet, Ball, Box, Interval, Scenario, TimeGrid, Trajectory, Unbounded,
    ValidationError, make_uniform_grid, trajectory_sup_distance,
)
from .costs import (
    PenaltySchedule, QuadraticCostSpec, running_cost_model, running_cost_plant, terminal_cost,
    total_cost,
)
from .hamiltonian import (
    ControlDecision, HamiltonianSpec, SubdifferentialInterval, UnsupportedConfigurationError,
    brute_force_argmin, coercivity_probe, eval_hamiltonian, hamiltonian_u_subdifferential,
    minimize_hamiltonian, normal_cone_residual,
)
from .pmp import (
    CoupledRun, CoupledRunError, PmpSolution, SweepDivergenceError, SweepSettings,
    closed_loop_coupled_run, integrate_costate_backward, integrate_state_forward, solve_p1,
    solve_p2,
)
from .systems import (
    ExcitationSpec, LinearAffineSystem, dynamics_control_jacobian, evaluate_dynamics,
    evaluate_excitation, sample_excitation, switch_nodes,
)

__all__ = [
    "AdmissibleSet",
    "Ball",
    "Box",
    "brute_force_argmin",
    "closed_loop_coupled_run",
    "coercivity_probe",
    "ControlDecision",
    "CoupledRun",
    "CoupledRunError",
    "dynamics_control_jacobian",
    "eval_hamiltonian",
    "evaluate_dynamics",
    "evaluate_excitation",
    "ExcitationSpec",
    "hamiltonian_u_subdifferential",
    "HamiltonianSpec",
    "integrate_costate_backward",
    "integrate_state_forward",
    "Interval",
    "LinearAffineSystem",
    "make_uniform_grid",
    "minimize_hamiltonian",
    "normal_cone_residual",
    "PenaltySchedule",
    "PmpSolution",
    "QuadraticCostSpec",
    "running_cost_model",
    "running_cost_plant",
    "sample_excitation",
    "Scenario",
    "solve_p1",
    "solve_p2",
    "SubdifferentialInterval",
    "SweepDivergenceError",
    "SweepSettings",
    "switch_nodes",
    "terminal_cost",
    "TimeGrid",
    "total_cost",
    "Trajectory",
    "trajectory_sup_distance",
    "Unbounded",
    "UnsupportedConfigurationError",
    "ValidationError",
]

__version__ = "0.1.0"
