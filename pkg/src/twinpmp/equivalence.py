"""Checks that the model-based control reproduces the plant-optimal control, and why.

Two routes lead to identical controls: the u-gradients of the two Hamiltonians
agree along the solution (gradient match), or they differ but both unconstrained
minimizers project onto the same boundary point of U (saturation).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core_types import (
    AdmissibleSet, Box, Scenario, Trajectory, Unbounded, ValidationError,
    trajectory_sup_distance,
)
from .hamiltonian import (
    HamiltonianSpec, SubdifferentialInterval, UnsupportedConfigurationError, _active_sides,
    hamiltonian_u_subdifferential, linear_coefficient, normal_cone_residual,
)
from .pmp import PmpSolution
from .systems import sample_excitation

SUBGRADIENT_TOL = 1e-9
NORMAL_CONE_TOL = 1e-6
NODE_FRACTION = 0.99

# numeric codes used in saturation profiles
SAT_LO, SAT_INTERIOR, SAT_HI = -1.0, 0.0, 1.0
_LABELS = {SAT_LO: "lo", SAT_INTERIOR: "interior", SAT_HI: "hi"}


class Verdict(str, enum.Enum):
    EQUIVALENT_BY_GRADIENT_MATCH = "EquivalentByGradientMatch"
    EQUIVALENT_BY_SATURATION = "EquivalentBySaturation"
    NOT_EQUIVALENT = "NotEquivalent"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class EquivalenceReport:
    control_sup_distance: float
    state_sup_distance: float
    costate_sup_distance: float
    gradient_match_residual: Trajectory
    both_saturated_fraction: float
    theorem2_holds_per_node: np.ndarray
    theorem3_sufficient_holds: bool
    verdict: Verdict
    tol: float = 1e-9

    @property
    def equivalent(self) -> bool:
        return self.verdict is not Verdict.NOT_EQUIVALENT

    def summary(self) -> dict:
        """Scalar fields as an ordered dict (what report.csv holds)."""
        res = self.gradient_match_residual.values[:, 0]
        return {
            "verdict": self.verdict.value,
            "control_sup_distance": self.control_sup_distance,
            "state_sup_distance": self.state_sup_distance,
            "costate_sup_distance": self.costate_sup_distance,
            "gradient_match_residual_max": float(res.max()),
            "gradient_match_residual_min": float(res.min()),
            "gradient_match_fraction": float(np.mean(res <= self.tol)),
            "both_saturated_fraction": self.both_saturated_fraction,
            "theorem2_node_fraction": float(np.mean(self.theorem2_holds_per_node)),
            "theorem3_sufficient_holds": self.theorem3_sufficient_holds,
            "tol": self.tol,
        }


def check_theorem2_pointwise(plant_spec: HamiltonianSpec, model_spec: HamiltonianSpec, t,
                             x_hat, lam_hat, x, lam, candidate_u, d=None):
    """(subgradients match, 0 in dH_plant(u) + N_U(u)) at a shared candidate u.

    The subdifferential intervals are compared endpoint-wise to 1e-9 (absolute);
    the normal-cone residual must be <= 1e-6.
    """
    U = plant_spec.control_set
    u = np.atleast_1d(np.asarray(candidate_u, dtype=float))
    scale = max(1.0, float(np.max(np.abs(u))))
    if u.shape != (U.dimension,) or np.max(np.abs(U.project(u) - u)) > 1e-12 * scale:
        raise ValidationError(f"candidate u={candidate_u} is not in the admissible set")
    g_plant = hamiltonian_u_subdifferential(plant_spec, t, x_hat, u, lam_hat, d=d)
    g_model = hamiltonian_u_subdifferential(model_spec, t, x, u, lam, d=d)
    match = g_plant.close_to(g_model, SUBGRADIENT_TOL)
    cone = normal_cone_residual(U, u, g_plant) <= NORMAL_CONE_TOL
    return match, cone


def saturation_profile(sol: PmpSolution, control_set: AdmissibleSet) -> Trajectory:
    """Per node and component: -1 (lo), 0 (interior) or +1 (hi) for the unconstrained minimizer.

    A value exactly on a bound counts as saturated. See :func:`saturation_labels`.
    """
    if not isinstance(control_set, Box):
        raise UnsupportedConfigurationError("saturation profiles need an Interval or Box set")
    unc = sol.unconstrained_control.values
    flags = np.where(unc <= control_set.lo, SAT_LO,
                     np.where(unc >= control_set.hi, SAT_HI, SAT_INTERIOR))
    return Trajectory(sol.control.grid, flags)


def saturation_labels(profile: Trajectory) -> np.ndarray:
    return np.vectorize(_LABELS.__getitem__)(profile.values)


def _both_saturated(U: AdmissibleSet, unc_a, unc_b) -> np.ndarray:
    """Nodes where both unconstrained minimizers project to one and the same boundary point."""
    if isinstance(U, Unbounded):
        return np.zeros(len(unc_a), dtype=bool)
    pa, pb = U.project(unc_a), U.project(unc_b)
    same = np.all(pa == pb, axis=1)
    if isinstance(U, Box):
        outside_a = (unc_a <= U.lo) | (unc_a >= U.hi)
        outside_b = (unc_b <= U.lo) | (unc_b >= U.hi)
        return same & np.all(outside_a & outside_b, axis=1)
    # ball: both on or beyond the sphere
    ra = np.linalg.norm(unc_a - U.center, axis=1)
    rb = np.linalg.norm(unc_b - U.center, axis=1)
    return same & (ra >= U.radius) & (rb >= U.radius)


def _cone_residuals(U: AdmissibleSet, u, g) -> np.ndarray:
    """Vectorized normal-cone residual for smooth (point) subgradients g at controls u."""
    if isinstance(U, Box):
        at_lo, at_hi = _active_sides(U, u)
        lo = np.where(at_lo, -np.inf, g)
        hi = np.where(at_hi, np.inf, g)
        return np.linalg.norm(np.maximum(lo, 0.0) + np.maximum(-hi, 0.0), axis=1)
    if isinstance(U, Unbounded):
        return np.linalg.norm(g, axis=1)
    return np.array([normal_cone_residual(U, uk, SubdifferentialInterval.point(gk))
                     for uk, gk in zip(u, g)])


def check_theorem3_conditions(scenario: Scenario, sol_p1: PmpSolution, sol_p2: PmpSolution,
                              tol: float = 1e-9) -> EquivalenceReport:
    """Compare the plant-optimal solution (P1) with the model-based one (P2) node by node."""
    grid = scenario.grid
    for name, sol in (("sol_p1", sol_p1), ("sol_p2", sol_p2)):
        if sol.control.grid != grid or sol.costate.grid != grid:
            raise ValidationError(f"{name} is not on the scenario grid")
    U = scenario.control_set
    d = sample_excitation(scenario.excitation, grid)
    plant = HamiltonianSpec(scenario.plant, scenario.cost, scenario.excitation, U)
    model = HamiltonianSpec(scenario.model, scenario.cost, scenario.excitation, U, scenario.penalty)

    u_model = sol_p2.control.values
    R = scenario.cost.R
    # both gradients evaluated at the model-based control u°
    g_plant = u_model @ R.T + linear_coefficient(plant, sol_p1.costate.values, d)
    g_model = u_model @ R.T + linear_coefficient(model, sol_p2.costate.values, d)
    residual = np.linalg.norm(g_plant - g_model, axis=1)
    match_nodes = np.max(np.abs(g_plant - g_model), axis=1) <= SUBGRADIENT_TOL
    cone_nodes = _cone_residuals(U, u_model, g_plant) <= NORMAL_CONE_TOL

    both_sat = _both_saturated(U, sol_p1.unconstrained_control.values,
                               sol_p2.unconstrained_control.values)
    control_dist = trajectory_sup_distance(sol_p1.control, sol_p2.control)
    costate_dist = trajectory_sup_distance(sol_p1.costate, sol_p2.costate)
    sufficient = bool(np.array_equal(scenario.plant.B, scenario.model.B) and costate_dist <= tol)

    if np.mean(residual <= tol) >= NODE_FRACTION and control_dist <= tol:
        verdict = Verdict.EQUIVALENT_BY_GRADIENT_MATCH
    elif np.mean(both_sat) >= NODE_FRACTION and control_dist <= tol:
        verdict = Verdict.EQUIVALENT_BY_SATURATION
    else:
        verdict = Verdict.NOT_EQUIVALENT

    return EquivalenceReport(
        control_sup_distance=control_dist,
        state_sup_distance=trajectory_sup_distance(sol_p1.state, sol_p2.state),
        costate_sup_distance=costate_dist,
        gradient_match_residual=Trajectory(grid, residual),
        both_saturated_fraction=float(np.mean(both_sat)),
        theorem2_holds_per_node=match_nodes & cone_nodes,
        theorem3_sufficient_holds=sufficient,
        verdict=verdict,
        tol=tol,
    )
