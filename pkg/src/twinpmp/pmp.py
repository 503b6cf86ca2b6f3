"""Forward-backward sweeps for the plant problem (P1) and the penalized model problem (P2)."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core_types import Scenario, TimeGrid, Trajectory, ValidationError, trajectory_sup_distance
from .costs import PenaltySchedule, QuadraticCostSpec, total_cost
from .hamiltonian import HamiltonianSpec, linear_coefficient, minimize_batch
from .systems import LinearAffineSystem, sample_excitation, step_endpoints, switch_nodes

log = logging.getLogger(__name__)


class SweepDivergenceError(RuntimeError):
    def __init__(self, message, history_length):
        super().__init__(message)
        self.history_length = history_length


class CoupledRunError(RuntimeError):
    """Outer loop did not settle; carries the last plant change and the last iterate."""

    def __init__(self, message, last_distance, last_run=None):
        super().__init__(message)
        self.last_distance = last_distance
        self.last_run = last_run


@dataclass(frozen=True)
class SweepSettings:
    """Sweep controls. ``damping`` is theta in u <- theta*argmin + (1 - theta)*u.

    ``anderson_memory > 0`` replaces plain damping by Anderson mixing over that
    many past iterates; the fixed point is unchanged.
    """

    max_iterations: int = 500
    damping: float = 0.5
    convergence_tol: float = 1e-10
    integrator: str = "rk4"
    anderson_memory: int = 0
    outer_max_iterations: int = 50
    outer_tol: float = 1e-9

    def __post_init__(self):
        if not 0 < self.damping <= 1:
            raise ValidationError(f"damping must lie in (0, 1], got {self.damping}")
        if not self.convergence_tol >= 0:
            raise ValidationError("convergence_tol must be >= 0")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be positive")
        if self.integrator != "rk4":
            raise ValidationError("only the fixed-step 'rk4' integrator is available")
        if self.anderson_memory < 0:
            raise ValidationError("anderson_memory must be >= 0")


@dataclass(frozen=True)
class PmpSolution:
    control: Trajectory
    state: Trajectory
    costate: Trajectory
    unconstrained_control: Trajectory
    converged: bool
    iterations: int
    final_update_norm: float
    total_cost: float
    update_history: tuple = field(default=(), repr=False)
    excitation: np.ndarray = field(default=None, repr=False)


class CoupledRun(NamedTuple):
    solution: PmpSolution
    plant_state: Trajectory
    outer_iterations: int


# --- integrators -------------------------------------------------------------------

def _rk4_affine_step(A, h):
    """State-transition matrix of one RK4 step for dz/dt = A z."""
    hA = h * A
    M = np.eye(len(A))
    term = np.eye(len(A))
    for k in range(1, 5):
        term = term @ hA / k
        M = M + term
    return M


def _rk4_input_part(A, h, f_left, f_mid, f_right):
    """RK4 increment from z = 0 with forcing samples at the stage times (batched)."""
    k1 = f_left
    k2 = (0.5 * h) * k1 @ A.T + f_mid
    k3 = (0.5 * h) * k2 @ A.T + f_mid
    k4 = h * k3 @ A.T + f_right
    return (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _recur(M, w, z0):
    z = np.empty((len(w) + 1, len(z0)))
    z[0] = z0
    if len(z0) == 1:
        m = float(M[0, 0])
        zk = float(z0[0])
        col = w[:, 0].tolist()
        out = z[:, 0]
        for k, wk in enumerate(col):
            zk = m * zk + wk
            out[k + 1] = zk
        return z
    for k in range(len(w)):
        z[k + 1] = M @ z[k] + w[k]
    return z


def integrate_state_forward(sys: LinearAffineSystem, u_traj: Trajectory, x0, grid: TimeGrid,
                            switch_mask=None) -> Trajectory:
    """Classical RK4 for dx/dt = A x + B u, u linear between nodes.

    Steps that end on a switch node hold the left node's control.
    """
    if u_traj.grid != grid:
        raise ValidationError("control trajectory is not on the integration grid")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (sys.n,) or u_traj.dim != sys.m:
        raise ValidationError("dimension mismatch between system, x0 and control")
    if switch_mask is None:
        switch_mask = np.zeros(len(grid), dtype=bool)
    u_l, u_r = step_endpoints(u_traj.values, switch_mask)
    f_l = u_l @ sys.B.T
    f_r = u_r @ sys.B.T
    h = grid.step
    w = _rk4_input_part(sys.A, h, f_l, 0.5 * (f_l + f_r), f_r)
    return Trajectory(grid, _recur(_rk4_affine_step(sys.A, h), w, x0))


def _midpoints(g: np.ndarray) -> np.ndarray:
    """Cubic-interpolated values at step midpoints of node samples g (shape (N+1, n))."""
    N = len(g) - 1
    if N < 3:
        return 0.5 * (g[:-1] + g[1:])
    mid = np.empty((N, g.shape[1]))
    mid[1:-1] = (-g[:-3] + 9.0 * g[1:-2] + 9.0 * g[2:-1] - g[3:]) / 16.0
    mid[0] = (5.0 * g[0] + 15.0 * g[1] - 5.0 * g[2] + g[3]) / 16.0
    mid[-1] = (5.0 * g[-1] + 15.0 * g[-2] - 5.0 * g[-3] + g[-4]) / 16.0
    return mid


def integrate_costate_backward(sys: LinearAffineSystem, cost: QuadraticCostSpec,
                               penalty: PenaltySchedule | None, x_traj: Trajectory,
                               x_hat_traj: Trajectory | None, grid: TimeGrid) -> Trajectory:
    """lam(T) = Q_T x(T);  dlam/dt = -2 Q x [- 2 beta (x - x_hat)] - A' lam, RK4 backward."""
    if x_traj.grid != grid:
        raise ValidationError("state trajectory is not on the integration grid")
    if (penalty is None) != (x_hat_traj is None):
        raise ValidationError("x_hat_traj must be given exactly when a penalty is present")
    x = x_traj.values
    g = 2.0 * x @ cost.Q.T
    if penalty is not None:
        if x_hat_traj.grid != grid or x_hat_traj.dim != x_traj.dim:
            raise ValidationError("plant trajectory does not match the model state")
        beta = penalty.sample(grid)[:, None]
        g = g + 2.0 * beta * (x - x_hat_traj.values)
    # reversed time s = T - t: dlam/ds = A' lam + g
    g_rev = g[::-1]
    h = grid.step
    At = sys.A.T
    w = _rk4_input_part(At, h, g_rev[:-1], _midpoints(g_rev), g_rev[1:])
    lam_T = x[-1] @ cost.Q_T.T
    lam_rev = _recur(_rk4_affine_step(At, h), w, lam_T)
    return Trajectory(grid, lam_rev[::-1])


# --- sweeps ------------------------------------------------------------------------

def _anderson_update(u, f, theta, hist_u, hist_f, memory):
    hist_u.append(u.ravel().copy())
    hist_f.append(f.ravel().copy())
    del hist_u[:-(memory + 1)]
    del hist_f[:-(memory + 1)]
    if len(hist_f) < 2:
        return u + theta * f
    dF = np.diff(np.array(hist_f), axis=0).T
    dU = np.diff(np.array(hist_u), axis=0).T
    gamma = np.linalg.lstsq(dF, f.ravel(), rcond=None)[0]
    step = theta * f.ravel() - (dU + theta * dF) @ gamma
    return u + step.reshape(u.shape)


def _sweep(scenario: Scenario, system: LinearAffineSystem, penalty, x_hat: Trajectory | None,
           settings: SweepSettings) -> PmpSolution:
    grid = scenario.grid
    U = scenario.control_set
    d = sample_excitation(scenario.excitation, grid)
    sw = switch_nodes(scenario.excitation, grid)
    spec = HamiltonianSpec(system, scenario.cost, scenario.excitation, U, penalty)
    x0 = scenario.initial_state

    def pass_(u_vals):
        u_tr = Trajectory(grid, u_vals)
        x = integrate_state_forward(system, u_tr, x0, grid, sw)
        lam = integrate_costate_backward(system, scenario.cost, penalty, x, x_hat, grid)
        u_min, u_unc, _ = minimize_batch(spec, linear_coefficient(spec, lam.values, d))
        return x, lam, u_min, u_unc

    theta = settings.damping
    u = np.tile(U.project(np.zeros(system.m)), (len(grid), 1))
    history = []
    hist_u, hist_f = [], []
    converged = False
    for it in range(1, settings.max_iterations + 1):
        _, _, u_min, _ = pass_(u)
        f = u_min - u
        change = theta * float(np.max(np.linalg.norm(f, axis=1)))
        history.append(change)
        if not np.isfinite(change):
            raise SweepDivergenceError(f"sweep produced non-finite controls at iteration {it}", it)
        if change <= settings.convergence_tol:
            converged = True
            u = u_min
            break
        if settings.anderson_memory:
            u = U.project(_anderson_update(u, f, theta, hist_u, hist_f, settings.anderson_memory))
        else:
            u = u + theta * f
        if it > 50 and change > 10.0 * history[-51]:
            raise SweepDivergenceError(
                f"sweep update norm grew from {history[-51]:.3g} to {change:.3g} over 50 iterations",
                len(history))
    else:
        log.warning("sweep stopped after %d iterations, last update %.3g", it, change)
    x, lam, _, u_unc = pass_(u)
    u_tr = Trajectory(grid, u)
    if penalty is None:
        J = total_cost("plant", scenario, x, u_tr)
    else:
        J = total_cost("model", scenario, x, u_tr, x_hat)
    return PmpSolution(
        control=u_tr, state=x, costate=lam,
        unconstrained_control=Trajectory(grid, u_unc),
        converged=converged, iterations=it, final_update_norm=history[-1],
        total_cost=J, update_history=tuple(history), excitation=d,
    )


def solve_p1(scenario: Scenario, settings: SweepSettings | None = None) -> PmpSolution:
    """Plant-optimal control: sweep on the plant dynamics with the unpenalized cost."""
    return _sweep(scenario, scenario.plant, None, None, settings or SweepSettings())


def solve_p2(scenario: Scenario, plant_trajectory: Trajectory,
             settings: SweepSettings | None = None) -> PmpSolution:
    """Penalized model problem with the observed plant trajectory held fixed."""
    if plant_trajectory.grid != scenario.grid or plant_trajectory.dim != scenario.plant.n:
        raise ValidationError("plant trajectory must be a state trajectory on the scenario grid")
    return _sweep(scenario, scenario.model, scenario.penalty, plant_trajectory,
                  settings or SweepSettings())


def simulate_plant(scenario: Scenario, control: Trajectory) -> Trajectory:
    sw = switch_nodes(scenario.excitation, scenario.grid)
    return integrate_state_forward(scenario.plant, control, scenario.initial_state,
                                   scenario.grid, sw)


def closed_loop_coupled_run(scenario: Scenario, settings: SweepSettings | None = None) -> CoupledRun:
    """Alternate P2 solves and plant re-simulation under the P2 control until the plant feed settles.

    The first feed is the plant under the zero (projected) control. When beta is
    identically zero the feed cannot influence P2, so one pass suffices.
    """
    settings = settings or SweepSettings()
    grid = scenario.grid
    u0 = np.tile(scenario.control_set.project(np.zeros(scenario.plant.m)), (len(grid), 1))
    feed = simulate_plant(scenario, Trajectory(grid, u0))
    pen = scenario.penalty
    no_penalty = ((pen.kind == "constant" and pen.beta == 0.0)
                  or (pen.kind == "tabulated" and not np.any(pen.table.values)))
    dist = np.inf
    for outer in range(1, settings.outer_max_iterations + 1):
        sol = solve_p2(scenario, feed, settings)
        new_feed = simulate_plant(scenario, sol.control)
        dist = trajectory_sup_distance(new_feed, feed)
        feed = new_feed
        if no_penalty or dist <= settings.outer_tol:
            return CoupledRun(sol, feed, outer)
    raise CoupledRunError(
        f"coupled run did not settle in {settings.outer_max_iterations} outer iterations "
        f"(last plant change {dist:.3g})", dist, CoupledRun(sol, feed, outer))
