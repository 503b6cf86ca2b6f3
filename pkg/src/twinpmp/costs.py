"""Running, terminal and penalty costs, and their trapezoidal functionals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_types import Scenario, Trajectory, ValidationError, _frozen
from .systems import sample_excitation, step_endpoints, switch_nodes


def _check_sym_psd(M, name, tol=1e-12):
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {M.shape}")
    if not np.allclose(M, M.T, atol=tol, rtol=0):
        raise ValidationError(f"{name} must be symmetric")
    if M.size and np.min(np.linalg.eigvalsh(M)) < -tol * max(1.0, np.abs(M).max()):
        raise ValidationError(f"{name} must be positive semidefinite")


@dataclass(frozen=True, eq=False)
class QuadraticCostSpec:
    """l(x, u) = x'Qx + 1/2 u'Ru [+ d * sum(u)],  phi(x) = 1/2 x'Q_T x.

    R is only required to be positive semidefinite here so that the
    nonsmooth |u| Hamiltonians (R = 0) can be expressed; a :class:`Scenario`
    additionally demands R positive definite.
    """

    Q: np.ndarray
    R: np.ndarray
    Q_T: np.ndarray
    linear_control_weight: bool = True

    def __post_init__(self):
        Q, R, QT = (np.atleast_2d(_frozen(M)) for M in (self.Q, self.R, self.Q_T))
        _check_sym_psd(Q, "Q")
        _check_sym_psd(R, "R")
        _check_sym_psd(QT, "Q_T")
        if QT.shape != Q.shape:
            raise ValidationError("Q and Q_T must have the same shape")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "Q_T", QT)

    @classmethod
    def scalar(cls, q: float, r: float, q_T: float, linear_control_weight: bool = True):
        return cls(np.array([[q]]), np.array([[r]]), np.array([[q_T]]), linear_control_weight)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def m(self) -> int:
        return self.R.shape[0]

    @property
    def r_min(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.R)))

    def __eq__(self, other):
        if not isinstance(other, QuadraticCostSpec):
            return NotImplemented
        return (np.array_equal(self.Q, other.Q) and np.array_equal(self.R, other.R)
                and np.array_equal(self.Q_T, other.Q_T)
                and self.linear_control_weight == other.linear_control_weight)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PenaltySchedule:
    """beta(t) >= 0: ``constant`` or ``tabulated`` on a grid (nearest node)."""

    kind: str = "constant"
    beta: float = 1.0
    table: Trajectory | None = None

    def __post_init__(self):
        if self.kind == "constant":
            if not (np.isfinite(self.beta) and self.beta >= 0):
                raise ValidationError(f"penalty beta must be >= 0, got {self.beta}")
            object.__setattr__(self, "beta", float(self.beta))
        elif self.kind == "tabulated":
            if self.table is None or self.table.dim != 1:
                raise ValidationError("tabulated penalty needs a scalar trajectory")
            if np.any(self.table.values < 0):
                raise ValidationError("tabulated penalty has negative entries")
        else:
            raise ValidationError(f"unknown penalty kind {self.kind!r}")

    @classmethod
    def constant(cls, beta: float) -> PenaltySchedule:
        return cls("constant", beta)

    @classmethod
    def tabulated(cls, table: Trajectory) -> PenaltySchedule:
        return cls("tabulated", table=table)

    def at(self, t: float) -> float:
        if self.kind == "constant":
            return self.beta
        grid = self.table.grid
        if not 0.0 <= t <= grid.horizon_T:
            raise ValidationError(f"t={t} outside tabulated penalty range")
        return float(self.table.values[int(np.rint(t / grid.step)), 0])

    def sample(self, grid) -> np.ndarray:
        if self.kind == "constant":
            return np.full(len(grid), self.beta)
        return np.array([self.at(t) for t in grid.nodes])

    def __eq__(self, other):
        if not isinstance(other, PenaltySchedule):
            return NotImplemented
        return self.kind == other.kind and self.beta == other.beta and self.table == other.table

    __hash__ = None


def _vec(v, dim, name):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape[-1] != dim:
        raise ValidationError(f"{name} must have dimension {dim}, got {v.shape[-1]}")
    return v


def _stage(spec: QuadraticCostSpec, x, u, d):
    # batched over leading axes
    xq = np.einsum("...i,ij,...j->...", x, spec.Q, x)
    ur = 0.5 * np.einsum("...i,ij,...j->...", u, spec.R, u)
    lin = d * np.sum(u, axis=-1) if spec.linear_control_weight else 0.0
    return xq + ur + lin


def running_cost_plant(spec: QuadraticCostSpec, t, x, u, d) -> float:
    x = _vec(x, spec.n, "x")
    u = _vec(u, spec.m, "u")
    return float(_stage(spec, x, u, float(d)))


def running_cost_model(spec: QuadraticCostSpec, penalty: PenaltySchedule, t, x, x_hat, u, d):
    x = _vec(x, spec.n, "x")
    x_hat = _vec(x_hat, spec.n, "x_hat")
    u = _vec(u, spec.m, "u")
    return float(_stage(spec, x, u, float(d)) + penalty.at(t) * np.sum((x - x_hat) ** 2))


def terminal_cost(spec: QuadraticCostSpec, x_T) -> float:
    x_T = _vec(x_T, spec.n, "x_T")
    return float(0.5 * x_T @ spec.Q_T @ x_T)


def total_cost(kind: str, scenario: Scenario, x_traj: Trajectory, u_traj: Trajectory,
               x_hat_traj: Trajectory | None = None) -> float:
    """Trapezoidal J_act (``kind="plant"``) or J_mod (``kind="model"``) along sampled trajectories."""
    grid = scenario.grid
    for name, tr in (("x", x_traj), ("u", u_traj), ("x_hat", x_hat_traj)):
        if tr is not None and tr.grid != grid:
            raise ValidationError(f"{name} trajectory is not on the scenario grid")
    if kind not in ("plant", "model"):
        raise ValidationError(f"kind must be 'plant' or 'model', got {kind!r}")
    if kind == "model" and x_hat_traj is None:
        raise ValidationError("model cost needs the observed plant trajectory x_hat")
    d = sample_excitation(scenario.excitation, grid)
    sw = switch_nodes(scenario.excitation, grid)
    x, u = x_traj.values, u_traj.values
    u_l, u_r = step_endpoints(u, sw)
    d_l, d_r = step_endpoints(d, sw)
    left = _stage(scenario.cost, x[:-1], u_l, d_l)
    right = _stage(scenario.cost, x[1:], u_r, d_r)
    if kind == "model":
        pen = scenario.penalty.sample(grid) * np.sum((x - x_hat_traj.values) ** 2, axis=1)
        left, right = left + pen[:-1], right + pen[1:]
    running = 0.5 * grid.step * float(np.sum(left + right))
    return running + terminal_cost(scenario.cost, x[-1])
