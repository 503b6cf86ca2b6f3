"""Shared value types: time grids, sampled trajectories, admissible control sets."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .costs import PenaltySchedule, QuadraticCostSpec
    from .systems import ExcitationSpec, LinearAffineSystem


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Uniform grid t_k = k*T/N, k = 0..N."""

    horizon_T: float
    num_steps: int
    nodes: np.ndarray = field(repr=False)

    @property
    def step(self) -> float:
        return self.horizon_T / self.num_steps

    def __len__(self):
        return self.num_steps + 1

    def __eq__(self, other):
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return self.horizon_T == other.horizon_T and self.num_steps == other.num_steps

    def __hash__(self):
        return hash((self.horizon_T, self.num_steps))


def make_uniform_grid(T: float, N: int) -> TimeGrid:
    if not np.isfinite(T) or T <= 0:
        raise ValidationError(f"horizon T must be positive, got {T}")
    if int(N) != N or N < 2:
        raise ValidationError(f"number of steps N must be an integer >= 2, got {N}")
    N = int(N)
    nodes = np.arange(N + 1) * (T / N)
    nodes[-1] = T
    return TimeGrid(float(T), N, _frozen(nodes))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Vector samples of a signal, one row per grid node (shape (N+1, d))."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[1] < 1:
            raise ValidationError(f"trajectory values must be (N+1, d), got shape {v.shape}")
        if v.shape[0] != len(self.grid):
            raise ValidationError(
                f"trajectory has {v.shape[0]} samples, grid has {len(self.grid)} nodes")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.grid.nodes

    def component(self, i: int = 0) -> np.ndarray:
        return self.values[:, i]

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    __hash__ = None


def trajectory_sup_distance(a: Trajectory, b: Trajectory) -> float:
    """max_k ||a(t_k) - b(t_k)||_2."""
    if a.grid != b.grid:
        raise ValidationError("trajectories live on different grids")
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")
    diff = a.values - b.values
    # scale rows before squaring so tiny differences do not underflow to zero
    peak = np.max(np.abs(diff), axis=1, keepdims=True)
    safe = np.where(peak > 0, peak, 1.0)
    return float(np.max(peak[:, 0] * np.linalg.norm(diff / safe, axis=1)))


# --- admissible control sets -------------------------------------------------

class AdmissibleSet:
    """Nonempty closed convex control set U."""

    kind: str = ""
    dimension: int

    def project(self, u) -> np.ndarray:
        raise NotImplementedError

    def contains(self, u, tol: float = 1e-12) -> bool:
        u = np.asarray(u, dtype=float)
        return bool(np.max(np.abs(self.project(u) - u), initial=0.0) <= tol)

    @property
    def bounded(self) -> bool:
        return True


@dataclass(frozen=True, eq=False)
class Box(AdmissibleSet):
    lo: np.ndarray
    hi: np.ndarray
    kind = "box"

    def __post_init__(self):
        lo, hi = np.atleast_1d(_frozen(self.lo)), np.atleast_1d(_frozen(self.hi))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValidationError("box bounds must be vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValidationError("box bounds must be finite; use Unbounded instead")
        if np.any(lo > hi):
            raise ValidationError(f"box requires lo <= hi componentwise, got {lo} > {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dimension(self) -> int:
        return self.lo.shape[0]

    @property
    def degenerate(self) -> bool:
        return bool(np.any(self.lo == self.hi))

    def project(self, u):
        return np.clip(u, self.lo, self.hi)

    def __eq__(self, other):
        return (type(self) is type(other) and np.array_equal(self.lo, other.lo)
                and np.array_equal(self.hi, other.hi))

    __hash__ = None


class Interval(Box):
    """Scalar box [lo, hi]."""

    kind = "interval"

    def __init__(self, lo: float, hi: float):
        super().__init__(np.array([float(lo)]), np.array([float(hi)]))


@dataclass(frozen=True, eq=False)
class Ball(AdmissibleSet):
    center: np.ndarray
    radius: float
    kind = "ball"

    def __post_init__(self):
        c = np.atleast_1d(_frozen(self.center))
        if c.ndim != 1:
            raise ValidationError("ball center must be a vector")
        if not self.radius > 0:
            raise ValidationError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dimension(self) -> int:
        return self.center.shape[0]

    def project(self, u):
        u = np.asarray(u, dtype=float)
        v = u - self.center
        n = np.linalg.norm(v, axis=-1, keepdims=True)
        scale = np.where(n > self.radius, self.radius / np.where(n > 0, n, 1.0), 1.0)
        return self.center + v * scale

    def __eq__(self, other):
        return (type(self) is type(other) and np.array_equal(self.center, other.center)
                and self.radius == other.radius)

    __hash__ = None


@dataclass(frozen=True)
class Unbounded(AdmissibleSet):
    dimension: int = 1
    kind = "unbounded"

    def __post_init__(self):
        if self.dimension < 1:
            raise ValidationError("dimension must be positive")

    def project(self, u):
        return np.asarray(u, dtype=float)

    @property
    def bounded(self) -> bool:
        return False


# --- scenario ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Scenario:
    """Plant/model pair, cost, penalty, excitation, control set and grid."""

    plant: LinearAffineSystem
    model: LinearAffineSystem
    cost: QuadraticCostSpec
    penalty: PenaltySchedule
    excitation: ExcitationSpec
    control_set: AdmissibleSet
    grid: TimeGrid
    initial_state: np.ndarray

    def __post_init__(self):
        x0 = np.atleast_1d(_frozen(self.initial_state))
        object.__setattr__(self, "initial_state", x0)
        if self.plant.n != self.model.n or self.plant.n != x0.shape[0]:
            raise ValidationError(
                f"state dimensions disagree: plant {self.plant.n}, model {self.model.n}, "
                f"x0 {x0.shape[0]}")
        if self.plant.m != self.model.m or self.plant.m != self.control_set.dimension:
            raise ValidationError(
                f"control dimensions disagree: plant {self.plant.m}, model {self.model.m}, "
                f"control set {self.control_set.dimension}")
        if self.cost.n != self.plant.n or self.cost.m != self.plant.m:
            raise ValidationError("cost weights do not match system dimensions")
        if self.cost.r_min <= 0:
            raise ValidationError("control weight R must be positive definite")

    def replace(self, **changes) -> Scenario:
        from dataclasses import replace
        return replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (self.plant == other.plant and self.model == other.model
                and self.cost == other.cost and self.penalty == other.penalty
                and self.excitation == other.excitation
                and self.control_set == other.control_set and self.grid == other.grid
                and np.array_equal(self.initial_state, other.initial_state))

    __hash__ = None
