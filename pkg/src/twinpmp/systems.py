"""Affine-in-control linear dynamics and the exogenous excitation d(t)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_types import TimeGrid, Trajectory, ValidationError, _frozen

# Relative tolerance (in units of half-periods) for treating w*t as an exact zero of sin.
_PHASE_SNAP = 1e-9


@dataclass(frozen=True, eq=False)
class LinearAffineSystem:
    """dx/dt = A x + B u."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(_frozen(self.A))
        B = np.atleast_2d(_frozen(self.B))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValidationError(f"A must be square, got shape {A.shape}")
        if B.ndim != 2 or B.shape[0] != A.shape[0]:
            raise ValidationError(f"B must have {A.shape[0]} rows, got shape {B.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def scalar(cls, a: float, b: float) -> LinearAffineSystem:
        return cls(np.array([[a]]), np.array([[b]]))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def __eq__(self, other):
        if not isinstance(other, LinearAffineSystem):
            return NotImplemented
        return np.array_equal(self.A, other.A) and np.array_equal(self.B, other.B)

    __hash__ = None


def evaluate_dynamics(sys: LinearAffineSystem, x, u) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if x.shape[-1] != sys.n or u.shape[-1] != sys.m:
        raise ValidationError(
            f"expected x in R^{sys.n} and u in R^{sys.m}, got {x.shape} and {u.shape}")
    return x @ sys.A.T + u @ sys.B.T


def dynamics_control_jacobian(sys: LinearAffineSystem) -> np.ndarray:
    """d f / d u, constant for affine systems."""
    return sys.B


# --- excitation ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExcitationSpec:
    """d(t): ``zero``, ``square`` (A*sign(sin(w t))) or ``tabulated``."""

    kind: str = "zero"
    amplitude: float = 0.0
    omega: float = 1.0
    table: Trajectory | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "square", "tabulated"):
            raise ValidationError(f"unknown excitation kind {self.kind!r}")
        if self.kind == "square":
            if not self.amplitude >= 0:
                raise ValidationError(f"square-wave amplitude must be >= 0, got {self.amplitude}")
            if not self.omega > 0:
                raise ValidationError(f"square-wave omega must be > 0, got {self.omega}")
        if self.kind == "tabulated":
            if self.table is None or self.table.dim != 1:
                raise ValidationError("tabulated excitation needs a scalar trajectory")

    @classmethod
    def zero(cls) -> ExcitationSpec:
        return cls("zero")

    @classmethod
    def square_wave(cls, amplitude: float, omega: float) -> ExcitationSpec:
        return cls("square", float(amplitude), float(omega))

    @classmethod
    def tabulated(cls, table: Trajectory) -> ExcitationSpec:
        return cls("tabulated", table=table)

    def __eq__(self, other):
        if not isinstance(other, ExcitationSpec):
            return NotImplemented
        return (self.kind == other.kind and self.amplitude == other.amplitude
                and self.omega == other.omega and self.table == other.table)

    __hash__ = None


def _half_periods(spec: ExcitationSpec, t):
    """w*t/pi and whether it sits on an integer (a zero of sin)."""
    phase = spec.omega * np.asarray(t, dtype=float) / np.pi
    k = np.rint(phase)
    on_zero = np.abs(phase - k) <= _PHASE_SNAP * np.maximum(1.0, np.abs(phase))
    return phase, k, on_zero


def evaluate_excitation(spec: ExcitationSpec, t: float) -> float:
    """d(t), with sign(0) := 0 at the zeros of sin(w t)."""
    if spec.kind == "zero":
        return 0.0
    if spec.kind == "square":
        _, _, on_zero = _half_periods(spec, t)
        if on_zero:
            return 0.0
        return spec.amplitude * float(np.sign(np.sin(spec.omega * t)))
    grid = spec.table.grid
    if not (0.0 <= t <= grid.horizon_T):
        raise ValidationError(f"t={t} outside tabulated range [0, {grid.horizon_T}]")
    k = int(np.clip(np.rint(t / grid.step), 0, grid.num_steps))
    return float(spec.table.values[k, 0])


def switch_nodes(spec: ExcitationSpec, grid: TimeGrid) -> np.ndarray:
    """Boolean mask of grid nodes where d(t) jumps or vanishes at a zero crossing."""
    if spec.kind == "square" and spec.amplitude > 0:
        return _half_periods(spec, grid.nodes)[2]
    return np.zeros(len(grid), dtype=bool)


def sample_excitation(spec: ExcitationSpec, grid: TimeGrid) -> np.ndarray:
    """d at every node, one-sided at switch instants.

    At a switch node the right limit d(t+) is used (left limit at t = T), so the
    sampled control at the node belongs to the interval it starts. Elsewhere this
    agrees with :func:`evaluate_excitation`.
    """
    t = grid.nodes
    if spec.kind == "zero":
        return np.zeros(len(grid))
    if spec.kind == "tabulated":
        return np.array([evaluate_excitation(spec, tk) for tk in t])
    _, k, on_zero = _half_periods(spec, t)
    d = spec.amplitude * np.sign(np.sin(spec.omega * t))
    # just after k*pi/w, sin has the sign (-1)^k; just before, (-1)^(k-1)
    right = spec.amplitude * np.where(k % 2 == 0, 1.0, -1.0)
    d = np.where(on_zero, right, d)
    if on_zero[-1]:
        d[-1] = -right[-1]
    return d


def step_endpoints(values: np.ndarray, switch_mask: np.ndarray):
    """Left/right values of a node-sampled signal on each grid step.

    Samples at switch nodes are right limits, so a step ending on a switch node
    holds its left value; every other step interpolates its two nodes.
    """
    left = values[:-1]
    right = np.where(switch_mask[1:, None] if values.ndim == 2 else switch_mask[1:],
                     values[:-1], values[1:])
    return left, right
