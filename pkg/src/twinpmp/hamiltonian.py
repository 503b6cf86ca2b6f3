"""Hamiltonian evaluation, u-subdifferentials, normal cones and pointwise minimization.

Both Hamiltonians share the form

    H(u) = x'Qx + 1/2 u'Ru + d * sum(u) + kappa * ||u||_1 + lam'(Ax + Bu) [+ beta ||x - x_hat||^2]

so in u only the linear coefficient c = B'lam + d*1 and the quadratic/abs weights
matter. The penalty term never reaches the minimizer.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_types import AdmissibleSet, Ball, Box, Unbounded, ValidationError
from .costs import PenaltySchedule, QuadraticCostSpec
from .systems import ExcitationSpec, LinearAffineSystem, evaluate_excitation


class UnsupportedConfigurationError(ValidationError):
    """The closed-form minimizer does not cover this (R, kappa, U) combination."""


@dataclass(frozen=True)
class HamiltonianSpec:
    system: LinearAffineSystem
    cost: QuadraticCostSpec
    excitation: ExcitationSpec
    control_set: AdmissibleSet
    penalty: PenaltySchedule | None = None
    nonsmooth_abs_weight: float = 0.0

    def __post_init__(self):
        if not self.nonsmooth_abs_weight >= 0:
            raise ValidationError("nonsmooth_abs_weight must be >= 0")
        if self.cost.n != self.system.n or self.cost.m != self.system.m:
            raise ValidationError("cost weights do not match system dimensions")
        if self.control_set.dimension != self.system.m:
            raise ValidationError("control set dimension does not match the system")

    @property
    def is_model(self) -> bool:
        return self.penalty is not None

    def with_penalty(self, penalty: PenaltySchedule | None) -> HamiltonianSpec:
        from dataclasses import replace
        return replace(self, penalty=penalty)


@dataclass(frozen=True)
class SubdifferentialInterval:
    """Componentwise closed interval [lo, hi] of subgradients."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValidationError("subdifferential interval needs lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, g) -> SubdifferentialInterval:
        g = np.atleast_1d(np.asarray(g, dtype=float))
        return cls(g, g.copy())

    @property
    def is_singleton(self) -> bool:
        return bool(np.array_equal(self.lo, self.hi))

    def contains(self, g, tol: float = 0.0) -> bool:
        g = np.atleast_1d(g)
        return bool(np.all(self.lo - tol <= g) and np.all(g <= self.hi + tol))

    def close_to(self, other: SubdifferentialInterval, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.lo - other.lo)) <= tol
                    and np.max(np.abs(self.hi - other.hi)) <= tol)


@dataclass(frozen=True)
class ControlDecision:
    minimizer: np.ndarray
    unconstrained_minimizer: np.ndarray
    saturated: tuple
    unique: bool
    hamiltonian_value: float


def _as_vec(v, dim, name):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape[-1] != dim:
        raise ValidationError(f"{name} must have dimension {dim}, got shape {v.shape}")
    return v


def _excitation(spec, t, d):
    return evaluate_excitation(spec.excitation, t) if d is None else float(d)


def linear_coefficient(spec: HamiltonianSpec, lam, d):
    """c = B'lam + d*1 (the u-linear part of H); broadcasts over leading axes."""
    c = np.asarray(lam, dtype=float) @ spec.system.B
    if spec.cost.linear_control_weight:
        c = c + np.asarray(d, dtype=float)[..., None]
    return c


def eval_hamiltonian(spec: HamiltonianSpec, t, x, x_hat, u, lam, d=None):
    """H at (t, x, [x_hat], u, lam). ``u`` may carry leading batch axes."""
    n, m = spec.system.n, spec.system.m
    x = _as_vec(x, n, "x")
    lam = _as_vec(lam, n, "lambda")
    u = _as_vec(u, m, "u")
    if spec.is_model and x_hat is None:
        raise ValidationError("the model Hamiltonian needs the plant state x_hat")
    if not spec.is_model and x_hat is not None:
        raise ValidationError("the plant Hamiltonian takes no x_hat")
    d = _excitation(spec, t, d)
    Q, R = spec.cost.Q, spec.cost.R
    val = (x @ Q @ x + 0.5 * np.einsum("...i,ij,...j->...", u, R, u)
           + lam @ spec.system.A @ x + u @ (spec.system.B.T @ lam))
    if spec.cost.linear_control_weight:
        val = val + d * np.sum(u, axis=-1)
    if spec.nonsmooth_abs_weight:
        val = val + spec.nonsmooth_abs_weight * np.sum(np.abs(u), axis=-1)
    if spec.is_model:
        x_hat = _as_vec(x_hat, n, "x_hat")
        val = val + spec.penalty.at(t) * np.sum((x - x_hat) ** 2)
    return float(val) if np.ndim(val) == 0 else val


def hamiltonian_u_subdifferential(spec: HamiltonianSpec, t, x, u, lam, d=None):
    """R u + B'lam + d*1 + kappa * d|u| (componentwise interval)."""
    _as_vec(x, spec.system.n, "x")
    u = _as_vec(u, spec.system.m, "u")
    lam = _as_vec(lam, spec.system.n, "lambda")
    g = spec.cost.R @ u + linear_coefficient(spec, lam, _excitation(spec, t, d))
    k = spec.nonsmooth_abs_weight
    if k == 0:
        return SubdifferentialInterval.point(g)
    sgn = np.sign(u)
    lo = np.where(u == 0, g - k, g + k * sgn)
    hi = np.where(u == 0, g + k, g + k * sgn)
    return SubdifferentialInterval(lo, hi)


def _active_sides(box: Box, u, tol=1e-12):
    scale = np.maximum(1.0, np.maximum(np.abs(box.lo), np.abs(box.hi)))
    return np.abs(u - box.lo) <= tol * scale, np.abs(u - box.hi) <= tol * scale


def normal_cone_residual(control_set: AdmissibleSet, u, g: SubdifferentialInterval) -> float:
    """dist(0, dH(u) + N_U(u)); zero exactly at constrained stationary points."""
    u = _as_vec(u, control_set.dimension, "u")
    scale = max(1.0, float(np.max(np.abs(u))))
    if np.max(np.abs(control_set.project(u) - u)) > 1e-12 * scale:
        raise ValidationError(f"u={u} is not in the admissible set")
    lo, hi = g.lo, g.hi
    if isinstance(control_set, Box):
        at_lo, at_hi = _active_sides(control_set, u)
        lo = np.where(at_lo, -np.inf, lo)
        hi = np.where(at_hi, np.inf, hi)
        return float(np.linalg.norm(np.maximum(lo, 0.0) + np.maximum(-hi, 0.0)))
    if isinstance(control_set, Unbounded):
        return float(np.linalg.norm(np.maximum(lo, 0.0) + np.maximum(-hi, 0.0)))
    if isinstance(control_set, Ball):
        v = u - control_set.center
        r = np.linalg.norm(v)
        if r < control_set.radius * (1 - 1e-12):
            return float(np.linalg.norm(np.maximum(lo, 0.0) + np.maximum(-hi, 0.0)))
        nrm = v / r

        def dist(tt):
            return np.linalg.norm(np.maximum(lo + tt * nrm, 0.0) + np.maximum(-(hi + tt * nrm), 0.0))

        if g.is_singleton:
            tt = max(0.0, -float(lo @ nrm))
            return float(dist(tt))
        from scipy.optimize import minimize_scalar

        big = 2.0 * np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))) + 1.0
        res = minimize_scalar(dist, bounds=(0.0, big), method="bounded",
                              options={"xatol": 1e-13})
        return float(min(res.fun, dist(0.0)))
    raise ValidationError(f"unsupported control set {control_set!r}")


# --- pointwise minimization ------------------------------------------------------

def _is_diagonal(R):
    return np.array_equal(R, np.diag(np.diag(R)))


def _separable_minimize(r, c, kappa, lo, hi):
    """Componentwise argmin of 1/2 r u^2 + c u + kappa |u| over [lo, hi].

    Arrays broadcast; r >= 0. Flat argmin segments resolve to their minimum-norm point.
    Returns (minimizer, unconstrained minimizer, unique).
    """
    shrunk = np.sign(c) * np.maximum(np.abs(c) - kappa, 0.0)
    if np.all(r > 0):
        # strictly convex in every component: unique minimizer, plain projection
        unc = -shrunk / r
        return np.clip(unc, lo, hi), unc, np.ones(np.shape(c), dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        unc_pos = -shrunk / np.where(r > 0, r, 1.0)
    flat = np.abs(c) == kappa
    unc_zero = np.where(np.abs(c) <= kappa, 0.0, np.where(c > 0, -np.inf, np.inf))
    unc = np.where(r > 0, unc_pos, unc_zero)
    if np.any((r == 0) & ~flat & (np.abs(c) > kappa) & ~np.isfinite(np.where(c > 0, lo, hi))):
        raise ValidationError("Hamiltonian is unbounded below on U (not coercive)")
    u = np.clip(unc, lo, hi)
    # r == 0 flat pieces: argmin is a segment through 0, take its min-norm point
    seg_lo = np.where(c > 0, lo, np.maximum(lo, 0.0))
    seg_hi = np.where(c > 0, np.minimum(hi, 0.0), hi)
    if np.ndim(kappa) == 0 and kappa == 0:
        seg_lo, seg_hi = np.broadcast_to(lo, np.shape(c)), np.broadcast_to(hi, np.shape(c))
    flat_r0 = (r == 0) & flat
    u = np.where(flat_r0, np.clip(0.0, lo, hi), u)
    unique = ~(flat_r0 & (np.minimum(seg_hi, hi) > np.maximum(seg_lo, lo)))
    return u, unc, unique


def _box_qp_coordinate_descent(R, c, lo, hi, u0, tol=1e-12, max_sweeps=100_000):
    u = u0.copy()
    diag = np.diag(R)
    for _ in range(max_sweeps):
        change = 0.0
        for i in range(len(u)):
            gi = R[i] @ u + c[i]
            new = min(max(u[i] - gi / diag[i], lo[i]), hi[i])
            change = max(change, abs(new - u[i]))
            u[i] = new
        if change <= tol:
            break
    return u


def minimize_batch(spec: HamiltonianSpec, c: np.ndarray):
    """Constrained minimizers for a stack of linear coefficients c (shape (K, m)).

    Returns (minimizer, unconstrained minimizer, unique) with shapes (K, m), (K, m), (K,).
    """
    R = spec.cost.R
    kappa = spec.nonsmooth_abs_weight
    U = spec.control_set
    diag = _is_diagonal(R)
    if isinstance(U, Ball):
        r0 = R[0, 0]
        if kappa > 0 or not np.array_equal(R, r0 * np.eye(len(R))) or r0 <= 0:
            raise UnsupportedConfigurationError(
                "ball constraints need an isotropic R = r I with r > 0 and no |u| term")
        unc = -c / r0
        return U.project(unc), unc, np.ones(len(c), dtype=bool)
    if isinstance(U, Box):
        lo, hi = U.lo, U.hi
    else:
        lo = np.full(U.dimension, -np.inf)
        hi = np.full(U.dimension, np.inf)
    if diag:
        u, unc, unique = _separable_minimize(np.diag(R), c, kappa, lo, hi)
        return u, unc, np.all(unique, axis=-1)
    if kappa > 0:
        raise UnsupportedConfigurationError("a |u| term needs a diagonal R")
    if spec.cost.r_min <= 0:
        raise UnsupportedConfigurationError("non-diagonal R must be positive definite")
    unc = -np.linalg.solve(R, c.T).T
    if isinstance(U, Unbounded):
        return unc, unc, np.ones(len(c), dtype=bool)
    u = np.array([_box_qp_coordinate_descent(R, ck, lo, hi, np.clip(uk, lo, hi))
                  for ck, uk in zip(c, unc)])
    return u, unc, np.ones(len(c), dtype=bool)


def _saturation_flags(U, u):
    if isinstance(U, Box):
        return tuple("lo" if a == lo else "hi" if a == hi else "interior"
                     for a, lo, hi in zip(u, U.lo, U.hi))
    if isinstance(U, Ball):
        on = np.linalg.norm(u - U.center) >= U.radius * (1 - 1e-12)
        return ("boundary" if on else "interior",) * len(u)
    return ("interior",) * len(u)


def minimize_hamiltonian(spec: HamiltonianSpec, t, x, x_hat, lam, d=None) -> ControlDecision:
    """Pointwise argmin_{u in U} H; projection of the unconstrained minimizer in the smooth case."""
    lam = _as_vec(lam, spec.system.n, "lambda")
    dd = _excitation(spec, t, d)
    c = linear_coefficient(spec, lam, dd)[None, :]
    u, unc, unique = minimize_batch(spec, c)
    u, unc = u[0], unc[0]
    return ControlDecision(
        minimizer=u,
        unconstrained_minimizer=unc,
        saturated=_saturation_flags(spec.control_set, u),
        unique=bool(unique[0]),
        hamiltonian_value=eval_hamiltonian(spec, t, x, x_hat, u, lam, d=dd),
    )


# --- oracles ---------------------------------------------------------------------

def control_grid(control_set: AdmissibleSet, grid_points: int) -> np.ndarray:
    """Uniform tensor grid over a bounded set, shape (P, m)."""
    if grid_points < 3:
        raise ValidationError("grid_points must be >= 3")
    if isinstance(control_set, Box):
        lo, hi = control_set.lo, control_set.hi
    elif isinstance(control_set, Ball):
        lo = control_set.center - control_set.radius
        hi = control_set.center + control_set.radius
    else:
        raise ValidationError("brute-force oracle needs a bounded control set")
    axes = [np.linspace(a, b, grid_points) for a, b in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    if isinstance(control_set, Ball):
        inside = np.linalg.norm(pts - control_set.center, axis=1) <= control_set.radius
        pts = pts[inside]
    return pts


def brute_force_argmin(spec: HamiltonianSpec, t, x, x_hat, lam, grid_points: int, d=None):
    """All grid points within 1e-9 * (1 + |min|) of the grid minimum of H over U."""
    if not spec.control_set.bounded:
        raise ValidationError("brute-force oracle needs a bounded control set")
    pts = control_grid(spec.control_set, grid_points)
    vals = np.atleast_1d(eval_hamiltonian(spec, t, x, x_hat, pts, lam, d=d))
    best = float(vals.min())
    keep = vals <= best + 1e-9 * (1.0 + abs(best))
    return pts[keep], best


def coercivity_probe(spec: HamiltonianSpec, t, x, x_hat, lam, ray_directions, radii, d=None) -> bool:
    """Finite witness that H(rho * e) grows along each ray e as rho increases.

    The Hamiltonian expression is probed along the rays regardless of U.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) < 2 or np.any(np.diff(radii) <= 0):
        raise ValidationError("radii must be a strictly increasing list of >= 2 values")
    for e in ray_directions:
        e = _as_vec(e, spec.system.m, "direction")
        vals = np.atleast_1d(eval_hamiltonian(spec, t, x, x_hat, radii[:, None] * e, lam, d=d))
        slope = (vals[-1] - vals[-2]) / (radii[-1] - radii[-2])
        if not (vals[-1] > vals[0] and slope > 0):
            return False
    return True
