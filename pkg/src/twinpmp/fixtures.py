"""Ready-made problem instances: the scalar bang-bang benchmark, the |u| example and an unbounded-U case."""
from __future__ import annotations

import numpy as np

from .core_types import Interval, Scenario, Unbounded, make_uniform_grid
from .costs import PenaltySchedule, QuadraticCostSpec
from .hamiltonian import HamiltonianSpec
from .systems import ExcitationSpec, LinearAffineSystem

# scalar benchmark: unstable plant, stable mismatched model, saturating effort bound
PLANT_A, PLANT_B = 0.3, 1.3
MODEL_A, MODEL_B = -0.6, 0.7
X0 = 1.5
HORIZON = 6.0
Q, R, Q_T = 0.5, 0.2, 2.0
AMPLITUDE = 200.0
U_MAX = 0.05


def benchmark_scenario(N: int = 2400, beta: float = 1.0, u_lo: float = -U_MAX,
                        u_hi: float = U_MAX) -> Scenario:
    """Scalar plant/model pair driven by d(t) = 200 sign(sin(4 pi t / T)) on [0, 6]."""
    return Scenario(
        plant=LinearAffineSystem.scalar(PLANT_A, PLANT_B),
        model=LinearAffineSystem.scalar(MODEL_A, MODEL_B),
        cost=QuadraticCostSpec.scalar(Q, R, Q_T, linear_control_weight=True),
        penalty=PenaltySchedule.constant(beta),
        excitation=ExcitationSpec.square_wave(AMPLITUDE, 4.0 * np.pi / HORIZON),
        control_set=Interval(u_lo, u_hi),
        grid=make_uniform_grid(HORIZON, N),
        initial_state=np.array([X0]),
    )


def unbounded_quadratic_scenario(matched: bool = True, N: int = 2400, beta: float = 1.0) -> Scenario:
    """U = R with quadratic effort: stable plant (-0.5, 1), model equal to it or (-1, 0.5).

    Weights are chosen so that the plain damped sweep contracts.
    """
    plant = LinearAffineSystem.scalar(-0.5, 1.0)
    model = plant if matched else LinearAffineSystem.scalar(-1.0, 0.5)
    return Scenario(
        plant=plant,
        model=model,
        cost=QuadraticCostSpec.scalar(0.5, 5.0, 2.0),
        penalty=PenaltySchedule.constant(beta),
        excitation=ExcitationSpec.square_wave(1.0, 4.0 * np.pi / HORIZON),
        control_set=Unbounded(1),
        grid=make_uniform_grid(HORIZON, N),
        initial_state=np.array([X0]),
    )


def abs_effort_spec(a: float, kappa: float = 1.0, control_set=None,
                    beta: float | None = None) -> HamiltonianSpec:
    """H(u) = kappa |u| + a u (+ beta ||x - x_hat||^2), evaluated with lambda = 1, x = 0.

    The coefficient ``a`` enters through B so that B' lambda = a.
    """
    return HamiltonianSpec(
        system=LinearAffineSystem(np.zeros((1, 1)), np.array([[a]])),
        cost=QuadraticCostSpec.scalar(0.0, 0.0, 0.0, linear_control_weight=False),
        excitation=ExcitationSpec.zero(),
        control_set=control_set if control_set is not None else Interval(-1.0, 1.0),
        penalty=None if beta is None else PenaltySchedule.constant(beta),
        nonsmooth_abs_weight=kappa,
    )


def quadratic_unbounded_spec(B, R, A=None, beta: float | None = None) -> HamiltonianSpec:
    """Quadratic effort with U = R^m and zero state cost."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    n, m = B.shape
    return HamiltonianSpec(
        system=LinearAffineSystem(np.zeros((n, n)) if A is None else A, B),
        cost=QuadraticCostSpec(np.zeros((n, n)), np.atleast_2d(R), np.zeros((n, n)),
                               linear_control_weight=False),
        excitation=ExcitationSpec.zero(),
        control_set=Unbounded(m),
        penalty=None if beta is None else PenaltySchedule.constant(beta),
    )
