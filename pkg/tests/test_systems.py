import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twinpmp import (
    ExcitationSpec, LinearAffineSystem, Trajectory, ValidationError, dynamics_control_jacobian,
    evaluate_dynamics, evaluate_excitation, make_uniform_grid, sample_excitation, switch_nodes,
)
from twinpmp.systems import step_endpoints

PLANT = LinearAffineSystem.scalar(0.3, 1.3)
MODEL = LinearAffineSystem.scalar(-0.6, 0.7)
SQUARE = ExcitationSpec.square_wave(200.0, 2 * np.pi / 3)


def test_dynamics_examples():
    assert evaluate_dynamics(PLANT, [1.5], [0.0]) == pytest.approx([0.45], abs=1e-15)
    assert evaluate_dynamics(MODEL, [1.5], [0.05]) == pytest.approx([-0.865], abs=1e-15)
    assert evaluate_dynamics(PLANT, [0.0], [0.0]).tolist() == [0.0]


def test_dynamics_dimension_mismatch():
    with pytest.raises(ValidationError):
        evaluate_dynamics(PLANT, [1.0, 2.0], [0.0])
    with pytest.raises(ValidationError):
        LinearAffineSystem(np.zeros((2, 2)), np.zeros((3, 1)))
    with pytest.raises(ValidationError):
        LinearAffineSystem(np.zeros((2, 3)), np.zeros((2, 1)))


def test_control_jacobian():
    assert dynamics_control_jacobian(PLANT).tolist() == [[1.3]]
    assert dynamics_control_jacobian(MODEL).tolist() == [[0.7]]
    z = LinearAffineSystem(np.eye(2), np.zeros((2, 3)))
    assert np.array_equal(dynamics_control_jacobian(z), np.zeros((2, 3)))


_f = st.floats(-100, 100)


@given(st.lists(_f, min_size=13, max_size=13))
def test_dynamics_linearity(v):
    v = np.array(v)
    sys = LinearAffineSystem(v[:4].reshape(2, 2), v[4:6].reshape(2, 1))
    x1, x2, u1, u2, alpha = v[6:8], v[8:10], v[10:11], v[11:12], v[12]
    lhs = evaluate_dynamics(sys, alpha * x1 + x2, alpha * u1 + u2)
    rhs = alpha * evaluate_dynamics(sys, x1, u1) + evaluate_dynamics(sys, x2, u2)
    scale = 1 + np.abs(lhs).max() + np.abs(alpha) * 1e4
    assert np.allclose(lhs, rhs, atol=1e-12 * scale, rtol=1e-12)


def test_square_wave_examples():
    assert evaluate_excitation(SQUARE, 0.75) == 200.0
    assert evaluate_excitation(SQUARE, 0.0) == 0.0
    assert evaluate_excitation(SQUARE, 2.25) == -200.0
    # switch instants computed in floating point still count as zeros of sin
    for t in (1.5, 3.0, 4.5, 6.0):
        assert evaluate_excitation(SQUARE, t) == 0.0


@given(st.floats(0, 100))
def test_square_wave_values(t):
    v = evaluate_excitation(SQUARE, t)
    assert v in (-200.0, 0.0, 200.0)
    if v == 0.0:
        phase = SQUARE.omega * t / np.pi
        assert abs(phase - round(phase)) <= 1e-9 * max(1.0, phase)


def test_excitation_validation():
    with pytest.raises(ValidationError):
        ExcitationSpec.square_wave(-1.0, 1.0)
    with pytest.raises(ValidationError):
        ExcitationSpec.square_wave(1.0, 0.0)
    with pytest.raises(ValidationError):
        ExcitationSpec("triangle")


def test_zero_and_tabulated_excitation():
    assert evaluate_excitation(ExcitationSpec.zero(), 3.0) == 0.0
    g = make_uniform_grid(1.0, 4)
    tab = ExcitationSpec.tabulated(Trajectory(g, [0.0, 1.0, 2.0, 3.0, 4.0]))
    assert evaluate_excitation(tab, 0.5) == 2.0
    assert evaluate_excitation(tab, 0.3) == 1.0
    with pytest.raises(ValidationError):
        evaluate_excitation(tab, 1.5)


def test_sampled_excitation_is_one_sided_at_switches():
    g = make_uniform_grid(6.0, 8)
    d = sample_excitation(SQUARE, g)
    sw = switch_nodes(SQUARE, g)
    assert sw.tolist() == [True, False, True, False, True, False, True, False, True]
    # right limits at 0, 1.5, 3, 4.5; left limit at T
    assert d.tolist() == [200, 200, -200, -200, 200, 200, -200, -200, -200]
    interior = ~sw
    assert np.array_equal(d[interior], [evaluate_excitation(SQUARE, t) for t in g.nodes[interior]])


def test_step_endpoints_hold_value_into_switch():
    vals = np.array([1.0, 2.0, 3.0, 4.0])
    mask = np.array([False, False, True, False])
    left, right = step_endpoints(vals, mask)
    assert left.tolist() == [1.0, 2.0, 3.0]
    assert right.tolist() == [2.0, 2.0, 4.0]
