import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twinpmp import (
    Ball, Box, Interval, Scenario, Trajectory, Unbounded, ValidationError, make_uniform_grid,
    trajectory_sup_distance,
)
from twinpmp.fixtures import benchmark_scenario


def test_grid_nodes_quarter_horizon():
    g = make_uniform_grid(6.0, 4)
    assert g.nodes.tolist() == [0.0, 1.5, 3.0, 4.5, 6.0]
    assert g.step == 1.5
    assert len(g) == 5


def test_grid_two_steps():
    assert make_uniform_grid(1.0, 2).nodes.tolist() == [0.0, 0.5, 1.0]


@pytest.mark.parametrize("T,N", [(0.0, 10), (-1.0, 10), (1.0, 1), (1.0, 0)])
def test_grid_rejects_bad_arguments(T, N):
    with pytest.raises(ValidationError):
        make_uniform_grid(T, N)


@given(T=st.floats(1e-3, 1e4), N=st.integers(2, 5000))
def test_grid_endpoints_and_spacing(T, N):
    g = make_uniform_grid(T, N)
    assert g.nodes[0] == 0.0 and g.nodes[-1] == T
    assert len(g.nodes) == N + 1
    h = np.diff(g.nodes)
    assert np.all(np.abs(h - T / N) <= 4 * np.spacing(T))


def test_trajectory_shapes_and_immutability():
    g = make_uniform_grid(1.0, 4)
    tr = Trajectory(g, np.arange(5.0))
    assert tr.values.shape == (5, 1) and tr.dim == 1
    with pytest.raises(ValueError):
        tr.values[0, 0] = 3.0
    with pytest.raises(ValidationError):
        Trajectory(g, np.zeros(4))


def test_sup_distance_examples():
    g = make_uniform_grid(1.0, 2)
    a = Trajectory(g, [0.0, 1.0, 0.0])
    b = Trajectory(g, [0.0, 0.0, 2.0])
    assert trajectory_sup_distance(a, b) == 2.0
    assert trajectory_sup_distance(a, a) == 0.0
    c = Trajectory(g, a.values + 0.1)
    assert trajectory_sup_distance(a, c) == pytest.approx(0.1, abs=1e-15)


def test_sup_distance_rejects_mismatch():
    a = Trajectory(make_uniform_grid(1.0, 2), np.zeros(3))
    with pytest.raises(ValidationError):
        trajectory_sup_distance(a, Trajectory(make_uniform_grid(2.0, 2), np.zeros(3)))
    with pytest.raises(ValidationError):
        trajectory_sup_distance(a, Trajectory(a.grid, np.zeros((3, 2))))


_vals = st.lists(st.floats(-1e6, 1e6), min_size=6, max_size=6)


@given(_vals, _vals, _vals)
def test_sup_distance_is_a_metric(x, y, z):
    g = make_uniform_grid(1.0, 2)
    a, b, c = (Trajectory(g, np.reshape(v, (3, 2))) for v in (x, y, z))
    dab = trajectory_sup_distance(a, b)
    assert dab >= 0
    assert dab == trajectory_sup_distance(b, a)
    assert (dab == 0) == np.array_equal(a.values, b.values)
    assert dab <= trajectory_sup_distance(a, c) + trajectory_sup_distance(c, b) + 1e-9 * (1 + dab)


def test_sets_validate():
    with pytest.raises(ValidationError):
        Interval(1.0, -1.0)
    with pytest.raises(ValidationError):
        Ball(np.zeros(2), 0.0)
    with pytest.raises(ValidationError):
        Box([0.0], [np.inf])
    assert Interval(0.5, 0.5).degenerate
    assert not Unbounded(2).bounded


def test_set_projections():
    assert Interval(-1, 1).project(np.array([3.0])).tolist() == [1.0]
    assert Box([0, 0], [1, 2]).project(np.array([-1.0, 5.0])).tolist() == [0.0, 2.0]
    p = Ball(np.zeros(2), 2.0).project(np.array([3.0, 4.0]))
    assert np.allclose(p, [1.2, 1.6])
    assert Unbounded(1).project(np.array([1e9])).tolist() == [1e9]


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=2))
def test_projection_is_idempotent(u):
    for U in (Box([-1.0, 0.0], [1.0, 0.5]), Ball(np.array([0.5, -0.5]), 1.5), Unbounded(2)):
        p = U.project(np.array(u))
        assert U.contains(p)
        assert np.allclose(U.project(p), p, atol=1e-12, rtol=0)


def test_scenario_dimension_checks():
    sc = benchmark_scenario(N=8)
    with pytest.raises(ValidationError):
        sc.replace(initial_state=np.zeros(2))
    with pytest.raises(ValidationError):
        sc.replace(control_set=Box([0, 0], [1, 1]))
    assert sc == benchmark_scenario(N=8)
    assert sc != benchmark_scenario(N=8, beta=2.0)
    assert isinstance(sc, Scenario)
