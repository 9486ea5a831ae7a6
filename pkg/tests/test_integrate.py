import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddeperiodic.errors import BlowUp
from ddeperiodic.fields import PerturbationField, TangentField, tangentize
from ddeperiodic.integrate import (
    ZERO_DELAY,
    History,
    fd4_slopes,
    flow_dde,
    flow_ode,
    normalize_delay,
    time_grid,
    variational_flow,
)
from ddeperiodic.manifold import Euclidean, Sphere, Torus2

R1 = Euclidean(1)
decay = TangentField(lambda x: -x, lambda x: -np.eye(1))


def test_rk4_exponential():
    traj = flow_ode(R1, decay, [1.0], 0.0, 1.0, steps=100)
    assert abs(traj.endpoint[0] - np.exp(-1.0)) < 1e-9


def test_rk4_fourth_order():
    errs = [abs(flow_ode(R1, decay, [1.0], 0.0, 2.0, steps=n).endpoint[0] - np.exp(-2.0)) for n in (10, 20, 40)]
    assert errs[0] / errs[1] >= 15 and errs[1] / errs[2] >= 15


def test_adaptive_meets_tolerance():
    traj = flow_ode(R1, decay, [1.0], 0.0, 3.0, tol=1e-10)
    assert abs(traj.endpoint[0] - np.exp(-3.0)) < 1e-8


def test_blowup_detected():
    g = TangentField(lambda x: x**2)
    with pytest.raises(BlowUp):
        flow_ode(R1, g, [1.0], 0.0, 2.0, steps=400)


@given(st.floats(0.1, 5.0), st.floats(0.1, 3.0))
def test_normalize_delay_range(r, T):
    out = float(normalize_delay(r, T))
    assert 0 < out <= T + 1e-12
    n = (r - out) / T
    assert abs(n - round(n)) < 1e-9


def test_zero_delay_singleton():
    assert normalize_delay(0.0, 1.0) is ZERO_DELAY
    assert History.constant(R1, [2.0], ZERO_DELAY).n_nodes == 1


def test_time_grid_contains_delay_multiples():
    grid = time_grid(0.0, 1.0, 7, delay=0.3)
    for m in (0.3, 0.6, 0.9):
        assert np.min(np.abs(grid - m)) < 1e-14


@given(st.integers(0, 4))
def test_fd4_slopes_exact_for_quartics(deg):
    x = np.linspace(-1.0, 0.0, 17)
    vals = (x**deg)[:, None]
    slopes = fd4_slopes(vals, x[1] - x[0])
    exact = deg * x ** max(deg - 1, 0) if deg else np.zeros_like(x)
    assert np.allclose(slopes[:, 0], exact, atol=1e-10)


def test_history_interpolation_accuracy():
    phi = History.from_function(R1, lambda th: np.array([np.sin(th)]), 1.0, 32)
    ts = np.linspace(-1.0, 0.0, 101)
    err = max(abs(phi(t)[0] - np.sin(t)) for t in ts)
    assert err < 1e-7


def test_history_on_sphere_stays_on():
    S = Sphere(3)
    phi = History.from_function(S, lambda th: np.array([np.cos(th), np.sin(th), 0.3]), 1.0, 16)
    assert phi.max_violation() < 1e-12
    assert S.is_on(phi(-0.37))


def test_dde_method_of_steps_closed_form():
    # x' = -x(t - 1), x = 1 on [-1, 0]: x(1) = 0, x(2) = -1/2
    f = PerturbationField(lambda t, p, q: -q, 1.0, 1.0)
    zero = TangentField(lambda x: 0 * x, lambda x: np.zeros((1, 1)))
    traj = flow_dde(R1, zero, f, 1.0, History.constant(R1, [1.0], 1.0), 2.0, steps=40)
    assert abs(traj(1.0)[0]) < 1e-10
    assert abs(traj(2.0)[0] + 0.5) < 1e-10


def test_dde_lambda_zero_matches_ode():
    f = PerturbationField(lambda t, p, q: np.sin(t) - q, 2 * np.pi, np.pi / 2)
    phi = History.constant(R1, [0.7], np.pi / 2)
    a = flow_dde(R1, decay, f, 0.0, phi, 2.0, steps=100).endpoint
    b = flow_ode(R1, decay, [0.7], 0.0, 2.0, steps=200).endpoint
    assert abs(a[0] - b[0]) < 1e-9


def test_dde_rejects_negative_lambda():
    f = PerturbationField(lambda t, p, q: -q, 1.0, 0.5)
    with pytest.raises(ValueError):
        flow_dde(R1, decay, f, -1.0, History.constant(R1, [1.0], 0.5), 1.0)


def test_dde_on_torus_stays_on():
    T = Torus2(2.0, 0.5)
    g = tangentize(T, lambda p: np.array([-p[1], p[0], 0.3]))
    f = PerturbationField(lambda t, p, q: T.project_tangent(p, q - p), 1.0, 0.4)
    phi = History.constant(T, T.project(np.array([2.5, 0.0, 0.0])), 0.4)
    traj = flow_dde(T, g, f, 1.0, phi, 3.0)
    assert traj.max_violation() <= 10 * T.on_tolerance


@settings(max_examples=10, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(0.2, 1.0))
def test_variational_matches_fd_sphere(a, b, c):
    S = Sphere(3)
    g = tangentize(S, lambda p: np.array([p[1] * p[2], -p[0], 0.5]))
    p = S.project(np.array([a, b, c]))
    D = variational_flow(S, g, p, 1.0, steps=100)
    B0 = S.tangent_basis(p)
    end = flow_ode(S, g, p, 0.0, 1.0, steps=100).endpoint
    B1 = S.tangent_basis(end)
    h = 1e-5
    fd = np.column_stack([
        B1.T @ (flow_ode(S, g, S.retract(p, h * B0[:, j]), 0.0, 1.0, steps=100).endpoint
                - flow_ode(S, g, S.retract(p, -h * B0[:, j]), 0.0, 1.0, steps=100).endpoint) / (2 * h)
        for j in range(2)])
    assert np.linalg.norm(D - fd) <= 1e-4 * np.linalg.norm(D)
