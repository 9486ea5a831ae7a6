import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddeperiodic.errors import NonHyperbolic
from ddeperiodic.fields import TangentField
from ddeperiodic.index import (
    default_p_seeds,
    find_fixed_points,
    index_P_at,
    index_P_region,
    index_Q_at,
    index_Q_region,
    verify_fix_correspondence,
)
from ddeperiodic.integrate import History
from ddeperiodic.manifold import Euclidean
from ddeperiodic.poincare import map_h
from ddeperiodic.regions import BoxRegion, HistoryBall
from ddeperiodic.systems import get_system

R1 = Euclidean(1)


def linear(a):
    return TangentField(lambda x: a * x, lambda x: np.array([[a]]))


@given(st.floats(0.05, 3.0), st.booleans())
@settings(max_examples=10, deadline=None)
def test_linear_index_is_sign_of_minus_a(a, flip):
    a = -a if flip else a
    assert index_P_at(R1, linear(a), [0.0], 1.0) == (-1 if a > 0 else 1)


def test_zero_field_is_nonhyperbolic():
    with pytest.raises(NonHyperbolic):
        index_P_at(R1, linear(0.0), [0.3], 1.0)


def test_not_a_fixed_point():
    with pytest.raises(ValueError):
        index_P_at(R1, linear(1.0), [0.3], 1.0)


def test_cubic_fixed_points_and_indices():
    g = get_system("cubic1d").g
    pts = find_fixed_points(R1, g, 1.0, (np.array([-2.0]), np.array([2.0])))
    assert sorted(round(float(p[0]), 7) for p in pts) == [-1.0, 0.0, 1.0]
    assert [index_P_at(R1, g, [q], 1.0) for q in (-1.0, 0.0, 1.0)] == [1, -1, 1]
    assert index_P_region(R1, g, BoxRegion([-0.5], [0.5]), 1.0) == -1


def test_q_index_at_matches_p_index():
    g = get_system("cubic1d").g
    for q in (-1.0, 0.0, 1.0):
        phi = map_h(R1, g, [q], 1.0, 0.3)
        assert index_Q_at(R1, g, phi, 1.0) == index_P_at(R1, g, [q], 1.0)


def test_reduction_on_cubic_window():
    s = get_system("cubic1d")
    report = index_Q_region(s.M, s.g, s.windows[0], s.period)
    assert report.passed and report.index_Q == -1


def test_limit_cycle_is_nonhyperbolic():
    s = get_system("limit_cycle")
    with pytest.raises(NonHyperbolic):
        index_P_region(s.M, s.g, s.region, s.period)


def test_rotation_correspondence_leaves_check_set():
    s = get_system("planar_rotation")
    report = verify_fix_correspondence(s.M, s.g, s.windows[0], s.period, s.delay, steps=s.steps)
    assert report.all_fixed and report.outside_check_set
    assert "NOT in W_check" in str(report)


def test_check_set_of_constant_ball():
    phi = History.constant(R1, [1.0], 0.3)
    check = HistoryBall(phi, 0.5).check_set(R1)
    assert check.contains(np.array([1.2])) and not check.contains(np.array([1.7]))


def test_default_seed_budget():
    assert default_p_seeds(1) == 64 and default_p_seeds(2) == 8 and default_p_seeds(3) == 4
