import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddeperiodic.degree import (
    box_boundary,
    check_poincare_hopf,
    circle_boundary,
    degree,
    find_zeros,
    kantorovich_ratio,
    winding_degree_planar,
)
from ddeperiodic.errors import DegenerateZero, NotAdmissible, VanishingOnBoundary
from ddeperiodic.fields import TangentField
from ddeperiodic.manifold import Euclidean
from ddeperiodic.regions import BallRegion, BoxRegion
from ddeperiodic.systems import get_system
from ddeperiodic.verify import planar_field, random_roots

R1, R2 = Euclidean(1), Euclidean(2)
cubic = get_system("cubic1d").g
big = BoxRegion([-2.0, -2.0], [2.0, 2.0])


def test_cubic_zero_table():
    zeros = find_zeros(R1, cubic, BoxRegion([-2.0], [2.0]))
    assert [round(float(z.point[0]), 8) for z in zeros] == [-1.0, 0.0, 1.0]
    assert [z.local_sign for z in zeros] == [-1, 1, -1]
    assert all(z.residual <= 1e-8 for z in zeros)


def test_cubic_degrees():
    assert degree(R1, cubic, BoxRegion([-2.0], [2.0])) == -1
    assert degree(R1, -cubic, BoxRegion([-2.0], [2.0])) == 1
    assert degree(R1, cubic, BoxRegion([-0.5], [0.5])) == 1


def test_zero_free_region_has_degree_zero():
    assert degree(R1, TangentField(lambda x: -x), BoxRegion([1.0], [2.0])) == 0


def test_boundary_zero_is_not_admissible():
    with pytest.raises(NotAdmissible):
        degree(R1, cubic, BoxRegion([-0.5], [1.0]))


def test_degenerate_zero():
    with pytest.raises(DegenerateZero):
        degree(R1, TangentField(lambda x: x**2, lambda x: np.array([[2 * x[0]]])), BoxRegion([-2.0], [2.0]))


def test_kantorovich_ratio_small_at_simple_zero():
    assert kantorovich_ratio(R1, cubic, np.array([1.0])) < 0.25


def test_rotation_and_negation_in_plane():
    rot = TangentField(lambda p: np.array([p[1], -p[0]]))
    box = BoxRegion([-1.0, -1.0], [1.0, 1.0])
    # deg(-g) = (-1)^m deg(g) with m = 2
    assert degree(R2, rot, box) == degree(R2, -rot, box) == 1


@st.composite
def planar_configs(draw):
    seed = draw(st.integers(0, 10_000))
    n_hol = draw(st.integers(0, 2))
    n_anti = draw(st.integers(0, 2 - n_hol if n_hol < 2 else 1))
    if n_hol + n_anti == 0:
        n_hol = 1
    rng = np.random.default_rng(seed)
    roots = random_roots(rng, n_hol + n_anti)
    rot = np.exp(1j * rng.uniform(0, 2 * np.pi))
    return planar_field(rot, roots[:n_hol], roots[n_hol:]), n_hol - n_anti, roots


@settings(max_examples=8, deadline=None)
@given(planar_configs())
def test_degree_counts_orientation(cfg):
    w, expected, _ = cfg
    assert degree(R2, w, big) == expected


@settings(max_examples=15, deadline=None)
@given(planar_configs())
def test_winding_oracle_agrees(cfg):
    w, expected, _ = cfg
    assert winding_degree_planar(w, box_boundary([-2.0, -2.0], [2.0, 2.0])) == expected
    assert winding_degree_planar(w, circle_boundary(radius=1.7)) == expected


@settings(max_examples=6, deadline=None)
@given(planar_configs(), st.floats(0.0, 1.0))
def test_additivity_vertical_cut(cfg, u):
    w, expected, roots = cfg
    xs = sorted(z.real for z in roots)
    cut = -1.9 + 3.8 * u
    if min(abs(cut - x) for x in xs) < 0.05:
        cut = xs[0] - 0.1
    left = BoxRegion([-2.0, -2.0], [cut, 2.0])
    right = BoxRegion([cut, -2.0], [2.0, 2.0])
    assert degree(R2, w, left) + degree(R2, w, right) == expected


def test_winding_simple_examples():
    assert winding_degree_planar(lambda p: p, circle_boundary()) == 1
    assert winding_degree_planar(lambda p: np.array([p[0] ** 2 - p[1] ** 2, 2 * p[0] * p[1]]), circle_boundary()) == 2
    assert winding_degree_planar(lambda p: np.array([p[0], -p[1]]), circle_boundary()) == -1


def test_winding_vanishing_on_boundary():
    with pytest.raises(VanishingOnBoundary):
        winding_degree_planar(lambda p: p - np.array([1.0, 0.0]), circle_boundary())


def test_ball_region_on_sphere():
    s = get_system("sphere_height")
    assert degree(s.M, s.g, BallRegion([0, 0, 1], 0.5)) == 1


def test_poincare_hopf_sphere():
    s = get_system("sphere_height")
    report = check_poincare_hopf(s.M, s.g)
    assert report.passed and report.degree == 2 == report.euler_characteristic
