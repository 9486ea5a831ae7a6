import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddeperiodic.errors import RankDeficient, RetractionDiverged
from ddeperiodic.manifold import EmbeddedManifold, Euclidean, Sphere, Torus2

coords = st.floats(-3.0, 3.0, allow_nan=False)
vec3 = st.tuples(coords, coords, coords).map(np.array).filter(lambda v: np.linalg.norm(v) > 0.1)


def generic_sphere():
    return EmbeddedManifold(3, 1, lambda p: np.array([p @ p - 1.0]), lambda p: 2 * p[None, :], name="generic")


@given(vec3)
def test_sphere_project_is_normalization(y):
    S = Sphere(3)
    p = S.project(y)
    assert np.allclose(p, y / np.linalg.norm(y), atol=1e-12)
    assert S.is_on(p)


@given(vec3, vec3)
@settings(max_examples=50)
def test_tangent_projection_is_orthogonal_idempotent(y, v):
    for M in (Sphere(3), Torus2(2.0, 0.5)):
        p = M.project(y + np.array([2.0, 0.0, 0.0]) if M.name != "sphere" else y)
        P = M.tangent_projector(p)
        assert np.allclose(P @ P, P, atol=1e-10)
        assert np.allclose(P, P.T, atol=1e-10)
        w = M.project_tangent(p, v)
        assert np.allclose(M.jacobian(p) @ w, 0.0, atol=1e-8)


@given(vec3)
@settings(max_examples=30)
def test_closed_form_matches_generic_retraction(y):
    p = Sphere(3).project(y)
    q = generic_sphere().project(y)
    assert np.allclose(p, q, atol=1e-9)


def test_tangent_basis_orthonormal_and_tangent():
    T = Torus2(2.0, 0.5)
    p = T.project(np.array([1.0, 2.0, 0.3]))
    B = T.tangent_basis(p)
    assert B.shape == (3, 2)
    assert np.allclose(B.T @ B, np.eye(2))
    assert np.allclose(T.jacobian(p) @ B, 0.0, atol=1e-10)


def test_retract_first_order():
    S = Sphere(3)
    p = np.array([0.0, 0.0, 1.0])
    v = np.array([1e-4, -2e-4, 0.0])
    assert np.linalg.norm(S.retract(p, v) - (p + v)) < 1e-7


def test_projection_derivative_matches_fd():
    for M in (Sphere(3), Torus2(2.0, 0.5)):
        p = M.project(np.array([1.5, 0.7, 0.4]))
        v = np.array([0.3, -0.2, 0.5])
        h = 1e-6
        u = np.array([0.1, 0.4, -0.2])
        fd = (M.project_tangent(p + h * u, v) - M.project_tangent(p - h * u, v)) / (2 * h)
        assert np.allclose(M.projection_derivative(p, v) @ u, fd, atol=1e-6)


def test_euclidean_is_identity():
    E = Euclidean(2)
    assert E.is_euclidean and E.dim == 2
    assert np.allclose(E.project([3.0, -1.0]), [3.0, -1.0])


def test_invalid_construction():
    with pytest.raises(ValueError):
        EmbeddedManifold(2, 2, lambda p: p)


def test_rank_deficient_point():
    with pytest.raises((RankDeficient, RetractionDiverged)):
        generic_sphere().tangent_basis(np.zeros(3))
