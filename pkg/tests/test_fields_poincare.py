import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddeperiodic.errors import NearSingular
from ddeperiodic.fields import (
    PerturbationField,
    TangentField,
    homotopy,
    periodicity_defect,
    tangency_defect,
    tangent_jacobian,
    tangentize,
    tangentize_perturbation,
)
from ddeperiodic.integrate import History
from ddeperiodic.manifold import Euclidean, Sphere, Torus2
from ddeperiodic.poincare import map_h, map_k, poincare_P, translation_Q, translation_Q_lambda

coords = st.floats(-2.0, 2.0, allow_nan=False)
vec3 = st.tuples(coords, coords, coords).map(np.array).filter(lambda v: np.linalg.norm(v) > 0.2)


def ambient(p):
    return np.array([p[1] ** 2, np.sin(p[0]), p[0] * p[2] + 1.0])


def ambient_jac(p):
    return np.array([[0.0, 2 * p[1], 0.0], [np.cos(p[0]), 0.0, 0.0], [p[2], 0.0, p[0]]])


@given(vec3)
@settings(max_examples=40)
def test_tangentized_field_is_tangent(y):
    for M in (Sphere(3), Torus2(2.0, 0.5)):
        p = M.project(y + (np.array([1.5, 0, 0]) if isinstance(M, Torus2) else 0))
        g = tangentize(M, ambient, ambient_jac)
        assert tangency_defect(M, g, p) < 1e-12


@given(vec3)
@settings(max_examples=20)
def test_tangentized_jacobian_matches_fd(y):
    S = Sphere(3)
    p = S.project(y)
    g = tangentize(S, ambient, ambient_jac)
    assert np.allclose(g.jacobian(p), g.fd_jacobian(p), atol=1e-6)


def test_field_algebra():
    g = TangentField(lambda p: p**2, lambda p: np.diag(2 * p))
    h = TangentField(lambda p: -p, lambda p: -np.eye(p.size))
    p = np.array([0.5, -1.0])
    assert np.allclose((-g)(p), -(p**2))
    assert np.allclose((g + h).jacobian(p), np.diag(2 * p) - np.eye(2))
    assert np.allclose(homotopy(g, h, 0.25)(p), 0.75 * p**2 - 0.25 * p)


def test_tangent_jacobian_sign_and_singular():
    R2 = Euclidean(2)
    rot = TangentField(lambda p: np.array([p[1], -p[0]]))
    assert tangent_jacobian(R2, rot, np.zeros(2))[1] == 1
    saddle = TangentField(lambda p: np.array([p[0], -p[1]]))
    assert tangent_jacobian(R2, saddle, np.zeros(2))[1] == -1
    with pytest.raises(NearSingular):
        tangent_jacobian(R2, TangentField(lambda p: np.array([p[0], 0.0])), np.zeros(2))


def test_perturbation_validation_and_periodicity():
    with pytest.raises(ValueError):
        PerturbationField(lambda t, p, q: p, 0.0)
    with pytest.raises(ValueError):
        PerturbationField(lambda t, p, q: p, 1.0, -0.1)
    f = PerturbationField(lambda t, p, q: np.sin(2 * np.pi * t) + q, 1.0, 0.2)
    samples = [(t, np.array([0.1]), np.array([0.3])) for t in np.linspace(0, 1, 7)]
    assert periodicity_defect(f, samples) < 1e-12


def test_tangentized_perturbation_is_tangent():
    S = Sphere(3)
    f = tangentize_perturbation(S, lambda t, p, q: q + np.array([0.0, 0.0, t]), 1.0, 0.3)
    p = S.project(np.array([0.2, 0.3, 0.9]))
    assert abs(p @ f(0.4, p, np.array([1.0, 2.0, 3.0]))) < 1e-12


def test_factorization_h_k():
    M = Euclidean(2)
    g = TangentField(lambda p: np.array([p[1], -p[0] - 0.3 * p[1]]))
    p = np.array([0.7, -0.2])
    T, r = 1.3, 0.5
    hp = map_h(M, g, p, T, r)
    assert np.allclose(map_k(hp), poincare_P(M, g, p, T), atol=1e-12)
    Qh = translation_Q(M, g, hp, T).output
    assert np.allclose(Qh.values, map_h(M, g, map_k(hp), T, r).values, atol=1e-12)


def test_q_lambda_zero_equals_q():
    M = Euclidean(1)
    g = TangentField(lambda x: x * (1 - x**2))
    f = PerturbationField(lambda t, p, q: np.cos(2 * np.pi * t) - 0.5 * q, 1.0, 0.3)
    phi = History.from_function(M, lambda th: np.array([0.4 + th]), 0.3)
    a = translation_Q(M, g, phi, 1.0).output.values
    b = translation_Q_lambda(M, g, f, 0.0, phi).output.values
    assert np.allclose(a, b, atol=1e-9)


def test_translation_requires_T_at_least_r():
    M = Euclidean(1)
    g = TangentField(lambda x: -x)
    with pytest.raises(ValueError):
        map_h(M, g, [1.0], 1.0, 2.0)


def test_rotation_poincare_is_identity():
    M = Euclidean(2)
    g = TangentField(lambda p: np.array([p[1], -p[0]]))
    p = np.array([0.3, 0.8])
    assert np.allclose(poincare_P(M, g, p, 2 * np.pi, steps=400), p, atol=1e-8)
