"""Tangent vector fields g on M and T-periodic perturbations f(t, p, q)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NearSingular
from .manifold import EmbeddedManifold, central_jacobian, fd_step

VectorFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class TangentField:
    """Autonomous field p -> g(p) with an optional analytic ambient Jacobian."""

    func: VectorFn
    jac: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = ""

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.func(np.asarray(p, dtype=float)), dtype=float)

    def jacobian(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.jac is not None:
            return np.asarray(self.jac(p), dtype=float).reshape(p.size, p.size)
        return central_jacobian(self, p)

    def fd_jacobian(self, p) -> np.ndarray:
        return central_jacobian(self, np.asarray(p, dtype=float))

    def __neg__(self) -> "TangentField":
        jac = None if self.jac is None else (lambda p, J=self.jac: -np.asarray(J(p)))
        return TangentField(lambda p, F=self.func: -np.asarray(F(p)), jac, name=f"-({self.name})")

    def __add__(self, other: "TangentField") -> "TangentField":
        jac = None
        if self.jac is not None and other.jac is not None:
            jac = lambda p: np.asarray(self.jac(p)) + np.asarray(other.jac(p))  # noqa: E731
        return TangentField(lambda p: self(p) + other(p), jac, name=f"{self.name}+{other.name}")

    def scaled(self, c: float) -> "TangentField":
        jac = None if self.jac is None else (lambda p: c * np.asarray(self.jac(p)))
        return TangentField(lambda p: c * self(p), jac, name=f"{c}*({self.name})")


def homotopy(g0: TangentField, g1: TangentField, s: float) -> TangentField:
    """Convex combination (1 - s) g0 + s g1."""
    return g0.scaled(1.0 - s) + g1.scaled(s)


@dataclass(frozen=True, eq=False)
class PerturbationField:
    """f(t, p, q): T-periodic in t, tangent to M in p; q is the delayed state."""

    func: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    period: float
    delay: float = 0.0
    name: str = ""

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")
        if self.delay < 0:
            raise ValueError("delay must be non-negative")

    def __call__(self, t, p, q) -> np.ndarray:
        return np.asarray(self.func(float(t), np.asarray(p, dtype=float), np.asarray(q, dtype=float)), dtype=float)


def zero_perturbation(k: int, period: float, delay: float = 0.0) -> PerturbationField:
    z = np.zeros(k)
    return PerturbationField(lambda t, p, q: z, period, delay, name="0")


def tangentize(M: EmbeddedManifold, func: VectorFn | TangentField, jac=None, name: str = "") -> TangentField:
    """Wrap an ambient map so that it evaluates to its tangential projection.

    On R^k the field is returned unchanged.  Otherwise the Jacobian is
    d(Pi f) = Pi Df + (dPi) f, or a plain central difference of Pi f when
    Df is unknown.
    """
    if isinstance(func, TangentField):
        jac = func.jac if jac is None else jac
        name = name or func.name
        func = func.func
    if M.is_euclidean:
        return TangentField(func, jac, name=name)

    def projected(p):
        return M.project_tangent(p, func(p))

    if jac is None:
        return TangentField(projected, None, name=name)

    def projected_jac(p):
        p = np.asarray(p, dtype=float)
        v = np.asarray(func(p), dtype=float)
        J = np.asarray(jac(p), dtype=float)
        return M.tangent_projector(p) @ J + M.projection_derivative(p, v)

    return TangentField(projected, projected_jac, name=name)


def tangentize_perturbation(M: EmbeddedManifold, func, period: float | None = None, delay: float = 0.0,
                            name: str = "") -> PerturbationField:
    if isinstance(func, PerturbationField):
        period, delay, name, func = func.period, func.delay, name or func.name, func.func
    if period is None:
        raise ValueError("period is required for a plain function")
    if M.is_euclidean:
        return PerturbationField(func, period, delay, name=name)
    return PerturbationField(lambda t, p, q: M.project_tangent(p, func(t, p, q)), period, delay, name=name)


def tangency_defect(M: EmbeddedManifold, g: TangentField, p) -> float:
    """|g(p) - Pi_p g(p)| / (1 + |g(p)|)."""
    v = g(p)
    return float(np.linalg.norm(v - M.project_tangent(p, v)) / (1.0 + np.linalg.norm(v)))


def periodicity_defect(f: PerturbationField, samples) -> float:
    """max |f(t + T, p, q) - f(t, p, q)| over (t, p, q) samples."""
    return max(float(np.linalg.norm(f(t + f.period, p, q) - f(t, p, q))) for t, p, q in samples)


def restricted_jacobian(M: EmbeddedManifold, g: TangentField, q, basis=None) -> np.ndarray:
    """B^T Dg(q) B, the m x m matrix of g'(q) restricted to T_qM."""
    B = M.tangent_basis(q) if basis is None else basis
    return B.T @ g.jacobian(q) @ B


def tangent_jacobian(M: EmbeddedManifold, g: TangentField, q, singular_tol: float = 1e-8) -> tuple[np.ndarray, int]:
    """Restricted Jacobian at a zero of g and the sign of its determinant.

    Raises NearSingular when |det A| < singular_tol * ||A||^m.
    """
    A = restricted_jacobian(M, g, q)
    m = A.shape[0]
    if m == 0:
        return A, 1
    det = float(np.linalg.det(A))
    scale = float(np.linalg.norm(A, 2)) ** m
    if scale == 0.0 or abs(det) < singular_tol * scale:
        raise NearSingular(f"restricted Jacobian is (nearly) singular at {np.asarray(q)!r}: det={det:.3e}")
    return A, 1 if det > 0 else -1
