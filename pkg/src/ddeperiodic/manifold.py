"""Manifolds embedded in R^k as regular level sets F^{-1}(0).

Every construction downstream (tangency, zeros, restricted Jacobians,
retraction after an integration step) is phrased through the constraint
Jacobian, so Euclidean space, spheres and tori share one representation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import RankDeficient, RetractionDiverged

ConstraintFn = Callable[[np.ndarray], np.ndarray]

_EPS = np.finfo(float).eps


def fd_step(p: np.ndarray) -> float:
    """Central-difference step used for every finite-difference Jacobian."""
    return _EPS ** (1.0 / 3.0) * (1.0 + float(np.linalg.norm(p)))


def central_jacobian(fn: Callable[[np.ndarray], np.ndarray], p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    h = fd_step(p)
    cols = []
    for i in range(p.size):
        e = np.zeros_like(p)
        e[i] = h
        cols.append((np.asarray(fn(p + e), dtype=float) - np.asarray(fn(p - e), dtype=float)) / (2 * h))
    return np.column_stack(cols) if cols else np.zeros((0, 0))


@dataclass(frozen=True, eq=False)
class EmbeddedManifold:
    """M = {p in R^k : constraint(p) = 0} with a full-rank constraint Jacobian.

    ``constraint_dim == 0`` means M = R^k.  ``euler_characteristic`` and
    ``bounding_box`` are metadata for compact manifolds and are not computed.
    """

    ambient_dim: int
    constraint_dim: int = 0
    constraint: ConstraintFn | None = None
    constraint_jacobian: ConstraintFn | None = None
    euler_characteristic: int | None = None
    bounding_box: tuple[np.ndarray, np.ndarray] | None = None
    on_tolerance: float = 1e-9
    rank_tol: float = 1e-8
    max_step: float = np.inf
    name: str = "custom"

    def __post_init__(self):
        if self.ambient_dim < 1:
            raise ValueError("ambient_dim must be >= 1")
        if not 0 <= self.constraint_dim < self.ambient_dim:
            raise ValueError("need 0 <= constraint_dim < ambient_dim")
        if self.constraint_dim > 0 and self.constraint is None:
            raise ValueError("a constraint map is required when constraint_dim > 0")

    @property
    def dim(self) -> int:
        return self.ambient_dim - self.constraint_dim

    @property
    def is_euclidean(self) -> bool:
        return self.constraint_dim == 0

    def residual(self, p) -> np.ndarray:
        if self.is_euclidean:
            return np.zeros(0)
        return np.atleast_1d(np.asarray(self.constraint(np.asarray(p, dtype=float)), dtype=float))

    def jacobian(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.is_euclidean:
            return np.zeros((0, self.ambient_dim))
        if self.constraint_jacobian is not None:
            J = self.constraint_jacobian(p)
        else:
            J = central_jacobian(self.residual, p)
        return np.asarray(J, dtype=float).reshape(self.constraint_dim, self.ambient_dim)

    def is_on(self, p, tol: float | None = None) -> bool:
        tol = self.on_tolerance if tol is None else tol
        return bool(np.all(np.abs(self.residual(p)) <= tol))

    def _frame(self, p) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal (normal, tangent) bases at p from the SVD of the constraint Jacobian."""
        J = self.jacobian(p)
        _, s, vt = np.linalg.svd(J)
        if s.size == 0 or s[0] == 0.0 or s[-1] < self.rank_tol * s[0]:
            raise RankDeficient(f"constraint Jacobian is rank-deficient at {np.asarray(p)!r}")
        c = self.constraint_dim
        return vt[:c].T, vt[c:].T

    def tangent_basis(self, p) -> np.ndarray:
        """k x m matrix whose columns are an orthonormal basis of T_pM."""
        if self.is_euclidean:
            return np.eye(self.ambient_dim)
        return self._frame(p)[1]

    def normal_basis(self, p) -> np.ndarray:
        if self.is_euclidean:
            return np.zeros((self.ambient_dim, 0))
        return self._frame(p)[0]

    def project_tangent(self, p, v) -> np.ndarray:
        """Orthogonal projection of v onto the null space of the constraint Jacobian at p."""
        v = np.asarray(v, dtype=float)
        if self.is_euclidean:
            return v.copy()
        N = self.normal_basis(p)
        return v - N @ (N.T @ v)

    def tangent_projector(self, p) -> np.ndarray:
        """k x k orthogonal projector onto T_pM."""
        N = self.normal_basis(p)
        return np.eye(self.ambient_dim) - N @ N.T

    def projection_derivative(self, p, v) -> np.ndarray:
        """k x k matrix of q -> Pi_q v differentiated at q = p (v held fixed)."""
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.is_euclidean:
            return np.zeros((p.size, p.size))
        h = fd_step(p)
        out = np.empty((p.size, p.size))
        for i in range(p.size):
            e = np.zeros_like(p)
            e[i] = h
            out[:, i] = (self.project_tangent(p + e, v) - self.project_tangent(p - e, v)) / (2 * h)
        return out

    def retract(self, p, v) -> np.ndarray:
        """Map p + v back onto M by Gauss-Newton on the constraint along normals."""
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        if np.linalg.norm(v) > self.max_step:
            raise ValueError(f"retraction step {np.linalg.norm(v):.3e} exceeds the cap {self.max_step}")
        return self.project(p + v)

    def project(self, y) -> np.ndarray:
        """Newton projection of a nearby ambient point onto M."""
        q = np.array(y, dtype=float)
        if self.is_euclidean:
            return q
        target = 1e-3 * self.on_tolerance
        for _ in range(50):
            F = self.residual(q)
            if np.max(np.abs(F)) <= target:
                return q
            J = self.jacobian(q)
            try:
                dq = J.T @ np.linalg.solve(J @ J.T, F)
            except np.linalg.LinAlgError as exc:
                raise RetractionDiverged(f"singular normal system at {q!r}") from exc
            q = q - dq
            if not np.all(np.isfinite(q)):
                break
            if np.linalg.norm(dq) <= 1e-15 * (1.0 + np.linalg.norm(q)):
                break
        if np.all(np.isfinite(q)) and np.max(np.abs(self.residual(q))) <= self.on_tolerance:
            return q
        raise RetractionDiverged(f"projection onto {self.name} did not converge from {np.asarray(y)!r}")

    def in_tangent_coords(self, p, v) -> np.ndarray:
        return self.tangent_basis(p).T @ np.asarray(v, dtype=float)


class Euclidean(EmbeddedManifold):
    def __init__(self, k: int, **kwargs):
        super().__init__(ambient_dim=k, constraint_dim=0, name=f"R^{k}", **kwargs)

    def project(self, y):
        return np.array(y, dtype=float)

    def retract(self, p, v):
        return np.asarray(p, dtype=float) + np.asarray(v, dtype=float)


class Sphere(EmbeddedManifold):
    """Unit sphere S^{k-1} in R^k."""

    def __init__(self, k: int = 3, **kwargs):
        kwargs.setdefault("euler_characteristic", 1 + (-1) ** (k - 1))
        kwargs.setdefault("bounding_box", (-np.ones(k), np.ones(k)))
        super().__init__(
            ambient_dim=k,
            constraint_dim=1,
            constraint=lambda p: np.array([p @ p - 1.0]),
            constraint_jacobian=lambda p: 2.0 * p[None, :],
            name=f"S^{k - 1}",
            **kwargs,
        )

    # closed forms of the generic algorithms (same results, less overhead)
    def project_tangent(self, p, v):
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        nn = p @ p
        if nn == 0.0:
            raise RankDeficient("sphere constraint is singular at the origin")
        return v - (p @ v / nn) * p

    def tangent_projector(self, p):
        p = np.asarray(p, dtype=float)
        return np.eye(p.size) - np.outer(p, p) / (p @ p)

    def projection_derivative(self, p, v):
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        nn = p @ p
        pv = p @ v
        return -(pv * np.eye(p.size) + np.outer(p, v)) / nn + 2 * pv * np.outer(p, p) / nn**2

    def project(self, y):
        y = np.asarray(y, dtype=float)
        n = np.linalg.norm(y)
        if n == 0.0 or not np.isfinite(n):
            raise RetractionDiverged("cannot project the origin onto the sphere")
        return y / n


class Torus2(EmbeddedManifold):
    """Torus of revolution around the z-axis, major radius R > minor radius rho > 0."""

    def __init__(self, R: float = 2.0, rho: float = 0.5, **kwargs):
        if not R > rho > 0:
            raise ValueError("need R > rho > 0")

        def F(p):
            s = np.hypot(p[0], p[1])
            return np.array([(s - R) ** 2 + p[2] ** 2 - rho**2])

        def dF(p):
            s = np.hypot(p[0], p[1])
            if s == 0.0:
                return np.array([[0.0, 0.0, 2 * p[2]]])
            c = 2 * (s - R) / s
            return np.array([[c * p[0], c * p[1], 2 * p[2]]])

        kwargs.setdefault("euler_characteristic", 0)
        box = np.array([R + rho, R + rho, rho])
        kwargs.setdefault("bounding_box", (-box, box))
        super().__init__(
            ambient_dim=3,
            constraint_dim=1,
            constraint=F,
            constraint_jacobian=dF,
            name=f"T2(R={R},rho={rho})",
            **kwargs,
        )
        object.__setattr__(self, "R", float(R))
        object.__setattr__(self, "rho", float(rho))

    def _normal(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        s = np.hypot(p[0], p[1])
        if s == 0.0:
            raise RankDeficient("torus constraint is singular on the symmetry axis")
        d = np.array([p[0] * (1 - self.R / s), p[1] * (1 - self.R / s), p[2]])
        n = np.linalg.norm(d)
        if n < self.rank_tol * self.rho:
            raise RankDeficient("torus constraint is singular on the core circle")
        return d / n

    def tangent_projector(self, p):
        n = self._normal(p)
        return np.eye(3) - np.outer(n, n)

    def project_tangent(self, p, v):
        n = self._normal(p)
        v = np.asarray(v, dtype=float)
        return v - (n @ v) * n

    def project(self, y):
        # nearest point: the tube-center circle point, then out by rho along y - c
        y = np.asarray(y, dtype=float)
        if not np.all(np.isfinite(y)):
            raise RetractionDiverged("cannot project a non-finite point onto the torus")
        s = np.hypot(y[0], y[1])
        if s == 0.0:
            raise RetractionDiverged("cannot project a point on the symmetry axis onto the torus")
        c = np.array([self.R * y[0] / s, self.R * y[1] / s, 0.0])
        d = y - c
        n = np.linalg.norm(d)
        if n == 0.0:
            raise RetractionDiverged("cannot project a point on the core circle onto the torus")
        return c + self.rho * d / n
