"""Degree of a tangent vector field through its nondegenerate zeros.

deg(g, U) is the sum of sign det g'(q) over the zeros q of g in U, with
g'(q) restricted to T_qM.  A winding-number computation on planar
boundaries gives an independent route for M = R^2.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AngleResidueTooLarge,
    BoundaryZero,
    ComputationError,
    DegenerateZero,
    NearSingular,
    NotAdmissible,
    RankDeficient,
    RetractionDiverged,
    VanishingOnBoundary,
)
from .fields import TangentField, tangent_jacobian
from .manifold import EmbeddedManifold
from .regions import Everywhere, RegionPredicate

ZERO_TOL = 1e-8
SINGULAR_TOL = 1e-8
SEEDS_PER_AXIS = 16
# Newton-Kantorovich ratio above which a converged zero is treated as degenerate
KANTOROVICH_LIMIT = 0.25


@dataclass(frozen=True, eq=False)
class ZeroRecord:
    point: np.ndarray
    local_sign: int
    residual: float

    def __repr__(self):
        return f"ZeroRecord(point={np.round(self.point, 12).tolist()}, sign={self.local_sign:+d}, residual={self.residual:.2e})"


def seed_points(M: EmbeddedManifold, region: RegionPredicate, seeds_per_axis: int = SEEDS_PER_AXIS) -> list[np.ndarray]:
    """Cell centers of a uniform grid over the region's bounding box, projected onto M."""
    lo, hi = region.bbox
    n = max(int(seeds_per_axis), 1)
    axes = [lo[i] + (np.arange(n) + 0.5) * (hi[i] - lo[i]) / n for i in range(lo.size)]
    raw = [np.array(c) for c in itertools.product(*axes)] + list(region.hints)
    seeds = []
    for s in raw:
        if M.is_euclidean:
            seeds.append(s)
            continue
        try:
            seeds.append(M.project(s))
        except (RankDeficient, RetractionDiverged, np.linalg.LinAlgError):
            continue
    return seeds


def _newton_step(M, g, p):
    B = M.tangent_basis(p)
    A = B.T @ g.jacobian(p) @ B
    b = B.T @ g(p)
    s = np.linalg.lstsq(A, -b, rcond=None)[0]
    return B @ s


def _newton_zero(M, g, p, zero_tol, max_iter, diam):
    """Damped Newton in tangent coordinates; returns (point, converged)."""
    res = float(np.linalg.norm(g(p)))
    for _ in range(max_iter):
        if res <= zero_tol:
            break
        try:
            step = _newton_step(M, g, p)
        except (RankDeficient, np.linalg.LinAlgError):
            return p, False
        n = np.linalg.norm(step)
        if n > 0.5 * diam:
            step *= 0.5 * diam / n
        alpha, improved = 1.0, False
        for _ in range(10):
            try:
                q = M.retract(p, alpha * step)
                rq = float(np.linalg.norm(g(q)))
            except (RankDeficient, RetractionDiverged):
                rq = np.inf
            if rq < res:
                improved = True
                break
            alpha *= 0.5
        if not improved:
            return p, False
        p, res = q, rq
    if res > zero_tol:
        return p, False
    # polish while the residual keeps dropping
    for _ in range(8):
        try:
            q = M.retract(p, _newton_step(M, g, p))
            rq = float(np.linalg.norm(g(q)))
        except (RankDeficient, RetractionDiverged, np.linalg.LinAlgError):
            break
        if not rq < res:
            break
        p, res = q, rq
    return p, True


def kantorovich_ratio(M: EmbeddedManifold, g: TangentField, p) -> float:
    """||A^-1|| * ||A(p + s) - A(p)|| for the Newton step s at p.

    Near a nondegenerate zero this is tiny; near a degenerate one the
    Jacobian changes by O(1) relative to itself over one Newton step
    (0.5 for x^2), independent of how close p is to the zero.
    """
    B = M.tangent_basis(p)
    A = B.T @ g.jacobian(p) @ B
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size == 0:
        return 0.0
    if sv[-1] == 0.0:
        return np.inf
    step = B @ np.linalg.solve(A, -(B.T @ g(p)))
    q = M.retract(p, step)
    Pp = np.eye(p.size) - M.normal_basis(p) @ M.normal_basis(p).T
    Pq = np.eye(p.size) - M.normal_basis(q) @ M.normal_basis(q).T
    dA = Pq @ g.jacobian(q) @ Pq - Pp @ g.jacobian(p) @ Pp
    return float(np.linalg.norm(dA, 2) / sv[-1])


def find_zeros(M: EmbeddedManifold, g: TangentField, region: RegionPredicate, seeds_per_axis: int = SEEDS_PER_AXIS, *,
               zero_tol: float = ZERO_TOL, singular_tol: float = SINGULAR_TOL, dedup_radius: float | None = None,
               max_iter: int = 50) -> list[ZeroRecord]:
    """Locate the zeros of g in region by seeded Newton iteration.

    Raises BoundaryZero when a zero sits within the region's boundary
    margin and DegenerateZero when a zero fails the nondegeneracy tests.
    The result is sorted lexicographically.
    """
    diam = max(region.diameter, 1e-12)
    dedup = 1e-6 * diam if dedup_radius is None else dedup_radius
    found: list[np.ndarray] = []
    for seed in seed_points(M, region, seeds_per_axis):
        p, ok = _newton_zero(M, g, seed, zero_tol, max_iter, diam)
        if not ok:
            continue
        if any(np.linalg.norm(p - q) <= dedup for q in found):
            continue
        found.append(p)

    records = []
    for p in found:
        if region.near_boundary(p):
            raise BoundaryZero(f"zero {p.tolist()} lies within {region.boundary_margin:g} of the region boundary")
        if not region.contains(p):
            continue
        try:
            _, sign = tangent_jacobian(M, g, p, singular_tol)
        except NearSingular as exc:
            raise DegenerateZero(str(exc)) from exc
        ratio = kantorovich_ratio(M, g, p)
        if ratio > KANTOROVICH_LIMIT:
            raise DegenerateZero(f"zero {p.tolist()} is not isolated-nondegenerate (Kantorovich ratio {ratio:.2f})")
        records.append(ZeroRecord(p, sign, float(np.linalg.norm(g(p)))))
    records.sort(key=lambda z: tuple(z.point))
    return records


def degree(M: EmbeddedManifold, g: TangentField, region: RegionPredicate, seeds_per_axis: int = SEEDS_PER_AXIS,
           **kwargs) -> int:
    """deg(g, region) as the signed count of nondegenerate zeros."""
    try:
        zeros = find_zeros(M, g, region, seeds_per_axis, **kwargs)
    except BoundaryZero as exc:
        raise NotAdmissible(str(exc)) from exc
    return int(sum(z.local_sign for z in zeros))


# -- planar winding-number oracle ---------------------------------------------

def circle_boundary(center=(0.0, 0.0), radius: float = 1.0, n: int = 256) -> np.ndarray:
    a = 2 * np.pi * np.arange(n) / n
    return np.asarray(center, dtype=float) + radius * np.column_stack([np.cos(a), np.sin(a)])


def box_boundary(lo, hi) -> np.ndarray:
    (x0, y0), (x1, y1) = lo, hi
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)


def _resample_closed(vertices: np.ndarray, samples: int) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    if np.allclose(v[0], v[-1]):
        v = v[:-1]
    closed = np.vstack([v, v[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s = np.arange(samples) * cum[-1] / samples
    return np.column_stack([np.interp(s, cum, closed[:, i]) for i in range(2)])


def winding_degree_planar(w, boundary, samples: int = 4096, *, zero_tol: float = ZERO_TOL,
                          max_samples: int = 1 << 20) -> int:
    """Winding number of w along a closed polyline, i.e. the Brouwer degree inside it.

    The sample count doubles while the rounding residue exceeds 0.05 or any
    angle increment between consecutive samples exceeds pi/4.
    """
    n = int(samples)
    while True:
        pts = _resample_closed(boundary, n)
        vals = np.array([np.asarray(w(p), dtype=float) for p in pts])
        mags = np.hypot(vals[:, 0], vals[:, 1])
        if mags.min() < 10 * zero_tol:
            raise VanishingOnBoundary(f"|w| = {mags.min():.2e} on the boundary")
        z = vals[:, 0] + 1j * vals[:, 1]
        inc = np.angle(np.roll(z, -1) / z)
        total = inc.sum() / (2 * np.pi)
        residue = abs(total - round(total))
        biggest = float(np.max(np.abs(inc)))
        if residue <= 0.05 and biggest <= np.pi / 4:
            return int(round(total))
        if 2 * n > max_samples:
            break
        n *= 2
    if residue > 0.1 or biggest >= np.pi / 2:
        raise AngleResidueTooLarge(f"residue {residue:.3f}, largest angle step {biggest:.3f} at {n} samples")
    return int(round(total))


# -- Poincare-Hopf -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PoincareHopfReport:
    degree: int
    euler_characteristic: int
    zeros: list[ZeroRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.degree == self.euler_characteristic

    def __str__(self):
        verdict = "pass" if self.passed else "FAIL (Poincare-Hopf violated: missed zeros or bad seeding)"
        return f"deg(g,M) = {self.degree}, chi(M) = {self.euler_characteristic}: {verdict}"


def check_poincare_hopf(M: EmbeddedManifold, g: TangentField, seeds_per_axis: int = SEEDS_PER_AXIS,
                        **kwargs) -> PoincareHopfReport:
    if M.euler_characteristic is None or M.bounding_box is None:
        raise ComputationError("Poincare-Hopf needs a compact manifold with chi(M) and a bounding box")
    lo, hi = M.bounding_box
    pad = 1e-3 * (hi - lo)
    region = Everywhere((lo - pad, hi + pad))
    zeros = find_zeros(M, g, region, seeds_per_axis, **kwargs)
    return PoincareHopfReport(int(sum(z.local_sign for z in zeros)), int(M.euler_characteristic), zeros)
