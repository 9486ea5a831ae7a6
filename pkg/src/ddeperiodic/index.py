"""Fixed point indices of the Poincare map P and the translation operator Q.

ind(P, U) is summed from sign det(I - dP) at hyperbolic fixed points and
checked against deg(-g, U).  ind(Q, W) is summed the same way from the
discretized Q on history nodes, and checked against deg(-g, W_check) and
ind(P, W_check).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .degree import SEEDS_PER_AXIS, degree
from .errors import (
    BlowUp,
    BoundaryZero,
    IndexMismatch,
    NonHyperbolic,
    NotAdmissible,
    OutsideDomain,
    RankDeficient,
    ReductionMismatch,
    RetractionDiverged,
)
from .fields import TangentField
from .integrate import DEFAULT_NH, DEFAULT_STEPS, History, delay_value, flow_with_variation
from .manifold import EmbeddedManifold
from .poincare import map_h, translation_Q
from .regions import HistoryRegion, RegionPredicate

FIXED_TOL = 1e-8
# smallest singular value of I - dP (relative) below which a fixed point is not hyperbolic
HYPERBOLIC_TOL = 1e-6
# a stalled Newton iterate this close to being fixed, with singular I - dP, signals a continuum
NEAR_FIXED_TOL = 1e-5
# default seeding for P aims at this many grid points in total, at least 4 per axis
P_SEED_BUDGET = 64


def default_p_seeds(k: int) -> int:
    return max(4, int(np.ceil(P_SEED_BUDGET ** (1.0 / k) - 1e-9)))


def _displacement(M, g, p, T, steps):
    end, V = flow_with_variation(M, g, p, T, steps=steps)
    B = M.tangent_basis(p)
    return end, B, B.T @ (end - p), B.T @ V - np.eye(B.shape[1])


def _newton_fixed(M, g, p, T, steps, fixed_tol, max_iter, radius, known, merge):
    """Newton on B(p)^T (P(p) - p) with steps capped at radius.

    Returns (point, status) with status in ok/fail/known.
    """
    try:
        end, B, r, J = _displacement(M, g, p, T, steps)
    except (BlowUp, RankDeficient, RetractionDiverged):
        return p, "fail"
    res = float(np.linalg.norm(end - p))
    for _ in range(max_iter):
        if res <= fixed_tol:
            return p, "ok"
        if any(np.linalg.norm(p - q) <= merge for q in known):
            return p, "known"
        s = np.linalg.lstsq(J, -r, rcond=None)[0]
        step = B @ s
        n = np.linalg.norm(step)
        if n > radius:
            step *= radius / n
        alpha = 1.0
        for _ in range(8):
            try:
                q = M.retract(p, alpha * step)
                end_q, B_q, r_q, J_q = _displacement(M, g, q, T, steps)
                res_q = float(np.linalg.norm(end_q - q))
            except (BlowUp, RankDeficient, RetractionDiverged):
                res_q = np.inf
            if res_q < res:
                break
            alpha *= 0.5
        else:
            if res <= NEAR_FIXED_TOL:
                sv = np.linalg.svd(J, compute_uv=False)
                if sv.size and sv[-1] < 1e-3 * max(1.0, sv[0]):
                    raise NonHyperbolic(f"P nearly fixes {p.tolist()} with singular I - dP: "
                                        "a nonconstant T-periodic orbit passes through the region")
            return p, "fail"
        p, end, B, r, J, res = q, end_q, B_q, r_q, J_q, res_q
    return p, ("ok" if res <= fixed_tol else "fail")


def _seeds(M, bbox, seeds_per_axis, hints, spacing):
    lo, hi = bbox
    n = max(int(seeds_per_axis), 1)
    axes = [lo[i] + (np.arange(n) + 0.5) * (hi[i] - lo[i]) / n for i in range(lo.size)]
    raw = list(hints) + [np.array(c) for c in itertools.product(*axes)]
    out = []
    for s in raw:
        try:
            q = M.project(s)
        except (RankDeficient, RetractionDiverged):
            continue
        # projection onto M crowds grid points together; keep them a spacing apart
        if all(np.linalg.norm(q - o) >= spacing for o in out):
            out.append(q)
    return out


def find_fixed_points(M: EmbeddedManifold, g: TangentField, T: float, bbox, seeds_per_axis: int | None = None, *,
                      hints=(), steps: int = DEFAULT_STEPS, fixed_tol: float = FIXED_TOL,
                      max_iter: int = 30) -> list[np.ndarray]:
    """Fixed points of P in a bounding box, sorted lexicographically."""
    lo, hi = (np.asarray(b, dtype=float) for b in bbox)
    if seeds_per_axis is None:
        seeds_per_axis = default_p_seeds(lo.size)
    diam = max(float(np.linalg.norm(hi - lo)), 1e-12)
    # step cap: keeps Newton from jumping over nearby fixed points
    cell = float(np.max(hi - lo)) / max(int(seeds_per_axis), 1)
    radius = max(cell, 0.1 * diam)
    dedup, merge = 1e-6 * diam, 0.5 * cell
    found: list[np.ndarray] = []
    for seed in _seeds(M, (lo, hi), seeds_per_axis, hints, 0.5 * cell):
        p, status = _newton_fixed(M, g, seed, T, steps, fixed_tol, max_iter, radius, found, merge)
        if status != "ok":
            continue
        if any(np.linalg.norm(p - q) <= dedup for q in found):
            continue
        found.append(p)
    found.sort(key=tuple)
    return found


def _sign_of_displacement_jacobian(A: np.ndarray, where) -> int:
    m = A.shape[0]
    if m == 0:
        return 1
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] < HYPERBOLIC_TOL * max(1.0, sv[0]):
        raise NonHyperbolic(f"I - dP is (nearly) singular at {where}: smallest singular value {sv[-1]:.2e}")
    return 1 if np.linalg.det(A) > 0 else -1


def index_P_at(M: EmbeddedManifold, g: TangentField, q, T: float, *, steps: int = DEFAULT_STEPS,
               fixed_tol: float = FIXED_TOL) -> int:
    """sign det(I - dP(q)) at a hyperbolic fixed point q of P."""
    q = np.asarray(q, dtype=float)
    B = M.tangent_basis(q)
    end, V = flow_with_variation(M, g, q, T, steps=steps, basis=B)
    if np.linalg.norm(end - q) > fixed_tol:
        raise ValueError(f"{q.tolist()} is not a fixed point of P (|P(q) - q| = {np.linalg.norm(end - q):.2e})")
    D = B.T @ V
    return _sign_of_displacement_jacobian(np.eye(D.shape[0]) - D, q.tolist())


@dataclass(frozen=True, eq=False)
class FixedPointRecord:
    point: np.ndarray
    index: int


def fixed_points_in(M: EmbeddedManifold, g: TangentField, region: RegionPredicate, T: float,
                    seeds_per_axis: int | None = None, *, steps: int = DEFAULT_STEPS,
                    fixed_tol: float = FIXED_TOL) -> list[FixedPointRecord]:
    """Indexed fixed points of P inside region; BoundaryZero for any within the boundary margin."""
    out = []
    for p in find_fixed_points(M, g, T, region.bbox, seeds_per_axis, hints=region.hints, steps=steps,
                               fixed_tol=fixed_tol):
        if region.near_boundary(p):
            raise BoundaryZero(f"fixed point {p.tolist()} lies on the region boundary")
        if region.contains(p):
            out.append(FixedPointRecord(p, index_P_at(M, g, p, T, steps=steps, fixed_tol=fixed_tol)))
    return out


def index_P_region(M: EmbeddedManifold, g: TangentField, region: RegionPredicate, T: float,
                   seeds_per_axis: int | None = None, *, steps: int = DEFAULT_STEPS,
                   degree_seeds: int = SEEDS_PER_AXIS, check: bool = True) -> int:
    """ind(P, U) as a sum of local indices; checked against deg(-g, U) unless check is False."""
    try:
        records = fixed_points_in(M, g, region, T, seeds_per_axis, steps=steps)
    except BoundaryZero as exc:
        raise NotAdmissible(str(exc)) from exc
    ind = int(sum(r.index for r in records))
    if check:
        deg = degree(M, -g, region, degree_seeds)
        if ind != deg:
            raise IndexMismatch(ind, deg)
    return ind


# -- translation operator ------------------------------------------------------

def _node_coords(M, phi: History):
    return [M.tangent_basis(x) for x in phi.values]


def discrete_Q_jacobian(M: EmbeddedManifold, g: TangentField, phi: History, T: float, *,
                        steps: int = DEFAULT_STEPS) -> np.ndarray:
    """Forward-difference Jacobian of phi -> Q(phi) - phi in node tangent coordinates at a fixed point."""
    bases = _node_coords(M, phi)
    m = bases[0].shape[1]
    n = phi.n_nodes
    base = translation_Q(M, g, phi, T, steps=steps).output.values

    def coords(values):
        return np.concatenate([B.T @ (v - x) for B, v, x in zip(bases, values, phi.values)])

    f0 = coords(base)
    J = np.empty((n * m, n * m))
    for i in range(n):
        for j in range(m):
            h = 1e-7 * (1.0 + np.linalg.norm(phi.values[i]))
            vals = phi.values.copy()
            vals[i] = M.retract(vals[i], h * bases[i][:, j])
            moved = History(phi.grid, vals, M)
            out = translation_Q(M, g, moved, T, steps=steps).output.values
            col = coords(out) - coords(vals) - (f0 - coords(phi.values))
            J[:, i * m + j] = col / h
    return J + np.eye(n * m)


def index_Q_at(M: EmbeddedManifold, g: TangentField, phi: History, T: float, *, steps: int = DEFAULT_STEPS) -> int:
    """sign det(I - dQ(phi)) at a fixed point of the discretized Q."""
    J = discrete_Q_jacobian(M, g, phi, T, steps=steps)
    return _sign_of_displacement_jacobian(np.eye(J.shape[0]) - J, "a fixed history")


@dataclass(frozen=True, eq=False)
class ReductionReport:
    index_Q: int
    degree_neg_g: int
    index_P: int
    fixed_histories: list[History] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.index_Q == self.degree_neg_g == self.index_P

    def __str__(self):
        verdict = "pass" if self.passed else "FAIL"
        return (f"ind(Q,W) = {self.index_Q}, deg(-g,W_check) = {self.degree_neg_g}, "
                f"ind(P,W_check) = {self.index_P}: {verdict}")


def index_Q_region(M: EmbeddedManifold, g: TangentField, W: HistoryRegion, T: float, r=None, *,
                   seeds_per_axis: int | None = None, degree_seeds: int = SEEDS_PER_AXIS,
                   steps: int = DEFAULT_STEPS) -> ReductionReport:
    """ind(Q, W) with its reduction to deg(-g, W_check) and ind(P, W_check).

    ind(Q, W) is summed over the h-images of fixed points of P that land in
    W, each with the sign of det(I - dQ) for the node-discretized Q.  Raises
    ReductionMismatch unless all three integers agree.
    """
    r = W.delay if r is None else delay_value(r)
    check = W.check_set(M)
    deg = degree(M, -g, check, degree_seeds)
    ind_p = index_P_region(M, g, check, T, seeds_per_axis, steps=steps, check=False)
    fixed = []
    ind_q = 0
    for p in find_fixed_points(M, g, T, W.bbox, seeds_per_axis, hints=W.hints, steps=steps):
        phi = map_h(M, g, p, T, r, n_h=W.n_h, steps=steps)
        if W.contains(phi):
            fixed.append(phi)
            ind_q += index_Q_at(M, g, phi, T, steps=steps)
    report = ReductionReport(ind_q, deg, ind_p, fixed)
    if not report.passed:
        raise ReductionMismatch(ind_q, deg, ind_p)
    return report


@dataclass(frozen=True, eq=False)
class CorrespondenceEntry:
    point: np.ndarray
    history: History
    q_residual: float
    in_check_set: bool


@dataclass(frozen=True, eq=False)
class CorrespondenceReport:
    entries: list[CorrespondenceEntry]
    residual_tol: float

    @property
    def all_fixed(self) -> bool:
        return all(e.q_residual <= self.residual_tol for e in self.entries)

    @property
    def outside_check_set(self) -> list[CorrespondenceEntry]:
        """Fixed points of P in h^-1(W) that are not in W_check."""
        return [e for e in self.entries if not e.in_check_set]

    def __str__(self):
        lines = [f"fix(Q,W) <-> fix(P,h^-1(W)): {len(self.entries)} pair(s)"]
        for e in self.entries:
            tag = "in W_check" if e.in_check_set else "NOT in W_check"
            lines.append(f"  p = {np.round(e.point, 10).tolist()}  |Q(h(p)) - h(p)| = {e.q_residual:.2e}  {tag}")
        if self.outside_check_set:
            lines.append("fix(P,h^-1(W)) is not contained in W_check")
        return "\n".join(lines)


def verify_fix_correspondence(M: EmbeddedManifold, g: TangentField, W: HistoryRegion, T: float, r=None, *,
                              seeds_per_axis: int | None = None, steps: int = DEFAULT_STEPS,
                              fixed_tol: float = 1e-7, residual_tol: float = 1e-7) -> CorrespondenceReport:
    """Pair fixed points of P in h^-1(W) with fixed points h(p) of Q in W."""
    r = W.delay if r is None else delay_value(r)
    check = W.check_set(M)
    entries = []
    for p in find_fixed_points(M, g, T, W.bbox, seeds_per_axis, hints=W.hints, steps=steps, fixed_tol=fixed_tol):
        try:
            phi = map_h(M, g, p, T, r, n_h=W.n_h, steps=steps)
        except OutsideDomain:
            continue
        if not W.contains(phi):
            continue
        image = translation_Q(M, g, phi, T, steps=steps).output
        entries.append(CorrespondenceEntry(p, phi, phi.sup_distance(image), check.contains(p)))
    return CorrespondenceReport(entries, residual_tol)
