"""Open-set surrogates: regions U in M, W in C([-r,0], M) and Omega in
[0, inf) x C_T(M), each a membership test plus an ambient bounding box."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .integrate import DEFAULT_NH, History, Trajectory

Box = tuple[np.ndarray, np.ndarray]


def _as_box(lo, hi) -> Box:
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape or np.any(hi <= lo):
        raise ValueError("bounding box needs lo < hi componentwise")
    return lo, hi


def _union_box(boxes: Sequence[Box]) -> Box:
    return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)


class RegionPredicate:
    """Open subset of M given by a membership test.

    ``bbox`` must contain every point for which :meth:`contains` is true;
    ``hints`` are extra seed points for searches (e.g. a ball's center).
    """

    def __init__(self, bbox: Box, boundary_margin: float = 1e-6, hints=()):
        self.bbox = _as_box(*bbox)
        self.boundary_margin = float(boundary_margin)
        self.hints = [np.asarray(h, dtype=float) for h in hints]

    def contains(self, p) -> bool:
        raise NotImplementedError

    def __contains__(self, p) -> bool:
        return self.contains(p)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.bbox[1] - self.bbox[0]))

    def near_boundary(self, p) -> bool:
        """True when membership changes within boundary_margin along some coordinate axis."""
        p = np.asarray(p, dtype=float)
        inside = self.contains(p)
        for i in range(p.size):
            for s in (-1.0, 1.0):
                q = p.copy()
                q[i] += s * self.boundary_margin
                if self.contains(q) != inside:
                    return True
        return False


class BoxRegion(RegionPredicate):
    """Points of M inside the open ambient box (lo, hi)."""

    def __init__(self, lo, hi, boundary_margin: float = 1e-6, hints=()):
        super().__init__((lo, hi), boundary_margin, hints)

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p > self.bbox[0]) and np.all(p < self.bbox[1]))

    def __repr__(self):
        return f"BoxRegion({self.bbox[0].tolist()}, {self.bbox[1].tolist()})"


class BallRegion(RegionPredicate):
    def __init__(self, center, radius: float, boundary_margin: float = 1e-6):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.radius = float(radius)
        super().__init__((self.center - radius, self.center + radius), boundary_margin, [self.center])

    def contains(self, p) -> bool:
        return bool(np.linalg.norm(np.asarray(p, dtype=float) - self.center) < self.radius)

    def __repr__(self):
        return f"BallRegion({self.center.tolist()}, {self.radius})"


class Everywhere(RegionPredicate):
    """All of M (compact M, or a search window for an unbounded one)."""

    def contains(self, p) -> bool:
        return True

    def near_boundary(self, p) -> bool:
        return False

    def __repr__(self):
        return "Everywhere"


class PredicateRegion(RegionPredicate):
    def __init__(self, fn: Callable[[np.ndarray], bool], bbox: Box, boundary_margin: float = 1e-6, hints=()):
        self.fn = fn
        super().__init__(bbox, boundary_margin, hints)

    def contains(self, p) -> bool:
        return bool(self.fn(np.asarray(p, dtype=float)))


class UnionRegion(RegionPredicate):
    def __init__(self, *parts: RegionPredicate):
        if not parts:
            raise ValueError("empty union")
        self.parts = parts
        super().__init__(_union_box([q.bbox for q in parts]), min(q.boundary_margin for q in parts),
                         [h for q in parts for h in q.hints])

    def contains(self, p) -> bool:
        return any(q.contains(p) for q in self.parts)


# -- regions of history space ------------------------------------------------

class HistoryRegion:
    """Open W in C([-r, 0], M), realized on a fixed history grid."""

    def __init__(self, bbox: Box, delay: float, n_h: int = DEFAULT_NH, hints=()):
        self.bbox = _as_box(*bbox)
        self.delay = float(delay)
        self.n_h = n_h
        self.hints = [np.asarray(h, dtype=float) for h in hints]

    def contains(self, phi: History) -> bool:
        raise NotImplementedError

    def __contains__(self, phi) -> bool:
        return self.contains(phi)

    def check_set(self, M, boundary_margin: float = 1e-6) -> RegionPredicate:
        """W_check = {p in M : the constant history at p lies in W}."""
        W = self

        def member(p):
            return W.contains(History.constant(M, p, W.delay, W.n_h))

        return PredicateRegion(member, self.bbox, boundary_margin, self.hints)


class HistoryBall(HistoryRegion):
    """Sup-norm ball {phi : max_i |phi(theta_i) - ref(theta_i)| < radius}."""

    def __init__(self, reference: History, radius: float):
        self.reference = reference
        self.radius = float(radius)
        vals = reference.values
        super().__init__((vals.min(axis=0) - radius, vals.max(axis=0) + radius), reference.delay,
                         reference.n_h, [reference.at_zero])

    def contains(self, phi: History) -> bool:
        if phi.n_nodes == self.reference.n_nodes:
            ref = self.reference.values
        else:
            ref = np.array([self.reference(th) for th in phi.grid])
        return bool(np.max(np.linalg.norm(phi.values - ref, axis=1)) < self.radius)

    def __repr__(self):
        return f"HistoryBall(radius={self.radius}, ref(0)={self.reference.at_zero.tolist()})"


class HistoryBox(HistoryRegion):
    """phi(0) in the open box (lo, hi) and sup |phi| < sup_bound."""

    def __init__(self, lo, hi, sup_bound: float, delay: float, n_h: int = DEFAULT_NH):
        lo, hi = _as_box(lo, hi)
        self.lo, self.hi, self.sup_bound = lo, hi, float(sup_bound)
        super().__init__((np.maximum(lo, -sup_bound), np.minimum(hi, sup_bound)), delay, n_h)

    def contains(self, phi: History) -> bool:
        p0 = phi.at_zero
        return bool(np.all(p0 > self.lo) and np.all(p0 < self.hi) and phi.sup_norm() < self.sup_bound)


class HistoryUnion(HistoryRegion):
    def __init__(self, *parts: HistoryRegion):
        if not parts:
            raise ValueError("empty union")
        self.parts = parts
        super().__init__(_union_box([w.bbox for w in parts]), parts[0].delay, parts[0].n_h,
                         [h for w in parts for h in w.hints])

    def contains(self, phi: History) -> bool:
        return any(w.contains(phi) for w in self.parts)


class HistoryEverywhere(HistoryRegion):
    def contains(self, phi: History) -> bool:
        return True


# -- regions of pair space [0, inf) x C_T(M) ----------------------------------

def _loop_states(loop) -> np.ndarray:
    if isinstance(loop, Trajectory):
        return loop.states[loop.start:]
    return np.atleast_2d(np.asarray(loop, dtype=float))


class PairRegion:
    """Omega = {(lambda, x) : lambda < lambda_bound, sup |x| < norm_bound, extra(lambda, x)}.

    ``search_box`` bounds Omega intersected with M, where zeros of g are sought.
    """

    def __init__(self, search_box: Box, lambda_bound: float = np.inf, norm_bound: float = np.inf,
                 extra: Callable[[float, np.ndarray], bool] | None = None, boundary_margin: float = 1e-6):
        self.search_box = _as_box(*search_box)
        self.lambda_bound = float(lambda_bound)
        self.norm_bound = float(norm_bound)
        self.extra = extra
        self.boundary_margin = boundary_margin

    @property
    def bounded(self) -> bool:
        return np.isfinite(self.lambda_bound) and np.isfinite(self.norm_bound)

    def contains(self, lam: float, loop) -> bool:
        states = _loop_states(loop)
        if not (0.0 <= lam < self.lambda_bound):
            return False
        if np.max(np.linalg.norm(states, axis=1)) >= self.norm_bound:
            return False
        return True if self.extra is None else bool(self.extra(lam, states))

    def slice_at_zero(self, M) -> RegionPredicate:
        """Omega intersected with M: points p whose constant loop gives (0, p) in Omega."""
        omega = self

        def member(p):
            return omega.contains(0.0, np.asarray(p, dtype=float)[None, :])

        box = self.search_box
        if M.bounding_box is not None:
            lo = np.maximum(box[0], M.bounding_box[0])
            hi = np.minimum(box[1], M.bounding_box[1])
            if np.all(hi > lo):
                box = (lo, hi)
        if self.extra is None and not np.isfinite(self.norm_bound):
            return Everywhere(box, self.boundary_margin)
        return PredicateRegion(member, box, self.boundary_margin)

    def __repr__(self):
        return f"PairRegion(lambda<{self.lambda_bound}, sup<{self.norm_bound})"
