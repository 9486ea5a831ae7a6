"""Poincare map P, translation operators Q and Q_lambda on discretized
histories, and the factorization maps h and k (h o k = Q, k o h = P)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BlowUp, OutsideDomain
from .fields import PerturbationField, TangentField
from .integrate import (
    DEFAULT_NH,
    DEFAULT_STEPS,
    ESCAPE_RADIUS,
    History,
    Trajectory,
    delay_value,
    flow_dde,
    flow_ode,
)
from .manifold import EmbeddedManifold


@dataclass(frozen=True, eq=False)
class HistoryOperatorResult:
    output: History
    underlying: Trajectory


def _require_period_covers_delay(T: float, r: float):
    if r > T * (1 + 1e-12):
        raise ValueError(f"translation operators need T >= r (T={T}, r={r}); normalize the delay first")


def _read_segment(traj: Trajectory, T: float, grid: np.ndarray, M) -> History:
    vals = np.array([traj(T + th) for th in grid])
    return History(grid, vals, M)


def poincare_P(M: EmbeddedManifold, g: TangentField, p, T: float, *,
               steps: int = DEFAULT_STEPS, escape_radius: float = ESCAPE_RADIUS) -> np.ndarray:
    """P(p) = x(p, T)."""
    try:
        return flow_ode(M, g, p, 0.0, T, steps=steps, escape_radius=escape_radius).endpoint
    except BlowUp as exc:
        raise OutsideDomain(f"{np.asarray(p)!r} is not in dom(P): {exc}") from exc


def map_h(M: EmbeddedManifold, g: TangentField, p, T: float, r, *, n_h: int = DEFAULT_NH,
          steps: int = DEFAULT_STEPS, escape_radius: float = ESCAPE_RADIUS) -> History:
    """h(p)(theta) = x(p, T + theta) on the history grid of [-r, 0]."""
    r = delay_value(r)
    _require_period_covers_delay(T, r)
    try:
        traj = flow_ode(M, g, p, 0.0, T, steps=steps, escape_radius=escape_radius)
    except BlowUp as exc:
        raise OutsideDomain(f"{np.asarray(p)!r} is not in dom(P): {exc}") from exc
    return _read_segment(traj, T, History.uniform_grid(r, n_h), M)


def map_k(phi: History) -> np.ndarray:
    """k(phi) = phi(0)."""
    return phi.at_zero.copy()


def translation_Q(M: EmbeddedManifold, g: TangentField, phi: History, T: float, *,
                  steps: int = DEFAULT_STEPS, escape_radius: float = ESCAPE_RADIUS) -> HistoryOperatorResult:
    """Q(phi)(theta) = x(phi(0), T + theta); depends on phi only through phi(0)."""
    _require_period_covers_delay(T, phi.delay)
    try:
        traj = flow_ode(M, g, phi.at_zero, 0.0, T, steps=steps, escape_radius=escape_radius)
    except BlowUp as exc:
        raise OutsideDomain(f"phi(0) is not in dom(P): {exc}") from exc
    return HistoryOperatorResult(_read_segment(traj, T, phi.grid, M), traj)


def translation_Q_lambda(M: EmbeddedManifold, g: TangentField, f: PerturbationField, lam: float,
                         phi: History, T: float | None = None, *, steps: int = DEFAULT_STEPS,
                         escape_radius: float = ESCAPE_RADIUS, allow_negative: bool = False) -> HistoryOperatorResult:
    """Q_lambda(phi)(theta) = xi^lambda(phi, T + theta), from the method of steps.

    allow_negative lets a continuation corrector probe slightly below lambda = 0.
    """
    T = f.period if T is None else T
    _require_period_covers_delay(T, phi.delay)
    try:
        traj = flow_dde(M, g, f, lam, phi, T, steps=steps, escape_radius=escape_radius,
                        allow_negative=allow_negative)
    except BlowUp as exc:
        raise OutsideDomain(f"(lambda={lam}, phi) is outside the domain of Q_lambda: {exc}") from exc
    return HistoryOperatorResult(_read_segment(traj, T, phi.grid, M), traj)


def fixed_point_residual(phi: History, image: History) -> float:
    """Sup over grid nodes of the ambient distance between phi and its image."""
    return phi.sup_distance(image)
