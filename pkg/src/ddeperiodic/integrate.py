"""Fixed-step RK4 on embedded manifolds, method of steps for the delay
equation, and the variational (linearized) flow along a trajectory."""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BlowUp
from .fields import PerturbationField, TangentField
from .manifold import EmbeddedManifold

ESCAPE_RADIUS = 1e6
DEFAULT_STEPS = 200
DEFAULT_NH = 32


class ZeroDelay:
    """Marker returned by :func:`normalize_delay` when r = 0."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __float__(self):
        return 0.0

    def __repr__(self):
        return "ZERO_DELAY"


ZERO_DELAY = ZeroDelay()


def normalize_delay(r: float, T: float) -> float | ZeroDelay:
    """Replace r by r - nT with n the non-negative integer giving 0 < r - nT <= T.

    T-periodic solutions are unchanged by this substitution.
    """
    if not T > 0:
        raise ValueError("period must be positive")
    if r < 0:
        raise ValueError("delay must be non-negative")
    if r == 0:
        return ZERO_DELAY
    n = max(math.ceil(r / T - 1e-12) - 1, 0)
    out = r - n * T
    if out <= 0:
        out += T
    return out


def delay_value(r) -> float:
    return float(r)


def hermite(t0, t1, y0, y1, d0, d1, s):
    h = t1 - t0
    if h == 0:
        return y0
    u = (s - t0) / h
    u2 = u * u
    u3 = u2 * u
    return (
        (2 * u3 - 3 * u2 + 1) * y0
        + (u3 - 2 * u2 + u) * h * d0
        + (-2 * u3 + 3 * u2) * y1
        + (u3 - u2) * h * d1
    )


def fd4_slopes(values: np.ndarray, spacing: float) -> np.ndarray:
    """Fourth-order finite-difference derivatives on a uniform grid (>= 5 nodes)."""
    y = np.asarray(values, dtype=float)
    n = y.shape[0]
    if n < 5:
        raise ValueError("fourth-order slopes need at least 5 nodes")
    d = np.empty_like(y)
    d[2:-2] = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / 12
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / 12
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / 12
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / 12
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / 12
    return d / spacing


@dataclass(frozen=True, eq=False)
class History:
    """Discretized element of C([-r, 0], M) on n_h + 1 uniform nodes.

    Between nodes the history is the cubic Hermite interpolant with
    fourth-order finite-difference slopes, projected back onto M.  A zero
    delay gives the degenerate single-node history.
    """

    grid: np.ndarray
    values: np.ndarray
    manifold: EmbeddedManifold | None = None
    slopes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if grid.ndim != 1 or values.shape[0] != grid.size:
            raise ValueError("grid and values disagree in length")
        if grid[-1] != 0.0:
            raise ValueError("history grid must end at 0")
        if grid.size == 1:
            slopes = np.zeros_like(values)
        else:
            if grid.size < 5:
                raise ValueError("a history needs n_h >= 4")
            step = np.diff(grid)
            if np.any(step <= 0) or np.ptp(step) > 1e-9 * step[0]:
                raise ValueError("history grid must be uniform and increasing")
            slopes = fd4_slopes(values, step.mean())
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "slopes", slopes)

    @classmethod
    def uniform_grid(cls, r: float, n_h: int = DEFAULT_NH) -> np.ndarray:
        r = float(r)
        if r == 0.0:
            return np.zeros(1)
        g = -r + r * np.arange(n_h + 1) / n_h
        g[-1] = 0.0
        return g

    @classmethod
    def constant(cls, M, p, r, n_h: int = DEFAULT_NH) -> "History":
        grid = cls.uniform_grid(delay_value(r), n_h)
        return cls(grid, np.tile(np.asarray(p, dtype=float), (grid.size, 1)), M)

    @classmethod
    def from_function(cls, M, fn: Callable[[float], np.ndarray], r, n_h: int = DEFAULT_NH) -> "History":
        grid = cls.uniform_grid(delay_value(r), n_h)
        vals = [np.atleast_1d(np.asarray(fn(th), dtype=float)) for th in grid]
        if M is not None and not M.is_euclidean:
            vals = [M.project(v) for v in vals]
        return cls(grid, np.array(vals), M)

    def like(self, values) -> "History":
        return History(self.grid, values, self.manifold)

    @property
    def delay(self) -> float:
        return -float(self.grid[0])

    @property
    def n_nodes(self) -> int:
        return self.grid.size

    @property
    def n_h(self) -> int:
        return max(self.grid.size - 1, 1)

    @property
    def ambient_dim(self) -> int:
        return self.values.shape[1]

    @property
    def at_zero(self) -> np.ndarray:
        return self.values[-1]

    def __call__(self, theta: float) -> np.ndarray:
        n = self.grid.size
        if n == 1:
            return self.values[0]
        r = self.delay
        pos = (theta + r) / r * (n - 1)
        i = min(max(int(math.floor(pos)), 0), n - 2)
        y = hermite(self.grid[i], self.grid[i + 1], self.values[i], self.values[i + 1],
                    self.slopes[i], self.slopes[i + 1], theta)
        M = self.manifold
        if M is not None and not M.is_euclidean:
            y = M.project(y)
        return y

    def sup_distance(self, other: "History") -> float:
        if other.grid.size != self.grid.size:
            raise ValueError("histories live on different grids")
        return float(np.max(np.linalg.norm(self.values - other.values, axis=1)))

    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.values, axis=1)))

    def max_violation(self) -> float:
        M = self.manifold
        if M is None or M.is_euclidean:
            return 0.0
        return float(max(np.max(np.abs(M.residual(v))) for v in self.values))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States on an increasing time grid, with derivatives for Hermite dense output.

    Delay runs keep the initial history; queries at t < 0 are answered by it.
    """

    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    manifold: EmbeddedManifold | None = None
    history: History | None = None

    @property
    def start(self) -> int:
        """Index of the first integration node (t >= 0 part when a history is attached)."""
        if self.history is None:
            return 0
        return int(np.searchsorted(self.times, 0.0, side="left"))

    @property
    def t0(self) -> float:
        return float(self.times[self.start])

    @property
    def t1(self) -> float:
        return float(self.times[-1])

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]

    def __call__(self, t: float) -> np.ndarray:
        if self.history is not None and t < 0:
            return self.history(t)
        lo = self.start
        ts = self.times
        if t <= ts[lo]:
            return self.states[lo]
        if t >= ts[-1]:
            return self.states[-1]
        j = int(np.searchsorted(ts, t, side="right")) - 1
        j = min(max(j, lo), ts.size - 2)
        if ts[j] == t:
            return self.states[j]
        y = hermite(ts[j], ts[j + 1], self.states[j], self.states[j + 1], self.derivs[j], self.derivs[j + 1], t)
        M = self.manifold
        if M is not None and not M.is_euclidean:
            y = M.project(y)
        return y

    def sample(self, ts) -> np.ndarray:
        return np.array([self(float(t)) for t in ts])

    def max_violation(self) -> float:
        M = self.manifold
        if M is None or M.is_euclidean:
            return 0.0
        return float(max(np.max(np.abs(M.residual(s))) for s in self.states))

    def sup_norm(self, t0: float | None = None) -> float:
        mask = np.ones(self.times.size, bool) if t0 is None else self.times >= t0
        return float(np.max(np.linalg.norm(self.states[mask], axis=1)))


def time_grid(t0: float, t1: float, steps: int, delay: float = 0.0) -> np.ndarray:
    """Uniform RK4 grid on [t0, t1], refined so that multiples of the delay are nodes."""
    n = max(int(steps), 1)
    grid = t0 + (t1 - t0) * np.arange(n + 1) / n
    grid[-1] = t1
    if delay > 0:
        h = (t1 - t0) / n
        j0 = math.floor(t0 / delay) + 1
        bps = [j * delay for j in range(j0, math.ceil(t1 / delay) + 1) if t0 < j * delay < t1]
        extra = [b for b in bps if np.min(np.abs(grid - b)) > 1e-9 * h]
        if extra:
            grid = np.sort(np.concatenate([grid, extra]))
    return grid


def _check_escape(x: np.ndarray, t: float, escape_radius: float):
    if not np.all(np.isfinite(x)) or np.linalg.norm(x) > escape_radius:
        raise BlowUp(f"solution escaped radius {escape_radius:g} at t={t:.6g}")


def _advance(M: EmbeddedManifold, x: np.ndarray, incr: np.ndarray) -> np.ndarray:
    if M.is_euclidean:
        return x + incr
    return M.retract(x, incr)


def _rk4_fixed(M, rhs, grid, x0, escape_radius):
    xs = [np.asarray(x0, dtype=float)]
    ds = []
    for n in range(grid.size - 1):
        t, h = grid[n], grid[n + 1] - grid[n]
        x = xs[-1]
        k1 = rhs(t, x)
        ds.append(k1)
        k2 = rhs(t + h / 2, x + h / 2 * k1)
        k3 = rhs(t + h / 2, x + h / 2 * k2)
        k4 = rhs(t + h, x + h * k3)
        x_new = _advance(M, x, h / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
        _check_escape(x_new, grid[n + 1], escape_radius)
        xs.append(x_new)
    ds.append(rhs(grid[-1], xs[-1]))
    return np.array(xs), np.array(ds)


def _rk4_step(M, rhs, t, x, h):
    k1 = rhs(t, x)
    k2 = rhs(t + h / 2, x + h / 2 * k1)
    k3 = rhs(t + h / 2, x + h / 2 * k2)
    k4 = rhs(t + h, x + h * k3)
    return _advance(M, x, h / 6 * (k1 + 2 * k2 + 2 * k3 + k4))


def _rk4_adaptive(M, rhs, t0, t1, x0, tol, escape_radius, h0):
    ts, xs = [t0], [np.asarray(x0, dtype=float)]
    t, x, h = t0, xs[0], h0
    while t < t1:
        h = min(h, t1 - t)
        big = _rk4_step(M, rhs, t, x, h)
        half = _rk4_step(M, rhs, t, x, h / 2)
        small = _rk4_step(M, rhs, t + h / 2, half, h / 2)
        err = float(np.linalg.norm(small - big)) / 15.0
        if err <= tol or h < 1e-12 * max(1.0, abs(t1)):
            t = t1 if t1 - t - h <= 1e-14 * max(1.0, abs(t1)) else t + h
            x = small + (small - big) / 15.0
            if not M.is_euclidean:
                x = M.project(x)
            _check_escape(x, t, escape_radius)
            ts.append(t)
            xs.append(x)
        fac = 2.0 if err == 0 else min(2.0, max(0.2, 0.9 * (tol / err) ** 0.2))
        h *= fac
    grid = np.array(ts)
    return grid, np.array(xs), np.array([rhs(s, y) for s, y in zip(grid, xs)])


def flow_ode(M: EmbeddedManifold, g: TangentField, p, t0: float, t1: float, *,
             steps: int = DEFAULT_STEPS, tol: float | None = None,
             escape_radius: float = ESCAPE_RADIUS) -> Trajectory:
    """Solve x' = g(x), x(t0) = p on [t0, t1].

    Classical RK4 with ``steps`` equal steps by default; with ``tol`` set,
    step doubling controls the local error instead.  Every accepted step is
    retracted onto M.
    """
    p = np.asarray(p, dtype=float)
    _check_escape(p, t0, escape_radius)

    def rhs(t, x):
        return g(x)

    if t1 == t0:
        return Trajectory(np.array([t0]), p[None, :], g(p)[None, :], M)
    if tol is not None:
        grid, xs, ds = _rk4_adaptive(M, rhs, t0, t1, p, tol, escape_radius, (t1 - t0) / steps)
    else:
        grid = time_grid(t0, t1, steps)
        xs, ds = _rk4_fixed(M, rhs, grid, p, escape_radius)
    return Trajectory(grid, xs, ds, M)


def flow_dde(M: EmbeddedManifold, g: TangentField, f: PerturbationField, lam: float,
             phi: History, t1: float, *, steps: int = DEFAULT_STEPS,
             escape_radius: float = ESCAPE_RADIUS, allow_negative: bool = False) -> Trajectory:
    """Method of steps for x' = g(x) + lam f(t, x, x(t - r)), x = phi on [-r, 0].

    r is the span of the history grid (already normalized).  The RK4 grid
    contains every multiple of r so no step straddles a breakpoint, and
    every step is at most r long, so delayed arguments are always read from
    the stored past by Hermite interpolation.
    """
    if not t1 > 0:
        raise ValueError("t1 must be positive")
    if lam < 0 and not allow_negative:
        raise ValueError("lambda must be non-negative")
    r = phi.delay
    grid = time_grid(0.0, t1, steps, delay=r)
    x0 = np.array(phi.at_zero, dtype=float)
    _check_escape(x0, 0.0, escape_radius)

    ts: list[float] = [0.0]
    xs: list[np.ndarray] = [x0]
    ds: list[np.ndarray] = []

    if r == 0.0:
        def delayed(s, x):
            return x
    else:
        def delayed(s, x):
            if s <= 0.0:
                return phi(s)
            j = bisect_right(ts, s) - 1
            if j >= len(ts) - 1:
                return xs[-1]
            return hermite(ts[j], ts[j + 1], xs[j], xs[j + 1], ds[j], ds[j + 1], s)

    if lam == 0.0:
        def rhs(t, x):
            return g(x)
    else:
        def rhs(t, x):
            return g(x) + lam * f(t, x, delayed(t - r, x))

    for n in range(grid.size - 1):
        t, h = grid[n], grid[n + 1] - grid[n]
        x = xs[-1]
        k1 = rhs(t, x)
        ds.append(k1)
        k2 = rhs(t + h / 2, x + h / 2 * k1)
        k3 = rhs(t + h / 2, x + h / 2 * k2)
        k4 = rhs(t + h, x + h * k3)
        x_new = _advance(M, x, h / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
        _check_escape(x_new, grid[n + 1], escape_radius)
        xs.append(x_new)
        ts.append(float(grid[n + 1]))
    ds.append(rhs(grid[-1], xs[-1]))

    if phi.n_nodes > 1:
        times = np.concatenate([phi.grid[:-1], grid])
        states = np.vstack([phi.values[:-1], np.array(xs)])
        derivs = np.vstack([phi.slopes[:-1], np.array(ds)])
    else:
        times, states, derivs = grid, np.array(xs), np.array(ds)
    return Trajectory(times, states, derivs, M, history=phi)


def flow_with_variation(M: EmbeddedManifold, g: TangentField, p, T: float, *,
                        steps: int = DEFAULT_STEPS, basis=None,
                        escape_radius: float = ESCAPE_RADIUS) -> tuple[np.ndarray, np.ndarray]:
    """Endpoint x(p, T) and the ambient k x m image of ``basis`` under dP(p).

    The linearized equation v' = Dg(x) v is integrated alongside the state
    with the same RK4 stages; after each step the columns are projected
    onto the tangent space at the new point.
    """
    x = np.asarray(p, dtype=float)
    V = M.tangent_basis(x) if basis is None else np.asarray(basis, dtype=float)
    grid = time_grid(0.0, T, steps)
    for n in range(grid.size - 1):
        h = grid[n + 1] - grid[n]
        k1, K1 = g(x), g.jacobian(x) @ V
        x2, V2 = x + h / 2 * k1, V + h / 2 * K1
        k2, K2 = g(x2), g.jacobian(x2) @ V2
        x3, V3 = x + h / 2 * k2, V + h / 2 * K2
        k3, K3 = g(x3), g.jacobian(x3) @ V3
        x4, V4 = x + h * k3, V + h * K3
        k4, K4 = g(x4), g.jacobian(x4) @ V4
        x = _advance(M, x, h / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
        _check_escape(x, grid[n + 1], escape_radius)
        V = V + h / 6 * (K1 + 2 * K2 + 2 * K3 + K4)
        if not M.is_euclidean:
            V = M.tangent_projector(x) @ V
    return x, V


def variational_flow(M: EmbeddedManifold, g: TangentField, p, T: float, *,
                     steps: int = DEFAULT_STEPS, escape_radius: float = ESCAPE_RADIUS) -> np.ndarray:
    """m x m matrix of dP(p): T_pM -> T_{P(p)}M in the tangent bases at p and P(p)."""
    end, V = flow_with_variation(M, g, p, T, steps=steps, escape_radius=escape_radius)
    return M.tangent_basis(end).T @ V
