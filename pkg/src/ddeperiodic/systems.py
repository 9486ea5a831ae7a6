"""Built-in example systems, runnable by name."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .branch import ContinuationControls
from .degree import SEEDS_PER_AXIS
from .fields import PerturbationField, TangentField, tangentize, tangentize_perturbation, zero_perturbation
from .integrate import DEFAULT_NH, DEFAULT_STEPS, History, normalize_delay
from .manifold import EmbeddedManifold, Euclidean, Sphere, Torus2
from .poincare import map_h
from .regions import (
    BoxRegion,
    Everywhere,
    HistoryBall,
    HistoryRegion,
    PairRegion,
    RegionPredicate,
)


@dataclass(frozen=True, eq=False)
class System:
    name: str
    description: str
    M: EmbeddedManifold
    g: TangentField
    f: PerturbationField
    region: RegionPredicate
    omega: PairRegion
    n_h: int = DEFAULT_NH
    steps: int = DEFAULT_STEPS
    windows: tuple[HistoryRegion, ...] = ()
    x0: np.ndarray | None = None
    flow_t1: float | None = None
    lam: float = 0.0
    flow_lam: float = 0.0
    guess: Callable[[float], np.ndarray] | None = None
    initial: Callable[[float], np.ndarray] | None = None
    seeds_per_axis: int = SEEDS_PER_AXIS
    controls: ContinuationControls = field(default_factory=ContinuationControls)

    @property
    def period(self) -> float:
        return self.f.period

    @property
    def delay(self):
        return normalize_delay(self.f.delay, self.f.period)

    def constant_history(self, p) -> History:
        return History.constant(self.M, p, self.delay, self.n_h)

    def initial_history(self) -> History:
        """History for flow runs: the configured initial function, else constant at x0."""
        if self.initial is None:
            return self.constant_history(self.x0 if self.x0 is not None else np.zeros(self.M.ambient_dim))
        return History.from_function(self.M, self.initial, self.delay, self.n_h)

    def guess_history(self) -> History:
        if self.guess is None:
            return self.constant_history(self.x0 if self.x0 is not None else np.zeros(self.M.ambient_dim))
        return History.from_function(self.M, self.guess, self.delay, self.n_h)


def _cubic():
    return TangentField(lambda x: x * (1 - x**2), lambda x: np.array([[1 - 3 * x[0] ** 2]]), name="x(1-x^2)")


def _ball(M, p, radius, r, n_h=DEFAULT_NH):
    return HistoryBall(History.constant(M, p, r, n_h), radius)


def cubic1d() -> System:
    M = Euclidean(1)
    r = 0.3
    f = PerturbationField(lambda t, p, q: np.array([np.cos(2 * np.pi * t)]) - 0.5 * q, 1.0, r,
                          name="cos(2 pi t) - q/2")
    return System(
        "cubic1d", "x' = x(1 - x^2) + lambda (cos 2 pi t - x(t - 0.3)/2), T = 1",
        M, _cubic(), f, BoxRegion([-2.0], [2.0]),
        PairRegion(([-2.0], [2.0]), lambda_bound=np.inf, norm_bound=np.inf),
        windows=(_ball(M, [0.0], 0.5, r), _ball(M, [0.0], 1.5, r), _ball(M, [1.0], 0.5, r), _ball(M, [-1.0], 0.4, r)),
        x0=np.array([0.5]), flow_t1=3.0, lam=0.2,
        controls=ContinuationControls(lambda_max=1.0, norm_max=10.0),
    )


def cubic1d_unforced() -> System:
    M = Euclidean(1)
    return System(
        "cubic1d_unforced", "x' = x(1 - x^2) with f = 0: every branch is horizontal",
        M, _cubic(), zero_perturbation(1, 1.0, 0.3), BoxRegion([-2.0], [2.0]),
        PairRegion(([-2.0], [2.0])), x0=np.array([0.5]), flow_t1=3.0, lam=1.0,
        controls=ContinuationControls(lambda_max=2.0, norm_max=10.0),
    )


def sphere_height() -> System:
    M = Sphere(3)
    e3 = np.array([0.0, 0.0, 1.0])
    g = tangentize(M, lambda p: e3, lambda p: np.zeros((3, 3)), name="Pi e3")
    f = tangentize_perturbation(
        M, lambda t, p, q: np.array([np.cos(2 * np.pi * t), np.sin(2 * np.pi * t), 0.0]) + 0.5 * (q - p),
        1.0, 0.25, name="Pi (cos 2 pi t, sin 2 pi t, 0) + (q - p)/2")
    return System(
        "sphere_height", "height gradient on S^2 (zeros at the poles), T = 1",
        M, g, f, Everywhere(M.bounding_box),
        PairRegion(M.bounding_box), n_h=8,
        windows=(_ball(M, e3, 0.5, 0.25, 8), _ball(M, -e3, 0.5, 0.25, 8)),
        x0=M.project(np.array([1.0, 0.0, 0.2])), flow_t1=2.0, lam=0.1,
        controls=ContinuationControls(lambda_max=1.0, norm_max=10.0),
    )


def torus_flow() -> System:
    M = Torus2(2.0, 0.5)
    g = tangentize(M, lambda p: np.array([-p[1], p[0], 0.0]),
                   lambda p: np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]), name="rotation about z")
    return System(
        "torus_flow", "zero-free rotation of the torus about its axis, T = 2 pi",
        M, g, zero_perturbation(3, 2 * np.pi), Everywhere(M.bounding_box), PairRegion(M.bounding_box),
        x0=np.array([2.5, 0.0, 0.0]), flow_t1=2 * np.pi,
    )


def delay_oscillator() -> System:
    M = Euclidean(1)
    f = PerturbationField(lambda t, p, q: np.array([np.sin(t)]) - q, 2 * np.pi, np.pi / 2, name="sin t - q")
    return System(
        "delay_oscillator", "x' = -x + lambda (sin t - x(t - pi/2)); x = sin t at lambda = 1",
        M, TangentField(lambda x: -x, lambda x: -np.eye(1), name="-x"), f,
        BoxRegion([-10.0], [10.0]), PairRegion(([-10.0], [10.0])),
        x0=np.array([1.0]), flow_t1=4 * np.pi, lam=1.0, guess=lambda th: np.array([np.sin(th)]),
        controls=ContinuationControls(lambda_max=5.0, norm_max=100.0),
    )


def resonance() -> System:
    M = Euclidean(2)
    g = TangentField(lambda p: np.array([p[1], -p[0]]), lambda p: np.array([[0.0, 1.0], [-1.0, 0.0]]),
                     name="(y, -x)")
    f = PerturbationField(lambda t, p, q: np.array([0.0, np.sin(t)]), 2 * np.pi, 0.0, name="(0, sin t)")
    return System(
        "resonance", "x'' + x = lambda sin t as a planar system: no 2 pi-periodic solution for lambda > 0",
        M, g, f, BoxRegion([-1.0, -1.0], [1.0, 1.0]), PairRegion(([-1.0, -1.0], [1.0, 1.0])),
        x0=np.array([1.0, 0.0]), flow_t1=2 * np.pi, lam=0.1,
        controls=ContinuationControls(lambda_max=5.0, norm_max=100.0),
    )


def planar_rotation() -> System:
    M = Euclidean(2)
    g = TangentField(lambda p: np.array([p[1], -p[0]]), lambda p: np.array([[0.0, 1.0], [-1.0, 0.0]]),
                     name="(y, -x)")
    T, r, steps = 2 * np.pi, np.pi, 400
    ref = map_h(M, g, np.array([1.0, 0.0]), T, r, steps=steps)
    return System(
        "planar_rotation", "rigid rotation, T = 2 pi, r = pi: every point is 2 pi-periodic",
        M, g, zero_perturbation(2, T, r), BoxRegion([-2.0, -2.0], [2.0, 2.0]), PairRegion(([-2.0, -2.0], [2.0, 2.0])),
        steps=steps, windows=(HistoryBall(ref, 0.1),), x0=np.array([1.0, 0.0]), flow_t1=T,
    )


def limit_cycle() -> System:
    M = Euclidean(2)

    def g(p):
        s = p @ p
        return np.array([p[0] - p[1] - p[0] * s, p[0] + p[1] - p[1] * s])

    def dg(p):
        x, y = p
        return np.array([[1 - 3 * x * x - y * y, -1 - 2 * x * y], [1 - 2 * x * y, 1 - x * x - 3 * y * y]])

    return System(
        "limit_cycle", "Hopf normal form with the unit circle as a 2 pi-periodic orbit (index honesty)",
        M, TangentField(g, dg, name="hopf"), zero_perturbation(2, 2 * np.pi, 0.0),
        BoxRegion([-2.0, -2.0], [2.0, 2.0]), PairRegion(([-2.0, -2.0], [2.0, 2.0])),
        x0=np.array([0.1, 0.0]), flow_t1=4 * np.pi,
        controls=ContinuationControls(lambda_max=1.0, norm_max=10.0),
    )


def degenerate() -> System:
    M = Euclidean(1)
    return System(
        "degenerate", "x' = x^2: a degenerate zero, so no degree and no certificate",
        M, TangentField(lambda x: x**2, lambda x: np.array([[2 * x[0]]]), name="x^2"),
        PerturbationField(lambda t, p, q: np.array([np.sin(2 * np.pi * t)]), 1.0, 0.0, name="sin 2 pi t"),
        BoxRegion([-2.0], [2.0]), PairRegion(([-2.0], [2.0])), x0=np.array([-0.5]), flow_t1=1.0,
    )


EXAMPLES: dict[str, Callable[[], System]] = {
    "cubic1d": cubic1d,
    "cubic1d_unforced": cubic1d_unforced,
    "sphere_height": sphere_height,
    "torus_flow": torus_flow,
    "delay_oscillator": delay_oscillator,
    "resonance": resonance,
    "planar_rotation": planar_rotation,
    "limit_cycle": limit_cycle,
    "degenerate": degenerate,
}


def get_system(name: str) -> System:
    try:
        return EXAMPLES[name]()
    except KeyError:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(sorted(EXAMPLES))}") from None
