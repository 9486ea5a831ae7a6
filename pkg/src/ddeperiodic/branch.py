"""Harmonic solutions of x' = g(x) + lam f(t, x, x(t - r)) and branches of T-periodic pairs.

Unknowns are histories on the node grid of [-r, 0]; a history phi gives a
T-periodic solution exactly when Q_lam(phi) = phi.  Branches are followed
by pseudo-arclength continuation in (lam, node tangent coordinates).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .degree import SEEDS_PER_AXIS, degree, find_zeros
from .errors import (
    NewtonDiverged,
    OutsideDomain,
    RankDeficient,
    RetractionDiverged,
    SingularJacobian,
)
from .fields import PerturbationField, TangentField
from .integrate import DEFAULT_NH, DEFAULT_STEPS, History, Trajectory, normalize_delay
from .manifold import EmbeddedManifold
from .poincare import translation_Q_lambda
from .regions import PairRegion, RegionPredicate

PERIODIC_TOL = 1e-8
ZERO_TOL = 1e-8
# smallest singular value of the shooting Jacobian, relative to max(1, largest), treated as singular
SINGULAR_RCOND = 1e-6
FD_STEP = 1e-7


class Termination(str, Enum):
    LAMBDA_MAX = "LambdaMax"
    NORM_MAX = "NormMax"
    LEFT_OMEGA = "LeftOmega"
    VERTICAL = "Vertical"
    STEP_FAILURE = "StepFailure"


@dataclass(frozen=True, eq=False)
class StartingPair:
    lam: float
    history: History
    local_sign: int = 0


@dataclass(frozen=True, eq=False)
class PeriodicPair:
    lam: float
    history: History
    loop: Trajectory
    residual: float
    is_trivial: bool = False

    @property
    def sup_norm(self) -> float:
        return self.loop.sup_norm(0.0)

    def loop_states(self) -> np.ndarray:
        return self.loop.states[self.loop.start:]

    def loop_times(self) -> np.ndarray:
        return self.loop.times[self.loop.start:]


@dataclass(frozen=True, eq=False)
class Branch:
    origin: StartingPair
    pairs: list[PeriodicPair]
    arclength: list[float]
    termination: Termination
    anomaly: bool = False
    detail: str = ""

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.pairs])

    def __str__(self):
        flag = " ANOMALY" if self.anomaly else ""
        last = self.pairs[-1]
        return (f"branch from {np.round(self.origin.history.at_zero, 10).tolist()}: {len(self.pairs)} pairs, "
                f"lambda_end = {last.lam:.6g}, sup = {last.sup_norm:.6g}, "
                f"termination {self.termination.value}{flag}" + (f" ({self.detail})" if self.detail else ""))


@dataclass(frozen=True)
class ContinuationControls:
    lambda_max: float = 5.0
    norm_max: float = 1e3
    ds0: float = 1e-2
    ds_min: float = 1e-6
    ds_max: float = 0.5
    omega: PairRegion | None = None
    lambda_vert_tol: float = 1e-6
    n_vert: int = 5
    max_steps: int = 2000
    tol: float = PERIODIC_TOL
    steps: int = DEFAULT_STEPS
    corrector_iter: int = 8


# -- residual in a chart of node tangent coordinates -------------------------------

class _Chart:
    """Histories near a base history psi, written phi_i = retract(psi_i, B_i c_i)."""

    def __init__(self, M, g, f, base: History, T, steps):
        self.M, self.g, self.f, self.base, self.T, self.steps = M, g, f, base, T, steps
        self.bases = [M.tangent_basis(x) for x in base.values]
        self.m = self.bases[0].shape[1]
        self.size = self.m * base.n_nodes

    def history(self, c) -> History:
        c = np.asarray(c, dtype=float).reshape(self.base.n_nodes, self.m)
        if not np.any(c):
            return self.base
        vals = np.array([self.M.retract(x, B @ ci) for x, B, ci in zip(self.base.values, self.bases, c)])
        return self.base.like(vals)

    def coords(self, phi: History) -> np.ndarray:
        return np.concatenate([B.T @ (v - x) for B, v, x in zip(self.bases, phi.values, self.base.values)])

    def evaluate(self, lam, c):
        """(F, phi, loop) with F_i = B_i^T (Q_lam(phi)_i - phi_i)."""
        phi = self.history(c)
        res = translation_Q_lambda(self.M, self.g, self.f, lam, phi, self.T, steps=self.steps,
                                   allow_negative=True)
        F = np.concatenate([B.T @ (y - x) for B, y, x in zip(self.bases, res.output.values, phi.values)])
        return F, phi, res.underlying

    def jacobian(self, lam, c, F0, with_lambda=False) -> np.ndarray:
        cols = []
        if with_lambda:
            h = FD_STEP * (1.0 + abs(lam))
            cols.append((self.evaluate(lam + h, c)[0] - F0) / h)
        for j in range(self.size):
            h = FD_STEP * (1.0 + abs(c[j]))
            e = c.copy()
            e[j] += h
            cols.append((self.evaluate(lam, e)[0] - F0) / h)
        return np.column_stack(cols)


def _sup(F, m) -> float:
    return float(np.max(np.linalg.norm(F.reshape(-1, m), axis=1))) if F.size else 0.0


def periodic_residual(M: EmbeddedManifold, g: TangentField, f: PerturbationField, lam: float, phi: History,
                      T: float | None = None, *, steps: int = DEFAULT_STEPS) -> np.ndarray:
    """Node-wise tangent components of Q_lam(phi) - phi, length m * (n_h + 1)."""
    T = f.period if T is None else T
    return _Chart(M, g, f, phi, T, steps).evaluate(lam, np.zeros(M.dim * phi.n_nodes))[0]


def _is_trivial(M, g, lam, loop: Trajectory) -> bool:
    states = loop.states[loop.start:]
    if lam != 0.0 or np.max(np.linalg.norm(states - states[0], axis=1)) > ZERO_TOL:
        return False
    return float(np.linalg.norm(g(states[0]))) <= ZERO_TOL


def _make_pair(M, g, lam, phi, loop, F, m) -> PeriodicPair:
    return PeriodicPair(float(lam), phi, loop, _sup(F, m), _is_trivial(M, g, lam, loop))


def _check_rcond(J):
    sv = np.linalg.svd(J, compute_uv=False)
    if sv.size and sv[-1] < SINGULAR_RCOND * max(1.0, sv[0]):
        raise SingularJacobian(f"shooting Jacobian is singular (sigma_min = {sv[-1]:.2e}): "
                               "possible bifurcation or resonance")


def solve_periodic(M: EmbeddedManifold, g: TangentField, f: PerturbationField, lam: float, phi_guess: History,
                   T: float | None = None, *, tol: float = PERIODIC_TOL, max_iter: int = 25,
                   steps: int = DEFAULT_STEPS) -> PeriodicPair:
    """Newton on Q_lam(phi) = phi from phi_guess, with a chord Jacobian refreshed on slow progress."""
    T = f.period if T is None else T
    chart = _Chart(M, g, f, phi_guess, T, steps)
    c = np.zeros(chart.size)
    try:
        F, phi, loop = chart.evaluate(lam, c)
    except OutsideDomain as exc:
        raise NewtonDiverged(f"initial guess left the domain: {exc}") from exc
    res = _sup(F, chart.m)
    J, fresh = None, False
    for _ in range(max_iter):
        if res <= tol:
            return _make_pair(M, g, lam, phi, loop, F, chart.m)
        if J is None:
            J, fresh = chart.jacobian(lam, c, F), True
            _check_rcond(J)
        step = np.linalg.solve(J, -F)
        alpha, accepted = 1.0, False
        for _ in range(6):
            try:
                trial = c + alpha * step
                F_t, phi_t, loop_t = chart.evaluate(lam, trial)
            except (OutsideDomain, RankDeficient, RetractionDiverged):
                alpha *= 0.5
                continue
            res_t = _sup(F_t, chart.m)
            if res_t < res:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            if fresh:
                raise NewtonDiverged(f"no residual decrease at lambda={lam} (residual {res:.2e})")
            J = None
            continue
        slow = res_t > 0.25 * res
        c, F, phi, loop, res = trial, F_t, phi_t, loop_t, res_t
        if slow:
            J = None
        else:
            fresh = False
    if res <= tol:
        return _make_pair(M, g, lam, phi, loop, F, chart.m)
    raise NewtonDiverged(f"no convergence in {max_iter} iterations at lambda={lam} (residual {res:.2e})")


# -- starting pairs ----------------------------------------------------------

def trivial_starting_pairs(M: EmbeddedManifold, g: TangentField, region: RegionPredicate, r=0.0, *,
                           n_h: int = DEFAULT_NH, seeds_per_axis: int = SEEDS_PER_AXIS) -> list[StartingPair]:
    """(0, constant history at q) for each zero q of g in region."""
    return [StartingPair(0.0, History.constant(M, z.point, r, n_h), z.local_sign)
            for z in find_zeros(M, g, region, seeds_per_axis)]


def is_zero_perturbation(f: PerturbationField, M: EmbeddedManifold, around, probes: int = 16, seed: int = 0) -> bool:
    """True when f vanishes at every random probe (t, p, q) near the given points."""
    rng = np.random.default_rng(seed)
    around = np.atleast_2d(np.asarray(around, dtype=float))
    for _ in range(probes):
        t = rng.uniform(0.0, f.period)
        p, q = (around[rng.integers(len(around))] + rng.normal(scale=0.5, size=around.shape[1]) for _ in range(2))
        if not M.is_euclidean:
            try:
                p, q = M.project(p), M.project(q)
            except (RankDeficient, RetractionDiverged):
                continue
        if np.any(f(t, p, q) != 0.0):
            return False
    return True


# -- continuation --------------------------------------------------------------

def _weighted(v, n_nodes) -> float:
    return float(np.sqrt(v[0] ** 2 + (v[1:] @ v[1:]) / n_nodes))


def _secant(chart_new: _Chart, lam_new, lam_old, phi_old: History) -> np.ndarray:
    v = np.concatenate([[lam_new - lam_old], -chart_new.coords(phi_old)])
    return v / _weighted(v, chart_new.base.n_nodes)


def _null_direction(J_aug, n_nodes) -> np.ndarray:
    """Null vector of [F_lam F_c] preferring the largest lambda component."""
    _, s, vt = np.linalg.svd(J_aug)
    tol = SINGULAR_RCOND * max(1.0, s[0] if s.size else 1.0)
    rank = int(np.sum(s > tol))
    null = vt[rank:]
    if null.shape[0] == 0:
        null = vt[-1:]
    v = null[int(np.argmax(np.abs(null[:, 0])))]
    if v[0] < 0 or (v[0] == 0 and v[np.argmax(np.abs(v))] < 0):
        v = -v
    return v / _weighted(v, n_nodes)


def _horizontal_branch(M, g, f, origin: StartingPair, T, ctl: ContinuationControls) -> Branch:
    lams = np.arange(0.0, ctl.lambda_max, ctl.ds_max)
    lams = np.append(lams, ctl.lambda_max)
    chart = _Chart(M, g, f, origin.history, T, ctl.steps)
    pairs, arc = [], []
    for lam in lams:
        F, phi, loop = chart.evaluate(lam, np.zeros(chart.size))
        pairs.append(_make_pair(M, g, lam, phi, loop, F, chart.m))
        arc.append(float(lam))
    return Branch(origin, pairs, arc, Termination.LAMBDA_MAX, detail="f vanishes identically: horizontal branch")


def continue_branch(M: EmbeddedManifold, g: TangentField, f: PerturbationField, origin: StartingPair,
                    controls: ContinuationControls | None = None, T: float | None = None) -> Branch:
    """Pseudo-arclength continuation of T-periodic pairs from a trivial starting pair."""
    ctl = controls or ContinuationControls()
    T = f.period if T is None else T
    if is_zero_perturbation(f, M, origin.history.values):
        return _horizontal_branch(M, g, f, origin, T, ctl)

    chart = _Chart(M, g, f, origin.history, T, ctl.steps)
    n = origin.history.n_nodes
    F0, phi0, loop0 = chart.evaluate(origin.lam, np.zeros(chart.size))
    pairs = [_make_pair(M, g, origin.lam, phi0, loop0, F0, chart.m)]
    arc = [0.0]

    # first step: natural solve at lam + ds0, else a null direction of the augmented Jacobian
    tangent = None
    try:
        first = solve_periodic(M, g, f, origin.lam + ctl.ds0, origin.history, T, tol=ctl.tol, steps=ctl.steps)
        new_chart = _Chart(M, g, f, first.history, T, ctl.steps)
        tangent = _secant(new_chart, first.lam, origin.lam, origin.history)
        dist = _weighted(np.concatenate([[first.lam - origin.lam], -new_chart.coords(origin.history)]), n)
        pairs.append(first)
        arc.append(dist)
        chart = new_chart
    except (SingularJacobian, NewtonDiverged):
        J = chart.jacobian(origin.lam, np.zeros(chart.size), F0, with_lambda=True)
        tangent = _null_direction(J, n)

    ds = ctl.ds0
    vertical_run = 0
    for _ in range(ctl.max_steps):
        cur = pairs[-1]
        lam_c = cur.lam
        while True:
            if ds < ctl.ds_min:
                return _finish(origin, pairs, arc, Termination.STEP_FAILURE, ctl,
                               f"step size fell below {ctl.ds_min:g} at lambda={lam_c:.6g}")
            pred = ds * tangent
            lam_p = lam_c + pred[0]
            if lam_p > ctl.lambda_max:
                # land exactly on lambda_max
                try:
                    guess = chart.history(pred[1:] * (ctl.lambda_max - lam_c) / pred[0])
                    last = solve_periodic(M, g, f, ctl.lambda_max, guess, T, tol=ctl.tol, steps=ctl.steps)
                except (SingularJacobian, NewtonDiverged, OutsideDomain, RankDeficient, RetractionDiverged):
                    ds *= 0.5
                    continue
                new_chart = _Chart(M, g, f, last.history, T, ctl.steps)
                v = np.concatenate([[last.lam - lam_c], -new_chart.coords(cur.history)])
                pairs.append(last)
                arc.append(arc[-1] + _weighted(v, n))
                return _finish(origin, pairs, arc, Termination.LAMBDA_MAX, ctl)
            try:
                lam_n, c_n, F_n, phi_n, loop_n = _correct(chart, lam_c, tangent, ds, pred, n, ctl)
            except (SingularJacobian, NewtonDiverged, OutsideDomain, RankDeficient, RetractionDiverged):
                ds *= 0.5
                continue
            break
        new = _make_pair(M, g, lam_n, phi_n, loop_n, F_n, chart.m)
        new_chart = _Chart(M, g, f, phi_n, T, ctl.steps)
        step_vec = np.concatenate([[lam_n - lam_c], -new_chart.coords(cur.history)])
        pairs.append(new)
        arc.append(arc[-1] + _weighted(step_vec, n))
        tangent_new = step_vec / _weighted(step_vec, n)
        tangent = tangent_new
        chart = new_chart
        ds = min(2.0 * ds, ctl.ds_max)

        if lam_n < -ctl.lambda_vert_tol:
            return _finish(origin, pairs, arc, Termination.LEFT_OMEGA, ctl, "lambda became negative")
        if new.sup_norm >= ctl.norm_max:
            return _finish(origin, pairs, arc, Termination.NORM_MAX, ctl)
        if ctl.omega is not None and not ctl.omega.contains(max(lam_n, 0.0), new.loop_states()):
            return _finish(origin, pairs, arc, Termination.LEFT_OMEGA, ctl)
        vertical_run = vertical_run + 1 if abs(lam_n) <= ctl.lambda_vert_tol else 0
        if vertical_run >= ctl.n_vert:
            return _finish(origin, pairs, arc, Termination.VERTICAL, ctl,
                           f"lambda stayed within {ctl.lambda_vert_tol:g} of 0 for {vertical_run} steps")
    return _finish(origin, pairs, arc, Termination.STEP_FAILURE, ctl, f"step budget {ctl.max_steps} exhausted")


def _correct(chart: _Chart, lam_c, tangent, ds, pred, n, ctl):
    """Newton on (F = 0, <tangent, x - x_c> = ds); min-norm steps tolerate rank loss."""
    x = pred.copy()
    J = None
    res = np.inf
    for it in range(ctl.corrector_iter):
        F, phi, loop = chart.evaluate(lam_c + x[0], x[1:])
        arc_eq = tangent[0] * x[0] + (tangent[1:] @ x[1:]) / n - ds
        res_new = max(_sup(F, chart.m), abs(arc_eq))
        if _sup(F, chart.m) <= ctl.tol and abs(arc_eq) <= ctl.tol:
            return lam_c + x[0], x[1:], F, phi, loop
        if res_new >= res and it > 0:
            if J is None:
                raise NewtonDiverged("corrector stalled")
            J = None
        res = res_new
        if J is None:
            Jf = chart.jacobian(lam_c + x[0], x[1:], F, with_lambda=True)
            J = np.vstack([Jf, np.concatenate([[tangent[0]], tangent[1:] / n])])
        rhs = -np.concatenate([F, [arc_eq]])
        dx = np.linalg.lstsq(J, rhs, rcond=None)[0]
        if _weighted(dx, n) > 4.0 * ds + 1e-3:
            raise NewtonDiverged("corrector step too large")
        x = x + dx
    raise NewtonDiverged("corrector did not converge")


def _finish(origin, pairs, arc, reason: Termination, ctl: ContinuationControls, detail: str = "") -> Branch:
    anomaly = False
    if reason is Termination.STEP_FAILURE:
        last = pairs[-1]
        inside = ctl.omega is None or ctl.omega.contains(max(last.lam, 0.0), last.loop_states())
        anomaly = inside and last.lam < ctl.lambda_max and last.sup_norm < ctl.norm_max
    return Branch(origin, pairs, arc, reason, anomaly, detail)


def first_harmonic_amplitude(pair: PeriodicPair, samples: int = 256) -> float:
    """Euclidean norm of the first Fourier coefficient vector of the loop (|c| for c e^{i w t})."""
    T = pair.loop.t1
    ts = np.arange(samples) * T / samples
    xs = pair.loop.sample(ts)
    coef = 2.0 / samples * (np.exp(-2j * np.pi * ts / T) @ xs)
    return float(np.linalg.norm(coef))


# -- certificates ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Certificate:
    degree: int | None
    branches: list[Branch] = field(default_factory=list)
    reason: str = ""

    @property
    def issued(self) -> bool:
        return bool(self.degree)

    @property
    def anomalies(self) -> list[Branch]:
        return [b for b in self.branches if b.anomaly]

    def __str__(self):
        if self.degree is None:
            head = f"no certificate: deg(g, Omega cap M) is undefined ({self.reason})"
        elif not self.degree:
            head = "no certificate: deg(g, Omega cap M) = 0 (this does not rule out branches)"
        else:
            head = (f"certificate issued: deg(g, Omega cap M) = {self.degree} != 0, so Omega contains a connected "
                    "set of nontrivial T-periodic pairs, not compact in Omega, meeting the trivial pairs")
        lines = [head]
        lines += [f"  witness {i}: {b}" for i, b in enumerate(self.branches)]
        if self.anomalies:
            lines.append("  ANOMALY: a certified branch dead-ended strictly inside a bounded Omega")
        return "\n".join(lines)


def branch_certificate(M: EmbeddedManifold, g: TangentField, f: PerturbationField, omega: PairRegion,
                       controls: ContinuationControls | None = None, *, n_h: int = DEFAULT_NH,
                       seeds_per_axis: int = SEEDS_PER_AXIS) -> Certificate:
    """Degree test for the existence of a branch, with numerical witness branches."""
    slice_ = omega.slice_at_zero(M)
    deg = degree(M, g, slice_, seeds_per_axis)
    if not deg:
        return Certificate(0)
    r = normalize_delay(f.delay, f.period)
    ctl = controls or ContinuationControls(omega=omega)
    if ctl.omega is None:
        ctl = ContinuationControls(**{**ctl.__dict__, "omega": omega})
    branches = [continue_branch(M, g, f, sp, ctl) for sp in
                trivial_starting_pairs(M, g, slice_, r, n_h=n_h, seeds_per_axis=seeds_per_axis)]
    return Certificate(deg, branches)

