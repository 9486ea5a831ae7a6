"""Built-in acceptance checks: closed-form oracles and exact integer identities.

Each check returns a CheckResult; ``run_checks`` prints the pass/fail table.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .branch import (
    ContinuationControls,
    StartingPair,
    branch_certificate,
    continue_branch,
    first_harmonic_amplitude,
    periodic_residual,
    solve_periodic,
)
from .degree import (
    ZERO_TOL,
    box_boundary,
    check_poincare_hopf,
    circle_boundary,
    degree,
    find_zeros,
    winding_degree_planar,
)
from .errors import ComputationError, DegenerateZero, NewtonDiverged, NonHyperbolic, SingularJacobian
from .fields import TangentField
from .index import index_P_at, index_P_region, index_Q_region, verify_fix_correspondence
from .integrate import History, flow_dde, flow_ode, variational_flow
from .manifold import Euclidean, Sphere
from .regions import BallRegion, BoxRegion, Everywhere
from .systems import EXAMPLES, get_system


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


# -- 1. ind(P, U) = deg(-g, U) ----------------------------------------------------

def check_index_degree() -> tuple[bool, str]:
    rows = []
    s = get_system("cubic1d")
    for lo, hi in [(-2.0, 2.0), (-1.5, -0.5), (-0.5, 0.5), (0.5, 1.5)]:
        U = BoxRegion([lo], [hi])
        rows.append((f"cubic1d ({lo:g},{hi:g})", index_P_region(s.M, s.g, U, s.period, check=False),
                     degree(s.M, -s.g, U)))
    s = get_system("sphere_height")
    for label, U in [("S2", Everywhere(s.M.bounding_box)), ("S2 near e3", BallRegion([0, 0, 1], 0.5)),
                     ("S2 near -e3", BallRegion([0, 0, -1], 0.5))]:
        rows.append((label, index_P_region(s.M, s.g, U, s.period, check=False), degree(s.M, -s.g, U)))
    ok = all(a == b for _, a, b in rows)
    return ok, "; ".join(f"{n}: ind={a} deg={b}" for n, a, b in rows)


# -- 2. ind(Q, W) = deg(-g, W_check) = ind(P, W_check) -------------------------------

def check_reduction() -> tuple[bool, str]:
    s = get_system("cubic1d")
    reports = [index_Q_region(s.M, s.g, W, s.period) for W in s.windows]
    ok = len(reports) >= 3 and all(r.passed for r in reports)
    return ok, "; ".join(f"({r.index_Q},{r.degree_neg_g},{r.index_P})" for r in reports)


# -- 3. Poincare-Hopf ------------------------------------------------------------

def check_poincare_hopf_examples() -> tuple[bool, str]:
    reports = [check_poincare_hopf(s.M, s.g) for s in (get_system("sphere_height"), get_system("torus_flow"))]
    ok = [r.degree for r in reports] == [2, 0] and all(r.passed for r in reports)
    return ok, "; ".join(str(r) for r in reports)


# -- 4. degree axioms on random planar fields --------------------------------------

def planar_field(rot: complex, hol, anti) -> TangentField:
    """w(z) = rot prod (z - a_j) prod conj(z - b_k); degree len(hol) - len(anti) around all roots."""

    def w(p):
        z = complex(p[0], p[1])
        v = rot
        for a in hol:
            v *= z - a
        for b in anti:
            v *= np.conj(z - b)
        return np.array([v.real, v.imag])

    return TangentField(w)


def random_roots(rng: np.random.Generator, n: int, spread: float = 0.8) -> list[complex]:
    roots: list[complex] = []
    while len(roots) < n:
        c = complex(*rng.uniform(-spread, spread, 2))
        if abs(c) < spread and all(abs(c - d) > 0.25 for d in roots):
            roots.append(c)
    return roots


def random_planar_field(rng: np.random.Generator, n_hol: int, n_anti: int, spread: float = 0.8):
    roots = random_roots(rng, n_hol + n_anti, spread)
    rot = np.exp(1j * rng.uniform(0, 2 * np.pi))
    return planar_field(rot, roots[:n_hol], roots[n_hol:]), roots


def _edge_points(lo, hi, n: int = 400) -> np.ndarray:
    corners = box_boundary(lo, hi)
    out = []
    for i in range(4):
        a, b = corners[i], corners[(i + 1) % 4]
        out.extend(a + (b - a) * u for u in np.linspace(0, 1, n // 4, endpoint=False))
    return np.array(out)


def check_degree_axioms(seed: int = 0, trials: int = 5) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    R2 = Euclidean(2)
    big = BoxRegion([-2.0, -2.0], [2.0, 2.0])
    fails = {"excision": 0, "additivity": 0, "homotopy": 0, "winding": 0}
    for _ in range(trials):
        n_hol, n_anti = rng.integers(0, 3), rng.integers(0, 3)
        if n_hol + n_anti == 0:
            n_hol = 1
        g, roots = random_planar_field(rng, n_hol, n_anti)
        d = degree(R2, g, big)

        xs, ys = np.array([z.real for z in roots]), np.array([z.imag for z in roots])
        pad = rng.uniform(0.05, 0.3)
        inner = BoxRegion([xs.min() - pad, ys.min() - pad], [xs.max() + pad, ys.max() + pad])
        fails["excision"] += degree(R2, g, inner) != d

        order = np.sort(xs)
        if order.size > 1:
            gaps = np.diff(order)
            i = int(np.argmax(gaps))
            cut = 0.5 * (order[i] + order[i + 1])
        else:
            cut = order[0] + 0.5 * np.sign(-order[0] or 1.0)
        left = BoxRegion([-2.0, -2.0], [cut, 2.0])
        right = BoxRegion([cut, -2.0], [2.0, 2.0])
        fails["additivity"] += degree(R2, g, left) + degree(R2, g, right) != d

        # roots slide linearly to a second configuration inside the disc of radius 0.8
        rot = np.exp(1j * rng.uniform(0, 2 * np.pi))
        target = random_roots(rng, n_hol + n_anti)
        edge = _edge_points([-2.0, -2.0], [2.0, 2.0])
        degs = []
        for s in np.linspace(0.0, 1.0, 11):
            moved = [(1 - s) * a + s * b for a, b in zip(roots, target)]
            h = planar_field(rot, moved[:n_hol], moved[n_hol:])
            if min(np.linalg.norm(h(p)) for p in edge) < 10 * ZERO_TOL:
                degs.append(None)
                continue
            degs.append(degree(R2, h, big))
        fails["homotopy"] += len(set(degs)) != 1 or degs[0] != d
        boundary = box_boundary([-2.0, -2.0], [2.0, 2.0])

        fails["winding"] += winding_degree_planar(g, boundary) != d or winding_degree_planar(
            g, circle_boundary(radius=1.5)) != d
    ok = not any(fails.values())
    return ok, f"{trials} trials per axiom (seed {seed}); failures: " + ", ".join(f"{k}={v}" for k, v in fails.items())


# -- 5. delay oscillator closed form -------------------------------------------------

def delay_oscillator_amplitude(lam: float) -> float:
    return abs(lam / (1 + 1j * (1 - lam)))


def check_delay_oscillator() -> tuple[bool, str]:
    s = get_system("delay_oscillator")
    exact = History.from_function(s.M, lambda th: np.array([np.sin(th)]), s.delay, s.n_h)
    subst = float(np.max(np.abs(periodic_residual(s.M, s.g, s.f, 1.0, exact))))
    rng = np.random.default_rng(1)
    noisy = exact.like(exact.values + 0.05 * rng.standard_normal(exact.values.shape))
    pair = solve_periodic(s.M, s.g, s.f, 1.0, noisy)
    ts = np.linspace(0.0, 2 * np.pi, 400)
    sup_err = float(np.max(np.abs(pair.loop.sample(ts)[:, 0] - np.sin(ts))))
    origin = StartingPair(0.0, s.constant_history([0.0]), -1)
    branch = continue_branch(s.M, s.g, s.f, origin, s.controls)
    amp_err = max(abs(first_harmonic_amplitude(p) - delay_oscillator_amplitude(p.lam)) for p in branch.pairs)
    ok = (sup_err <= 1e-6 and subst <= 1e-6 and amp_err <= 1e-5 and branch.termination.value == "LambdaMax"
          and branch.pairs[-1].lam == 5.0)
    return ok, (f"sup|x - sin t| = {sup_err:.1e}, substitution residual {subst:.1e}, "
                f"max amplitude error {amp_err:.1e} over {len(branch.pairs)} steps to lambda={branch.pairs[-1].lam:g}")


# -- 6. resonance ------------------------------------------------------------------

def check_resonance() -> tuple[bool, str]:
    s = get_system("resonance")
    branch = continue_branch(s.M, s.g, s.f, StartingPair(0.0, s.constant_history([0.0, 0.0]), 1), s.controls)
    lam_max = float(np.max(np.abs(branch.lambdas)))
    try:
        solve_periodic(s.M, s.g, s.f, 0.1, s.constant_history([0.0, 0.0]))
        failure = "converged (unexpected)"
    except (NewtonDiverged, SingularJacobian) as exc:
        failure = type(exc).__name__
    ok = branch.termination.value == "Vertical" and lam_max <= 1e-6 and failure != "converged (unexpected)"
    return ok, f"termination {branch.termination.value}, max |lambda| = {lam_max:.1e}; solve at 0.1: {failure}"


# -- 7. horizontal branch for f = 0 ------------------------------------------------

def check_horizontal() -> tuple[bool, str]:
    s = get_system("cubic1d_unforced")
    branch = continue_branch(s.M, s.g, s.f, StartingPair(0.0, s.constant_history([1.0]), -1), s.controls)
    spread = max(float(np.max(np.abs(p.loop_states() - 1.0))) for p in branch.pairs)
    ok = branch.termination.value == "LambdaMax" and branch.pairs[-1].lam == s.controls.lambda_max and spread <= 1e-9
    return ok, f"lambda reaches {branch.pairs[-1].lam:g}, loop deviation from 1: {spread:.1e}"


# -- 8. fixed point correspondence --------------------------------------------------

def check_fix_correspondence() -> tuple[bool, str]:
    s = get_system("planar_rotation")
    W = s.windows[0]
    report = verify_fix_correspondence(s.M, s.g, W, s.period, s.delay, steps=s.steps)
    check = W.check_set(s.M)
    probes = [report.entries[0].point] if report.entries else []
    empty_check = not any(check.contains(p) for p in probes)
    ok = bool(report.entries) and report.all_fixed and bool(report.outside_check_set) and empty_check
    worst = max((e.q_residual for e in report.entries), default=np.nan)
    return ok, (f"{len(report.entries)} fixed point(s) of P in h^-1(W), {len(report.outside_check_set)} outside "
                f"W_check, max |Q(h(p)) - h(p)| = {worst:.1e}")


# -- 9. certificate soundness ------------------------------------------------------

def check_certificates() -> tuple[bool, str]:
    parts, ok = [], True
    for name in EXAMPLES:
        s = get_system(name)
        try:
            cert = branch_certificate(s.M, s.g, s.f, s.omega, s.controls, n_h=s.n_h, seeds_per_axis=s.seeds_per_axis)
        except DegenerateZero:
            parts.append(f"{name}: no certificate (degenerate)")
            continue
        if cert.issued:
            ok &= not cert.anomalies and all(b.pairs[0].is_trivial for b in cert.branches)
            parts.append(f"{name}: deg {cert.degree}, " + "/".join(b.termination.value for b in cert.branches))
        else:
            parts.append(f"{name}: deg 0")
    return ok, "; ".join(parts)


# -- 10. numerical hygiene --------------------------------------------------------

def _rotation(axis, angle):
    k = np.asarray(axis, dtype=float) / np.linalg.norm(axis)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


def check_hygiene() -> tuple[bool, str]:
    details, ok = [], True
    # step-halving ratios on closed-form flows
    R1 = Euclidean(1)
    decay = TangentField(lambda x: -x, lambda x: -np.eye(1))
    errs = [abs(flow_ode(R1, decay, [1.0], 0.0, 2.0, steps=n).endpoint[0] - np.exp(-2.0)) for n in (10, 20)]
    S = Sphere(3)
    w = np.array([0.3, -0.5, 1.1])
    spin = TangentField(lambda p: np.cross(w, p), lambda p: np.cross(w, np.eye(3)).T)
    p0 = S.project(np.array([0.4, 0.5, 0.6]))
    exact = _rotation(w, np.linalg.norm(w) * 3.0) @ p0
    errs_s = [np.linalg.norm(flow_ode(S, spin, p0, 0.0, 3.0, steps=n).endpoint - exact) for n in (10, 20)]
    ratios = (errs[0] / errs[1], errs_s[0] / errs_s[1])
    ok &= min(ratios) >= 15
    details.append(f"RK4 halving ratios {ratios[0]:.1f}, {ratios[1]:.1f}")

    # variational flow against central differences of P
    worst = 0.0
    for s, p in ((get_system("sphere_height"), S.project(np.array([0.5, -0.3, 0.2]))),
                 (get_system("cubic1d"), np.array([0.3])),
                 (get_system("torus_flow"), get_system("torus_flow").M.project(np.array([2.2, 0.7, 0.3])))):
        M = s.M
        D = variational_flow(M, s.g, p, s.period)
        B0 = M.tangent_basis(p)
        end = flow_ode(M, s.g, p, 0.0, s.period).endpoint
        B1 = M.tangent_basis(end)
        h = 1e-5
        cols = []
        for j in range(B0.shape[1]):
            plus = flow_ode(M, s.g, M.retract(p, h * B0[:, j]), 0.0, s.period).endpoint
            minus = flow_ode(M, s.g, M.retract(p, -h * B0[:, j]), 0.0, s.period).endpoint
            cols.append(B1.T @ (plus - minus) / (2 * h))
        worst = max(worst, float(np.linalg.norm(D - np.column_stack(cols)) / np.linalg.norm(D)))
    ok &= worst <= 1e-4
    details.append(f"variational vs FD rel. error {worst:.1e}")

    # manifold adherence on every trajectory
    sp, tor = get_system("sphere_height"), get_system("torus_flow")
    trajs = [
        flow_ode(S, spin, p0, 0.0, 3.0, steps=50),
        flow_ode(sp.M, sp.g, sp.x0, 0.0, 2.0),
        flow_dde(sp.M, sp.g, sp.f, 0.7, sp.initial_history(), 3.0),
        flow_ode(tor.M, tor.g, tor.x0, 0.0, tor.period),
    ]
    viol = max(t.max_violation() for t in trajs)
    ok &= viol <= 10 * S.on_tolerance
    details.append(f"max manifold violation {viol:.1e}")
    return bool(ok), "; ".join(details)


# -- worked examples -----------------------------------------------------------------

def check_examples() -> tuple[bool, str]:
    R1, R2 = Euclidean(1), Euclidean(2)
    cubic = get_system("cubic1d").g
    rot = TangentField(lambda p: np.array([p[1], -p[0]]), lambda p: np.array([[0.0, 1.0], [-1.0, 0.0]]))
    results = {
        "zeros of x(1-x^2)": [z.local_sign for z in find_zeros(R1, cubic, BoxRegion([-2.0], [2.0]))] == [-1, 1, -1],
        "deg(x(1-x^2)) = -1": degree(R1, cubic, BoxRegion([-2.0], [2.0])) == -1,
        "deg(-x) on (1,2) = 0": degree(R1, TangentField(lambda x: -x), BoxRegion([1.0], [2.0])) == 0,
        "deg rotation = +1": degree(R2, rot, BoxRegion([-1.0, -1.0], [1.0, 1.0])) == 1
        and degree(R2, -rot, BoxRegion([-1.0, -1.0], [1.0, 1.0])) == 1,
        "winding z, rot, z^2": [winding_degree_planar(w, circle_boundary()) for w in
                                (lambda p: p, rot, lambda p: np.array([p[0] ** 2 - p[1] ** 2, 2 * p[0] * p[1]]))]
        == [1, 1, 2],
        "index of ax at 0": [index_P_at(R1, TangentField(lambda x: a * x, lambda x: np.array([[a]])), [0.0], 1.0)
                             for a in (0.5, -0.5)] == [-1, 1],
        "cubic indices": [index_P_at(R1, cubic, [q], 1.0) for q in (0.0, -1.0, 1.0)] == [-1, 1, 1],
        "ind(P,(-2,2)) = +1": index_P_region(R1, cubic, BoxRegion([-2.0], [2.0]), 1.0) == 1,
    }
    try:
        index_P_at(R1, TangentField(lambda x: 0 * x, lambda x: np.zeros((1, 1))), [0.3], 1.0)
        results["g = 0 is NonHyperbolic"] = False
    except NonHyperbolic:
        results["g = 0 is NonHyperbolic"] = True
    s = get_system("sphere_height")
    zeros = find_zeros(s.M, s.g, Everywhere(s.M.bounding_box))
    results["S2 zeros +-e3"] = ([np.round(z.point, 8).tolist() for z in zeros] == [[0, 0, -1], [0, 0, 1]]
                                and [z.local_sign for z in zeros] == [1, 1])
    bad = [k for k, v in results.items() if not v]
    return not bad, f"{len(results) - len(bad)}/{len(results)} examples" + (f"; failed: {', '.join(bad)}" if bad else "")


CRITERIA: list[tuple[str, Callable[..., tuple[bool, str]]]] = [
    ("1 ind(P,U) = deg(-g,U)", check_index_degree),
    ("2 ind(Q,W) = deg(-g,W_check) = ind(P,W_check)", check_reduction),
    ("3 Poincare-Hopf", check_poincare_hopf_examples),
    ("4 degree axioms", check_degree_axioms),
    ("5 delay oscillator closed form", check_delay_oscillator),
    ("6 resonance is vertical", check_resonance),
    ("7 f = 0 branch is horizontal", check_horizontal),
    ("8 fix(P,h^-1(W)) not in W_check", check_fix_correspondence),
    ("9 certificate soundness", check_certificates),
    ("10 numerical hygiene", check_hygiene),
]
CHECKS = CRITERIA + [("worked examples", check_examples)]


def run_check(name: str, fn, seed: int | None = None) -> CheckResult:
    start = time.perf_counter()
    try:
        passed, detail = fn(seed) if (seed is not None and fn is check_degree_axioms) else fn()
    except ComputationError as exc:
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, bool(passed), detail, time.perf_counter() - start)


def run_checks(seed: int = 0, echo=print, checks=None) -> list[CheckResult]:
    results = []
    for name, fn in checks or CHECKS:
        res = run_check(name, fn, seed)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
