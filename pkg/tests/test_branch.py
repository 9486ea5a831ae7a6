import numpy as np
import pytest

from ddeperiodic.branch import (
    ContinuationControls,
    StartingPair,
    Termination,
    branch_certificate,
    continue_branch,
    first_harmonic_amplitude,
    is_zero_perturbation,
    periodic_residual,
    solve_periodic,
    trivial_starting_pairs,
)
from ddeperiodic.errors import DegenerateZero, NewtonDiverged, SingularJacobian
from ddeperiodic.fields import PerturbationField, zero_perturbation
from ddeperiodic.integrate import History, flow_dde
from ddeperiodic.systems import get_system
from ddeperiodic.verify import delay_oscillator_amplitude


@pytest.fixture(scope="module")
def oscillator():
    s = get_system("delay_oscillator")
    branch = continue_branch(s.M, s.g, s.f, StartingPair(0.0, s.constant_history([0.0]), -1), s.controls)
    return s, branch


def test_sin_is_periodic_solution():
    s = get_system("delay_oscillator")
    exact = History.from_function(s.M, lambda th: np.array([np.sin(th)]), s.delay, s.n_h)
    assert np.max(np.abs(periodic_residual(s.M, s.g, s.f, 1.0, exact))) < 1e-6


def test_solve_from_perturbed_guess():
    s = get_system("delay_oscillator")
    guess = History.from_function(s.M, lambda th: np.array([0.8 * np.sin(th + 0.2)]), s.delay, s.n_h)
    pair = solve_periodic(s.M, s.g, s.f, 1.0, guess)
    ts = np.linspace(0.0, 2 * np.pi, 200)
    assert np.max(np.abs(pair.loop.sample(ts)[:, 0] - np.sin(ts))) < 1e-6
    assert pair.residual <= 1e-8 and not pair.is_trivial


def test_branch_reaches_lambda_max(oscillator):
    s, branch = oscillator
    assert branch.termination is Termination.LAMBDA_MAX and not branch.anomaly
    assert branch.pairs[-1].lam == s.controls.lambda_max


def test_branch_amplitude_closed_form(oscillator):
    _, branch = oscillator
    for pair in branch.pairs:
        assert abs(first_harmonic_amplitude(pair) - delay_oscillator_amplitude(pair.lam)) <= 1e-5


def test_origin_is_trivial(oscillator):
    s, branch = oscillator
    first = branch.pairs[0]
    assert first.is_trivial and first.lam == 0.0 and first.residual <= 1e-8
    assert np.linalg.norm(s.g(first.history.at_zero)) <= 1e-8


def test_pairs_reintegrate(oscillator):
    s, branch = oscillator
    for pair in branch.pairs:
        traj = flow_dde(s.M, s.g, s.f, pair.lam, pair.history, s.period)
        assert np.max(np.abs(traj.states[traj.start:] - pair.loop_states())) <= 10 * s.controls.tol


def test_branch_connectivity(oscillator):
    _, branch = oscillator
    for p0, p1, a0, a1 in zip(branch.pairs, branch.pairs[1:], branch.arclength, branch.arclength[1:]):
        ds = a1 - a0
        assert ds > 0
        assert abs(p1.lam - p0.lam) <= ds + 1e-12
        assert abs(p1.sup_norm - p0.sup_norm) <= ds + 1e-12


def test_resonance_vertical_and_unsolvable():
    s = get_system("resonance")
    branch = continue_branch(s.M, s.g, s.f, StartingPair(0.0, s.constant_history([0.0, 0.0]), 1), s.controls)
    assert branch.termination is Termination.VERTICAL
    assert np.max(np.abs(branch.lambdas)) <= 1e-6
    with pytest.raises((NewtonDiverged, SingularJacobian)):
        solve_periodic(s.M, s.g, s.f, 0.1, s.constant_history([0.0, 0.0]))


def test_unforced_branch_is_horizontal():
    s = get_system("cubic1d_unforced")
    branch = continue_branch(s.M, s.g, s.f, StartingPair(0.0, s.constant_history([-1.0]), -1), s.controls)
    assert branch.termination is Termination.LAMBDA_MAX
    assert all(np.max(np.abs(p.loop_states() + 1.0)) <= 1e-9 for p in branch.pairs)


def test_zero_perturbation_probe():
    s = get_system("cubic1d")
    assert is_zero_perturbation(zero_perturbation(1, 1.0), s.M, [[0.0]])
    assert not is_zero_perturbation(s.f, s.M, [[0.0]])


def test_trivial_starting_pairs_cubic():
    s = get_system("cubic1d")
    pairs = trivial_starting_pairs(s.M, s.g, s.region, s.delay, n_h=s.n_h)
    assert [round(float(p.history.at_zero[0]), 8) for p in pairs] == [-1.0, 0.0, 1.0]
    assert all(p.lam == 0.0 and p.history.n_nodes == s.n_h + 1 for p in pairs)


def test_bounded_omega_terminates_at_boundary():
    s = get_system("delay_oscillator")
    from ddeperiodic.regions import PairRegion
    omega = PairRegion(([-10.0], [10.0]), lambda_bound=2.0, norm_bound=100.0)
    ctl = ContinuationControls(lambda_max=5.0, norm_max=100.0, omega=omega)
    branch = continue_branch(s.M, s.g, s.f, StartingPair(0.0, s.constant_history([0.0]), -1), ctl)
    assert branch.termination is Termination.LEFT_OMEGA and not branch.anomaly


def test_certificate_resonance_consistent():
    s = get_system("resonance")
    cert = branch_certificate(s.M, s.g, s.f, s.omega, s.controls)
    assert cert.issued and cert.degree == 1
    assert cert.branches[0].termination is Termination.VERTICAL
    assert "certificate issued" in str(cert)


def test_no_certificate_when_degree_zero():
    s = get_system("torus_flow")
    cert = branch_certificate(s.M, s.g, s.f, s.omega, s.controls)
    assert not cert.issued and "no certificate" in str(cert) and "does not rule out" in str(cert)


def test_degenerate_gives_no_certificate():
    s = get_system("degenerate")
    with pytest.raises(DegenerateZero):
        branch_certificate(s.M, s.g, s.f, s.omega, s.controls)
