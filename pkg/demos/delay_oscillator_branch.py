"""Follow the harmonic solutions of x' = -x + lambda (sin t - x(t - pi/2)) from lambda = 0.

The exact amplitude of the T-periodic solution is |lambda / (1 + i(1 - lambda))|;
the table compares it with the first Fourier harmonic of each computed loop.
"""
import numpy as np

from ddeperiodic import StartingPair, continue_branch, get_system, solve_periodic
from ddeperiodic.branch import first_harmonic_amplitude


def main():
    s = get_system("delay_oscillator")
    origin = StartingPair(0.0, s.constant_history([0.0]), -1)
    branch = continue_branch(s.M, s.g, s.f, origin, s.controls)
    print(f"{'lambda':>8} {'amplitude':>12} {'exact':>12} {'error':>9}")
    for pair in branch.pairs:
        exact = abs(pair.lam / (1 + 1j * (1 - pair.lam)))
        amp = first_harmonic_amplitude(pair)
        print(f"{pair.lam:8.4f} {amp:12.8f} {exact:12.8f} {abs(amp - exact):9.1e}")
    print(branch)

    # re-solve at lambda = 1 exactly, starting from the nearest branch point
    near = min(branch.pairs, key=lambda p: abs(p.lam - 1.0))
    one = solve_periodic(s.M, s.g, s.f, 1.0, near.history)
    ts = np.linspace(0, 2 * np.pi, 9)
    print(f"\nloop at lambda = 1 (from lambda = {near.lam:.3f}) against sin t:")
    for t, x in zip(ts, one.loop.sample(ts)[:, 0]):
        print(f"  t = {t:5.2f}  x = {x: .6f}  sin t = {np.sin(t): .6f}")


if __name__ == "__main__":
    main()
