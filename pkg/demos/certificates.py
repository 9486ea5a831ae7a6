"""Degree certificates and their witness branches for every built-in system."""
from ddeperiodic import EXAMPLES, branch_certificate, get_system
from ddeperiodic.errors import ComputationError


def main():
    for name in EXAMPLES:
        s = get_system(name)
        print(f"== {name}: {s.description}")
        try:
            print(branch_certificate(s.M, s.g, s.f, s.omega, s.controls, n_h=s.n_h, seeds_per_axis=s.seeds_per_axis))
        except ComputationError as exc:
            print(f"no certificate: {type(exc).__name__}: {exc}")
        print()


if __name__ == "__main__":
    main()
