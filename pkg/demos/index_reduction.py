"""The index of the translation operator Q on a history window equals the degree
of -g on its check set, and the index of the Poincare map there.

Also shows why this is not a tautology: for a rigid rotation with T = 2 pi,
the fixed point p = (1, 0) of P has h(p) inside a tube around its own orbit,
yet the constant history at p is far from that tube.
"""
from ddeperiodic import get_system, index_Q_region, verify_fix_correspondence


def main():
    s = get_system("cubic1d")
    print("x' = x(1 - x^2), T = 1, r = 0.3")
    for W in s.windows:
        print(f"  {W!r}: {index_Q_region(s.M, s.g, W, s.period)}")

    rot = get_system("planar_rotation")
    report = verify_fix_correspondence(rot.M, rot.g, rot.windows[0], rot.period, rot.delay, steps=rot.steps)
    print("\nrotation, W = sup-norm ball of radius 0.1 around h((1, 0)):")
    print(report)


if __name__ == "__main__":
    main()
