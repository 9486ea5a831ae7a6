"""Command-line front end: ``ddeperiodic {degree,index,flow,periodic,branch,verify}``.

Exit codes: 0 success, 1 domain error or failed check, 2 config error, 3 ANOMALY.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import records
from .branch import branch_certificate, solve_periodic
from .config import load_config_file
from .degree import degree, find_zeros
from .errors import ComputationError, ConfigError
from .index import index_P_region, index_Q_region, verify_fix_correspondence
from .integrate import flow_dde, flow_ode
from .systems import EXAMPLES, System, get_system
from .verify import run_checks

EXIT_OK, EXIT_DOMAIN, EXIT_CONFIG, EXIT_ANOMALY = 0, 1, 2, 3


class _Output:
    """Records go to --out (or stdout); text goes to stdout unless records are using it."""

    def __init__(self, args, records_default_stdout: bool):
        self.args = args
        self.to_stdout = args.out is None and records_default_stdout
        self.text_stream = sys.stderr if self.to_stdout else sys.stdout

    def say(self, text: str = ""):
        if not self.args.quiet:
            print(text, file=self.text_stream)

    def write(self, recs):
        if self.args.out is not None:
            with open(self.args.out, "w", encoding="utf-8") as fh:
                records.write_records(recs, fh)
        elif self.to_stdout:
            records.write_records(recs, sys.stdout)


def _system(args) -> System:
    if args.config and args.example:
        raise ConfigError("give either --config or --example, not both")
    if args.config:
        return load_config_file(args.config)
    if args.example:
        try:
            return get_system(args.example)
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from None
    raise ConfigError("need --config PATH or --example NAME")


def _fmt_point(p) -> str:
    return "[" + ", ".join(f"{v: .10f}" for v in np.asarray(p)) + "]"


def cmd_degree(args) -> int:
    s = _system(args)
    out = _Output(args, records_default_stdout=False)
    zeros = find_zeros(s.M, s.g, s.region, s.seeds_per_axis)
    deg = degree(s.M, s.g, s.region, s.seeds_per_axis)
    out.say(str(deg))
    out.say(f"{'zero':<44}{'sign':>6}{'|g|':>12}")
    for z in zeros:
        out.say(f"{_fmt_point(z.point):<44}{z.local_sign:>+6d}{z.residual:>12.2e}")
    if args.quiet:
        print(deg)
    out.write(records.zero_records(zeros))
    return EXIT_OK


def cmd_index(args) -> int:
    s = _system(args)
    out = _Output(args, records_default_stdout=False)
    if args.correspondence:
        if not s.windows:
            raise ConfigError("--correspondence needs at least one window")
        for i, W in enumerate(s.windows):
            out.say(f"window {i}:")
            out.say(str(verify_fix_correspondence(s.M, s.g, W, s.period, s.delay, steps=s.steps)))
        return EXIT_OK
    if not s.windows:
        ind = index_P_region(s.M, s.g, s.region, s.period, steps=s.steps, check=False)
        deg = degree(s.M, -s.g, s.region, s.seeds_per_axis)
        out.say(f"ind(P,U) = {ind}, deg(-g,U) = {deg}: {'pass' if ind == deg else 'FAIL'}")
        return EXIT_OK if ind == deg else EXIT_DOMAIN
    ok = True
    for i, W in enumerate(s.windows):
        report = index_Q_region(s.M, s.g, W, s.period, s.delay, degree_seeds=s.seeds_per_axis, steps=s.steps)
        out.say(f"window {i}: {report}")
        ok &= report.passed
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_flow(args) -> int:
    s = _system(args)
    out = _Output(args, records_default_stdout=True)
    lam = s.flow_lam if args.lam is None else args.lam
    t1 = args.t1 if args.t1 is not None else (s.flow_t1 or s.period)
    if lam == 0.0:
        x0 = s.initial_history().at_zero
        traj = flow_ode(s.M, s.g, x0, 0.0, t1, steps=max(1, int(round(s.steps * t1 / s.period))))
        kind = "ODE"
    else:
        traj = flow_dde(s.M, s.g, s.f, lam, s.initial_history(), t1,
                        steps=max(1, int(round(s.steps * t1 / s.period))))
        kind = "DDE"
    out.write(records.trajectory_records(traj))
    out.say(f"{kind} flow, lambda = {lam:g}, t in [{traj.t0:g}, {traj.t1:g}], x(t1) = {_fmt_point(traj.endpoint)}, "
            f"max manifold violation {traj.max_violation():.1e}")
    return EXIT_OK


def cmd_periodic(args) -> int:
    s = _system(args)
    out = _Output(args, records_default_stdout=True)
    lam = s.lam if args.lam is None else args.lam
    pair = solve_periodic(s.M, s.g, s.f, lam, s.guess_history(), steps=s.steps, tol=s.controls.tol)
    out.write([records.pair_record(0, pair)])
    out.say(f"T-periodic pair at lambda = {lam:g}: sup norm {pair.sup_norm:.6g}, residual {pair.residual:.2e}"
            + (" (trivial)" if pair.is_trivial else ""))
    return EXIT_OK


def cmd_branch(args) -> int:
    s = _system(args)
    out = _Output(args, records_default_stdout=True)
    cert = branch_certificate(s.M, s.g, s.f, s.omega, s.controls, n_h=s.n_h, seeds_per_axis=s.seeds_per_axis)
    recs = []
    for b, branch in enumerate(cert.branches):
        for rec in records.branch_records(branch):
            recs.append({"branch": b, **rec})
    out.write(recs)
    out.say(str(cert))
    return EXIT_ANOMALY if cert.anomalies else EXIT_OK


def cmd_verify(args) -> int:
    out = _Output(args, records_default_stdout=False)
    results = run_checks(seed=args.seed, echo=out.say)
    failed = [r for r in results if not r.passed]
    out.say(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_DOMAIN


COMMANDS = {
    "degree": (cmd_degree, "degree of g over the region, with the zero table"),
    "index": (cmd_index, "ind(Q,W), deg(-g,W_check) and ind(P,W_check) for each window"),
    "flow": (cmd_flow, "trajectory records of the ODE (lambda = 0) or the DDE"),
    "periodic": (cmd_periodic, "solve for a T-periodic pair at fixed lambda"),
    "branch": (cmd_branch, "degree certificate and continued witness branches"),
    "verify": (cmd_verify, "run the built-in acceptance checks"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI run configuration")
    common.add_argument("--example", metavar="NAME", help=f"built-in system: {', '.join(EXAMPLES)}")
    common.add_argument("--out", metavar="PATH", help="write line-delimited records here")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--quiet", action="store_true", help="suppress the human-readable report")

    parser = argparse.ArgumentParser(prog="ddeperiodic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    parsers = {name: sub.add_parser(name, parents=[common], help=text, description=text)
               for name, (_, text) in COMMANDS.items()}
    parsers["index"].add_argument("--correspondence", action="store_true",
                                  help="list fix(P, h^-1(W)) and whether each point lies in W_check")
    for name in ("flow", "periodic"):
        parsers[name].add_argument("--lambda", dest="lam", type=float, help="override the configured lambda")
    parsers["flow"].add_argument("--t1", type=float, help="final time")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        return fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ComputationError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
