"""Command line entry point: ``ratelab {run,separation,spectrum,selftest}``."""

import argparse
import sys

from . import harness, selftest
from .errors import UsageError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _write(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args):
    cfg = harness.load_config(args.config)
    return harness.with_overrides(cfg, seed=args.seed, budget=args.budget)


def cmd_run(args):
    cfg = _load(args)
    if not cfg.experiments:
        raise UsageError("config defines no [optimizer.*] sections")
    results = [harness.run_experiment(spec) for spec in cfg.experiments]
    _write(harness.emit_results(results, args.format), args.out)
    return EXIT_OK if all(r.ok for r in results) else EXIT_FAIL


def cmd_separation(args):
    cfg = _load(args)
    s = cfg.separation
    if s is None:
        raise UsageError("config has no [separation] section")
    report = harness.run_separation(s.kappa_min, s.kappa_max, s.gamma_bar, s.epsilon,
                                    s.beta, s.delta, s.budget, s.init, s.minimizer)
    _write(harness.emit_separation(report, args.format), args.out)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_spectrum(args):
    cfg = _load(args)
    if not cfg.experiments:
        raise UsageError("config defines no [optimizer.*] sections")
    fmt = "table" if args.format == "plotdata" else args.format
    _write(harness.emit_spectrum(cfg.experiments, fmt), args.out)
    return EXIT_OK


def cmd_selftest(args):
    return EXIT_OK if selftest.run_all(sys.stdout) else EXIT_FAIL


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "table", "plotdata"), default=None)
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, help="base seed override")
    common.add_argument("--budget", type=int, help="step budget override")

    parser = argparse.ArgumentParser(prog="ratelab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, default_fmt, helptext in (
        ("run", cmd_run, "csv", "run rate experiments"),
        ("separation", cmd_separation, "table", "Adam vs GD separation experiment"),
        ("spectrum", cmd_spectrum, "table", "dump linearised spectra"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("config", help="INI experiment file")
        p.set_defaults(func=fn, default_format=default_fmt)
    p = sub.add_parser("selftest", help="run the invariant suites")
    p.set_defaults(func=cmd_selftest, default_format=None, format=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "format", None) is None:
        args.format = args.default_format
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ratelab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ratelab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
