"""Command line interface: ``adaptive-dg run | verify | sweep``."""
import argparse
import logging
import math
import sys
from pathlib import Path

from .assembly import METHODS, InadmissiblePenaltyError
from .driver import RunConfig, adapt_loop
from .estimate import MarkingConfig, Strategy
from .problems import get_problem
from .solver import DEFAULT_RTOL, SolverError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4

log = logging.getLogger("adaptive_dg")


def _alpha(text):
    if text == "auto":
        return text
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha must be 'auto' or a number, got {text!r}")
    if not math.isfinite(val) or val <= 0:
        raise argparse.ArgumentTypeError("alpha must be positive")
    return val


def _fraction(text):
    val = float(text)
    if not 0.0 < val < 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {text}")
    return val


def _positive(text):
    val = float(text)
    if not val > 0.0:
        raise argparse.ArgumentTypeError(f"expected a positive value, got {text}")
    return val


def _add_run_options(p, single_method=True):
    if single_method:
        p.add_argument("--method", choices=[m.value for m in METHODS], default="ip")
        p.add_argument("--marking", choices=[s.value for s in Strategy], default="ch")
    p.add_argument("--alpha", type=_alpha, default="auto", help="'auto' or a positive real")
    p.add_argument("--theta", type=_fraction, default=0.5,
                   help="bulk fraction on edge jumps (both markings)")
    p.add_argument("--sigma", type=_fraction, default=0.3, help="bulk fraction on volume terms")
    p.add_argument("--gamma-switch", type=_positive, default=1.0)
    p.add_argument("--gamma-monitor", type=float, default=10.0)
    p.add_argument("--problem", default="square-sine",
                   help="square-sine, lshape-const or a mesh file (f = 1)")
    p.add_argument("--max-dofs", type=int, default=50000)
    p.add_argument("--max-iterations", type=int, default=40)
    p.add_argument("--rel-tol", type=_fraction, default=DEFAULT_RTOL)
    p.add_argument("--uniform", action="store_true", help="refine uniformly instead of marking")
    p.add_argument("--no-snapshots", action="store_true", help="skip per-iteration mesh files")


def build_parser():
    parser = argparse.ArgumentParser(prog="adaptive-dg",
                                     description="Adaptive weakly penalized DG for the Poisson problem")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one adaptive loop")
    _add_run_options(run)
    run.add_argument("--out", default=None, help="output directory")

    ver = sub.add_parser("verify", help="check the averaging and CR identities")
    ver.add_argument("--problem", default="square-sine")
    ver.add_argument("--method", choices=["all"] + [m.value for m in METHODS], default="all")
    ver.add_argument("--levels", type=int, default=3)
    ver.add_argument("--pairs", type=int, default=100)

    sw = sub.add_parser("sweep", help="run every method with every marking")
    _add_run_options(sw, single_method=False)
    sw.add_argument("--out", default="sweep", help="output root directory")
    return parser


def _config(args, method, strategy, out):
    marking = MarkingConfig(strategy=strategy, theta_ch=args.theta, theta_bms=args.theta,
                            sigma=args.sigma, gamma_switch=args.gamma_switch,
                            sigma_osc=args.sigma)
    return RunConfig(method=method, alpha=args.alpha, marking=marking, problem=args.problem,
                     max_dofs=args.max_dofs, max_iterations=args.max_iterations,
                     rel_tol=args.rel_tol, gamma_monitor=args.gamma_monitor, out_dir=out,
                     uniform=args.uniform, snapshots=not args.no_snapshots)


def _summary(hist):
    rep = hist.report()
    err = rep["final_energy_error"]
    err = "n/a" if err is None else f"{err:.4e}"
    ratio = rep["max_contraction_ratio"]
    ratio = "n/a" if ratio is None else f"{ratio:.4f}"
    return (f"{hist.method:7s} iterations={rep['iterations']:3d} ndof={rep['final_ndof']:7d} "
            f"eta={rep['final_eta']:.4e} error={err} max_ratio={ratio}")


def _load_problem(name):
    try:
        return get_problem(name)
    except (OSError, ValueError) as exc:
        raise ValueError(f"cannot load problem {name!r}: {exc}") from exc


def cmd_run(args):
    cfg = _config(args, args.method, args.marking, args.out)
    hist = adapt_loop(cfg, _load_problem(args.problem))
    print(_summary(hist))
    return EXIT_OK


def cmd_sweep(args):
    problem = _load_problem(args.problem)
    root = Path(args.out)
    for strategy in Strategy:
        for method in METHODS:
            cfg = _config(args, method, strategy, str(root / f"{method.value}_{strategy.value}"))
            hist = adapt_loop(cfg, problem)
            print(f"{strategy.value:3s} {_summary(hist)}")
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_checks

    methods = METHODS if args.method == "all" else (args.method,)
    checks = run_checks(_load_problem(args.problem), methods, args.levels, args.pairs)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InadmissiblePenaltyError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
