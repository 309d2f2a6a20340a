"""Command-line driver: ``tridecomp <command> [options]``.

Exit codes are 0 on success, 2 for usage or input errors and 3 for numeric
failures. Every failure prints one line ``error: <kind>: <message>`` to
stderr, where ``kind`` is ``usage``, ``input`` or ``numeric``.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import io
from ._mals import SolverConfig
from .baselines import cp_mals_decompose, cp_mals_recover, tucker_mals_decompose, tucker_mals_recover
from .datasets import SYNTHETIC_KINDS, synthetic_tensor
from .rank import tucker_rank
from .recovery import SingularMaskError, mals_recover, sample_mask
from .solver import SWEEP_EPS, mals_decompose, rank_sweep
from .tensor import relative_error

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

METHODS = ("triple", "cp", "tucker")
_DECOMPOSE = {"triple": mals_decompose, "cp": cp_mals_decompose, "tucker": tucker_mals_decompose}
_RECOVER = {"triple": mals_recover, "cp": cp_mals_recover, "tucker": tucker_mals_recover}


class CliError(Exception):
    def __init__(self, kind, message):
        super().__init__(message)
        self.kind = kind
        self.code = EXIT_NUMERIC if kind == "numeric" else EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", f"{self.prog}: {message}")


def _lambda(text):
    if text == "auto":
        return None
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a positive number, got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"lambda must be positive, got {text!r}")
    return value


def _ranks(text):
    """``"1:5"`` (inclusive), ``"2"`` or ``"1,3,4"``."""
    try:
        if ":" in text:
            lo, hi = (int(p) for p in text.split(":"))
            ranks = list(range(lo, hi + 1))
        else:
            ranks = [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rank list {text!r}; use e.g. 1:5 or 1,2,4")
    if not ranks or min(ranks) < 1:
        raise argparse.ArgumentTypeError(f"rank list {text!r} must contain positive ranks")
    return ranks


def _add_solver_flags(p):
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--method", choices=METHODS, default="triple")
    _add_hyper_flags(p)


def _add_hyper_flags(p, eps=1e-8):
    p.add_argument("--gamma", type=float, default=1.5, help="extrapolation step in [1, 2)")
    p.add_argument("--lambda", dest="lam", type=_lambda, default=None, metavar="auto|VALUE",
                   help="proximal weight; 'auto' scales with the data (default)")
    p.add_argument("--eps", type=float, default=eps, help=f"stopping threshold (default {eps:g})")
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="parallel restarts")
    p.add_argument("--timings", action="store_true",
                   help="fill the seconds column of CSV output (makes it non-reproducible)")


def build_parser():
    parser = _Parser(prog="tridecomp", description="Triple decomposition and tensor recovery.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("decompose", help="fit factors to a full tensor")
    p.add_argument("--input", required=True, help=".tns3, triplet .csv, .pgm or a PGM directory")
    _add_solver_flags(p)
    p.add_argument("--out-factors", required=True)
    p.add_argument("--out-trace")

    p = sub.add_parser("recover", help="complete a tensor from observed entries")
    p.add_argument("--observed", required=True, help="triplet CSV of observed entries")
    p.add_argument("--dims", type=int, nargs=3, required=True, metavar=("N1", "N2", "N3"))
    _add_solver_flags(p)
    p.add_argument("--out-tensor", required=True)
    p.add_argument("--out-trace")
    p.add_argument("--out-factors")
    p.add_argument("--truth", help="full tensor to report the recovery error against")

    p = sub.add_parser("rank-sweep", help="best relative error for each rank")
    p.add_argument("--input", required=True)
    p.add_argument("--ranks", type=_ranks, required=True, help="e.g. 1:5")
    p.add_argument("--method", choices=("triple",), default="triple")
    p.add_argument("--no-warm-start", action="store_true")
    _add_hyper_flags(p, eps=SWEEP_EPS)
    p.add_argument("--out-curve")

    p = sub.add_parser("tucker-rank", help="numerical ranks of the three unfoldings")
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("sample", help="draw a uniform observation mask")
    p.add_argument("--input", required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("generate", help="write the embedded example or a synthetic low-rank tensor")
    p.add_argument("--kind", choices=SYNTHETIC_KINDS, required=True)
    p.add_argument("--dims", type=int, nargs=3, metavar=("N1", "N2", "N3"))
    p.add_argument("--rank", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    return parser


def _config(args, rank):
    return SolverConfig(
        rank=rank, gamma=args.gamma, lam=args.lam, eps=args.eps, max_iter=args.max_iter,
        seed=args.seed, restarts=args.restarts, threads=args.threads,
    )


def _meta(args, trace, rank):
    return {
        "rank": rank,
        "gamma": repr(args.gamma),
        "lambda": repr(trace.lam),
        "eps": repr(args.eps),
        "max_iter": args.max_iter,
        "restarts": args.restarts,
        "seed": args.seed,
        "best_start": trace.start,
        "iterations": trace.iterations,
        "stop_reason": trace.reason,
        "relative_error": repr(trace.relative_error),
    }


def _check_trace(trace):
    if trace.reason == "diverged" or not np.isfinite(trace.final_objective):
        raise CliError("numeric", "the solver diverged (non-finite objective)")


def _cmd_decompose(args, out):
    X = io.load_tensor(args.input)
    factors, trace = _DECOMPOSE[args.method](X, _config(args, args.rank))
    _check_trace(trace)
    io.save_factors(args.out_factors, factors, _meta(args, trace, args.rank))
    if args.out_trace:
        io.write_trace_csv(args.out_trace, trace, timings=args.timings)
    print(f"relative_error {trace.relative_error!r}", file=out)
    print(f"iterations {trace.iterations} ({trace.reason})", file=out)


def _cmd_recover(args, out):
    dims = tuple(args.dims)
    mask = io.load_triplet_mask(args.observed, dims)
    truth = io.load_tensor(args.truth, dims) if args.truth else None
    state = _RECOVER[args.method](mask, _config(args, args.rank))
    _check_trace(state.trace)
    io.save_tensor(args.out_tensor, state.X)
    if args.out_trace:
        io.write_trace_csv(args.out_trace, state.trace, timings=args.timings)
    if args.out_factors:
        io.save_factors(args.out_factors, state.factors,
                        _meta(args, state.trace, args.rank))
    print(f"iterations {state.trace.iterations} ({state.trace.reason})", file=out)
    print(f"observed_misfit {state.trace.relative_error!r}", file=out)
    if truth is not None:
        print(f"relative_error {relative_error(state.X, truth)!r}", file=out)


def _cmd_rank_sweep(args, out):
    X = io.load_tensor(args.input)
    points = rank_sweep(X, args.ranks, _config(args, 1), warm_start=not args.no_warm_start)
    for p in points:
        _check_trace(p.trace)
        print(f"{p.rank} {p.relative_error!r}", file=out)
    if args.out_curve:
        io.write_curve_csv(args.out_curve, points, timings=args.timings)


def _cmd_tucker_rank(args, out):
    X = io.load_tensor(args.input)
    print(" ".join(str(r) for r in tucker_rank(X, tol=args.tol)), file=out)


def _cmd_sample(args, out):
    X = io.load_tensor(args.input)
    mask = sample_mask(X, args.fraction, seed=args.seed)
    io.save_triplet_mask(args.out, mask)
    print(f"observed {mask.m} of {mask.size}", file=out)


def _cmd_generate(args, out):
    X = synthetic_tensor(args.kind, args.dims, args.rank, seed=args.seed)
    io.save_tensor(args.out, X)
    print("dims {} {} {}".format(*X.shape), file=out)


_COMMANDS = {
    "decompose": _cmd_decompose,
    "recover": _cmd_recover,
    "rank-sweep": _cmd_rank_sweep,
    "tucker-rank": _cmd_tucker_rank,
    "sample": _cmd_sample,
    "generate": _cmd_generate,
}


def main(argv=None, out=None, err=None):
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        args = build_parser().parse_args(argv)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            _COMMANDS[args.command](args, out)
        for w in caught:
            print(f"warning: {w.message}", file=err)
    except CliError as exc:
        print(f"error: {exc.kind}: {exc}", file=err)
        return exc.code
    except (SingularMaskError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numeric: {exc}", file=err)
        return EXIT_NUMERIC
    except (io.FormatError, OSError, ValueError, TypeError) as exc:
        print(f"error: input: {exc}", file=err)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
