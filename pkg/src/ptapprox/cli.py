"""Command-line interface: ``ptapprox {align,grid,synthesize,characteristics}``.

Exit codes: 0 on success, 1 for unreadable input (and for a grid whose
dominance check fails), 2 for invalid flags.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager

from .approx import ApproxParams
from .evaluation import (
    DominanceError,
    align_log,
    run_grid,
    write_align_csv,
    write_characteristics_csv,
    write_grid_csv,
)
from .eventlog import LogFormatError, load_log
from .synth import NOISE_KINDS, synthesize, write_corpus
from .tree import ProcessTree, TreeSyntaxError, load_trees


class InputError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return value


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {value}")
    return value


def _int_list(text: str) -> list[int]:
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a non-empty comma-separated list")
    return [_positive_int(s.strip()) for s in items]


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a probability in [0, 1], got {value}")
    return value


def _noise_kinds(text: str) -> tuple[str, ...]:
    kinds = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [k for k in kinds if k not in NOISE_KINDS]
    if not kinds or bad:
        raise argparse.ArgumentTypeError(f"noise kinds must be a subset of {','.join(NOISE_KINDS)}")
    return kinds


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("tree", help="file holding one process tree")
    p.add_argument("log", help="event log: .csv event table or variants file (count;a,b,...)")
    p.add_argument("--case-column", default="case")
    p.add_argument("--activity-column", default="activity")
    p.add_argument("--timestamp-column", default=None)
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes (default 1)")
    p.add_argument("-o", "--out", default="-", help="output CSV (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptapprox", description="Optimal and approximate process tree alignments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("align", help="align every variant of a log")
    _add_input_args(p)
    p.add_argument("--mode", choices=("optimal", "approx"), default="optimal")
    p.add_argument("--tl", type=_positive_int, help="max trace length handed to the optimal aligner (approx mode)")
    p.add_argument("--th", type=_positive_int, help="max tree height handed to the optimal aligner (approx mode)")

    p = sub.add_parser("grid", help="sweep (TL, TH) and report average cost and time")
    _add_input_args(p)
    p.add_argument("--tl", type=_int_list, default=[1, 3, 5], help="comma-separated TL values (default 1,3,5)")
    p.add_argument("--th", type=_int_list, default=[1, 3, 5], help="comma-separated TH values (default 1,3,5)")

    p = sub.add_parser("synthesize", help="write random trees and noisy logs")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-trees", type=_non_negative_int, default=1)
    p.add_argument("--tree-size", type=_positive_int, default=10, help="number of leaves per tree")
    p.add_argument("--n-traces", type=_non_negative_int, default=100)
    p.add_argument("--noise-prob", type=_probability, default=0.0)
    p.add_argument("--noise-kinds", type=_noise_kinds, default=NOISE_KINDS, help="subset of delete,relabel,insert")
    p.add_argument("--loop-prob", type=_probability, default=0.2, help="loop operator probability (capped at 0.2)")
    p.add_argument("--tau-prob", type=_probability, default=0.1)
    p.add_argument("--redo-prob", type=_probability, default=0.3, help="probability of another loop round")
    p.add_argument("--min-height", type=_non_negative_int, default=0)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("characteristics", help="print A, SA, EA and empty acceptance per node")
    p.add_argument("tree")
    p.add_argument("-o", "--out", default="-")
    return parser


def _read_tree(path: str) -> ProcessTree:
    try:
        trees = load_trees(path)
    except OSError as exc:
        raise InputError(f"cannot read tree file: {exc}") from None
    except TreeSyntaxError as exc:
        raise InputError(f"{path}: {exc}") from None
    if len(trees) != 1:
        raise InputError(f"{path}: expected exactly one tree, found {len(trees)}")
    return trees[0]


def _read_log(args):
    options = {}
    if str(args.log).lower().endswith(".csv"):
        options = dict(
            case_column=args.case_column,
            activity_column=args.activity_column,
            timestamp_column=args.timestamp_column,
        )
    try:
        return load_log(args.log, **options)
    except OSError as exc:
        raise InputError(f"cannot read log file: {exc}") from None
    except (LogFormatError, ValueError) as exc:
        raise InputError(str(exc)) from None


@contextmanager
def _output(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _cmd_align(args, parser) -> int:
    params = None
    if args.mode == "approx":
        if args.tl is None or args.th is None:
            parser.error("approx mode needs both --tl and --th")
        params = ApproxParams(args.tl, args.th)
    tree = _read_tree(args.tree)
    log = _read_log(args)
    results, precompute = align_log(tree, log, args.mode, params, jobs=args.jobs)
    with _output(args.out) as out:
        write_align_csv(results, out)
    if args.mode == "approx":
        print(f"characteristics precomputation: {precompute:.6f} s", file=sys.stderr)
    return 0


def _cmd_grid(args, parser) -> int:
    tree = _read_tree(args.tree)
    log = _read_log(args)
    grid = run_grid(tree, log, args.tl, args.th, jobs=args.jobs, check=False)
    with _output(args.out) as out:
        write_grid_csv(grid, out)
    print(f"characteristics precomputation: {grid.precompute_seconds:.6f} s", file=sys.stderr)
    grid.check()
    return 0


def _cmd_synthesize(args, parser) -> int:
    try:
        instances = synthesize(
            args.seed,
            args.n_trees,
            args.tree_size,
            args.n_traces,
            args.noise_prob,
            noise_kinds=args.noise_kinds,
            loop_prob=args.loop_prob,
            tau_prob=args.tau_prob,
            redo_prob=args.redo_prob,
            min_height=args.min_height,
        )
    except ValueError as exc:
        parser.error(str(exc))
    for path in write_corpus(instances, args.out_dir):
        print(path)
    return 0


def _cmd_characteristics(args, parser) -> int:
    tree = _read_tree(args.tree)
    with _output(args.out) as out:
        write_characteristics_csv(tree, out)
    return 0


COMMANDS = {
    "align": _cmd_align,
    "grid": _cmd_grid,
    "synthesize": _cmd_synthesize,
    "characteristics": _cmd_characteristics,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, parser)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DominanceError as exc:
        print(f"dominance check failed: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
