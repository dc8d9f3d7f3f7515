"""Benchmark harness: per-variant alignment runs, (TL, TH) grids, CSV output.

Only the aligner call is timed. Tree parsing and the characteristics
precomputation are measured separately. Every grid cell starts from a freshly
parsed tree, so caches warmed by one cell never speed up another.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, TextIO

from .alignment import Alignment, optimal_align
from .approx import ApproxParams, approximate_align
from .characteristics import compute_characteristics
from .eventlog import EventLog
from .tree import ProcessTree, binarize, parse_tree

MODES = ("optimal", "approx")
ALIGN_COLUMNS = ("variant_index", "count", "cost", "time_seconds", "alignment")
GRID_COLUMNS = ("mode", "tl", "th", "avg_cost", "avg_time_seconds", "n_traces")
CHARACTERISTICS_COLUMNS = ("node", "label", "A", "SA", "EA", "accepts_empty")


class DominanceError(AssertionError):
    """An approximate cell beat the optimal row; some alignment must be invalid."""


@dataclass(frozen=True)
class VariantResult:
    variant_index: int
    count: int
    cost: int
    time_seconds: float
    alignment: Alignment


@dataclass(frozen=True)
class GridRow:
    mode: str
    tl: int | None
    th: int | None
    avg_cost: Fraction
    avg_time_seconds: float
    n_traces: int


@dataclass(frozen=True)
class GridResult:
    rows: tuple[GridRow, ...]
    precompute_seconds: float = 0.0

    @property
    def optimal(self) -> GridRow:
        return next(r for r in self.rows if r.mode == "optimal")

    def cells(self) -> list[GridRow]:
        return [r for r in self.rows if r.mode != "optimal"]

    def check(self) -> None:
        """Raise :class:`DominanceError` unless every cell costs at least the
        optimum on average and all rows cover the same number of traces."""
        ref = self.optimal
        for row in self.cells():
            if row.n_traces != ref.n_traces:
                raise DominanceError(f"cell TL={row.tl} TH={row.th} covers {row.n_traces} traces, optimal {ref.n_traces}")
            if row.avg_cost < ref.avg_cost:
                raise DominanceError(
                    f"cell TL={row.tl} TH={row.th} has avg cost {float(row.avg_cost)} "
                    f"below the optimal {float(ref.avg_cost)}"
                )


# -- single runs --------------------------------------------------------------


def _run_one(tree: ProcessTree, trace: tuple[str, ...], mode: str, params: ApproxParams | None, chars) -> tuple[Alignment, float]:
    start = time.perf_counter()
    if mode == "optimal":
        gamma = optimal_align(trace, tree)
    else:
        gamma = approximate_align(trace, tree, params, chars)
    return gamma, time.perf_counter() - start


# Worker processes parse the tree once and keep it (with its caches) around.
_worker_tree: ProcessTree | None = None
_worker_chars = None


def _init_worker(tree_text: str, need_chars: bool) -> None:
    global _worker_tree, _worker_chars
    _worker_tree = parse_tree(tree_text)
    _worker_chars = compute_characteristics(_worker_tree) if need_chars else None


def _worker_job(job) -> tuple[int, Alignment, float]:
    index, trace, mode, params = job
    gamma, seconds = _run_one(_worker_tree, trace, mode, params, _worker_chars)
    return index, gamma, seconds


def align_log(
    tree: ProcessTree | str,
    log: EventLog,
    mode: str = "optimal",
    params: ApproxParams | None = None,
    jobs: int = 1,
) -> tuple[list[VariantResult], float]:
    """Align every variant of ``log``. Returns the per-variant results in
    variant order and the characteristics precomputation time (0 in
    optimal mode). ``tree`` may be given as text; it is always re-parsed so
    runs never share caches. Wider nodes are binarized first, in both modes,
    so leaf indices in the alignments refer to the binary tree."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "approx" and params is None:
        raise ValueError("approx mode needs ApproxParams")
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    text = binarize(parse_tree(tree) if isinstance(tree, str) else tree).render()
    variants = list(log)
    job_list = [(k, v.trace, mode, params) for k, v in enumerate(variants)]

    if jobs == 1:
        fresh = parse_tree(text)
        start = time.perf_counter()
        chars = compute_characteristics(fresh) if mode == "approx" else None
        precompute = time.perf_counter() - start if mode == "approx" else 0.0
        raw = [(k, *_run_one(fresh, tr, mode, params, chars)) for k, tr, _, _ in job_list]
    else:
        start = time.perf_counter()
        if mode == "approx":
            compute_characteristics(parse_tree(text))
        precompute = time.perf_counter() - start if mode == "approx" else 0.0
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(text, mode == "approx")) as ex:
            raw = list(ex.map(_worker_job, job_list))
    raw.sort(key=lambda r: r[0])
    results = [
        VariantResult(k, variants[k].count, gamma.cost, seconds, gamma) for k, gamma, seconds in raw
    ]
    return results, precompute


def summarize(results: Sequence[VariantResult], mode: str, tl: int | None, th: int | None) -> GridRow:
    """Count-weighted averages over variants."""
    n = sum(r.count for r in results)
    if n == 0:
        return GridRow(mode, tl, th, Fraction(0), 0.0, 0)
    avg_cost = Fraction(sum(r.cost * r.count for r in results), n)
    avg_time = sum(r.time_seconds * r.count for r in results) / n
    return GridRow(mode, tl, th, avg_cost, avg_time, n)


def run_grid(
    tree: ProcessTree | str,
    log: EventLog,
    tls: Iterable[int],
    ths: Iterable[int],
    jobs: int = 1,
    check: bool = True,
) -> GridResult:
    """Optimal reference row followed by one approx row per (TL, TH), TL-major."""
    tls, ths = list(tls), list(ths)
    if not tls or not ths:
        raise ValueError("TL and TH lists must be non-empty")
    params = [ApproxParams(tl, th) for tl in tls for th in ths]
    results, _ = align_log(tree, log, "optimal", jobs=jobs)
    rows = [summarize(results, "optimal", None, None)]
    precompute = []
    for p in params:
        results, seconds = align_log(tree, log, "approx", p, jobs=jobs)
        precompute.append(seconds)
        rows.append(summarize(results, "approx", p.TL, p.TH))
    grid = GridResult(tuple(rows), sum(precompute) / len(precompute))
    if check:
        grid.check()
    return grid


# -- CSV ------------------------------------------------------------------------


def _format_cost(value: Fraction) -> str:
    return str(int(value)) if value.denominator == 1 else repr(float(value))


def write_align_csv(results: Sequence[VariantResult], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(ALIGN_COLUMNS)
    for r in results:
        w.writerow([r.variant_index, r.count, r.cost, f"{r.time_seconds:.6f}", r.alignment.to_json()])


def write_grid_csv(grid: GridResult, out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(GRID_COLUMNS)
    for r in grid.rows:
        w.writerow([
            r.mode,
            "" if r.tl is None else r.tl,
            "" if r.th is None else r.th,
            _format_cost(r.avg_cost),
            f"{r.avg_time_seconds:.6f}",
            r.n_traces,
        ])


def write_characteristics_csv(t: ProcessTree, out: TextIO) -> None:
    chars = compute_characteristics(t)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CHARACTERISTICS_COLUMNS)
    for v in t.descendants():
        c = chars[v]
        w.writerow([
            v,
            t[v].label,
            json.dumps(sorted(c.A)),
            json.dumps(sorted(c.SA)),
            json.dumps(sorted(c.EA)),
            str(c.accepts_empty).lower(),
        ])


def read_align_csv(text: str) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    for r in rows:
        r["alignment"] = Alignment.from_json(r["alignment"])
    return rows
