"""Acceptance checks. Each test prints one PASS/FAIL line with its measurements."""

import random
import time

import pytest

from helpers import T0_TEXT, brute_force_and, brute_force_loop, levenshtein_to_interpretation
from ptapprox.alignment import optimal_align, validate_alignment
from ptapprox.approx import ApproxParams, approximate_align, compose, interpretation_cost, split_and, split_loop, split_seq
from ptapprox.characteristics import TreeCharacteristics, compute_characteristics
from ptapprox.eventlog import EventLog
from ptapprox.evaluation import run_grid
from ptapprox.synth import add_noise, random_tree, sample_trace, synthesize
from ptapprox.tree import Operator, ProcessTree, iter_language, parse_tree

GRID = [(tl, th) for tl in (1, 3, 5) for th in (1, 3, 5)]
OPERATORS = (Operator.SEQ, Operator.XOR, Operator.AND, Operator.LOOP)


@pytest.fixture
def report(capsys):
    def emit(name: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")

    return emit


def random_spec(rng: random.Random, n_leaves: int, labels=("a", "b", "c")):
    """Binary tree spec with labels drawn with replacement, so duplicates occur."""
    if n_leaves == 1:
        return None if rng.random() < 0.15 else rng.choice(labels)
    k = rng.randint(1, n_leaves - 1)
    return (rng.choice(OPERATORS), [random_spec(rng, k, labels), random_spec(rng, n_leaves - k, labels)])


def noisy_trace(rng: random.Random, t: ProcessTree, max_len: int, noise: float = 0.2) -> tuple:
    alphabet = sorted(t.activities()) or ["a"]
    while True:
        trace = add_noise(rng, sample_trace(rng, t), noise, alphabet + ["z"])
        if len(trace) <= max_len:
            return trace


def test_reference_trace_cost(report):
    t0 = parse_tree(T0_TEXT)
    start = time.perf_counter()
    gamma = optimal_align(("a", "b", "c", "f"), t0)
    elapsed = time.perf_counter() - start
    ok = gamma.cost == 4 and validate_alignment(("a", "b", "c", "f"), t0, gamma) and elapsed < 1.0
    report("reference trace <a,b,c,f> costs 4", ok, f"cost={gamma.cost} time={elapsed:.4f}s")
    assert ok


def test_reference_sequence_split(report):
    t0 = parse_tree(T0_TEXT)
    trace = tuple("dcabcdae")
    s = split_seq(trace, t0, compute_characteristics(t0))
    subs = [optimal_align(part, t0, t0[0].children[k - 1]) for part, k in s.parts]
    gamma = compose(t0, trace, s, subs)
    ok = (
        s.parts == ((tuple("dcabcd"), 1), (("a", "e"), 2))
        and s.objective == 0
        and validate_alignment(trace, t0, gamma)
    )
    report("sequence split of <d,c,a,b,c,d,a,e>", ok, f"parts={s.parts} objective={s.objective}")
    assert ok


def test_reference_parallel_split(report):
    t = parse_tree("+(->(a,b), *(c,d))")
    trace = tuple("cadcb")
    s = split_and(trace, t, compute_characteristics(t))
    subs = [optimal_align(part, t, t[0].children[k - 1]) for part, k in s.parts]
    gamma = compose(t, trace, s, subs, check=True)
    got = [(m.kind.name, m.activity, m.leaf) for m in gamma.moves]
    want = [("SYNC", "c", 5), ("SYNC", "a", 2), ("SYNC", "d", 6), ("SYNC", "c", 5), ("SYNC", "b", 3)]
    ok = got == want and gamma.cost == 0
    report("parallel split and composition of <c,a,d,c,b>", ok, f"moves={got} cost={gamma.cost}")
    assert ok


def test_validity_dominance_and_guard(report):
    rng = random.Random(20240501)
    start = time.perf_counter()
    instances = violations = guarded = guard_mismatches = 0
    while instances < 500:
        t = random_tree(rng, rng.randint(1, 10))
        assert len(t.nodes) <= 20
        trace = noisy_trace(rng, t, 20)
        best = optimal_align(trace, t).cost
        instances += 1
        for tl, th in GRID:
            gamma = approximate_align(trace, t, ApproxParams(tl, th))
            if not validate_alignment(trace, t, gamma) or gamma.cost < best:
                violations += 1
            if len(trace) <= tl or t.height() <= th:
                guarded += 1
                guard_mismatches += gamma.cost != best
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 300
    report(
        "validity and dominance on generated instances",
        ok,
        f"instances={instances} cells={instances * len(GRID)} violations={violations} time={elapsed:.1f}s",
    )
    report("guarded calls equal the optimum", guard_mismatches == 0, f"guarded={guarded} mismatches={guard_mismatches}")
    assert ok and guard_mismatches == 0


def test_splitters_and_interpretation_against_enumeration(report):
    rng = random.Random(7)
    labels = ("a", "b", "c", "d")
    counts = {Operator.AND: 0, Operator.LOOP: 0}
    mismatches = 0
    while min(counts.values()) < 200:
        op = Operator.AND if counts[Operator.AND] <= counts[Operator.LOOP] else Operator.LOOP
        spec = (op, [random_spec(rng, rng.randint(1, 3), labels), random_spec(rng, rng.randint(1, 3), labels)])
        t = ProcessTree.build(spec)
        chars = compute_characteristics(t)
        if rng.random() < 0.5:
            trace = noisy_trace(rng, t, 10)
        else:
            trace = tuple(rng.choice(labels + ("z",)) for _ in range(rng.randint(0, 10)))
        c1, c2 = (chars[k] for k in t[0].children)
        if op is Operator.AND:
            got, want = split_and(trace, t, chars).objective, brute_force_and(trace, c1, c2)
        else:
            got, want = split_loop(trace, t, chars).objective, brute_force_loop(trace, c1, c2)
        mismatches += got != want
        counts[op] += 1
    report(
        "split objectives equal brute-force minima",
        mismatches == 0,
        f"and={counts[Operator.AND]} loop={counts[Operator.LOOP]} mismatches={mismatches}",
    )

    interp = interp_mismatches = 0
    alphabet = ("a", "b", "c")
    while interp < 200:
        acts = frozenset(x for x in alphabet if rng.random() < 0.6)
        pool = sorted(acts)
        if pool:
            sa = frozenset(rng.sample(pool, rng.randint(1, len(pool))))
            ea = frozenset(rng.sample(pool, rng.randint(1, len(pool))))
            empty = rng.random() < 0.5
        else:
            sa = ea = frozenset()
            empty = True
        c = TreeCharacteristics(acts, sa, ea, empty)
        trace = tuple(rng.choice(alphabet + ("z",)) for _ in range(rng.randint(0, 4)))
        interp_mismatches += interpretation_cost(trace, c) != levenshtein_to_interpretation(trace, c)
        interp += 1
    report(
        "interpretation cost equals edit distance to the interpretation",
        interp_mismatches == 0,
        f"instances={interp} mismatches={interp_mismatches}",
    )
    assert mismatches == 0 and interp_mismatches == 0


def test_characteristics_against_enumeration(report):
    rng = random.Random(11)
    n_trees = bad = 0
    while n_trees < 200:
        t = ProcessTree.build(random_spec(rng, rng.randint(1, 5)))
        assert len(t.nodes) <= 10
        n_trees += 1
        chars = compute_characteristics(t)
        for v in t.descendants():
            c = chars[v]
            once = list(iter_language(t, v, max_loop_repeats=1))
            twice = list(iter_language(t, v, max_loop_repeats=2, max_len=8))
            alphabet = {a for w in once for a in w}
            exact = (
                c.A == alphabet
                and c.accepts_empty == (() in once)
                and c.SA == {w[0] for w in once if w}
                and c.EA == {w[-1] for w in once if w}
            )
            contained = {w[0] for w in twice if w} <= c.SA and {w[-1] for w in twice if w} <= c.EA
            bad += not (exact and contained)
    report("characteristics match language enumeration", bad == 0, f"trees={n_trees} mismatching_subtrees={bad}")
    assert bad == 0


def test_speedup_trend(report):
    inst = synthesize(1, 1, 45, 150, 0.1, min_height=8, redo_prob=0.4)[0]
    log = EventLog(inst.log.variants[:100])
    avg_len = sum(len(v.trace) for v in log) / len(log)
    grid = run_grid(inst.tree, log, [1, 3, 5], [1, 3, 5], check=False)
    opt = grid.optimal
    cell = next(r for r in grid.cells() if (r.tl, r.th) == (5, 5))
    dominated = all(r.avg_cost >= opt.avg_cost for r in grid.cells())
    ok = (
        len(log) == 100
        and inst.tree.height() >= 8
        and avg_len >= 25
        and cell.avg_time_seconds < opt.avg_time_seconds
        and dominated
    )
    report(
        "approximation at (5,5) is faster than optimal",
        ok,
        f"variants={len(log)} height={inst.tree.height()} avg_len={avg_len:.2f} "
        f"optimal={float(opt.avg_cost):.3f}/{opt.avg_time_seconds:.4f}s "
        f"(5,5)={float(cell.avg_cost):.3f}/{cell.avg_time_seconds:.4f}s",
    )
    assert ok


def test_clean_logs_cost_nothing(report):
    corpora = synthesize(0, 10, 10, 20, 0.0)
    optimal_bad = approx_bad = checked = 0
    for inst in corpora:
        for v in inst.log:
            optimal_bad += optimal_align(v.trace, inst.tree).cost != 0
            for tl, th in GRID:
                approx_bad += approximate_align(v.trace, inst.tree, ApproxParams(tl, th)).cost != 0
                checked += 1
    ok = optimal_bad == 0 and approx_bad == 0
    report(
        "noise-free corpora align at cost 0",
        ok,
        f"variants={sum(len(i.log) for i in corpora)} optimal_nonzero={optimal_bad} "
        f"approx_cells={checked} approx_nonzero={approx_bad}",
    )
    assert ok
