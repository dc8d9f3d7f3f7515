"""Strategies and brute-force oracles shared by the test modules.

The oracles here deliberately avoid the package's dynamic programs and search:
they enumerate languages, segmentations and assignments directly.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

from hypothesis import strategies as st

from ptapprox.alignment import Alignment, Move, MoveKind
from ptapprox.approx import interpretation_cost
from ptapprox.characteristics import TreeCharacteristics
from ptapprox.semantics import TreeSemantics
from ptapprox.tree import Operator, ProcessTree, iter_language

T0_TEXT = "->( *( X( ->(a,b), +(c,d) ), tau ), +(e,a) )"
LABELS = ("a", "b", "c", "d")
OPERATORS = (Operator.SEQ, Operator.XOR, Operator.AND, Operator.LOOP)


def tree_specs(max_leaves: int = 5, labels=LABELS, nary: bool = False):
    leaf = st.one_of(st.sampled_from(labels), st.none())

    def extend(kids):
        binary = st.tuples(st.sampled_from(OPERATORS), st.lists(kids, min_size=2, max_size=2))
        if not nary:
            return binary.map(lambda p: (p[0], list(p[1])))
        wide = st.tuples(
            st.sampled_from((Operator.SEQ, Operator.XOR, Operator.AND)), st.lists(kids, min_size=2, max_size=3)
        )
        return st.one_of(binary, wide).map(lambda p: (p[0], list(p[1])))

    return st.recursive(leaf, extend, max_leaves=max_leaves)


def trees(max_leaves: int = 5, labels=LABELS, nary: bool = False):
    return tree_specs(max_leaves, labels, nary).map(ProcessTree.build)


def traces(labels=LABELS + ("z",), max_size: int = 6):
    return st.lists(st.sampled_from(labels), max_size=max_size).map(tuple)


def characteristics_strategy(labels=("a", "b", "c")):
    """Characteristics some tree could have: SA and EA are non-empty subsets of
    a non-empty A, or everything is empty and the empty trace is accepted."""

    @st.composite
    def build(draw):
        acts = frozenset(draw(st.sets(st.sampled_from(labels))))
        pool = sorted(acts)
        sa = frozenset(draw(st.sets(st.sampled_from(pool), min_size=1))) if pool else frozenset()
        ea = frozenset(draw(st.sets(st.sampled_from(pool), min_size=1))) if pool else frozenset()
        empty = draw(st.booleans())
        if not acts:
            empty = True
        return TreeCharacteristics(acts, sa, ea, empty)

    return build()


# -- edit distances -------------------------------------------------------------------


def levenshtein(a, b) -> int:
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def indel_distance(a, b) -> int:
    """Edit distance with insertions and deletions only (no substitution)."""
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            best = min(prev[j] + 1, cur[j - 1] + 1)
            if x == y:
                best = min(best, prev[j - 1])
            cur.append(best)
        prev = cur
    return prev[-1]


def interpretation_words(c: TreeCharacteristics, max_middle: int):
    """Words of the most liberal interpretation: the empty word when accepted,
    start-and-end singletons, and start . A* . end with a bounded middle."""
    if c.accepts_empty:
        yield ()
    for x in sorted(c.start_activities & c.end_activities):
        yield (x,)
    acts = sorted(c.activities)
    for s in sorted(c.start_activities):
        for e in sorted(c.end_activities):
            for k in range(max_middle + 1):
                for mid in itertools.product(acts, repeat=k):
                    yield (s,) + mid + (e,)


def levenshtein_to_interpretation(trace, c: TreeCharacteristics) -> int:
    return min(levenshtein(trace, w) for w in interpretation_words(c, len(trace) + 1))


# -- splitter oracles -------------------------------------------------------------------


def brute_force_and(trace, c1, c2) -> int:
    best = None
    n = len(trace)
    for mask in range(1 << n):
        s1 = tuple(trace[i] for i in range(n) if not mask >> i & 1)
        s2 = tuple(trace[i] for i in range(n) if mask >> i & 1)
        val = interpretation_cost(s1, c1) + interpretation_cost(s2, c2)
        best = val if best is None else min(best, val)
    return best


@lru_cache(maxsize=None)
def loop_shapes(n: int) -> tuple:
    """Segment end positions of every odd do/redo/.../do segmentation of a
    length-n trace, except those with an empty redo segment directly followed
    by an empty do segment: dropping such a pair never raises the cost, so the
    minimum over the remaining shapes is the minimum over all of them."""

    def rec(pos: int, do_next: bool, prev_empty_redo: bool):
        for end in range(pos, n + 1):
            empty = end == pos
            if do_next:
                if prev_empty_redo and empty:
                    continue
                if end == n:
                    yield (end,)
                else:
                    for rest in rec(end, False, False):
                        yield (end,) + rest
            else:
                for rest in rec(end, True, empty):
                    yield (end,) + rest

    return tuple(rec(0, True, False))


def brute_force_loop(trace, c1, c2) -> int:
    trace = tuple(trace)
    n = len(trace)
    costs = [
        {(i, j): interpretation_cost(trace[i:j], c) for i in range(n + 1) for j in range(i, n + 1)}
        for c in (c1, c2)
    ]
    best = None
    for ends in loop_shapes(n):
        start = 0
        val = 0
        for k, end in enumerate(ends):
            val += costs[k % 2][start, end]
            start = end
        best = val if best is None else min(best, val)
    return best


# -- language oracles ---------------------------------------------------------------------


def semantic_words(t: ProcessTree, max_len: int, root: int = 0) -> set:
    """Label words of length <= max_len produced by the compiled step relation."""
    sem = TreeSemantics.of(t, root)
    words = set()
    seen = set()
    stack = [(sem.initial, ())]
    while stack:
        state, word = stack.pop()
        if (state, word) in seen:
            continue
        seen.add((state, word))
        if state == sem.final:
            words.add(word)
        for step, nxt in sem.successors(state):
            if step.label is None:
                stack.append((nxt, word))
            elif len(word) < max_len:
                stack.append((nxt, word + (step.label,)))
    return words


def bounded_language(t: ProcessTree, max_len: int, v: int = 0) -> set:
    """Every word of length <= max_len. Loop rounds that add no activity are
    redundant, so max_len rounds per loop suffice."""
    return set(iter_language(t, v, max_loop_repeats=max_len, max_len=max_len))


def min_word_length(t: ProcessTree, v: int = 0) -> int:
    return min(len(w) for w in iter_language(t, v, max_loop_repeats=0))


def brute_force_alignment_cost(trace, t: ProcessTree, v: int = 0) -> int:
    """min over model words of the insert/delete distance to ``trace``."""
    bound = 2 * len(trace) + min_word_length(t, v)
    return min(indel_distance(trace, w) for w in bounded_language(t, bound, v))


# -- random valid alignments ------------------------------------------------------------------


def random_run(rng: random.Random, t: ProcessTree, root: int = 0, max_steps: int = 60):
    """Leaf sequence of a random complete execution (retries until it completes)."""
    sem = TreeSemantics.of(t, root)
    while True:
        state, leaves = sem.initial, []
        for _ in range(max_steps):
            if state == sem.final:
                return leaves
            options = sem.successors(state)
            step, state = options[rng.randrange(len(options))]
            if step.leaf is not None:
                leaves.append(step.leaf)
        if state == sem.final:
            return leaves


def random_alignment(rng: random.Random, trace, t: ProcessTree, root: int = 0) -> Alignment:
    """A valid but usually poor alignment: a random run interleaved with log moves,
    synchronising equal labels where the interleaving happens to allow it."""
    leaves = random_run(rng, t, root)
    moves = []
    i = j = 0
    while i < len(trace) or j < len(leaves):
        if i < len(trace) and j < len(leaves):
            node = t[leaves[j]]
            if not node.is_tau and node.activity == trace[i] and rng.random() < 0.5:
                moves.append(Move(MoveKind.SYNC, trace[i], leaves[j]))
                i += 1
                j += 1
                continue
        take_log = j >= len(leaves) or (i < len(trace) and rng.random() < 0.5)
        if take_log:
            moves.append(Move(MoveKind.LOG, trace[i]))
            i += 1
        else:
            node = t[leaves[j]]
            kind = MoveKind.INVISIBLE_MODEL if node.is_tau else MoveKind.VISIBLE_MODEL
            moves.append(Move(kind, leaf=leaves[j]))
            j += 1
    return Alignment(tuple(moves))
