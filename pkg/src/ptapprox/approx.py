"""Recursive alignment approximation: split the trace along the tree, align the
pieces, compose the sub-alignments.

Splitting decisions are driven by :func:`interpretation_cost`, the edit
distance from a sub-trace to the most liberal behaviour a subtree could have
given only its characteristics: words that start in SA, end in EA and use
only A in between, the singletons of SA ∩ EA, and the empty word when the
subtree accepts it. Each operator gets an exact minimiser of the summed
interpretation cost over its valid splittings.
"""

from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass, field
from functools import partial
from typing import Mapping, Sequence

from .alignment import Alignment, Move, optimal_align, validate_alignment
from .characteristics import TreeCharacteristics, compute_characteristics
from .tree import Operator, ProcessTree

Trace = tuple[str, ...]
INF = float("inf")


class CompositionError(AssertionError):
    """A composed alignment broke its contract; this is a bug, not bad input."""


@dataclass(frozen=True)
class ApproxParams:
    max_trace_length: int = 1
    max_tree_height: int = 1

    def __post_init__(self) -> None:
        if self.max_trace_length < 1 or self.max_tree_height < 1:
            raise ValueError("TL and TH must both be >= 1")

    @property
    def TL(self) -> int:
        return self.max_trace_length

    @property
    def TH(self) -> int:
        return self.max_tree_height


@dataclass(frozen=True)
class SplitAssignment:
    """Sub-traces with the child (1 or 2) each one is assigned to.

    ``positions`` records which indices of the original trace every part
    covers; ``objective`` is the summed interpretation cost of the parts.
    """

    parts: tuple[tuple[Trace, int], ...]
    positions: tuple[tuple[int, ...], ...] | None = None
    objective: int | None = field(default=None, compare=False)

    @property
    def children(self) -> tuple[int, ...]:
        return tuple(c for _, c in self.parts)

    @property
    def sub_traces(self) -> tuple[Trace, ...]:
        return tuple(s for s, _ in self.parts)

    def is_valid_for(self, op: Operator, trace: Sequence[str]) -> bool:
        trace = tuple(trace)
        kids = self.children
        concat = tuple(a for s in self.sub_traces for a in s)
        if op is Operator.XOR:
            return len(self.parts) == 1 and kids[0] in (1, 2) and self.parts[0][0] == trace
        if op is Operator.SEQ:
            return kids == (1, 2) and concat == trace
        if op is Operator.LOOP:
            return (
                len(kids) % 2 == 1
                and all(c == (1 if k % 2 == 0 else 2) for k, c in enumerate(kids))
                and concat == trace
            )
        if sorted(kids) != [1, 2] or len(kids) != 2:
            return False
        if self.positions is not None:
            pos = sorted(p for ps in self.positions for p in ps)
            if pos != list(range(len(trace))):
                return False
            return all(tuple(trace[p] for p in ps) == s for ps, (s, _) in zip(self.positions, self.parts))
        return _find_merge(trace, self.parts[0][0], self.parts[1][0]) is not None


# -- interpretation cost ----------------------------------------------------------


def empty_trace_cost(c: TreeCharacteristics) -> int:
    if c.accepts_empty:
        return 0
    return 1 if c.start_activities & c.end_activities else 2


def singleton_cost(activity: str, c: TreeCharacteristics) -> int:
    sa, ea = c.start_activities, c.end_activities
    if activity in sa and activity in ea:
        return 0
    if c.accepts_empty or (sa & ea):
        return 1  # delete it, or substitute a start-and-end activity
    if activity in sa or activity in ea:
        return 1  # insert the missing end (or start) next to it
    return 2


def interpretation_cost(trace: Sequence[str], c: TreeCharacteristics) -> int:
    """Minimal Levenshtein distance from ``trace`` to any word the
    characteristics-only interpretation of a subtree accepts."""
    n = len(trace)
    if n == 0:
        return empty_trace_cost(c)
    if n == 1:
        return singleton_cost(trace[0], c)
    acts = c.activities
    return (
        (trace[0] not in c.start_activities)
        + (trace[-1] not in c.end_activities)
        + sum(1 for a in trace[1:-1] if a not in acts)
    )


class SegmentCosts:
    """O(1) interpretation cost of any contiguous slice ``trace[i:j]``."""

    def __init__(self, trace: Sequence[str], c: TreeCharacteristics) -> None:
        self.trace = tuple(trace)
        self.chars = c
        self._empty = empty_trace_cost(c)
        self._outside = [0]
        for a in self.trace:
            self._outside.append(self._outside[-1] + (a not in c.activities))

    def __call__(self, i: int, j: int) -> int:
        if j == i:
            return self._empty
        if j == i + 1:
            return singleton_cost(self.trace[i], self.chars)
        c = self.chars
        return (
            (self.trace[i] not in c.start_activities)
            + (self.trace[j - 1] not in c.end_activities)
            + self._outside[j - 1]
            - self._outside[i + 1]
        )


# -- splitters ----------------------------------------------------------------------


def _child_chars(t: ProcessTree, chars: Mapping[int, TreeCharacteristics], v: int, op: Operator):
    node = t[v]
    if node.operator is not op:
        raise ValueError(f"node {v} is {node.label}, expected {op.value}")
    if len(node.children) != 2:
        raise ValueError(f"node {v} is not binary; binarize the tree first")
    c1, c2 = node.children
    return chars[c1], chars[c2]


def split_xor(trace: Sequence[str], t: ProcessTree, chars: Mapping[int, TreeCharacteristics], v: int = 0) -> SplitAssignment:
    trace = tuple(trace)
    c1, c2 = _child_chars(t, chars, v, Operator.XOR)
    k1, k2 = interpretation_cost(trace, c1), interpretation_cost(trace, c2)
    child = 1 if k1 <= k2 else 2
    return SplitAssignment(((trace, child),), (tuple(range(len(trace))),), min(k1, k2))


def split_seq(trace: Sequence[str], t: ProcessTree, chars: Mapping[int, TreeCharacteristics], v: int = 0) -> SplitAssignment:
    trace = tuple(trace)
    n = len(trace)
    c1, c2 = _child_chars(t, chars, v, Operator.SEQ)
    left, right = SegmentCosts(trace, c1), SegmentCosts(trace, c2)
    best_p, best = 0, INF
    for p in range(n + 1):
        val = left(0, p) + right(p, n)
        if val < best:
            best_p, best = p, val
    return SplitAssignment(
        ((trace[:best_p], 1), (trace[best_p:], 2)),
        (tuple(range(best_p)), tuple(range(best_p, n))),
        int(best),
    )


# per-child phase while scanning a trace for the parallel split
_FRESH, _OPEN, _DONE = 0, 1, 2


def _and_options(x: str, phase: int, c: TreeCharacteristics):
    """(cost, next phase) for giving activity ``x`` to a child in ``phase``."""
    if phase == _FRESH:
        return ((x not in c.start_activities, _OPEN), (singleton_cost(x, c), _DONE))
    if phase == _OPEN:
        return ((x not in c.activities, _OPEN), (x not in c.end_activities, _DONE))
    return ()


def split_and(trace: Sequence[str], t: ProcessTree, chars: Mapping[int, TreeCharacteristics], v: int = 0) -> SplitAssignment:
    """Assign every activity to one child so the two induced subsequences have
    minimal summed interpretation cost.

    Dynamic program over positions; the state is each child's phase (nothing
    assigned yet, started, or already received its last activity), which
    prices first/middle/last/singleton roles exactly. Ties go to child 1 at
    the leftmost position where a choice exists.
    """
    trace = tuple(trace)
    n = len(trace)
    cc = _child_chars(t, chars, v, Operator.AND)
    empty = (empty_trace_cost(cc[0]), empty_trace_cost(cc[1]))
    states = [(a, b) for a in range(3) for b in range(3)]

    def moves(i: int, st: tuple[int, int]):
        for j in (0, 1):
            for step_cost, nxt in _and_options(trace[i], st[j], cc[j]):
                new = (nxt, st[1]) if j == 0 else (st[0], nxt)
                yield j, int(step_cost), new

    # cost_to_go[i][state]: cheapest completion from position i
    cost_to_go = [dict.fromkeys(states, INF) for _ in range(n + 1)]
    for st in states:
        if _OPEN not in st:
            cost_to_go[n][st] = (empty[0] if st[0] == _FRESH else 0) + (empty[1] if st[1] == _FRESH else 0)
    for i in range(n - 1, -1, -1):
        row, nxt_row = cost_to_go[i], cost_to_go[i + 1]
        for st in states:
            row[st] = min((c + nxt_row[new] for _, c, new in moves(i, st)), default=INF)

    total = cost_to_go[0][(_FRESH, _FRESH)]
    # forward pass keeps every optimal state compatible with the chosen prefix
    frontier = {(_FRESH, _FRESH): 0}
    owners = []
    for i in range(n):
        for j in (0, 1):
            nxt_frontier: dict = {}
            for st, g in frontier.items():
                for jj, c, new in moves(i, st):
                    if jj == j and g + c + cost_to_go[i + 1][new] == total:
                        if g + c < nxt_frontier.get(new, INF):
                            nxt_frontier[new] = g + c
            if nxt_frontier:
                owners.append(j)
                frontier = nxt_frontier
                break
    pos1 = tuple(i for i, o in enumerate(owners) if o == 0)
    pos2 = tuple(i for i, o in enumerate(owners) if o == 1)
    return SplitAssignment(
        ((tuple(trace[i] for i in pos1), 1), (tuple(trace[i] for i in pos2), 2)),
        (pos1, pos2),
        int(total),
    )


def split_loop(trace: Sequence[str], t: ProcessTree, chars: Mapping[int, TreeCharacteristics], v: int = 0) -> SplitAssignment:
    """Cut the trace into an odd number of contiguous, possibly empty segments
    alternating do/redo/do/... with minimal summed interpretation cost.

    Ties prefer fewer segments, then cut positions further left.
    """
    trace = tuple(trace)
    n = len(trace)
    c1, c2 = _child_chars(t, chars, v, Operator.LOOP)
    seg = (SegmentCosts(trace, c1), SegmentCosts(trace, c2))

    # best[k][i]: (cost, n_segments, cuts) for trace[i:] when the next segment
    # belongs to child k+1
    best_do: list = [None] * (n + 1)
    best_redo: list = [None] * (n + 1)

    def extend(cost: int, cut: int, rest) -> tuple:
        return (cost + rest[0], 1 + rest[1], (cut,) + rest[2])

    for i in range(n, -1, -1):
        do_far = (seg[0](i, n), 1, ())
        for j in range(i + 1, n + 1):
            do_far = min(do_far, extend(seg[0](i, j), j, best_redo[j]))
        redo_far = None
        for k in range(i + 1, n + 1):
            cand = extend(seg[1](i, k), k, best_do[k])
            if redo_far is None or cand < redo_far:
                redo_far = cand
        if redo_far is not None:
            best_do[i] = min(do_far, extend(seg[0](i, i), i, redo_far))
        else:
            best_do[i] = do_far
        candidates = [extend(seg[1](i, i), i, best_do[i])]
        if redo_far is not None:
            candidates.append(redo_far)
        best_redo[i] = min(candidates)

    total, n_seg, cuts = best_do[0]
    bounds = (0,) + cuts + (n,)
    parts = []
    positions = []
    for k in range(n_seg):
        a, b = bounds[k], bounds[k + 1]
        parts.append((trace[a:b], 1 if k % 2 == 0 else 2))
        positions.append(tuple(range(a, b)))
    return SplitAssignment(tuple(parts), tuple(positions), int(total))


SPLITTERS = {
    Operator.XOR: split_xor,
    Operator.SEQ: split_seq,
    Operator.AND: split_and,
    Operator.LOOP: split_loop,
}


def split(trace: Sequence[str], t: ProcessTree, chars: Mapping[int, TreeCharacteristics], v: int = 0) -> SplitAssignment:
    op = t[v].operator
    if op is None:
        raise ValueError(f"node {v} is a leaf and cannot be split")
    return SPLITTERS[op](trace, t, chars, v)


# -- composition ------------------------------------------------------------------------


def _find_merge(trace: Trace, s1: Trace, s2: Trace) -> tuple[int, ...] | None:
    """Owner (0/1) per position such that ``trace`` interleaves ``s1`` and ``s2``."""
    n, a, b = len(trace), len(s1), len(s2)
    if a + b != n:
        return None
    # ok[i][j]: trace[i+j:] is an interleaving of s1[i:] and s2[j:]
    ok = [[False] * (b + 1) for _ in range(a + 1)]
    ok[a][b] = True
    for i in range(a, -1, -1):
        for j in range(b, -1, -1):
            if i == a and j == b:
                continue
            k = i + j
            ok[i][j] = (i < a and s1[i] == trace[k] and ok[i + 1][j]) or (
                j < b and s2[j] == trace[k] and ok[i][j + 1]
            )
    if not ok[0][0]:
        return None
    owners, i, j = [], 0, 0
    while i + j < n:
        if i < a and s1[i] == trace[i + j] and ok[i + 1][j]:
            owners.append(0)
            i += 1
        else:
            owners.append(1)
            j += 1
    return tuple(owners)


def _interleave(trace: Trace, owners: Sequence[int], first: Alignment, second: Alignment) -> Alignment:
    queues = [list(first.moves), list(second.moves)]
    cursor = [0, 0]
    out: list[Move] = []
    for i, owner in enumerate(owners):
        q = queues[owner]
        k = cursor[owner]
        while True:
            if k >= len(q):
                raise CompositionError(f"sub-alignment {owner + 1} ran out before explaining position {i}")
            move = q[k]
            out.append(move)
            k += 1
            if move.explains_log:
                if move.activity != trace[i]:
                    raise CompositionError(f"position {i}: expected {trace[i]!r}, sub-alignment gave {move.activity!r}")
                break
        cursor[owner] = k
    for owner in (0, 1):
        rest = queues[owner][cursor[owner]:]
        if any(m.explains_log for m in rest):
            raise CompositionError(f"sub-alignment {owner + 1} explains more activities than assigned")
        out.extend(rest)
    return Alignment(tuple(out))


def compose(
    t: ProcessTree,
    trace: Sequence[str],
    parts: SplitAssignment,
    sub_alignments: Sequence[Alignment],
    v: int = 0,
    check: bool = False,
) -> Alignment:
    """Reassemble child sub-alignments into an alignment for the node ``v``.

    xor returns its single sub-alignment, seq and loop concatenate in part
    order, and walks the trace and pulls moves from whichever child owns the
    current activity, then appends what is left of both children.
    """
    trace = tuple(trace)
    op = t[v].operator
    if len(sub_alignments) != len(parts.parts):
        raise CompositionError("one sub-alignment per part is required")
    for (sub_trace, _), gamma in zip(parts.parts, sub_alignments):
        if gamma.log_projection() != sub_trace:
            raise CompositionError("sub-alignment does not explain its sub-trace")
    if op is Operator.AND:
        owner_of = [None] * len(trace)
        if parts.positions is not None:
            for (_, child), ps in zip(parts.parts, parts.positions):
                for p in ps:
                    owner_of[p] = child - 1
            owners = tuple(owner_of)
        else:
            owners = _find_merge(trace, parts.parts[0][0], parts.parts[1][0])
            if owners is None:
                raise CompositionError("sub-traces do not interleave to the trace")
        by_child = {child: gamma for (_, child), gamma in zip(parts.parts, sub_alignments)}
        result = _interleave(trace, owners, by_child[1], by_child[2])
    else:
        moves: tuple[Move, ...] = ()
        for gamma in sub_alignments:
            moves += gamma.moves
        result = Alignment(moves)
    if result.log_projection() != trace:
        raise CompositionError("composed alignment does not explain the trace")
    if check and not validate_alignment(trace, t, result, v):
        raise CompositionError(f"composed alignment is not valid for node {v}")
    return result


# -- Algorithm ------------------------------------------------------------------------------


def approximate_align(
    trace: Sequence[str],
    t: ProcessTree,
    params: ApproxParams,
    chars: Mapping[int, TreeCharacteristics] | None = None,
    v: int = 0,
    check: bool = False,
    executor: Executor | None = None,
) -> Alignment:
    """Approximate alignment of ``trace`` on the subtree at ``v``.

    Falls back to :func:`optimal_align` once the trace is at most
    ``params.TL`` long or the subtree at most ``params.TH`` high; otherwise
    splits, recurses per part and composes. The result is always a valid
    alignment, never cheaper than the optimum. When an ``executor`` is
    given, the parts of the top-level split are aligned as separate tasks;
    the result does not depend on it.
    """
    trace = tuple(trace)
    if chars is None:
        chars = compute_characteristics(t)
    if len(trace) <= params.TL or t.height(v) <= params.TH:
        return optimal_align(trace, t, v)
    assignment = split(trace, t, chars, v)
    kids = t[v].children
    jobs = [(sub_trace, kids[child - 1]) for sub_trace, child in assignment.parts]
    worker = partial(_approx_part, t=t, params=params, chars=chars, check=check)
    if executor is None:
        subs = [worker(job) for job in jobs]
    else:
        subs = list(executor.map(worker, jobs))
    return compose(t, trace, assignment, subs, v, check=check)


def _approx_part(job, t, params, chars, check) -> Alignment:
    sub_trace, child = job
    return approximate_align(sub_trace, t, params, chars, child, check)
