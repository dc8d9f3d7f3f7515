"""Alignments between traces and process trees, and the optimal aligner.

The optimal aligner runs A* over the synchronous product of trace positions
and execution states. Silent steps cost nothing, so states are closed when
they are expanded, never when they are generated. Among optimal alignments
the search returns the one with the fewest moves, then the lexicographically
smallest move encoding (see :meth:`Move.sort_key`).
"""

from __future__ import annotations

import enum
import heapq
import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .semantics import TreeSemantics
from .tree import SKIP, TAU, ProcessTree, check_activity

Trace = tuple[str, ...]


def as_trace(activities: Iterable[str]) -> Trace:
    return tuple(check_activity(a) for a in activities)


class MoveKind(enum.Enum):
    SYNC = "sync"
    LOG = "log"
    VISIBLE_MODEL = "visible_model"
    INVISIBLE_MODEL = "invisible_model"


_KIND_RANK = {MoveKind.SYNC: 0, MoveKind.LOG: 1, MoveKind.VISIBLE_MODEL: 2, MoveKind.INVISIBLE_MODEL: 3}


@dataclass(frozen=True)
class Move:
    kind: MoveKind
    activity: str | None = None
    leaf: int | None = None

    def __post_init__(self) -> None:
        has_act = self.activity is not None
        has_leaf = self.leaf is not None
        if self.kind is MoveKind.SYNC and not (has_act and has_leaf):
            raise ValueError("a synchronous move needs both an activity and a leaf")
        if self.kind is MoveKind.LOG and (not has_act or has_leaf):
            raise ValueError("a log move has an activity and no leaf")
        if self.kind in (MoveKind.VISIBLE_MODEL, MoveKind.INVISIBLE_MODEL) and (has_act or not has_leaf):
            raise ValueError("a model move has a leaf and no activity")

    @property
    def cost(self) -> int:
        return 1 if self.kind in (MoveKind.LOG, MoveKind.VISIBLE_MODEL) else 0

    @property
    def explains_log(self) -> bool:
        return self.activity is not None

    def sort_key(self) -> tuple[int, str, int]:
        return (_KIND_RANK[self.kind], self.activity or "", -1 if self.leaf is None else self.leaf)

    def to_record(self) -> dict:
        rec: dict = {"kind": self.kind.value}
        if self.activity is not None:
            rec["activity"] = self.activity
        if self.leaf is not None:
            rec["leaf"] = self.leaf
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "Move":
        return cls(MoveKind(rec["kind"]), rec.get("activity"), rec.get("leaf"))


@dataclass(frozen=True)
class Alignment:
    moves: tuple[Move, ...]

    @property
    def cost(self) -> int:
        return sum(m.cost for m in self.moves)

    def __len__(self) -> int:
        return len(self.moves)

    def __add__(self, other: "Alignment") -> "Alignment":
        return Alignment(self.moves + other.moves)

    def log_projection(self) -> Trace:
        return tuple(m.activity for m in self.moves if m.activity is not None)

    def model_leaves(self) -> tuple[int, ...]:
        return tuple(m.leaf for m in self.moves if m.leaf is not None)

    def to_records(self) -> list[dict]:
        return [m.to_record() for m in self.moves]

    def to_json(self) -> str:
        return json.dumps(self.to_records(), separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_records(cls, records: Iterable[dict]) -> "Alignment":
        return cls(tuple(Move.from_record(r) for r in records))

    @classmethod
    def from_json(cls, text: str) -> "Alignment":
        return cls.from_records(json.loads(text))

    def labelled(self, t: ProcessTree) -> list[tuple[str, str]]:
        """(log, model) label pairs with ``>>`` for skips, as in a two-row table."""
        pairs = []
        for m in self.moves:
            log = m.activity if m.activity is not None else SKIP
            model = t.nodes[m.leaf].label if m.leaf is not None else SKIP
            pairs.append((log, model))
        return pairs

    def to_table(self, t: ProcessTree, show_leaves: bool = False) -> str:
        """Two-row text table: log row on top, model row below."""
        top = ["log"]
        bottom = ["model"]
        for (log, model), m in zip(self.labelled(t), self.moves):
            top.append(log)
            bottom.append(f"{model}@{m.leaf}" if show_leaves and m.leaf is not None else model)
        widths = [max(len(a), len(b)) for a, b in zip(top, bottom)]
        row = lambda cells: " | ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()  # noqa: E731
        return row(top) + "\n" + row(bottom)


def log_moves_only(trace: Sequence[str]) -> Alignment:
    return Alignment(tuple(Move(MoveKind.LOG, a) for a in trace))


# -- validation -------------------------------------------------------------


def cost(gamma: Alignment) -> int:
    return gamma.cost


def validate_alignment(trace: Sequence[str], t: ProcessTree, gamma: Alignment, root: int = 0) -> bool:
    """Check that ``gamma`` is an alignment of ``trace`` and the subtree at ``root``.

    Requires the log projection to equal the trace, every move to pair an
    activity with an equally labelled leaf of the subtree (tau leaves only in
    invisible model moves), and the visible leaf sequence to be executable
    from start to completion.
    """
    if gamma.log_projection() != tuple(trace):
        return False
    subtree = t.descendants(root)
    visible = []
    for m in gamma.moves:
        if m.leaf is None:
            continue
        if m.leaf not in subtree or not t.nodes[m.leaf].is_leaf:
            return False
        node = t.nodes[m.leaf]
        if m.kind is MoveKind.INVISIBLE_MODEL:
            if not node.is_tau:
                return False
            continue
        if node.is_tau:
            return False
        if m.kind is MoveKind.SYNC and node.activity != m.activity:
            return False
        visible.append(m.leaf)
    return TreeSemantics.of(t, root).accepts_leaf_sequence(visible)


# -- optimal alignment --------------------------------------------------------


def optimal_align(trace: Sequence[str], t: ProcessTree, root: int = 0, heuristic: bool = True) -> Alignment:
    """A minimum-cost alignment of ``trace`` on the subtree rooted at ``root``.

    With ``heuristic`` the search uses A* with a per-activity estimate: the
    firings the model still needs beyond what the rest of the trace offers,
    plus remaining events the model can no longer fire. It is consistent, so
    results are identical to plain Dijkstra.
    """
    trace = tuple(trace)
    sem = TreeSemantics.of(t, root)
    n = len(trace)
    final = sem.final

    # suffix_count[x][i] = occurrences of x in trace[i:]
    suffix_count: dict[str, list[int]] = {}
    for x in set(trace):
        counts = [0] * (n + 1)
        for i in range(n - 1, -1, -1):
            counts[i] = counts[i + 1] + (trace[i] == x)
        suffix_count[x] = counts
    h_cache: dict = {}

    def estimate(i: int, state) -> int:
        # per activity, |firings - remaining occurrences| bounds the moves
        # that cannot be synchronous
        if not heuristic:
            return 0
        key = (i, state)
        val = h_cache.get(key)
        if val is None:
            need, most = sem.label_bounds(state)
            val = 0
            for x, k in need.items():
                c = suffix_count.get(x)
                val += max(0, k - (c[i] if c else 0))
            for x, c in suffix_count.items():
                left = c[i] - most.get(x, 0)
                if left > 0:
                    val += left
            h_cache[key] = val
        return val

    start = (0, sem.initial)
    counter = itertools.count()
    # entries: (f, n_moves, path_key, tiebreak, g, state, path)
    heap = [(estimate(0, sem.initial), 0, (), next(counter), 0, start, None)]
    best: dict = {start: (0, 0, ())}
    closed = set()
    while heap:
        f, n_moves, key, _, g, state, path = heapq.heappop(heap)
        if state in closed:
            continue
        closed.add(state)
        i, exe = state
        if i == n and exe == final:
            return Alignment(_unwind(path))

        def push(new_state, dg: int, move: Move | None) -> None:
            if new_state in closed:
                return
            ng = g + dg
            if move is None:
                nm, nkey, npath = n_moves, key, path
            else:
                nm, nkey, npath = n_moves + 1, key + (move.sort_key(),), (move, path)
            rank = (ng, nm, nkey)
            known = best.get(new_state)
            if known is not None and known <= rank:
                return
            best[new_state] = rank
            heapq.heappush(
                heap, (ng + estimate(new_state[0], new_state[1]), nm, nkey, next(counter), ng, new_state, npath)
            )

        if i < n:
            push((i + 1, exe), 1, Move(MoveKind.LOG, trace[i]))
        for step, nxt in sem.successors(exe):
            if step.is_control:
                push((i, nxt), 0, None)
            elif step.label is None:
                push((i, nxt), 0, Move(MoveKind.INVISIBLE_MODEL, leaf=step.leaf))
            else:
                push((i, nxt), 1, Move(MoveKind.VISIBLE_MODEL, leaf=step.leaf))
                if i < n and trace[i] == step.label:
                    push((i + 1, nxt), 0, Move(MoveKind.SYNC, trace[i], step.leaf))
    raise RuntimeError("search space exhausted without reaching the final state")  # unreachable for valid trees


def _unwind(path) -> tuple[Move, ...]:
    out = []
    while path is not None:
        move, path = path
        out.append(move)
    return tuple(reversed(out))


def model_projection_labels(gamma: Alignment, t: ProcessTree) -> Trace:
    return tuple(t.nodes[leaf].activity for leaf in gamma.model_leaves() if not t.nodes[leaf].is_tau)


__all__ = [
    "Alignment",
    "Move",
    "MoveKind",
    "SKIP",
    "TAU",
    "Trace",
    "as_trace",
    "cost",
    "log_moves_only",
    "model_projection_labels",
    "optimal_align",
    "validate_alignment",
]
