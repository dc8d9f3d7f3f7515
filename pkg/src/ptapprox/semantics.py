"""Execution semantics of process trees as a labeled transition system.

A (sub)tree is compiled once into a small set of *control points* and *steps*.
Every node owns an entry and an exit point; seq chains its children through
fresh intermediate points, xor lets all children share its entry/exit, and
splits into one entry/exit pair per child behind a silent fork and a silent
join, and a loop enters a ``do`` point, runs the do-child to a ``redo`` point
and either runs the redo-child back to ``do`` or leaves silently.

An execution state is the frozenset of control points currently holding
control. Because trees are block-structured no point is ever held twice, so
sets suffice and the state space stays finite (loop iterations are not
counted). Leaf steps fire a leaf node; control steps (fork, join, loop enter,
loop exit) are silent and never show up in alignments.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .tree import Operator, ProcessTree

ExecutionState = frozenset


@dataclass(frozen=True)
class Step:
    index: int
    node: int
    leaf: int | None
    label: str | None
    consumes: frozenset[int]
    produces: frozenset[int]

    @property
    def is_control(self) -> bool:
        return self.leaf is None

    @property
    def is_visible(self) -> bool:
        return self.label is not None

    @property
    def is_silent(self) -> bool:
        return self.label is None


class TreeSemantics:
    """Compiled step relation for the subtree of ``tree`` rooted at ``root``.

    Node indices in steps are those of the full tree, so alignments computed
    against a subtree can be spliced into alignments of an enclosing tree.
    """

    def __init__(self, tree: ProcessTree, root: int = 0) -> None:
        self.tree = tree
        self.root = root
        self.steps: list[Step] = []
        self._n_points = 0
        entry, exit_ = self._new_point(), self._new_point()
        # regions: the root body plus one per child of every and-node; each
        # point belongs to exactly one region and a region ends at its exit
        self._region_of: dict[int, int] = {}
        self._region_exit: list[int] = [exit_]
        self._region_parent_and: list[int | None] = [None]
        self._and_points: dict[int, tuple[int, int, list[tuple[int, int]]]] = {}
        self._compile(root, entry, exit_, 0)
        self.initial: ExecutionState = frozenset({entry})
        self.final: ExecutionState = frozenset({exit_})
        self._by_point: dict[int, list[Step]] = {}
        for s in self.steps:
            self._by_point.setdefault(min(s.consumes), []).append(s)
        self._succ_cache: dict[ExecutionState, tuple[tuple[Step, ExecutionState], ...]] = {}
        self._labels_from: list[frozenset[str]] | None = None
        self._tails: dict[int, dict[str, int]] | None = None
        self._leaves_from: list[frozenset[int]] | None = None
        self._bound_cache: dict[ExecutionState, tuple[dict[str, int], dict[str, float]]] = {}
        self.leaf_steps = {s.leaf: s for s in self.steps if s.leaf is not None}

    @classmethod
    def of(cls, tree: ProcessTree, root: int = 0) -> "TreeSemantics":
        key = ("semantics", root)
        sem = tree._cache.get(key)
        if sem is None:
            sem = tree._cache[key] = cls(tree, root)
        return sem

    def _new_point(self) -> int:
        self._n_points += 1
        return self._n_points - 1

    def _add(self, node: int, leaf: int | None, label: str | None, pre: Iterable[int], post: Iterable[int]) -> None:
        self.steps.append(Step(len(self.steps), node, leaf, label, frozenset(pre), frozenset(post)))

    def _compile(self, v: int, entry: int, exit_: int, region: int) -> None:
        self._region_of.setdefault(entry, region)
        self._region_of.setdefault(exit_, region)
        n = self.tree.nodes[v]
        if n.is_leaf:
            self._add(v, v, n.activity, (entry,), (exit_,))
        elif n.operator is Operator.SEQ:
            points = [entry] + [self._new_point() for _ in n.children[1:]] + [exit_]
            for i, c in enumerate(n.children):
                self._compile(c, points[i], points[i + 1], region)
        elif n.operator is Operator.XOR:
            for c in n.children:
                self._compile(c, entry, exit_, region)
        elif n.operator is Operator.AND:
            pairs = [(self._new_point(), self._new_point()) for _ in n.children]
            self._and_points[v] = (entry, exit_, pairs)
            self._add(v, None, None, (entry,), [p for p, _ in pairs])
            for c, (ci, co) in zip(n.children, pairs):
                sub = len(self._region_exit)
                self._region_exit.append(co)
                self._region_parent_and.append(v)
                self._compile(c, ci, co, sub)
            self._add(v, None, None, [q for _, q in pairs], (exit_,))
        else:
            do_point, redo_point = self._new_point(), self._new_point()
            body, redo = n.children
            self._add(v, None, None, (entry,), (do_point,))
            self._compile(body, do_point, redo_point, region)
            self._compile(redo, redo_point, do_point, region)
            self._add(v, None, None, (redo_point,), (exit_,))

    # -- step relation ---------------------------------------------------------

    def successors(self, state: ExecutionState) -> tuple[tuple[Step, ExecutionState], ...]:
        cached = self._succ_cache.get(state)
        if cached is not None:
            return cached
        out = []
        for p in sorted(state):
            for s in self._by_point.get(p, ()):
                if s.consumes <= state:
                    out.append((s, (state - s.consumes) | s.produces))
        out.sort(key=lambda pair: pair[0].index)
        result = tuple(out)
        self._succ_cache[state] = result
        return result

    def silent_closure(self, states: Iterable[ExecutionState]) -> set[ExecutionState]:
        seen = set(states)
        queue = deque(seen)
        while queue:
            s = queue.popleft()
            for step, nxt in self.successors(s):
                if step.is_silent and nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    def accepts_leaf_sequence(self, leaves: Iterable[int]) -> bool:
        """True iff the visible leaves can fire in this order from the initial
        state to the final state, with any silent steps in between."""
        current = self.silent_closure([self.initial])
        for leaf in leaves:
            nxt = set()
            for s in current:
                for step, succ in self.successors(s):
                    if step.leaf == leaf:
                        nxt.add(succ)
            if not nxt:
                return False
            current = self.silent_closure(nxt)
        return self.final in current

    def labels_reachable(self, state: ExecutionState) -> frozenset[str]:
        """Over-approximation of the activities that can still fire from ``state``.

        Computed on the static point graph, ignoring synchronisation; it only
        shrinks along steps, which keeps it usable as a consistent heuristic.
        """
        if self._labels_from is None:
            self._labels_from = self._point_label_closure()
        out: frozenset[str] = frozenset()
        for p in state:
            out = out | self._labels_from[p]
        return out

    def _point_label_closure(self) -> list[frozenset[str]]:
        n = self._n_points
        direct: list[set[str]] = [set() for _ in range(n)]
        edges: list[set[int]] = [set() for _ in range(n)]
        for s in self.steps:
            for p in s.consumes:
                if s.label is not None:
                    direct[p].add(s.label)
                edges[p] |= s.produces
        result = []
        for p in range(n):
            seen = {p}
            stack = [p]
            labels: set[str] = set()
            while stack:
                q = stack.pop()
                labels |= direct[q]
                for r in edges[q]:
                    if r not in seen:
                        seen.add(r)
                        stack.append(r)
            result.append(frozenset(labels))
        return result


    def label_bounds(self, state: ExecutionState) -> tuple[dict[str, int], dict[str, float]]:
        """Per activity, a lower and an upper bound on how often it fires on
        any way from ``state`` to the final state.

        The lower bounds are exact minima: the tokens of different and-branches
        complete independently, so minima add up over tokens and over the
        still-open and-blocks around them. The upper bound counts the distinct
        leaves statically reachable and is infinite for leaves under a loop.
        Labels absent from a dict have bound 0.
        """
        cached = self._bound_cache.get(state)
        if cached is not None:
            return cached
        if self._tails is None:
            self._tails = self._tail_minima()
            self._leaves_from = self._point_leaf_closure()
        need: dict[str, int] = {}
        open_ands = set()
        for p in state:
            for x, k in self._tails[p].items():
                need[x] = need.get(x, 0) + k
            r = self._region_of[p]
            while self._region_parent_and[r] is not None:
                a = self._region_parent_and[r]
                if a in open_ands:
                    break
                open_ands.add(a)
                r = self._region_of[self._and_points[a][1]]
        for a in open_ands:
            for x, k in self._tails[self._and_points[a][1]].items():
                need[x] = need.get(x, 0) + k
        leaves: set[int] = set()
        for p in state:
            leaves |= self._leaves_from[p]
        most: dict[str, float] = {}
        for leaf in leaves:
            x = self.tree.nodes[leaf].activity
            if x is None:
                continue
            most[x] = most.get(x, 0) + (float("inf") if self._in_loop(leaf) else 1)
        result = (need, most)
        self._bound_cache[state] = result
        return result

    def _in_loop(self, leaf: int) -> bool:
        v = leaf
        while v != self.root:
            v = self.tree.nodes[v].parent
            if self.tree.nodes[v].operator is Operator.LOOP:
                return True
        return False

    def _tail_minima(self) -> dict[int, dict[str, int]]:
        """For every point, the per-activity minimum number of firings needed
        to reach the exit of the point's region (an and-branch or the root)."""
        labels = sorted({s.label for s in self.steps if s.label is not None})
        col = {x: k for k, x in enumerate(labels)}
        inf = float("inf")
        zero = [0] * len(labels)
        exits = set(self._region_exit)
        tails = [zero if p in exits else [inf] * len(labels) for p in range(self._n_points)]
        edges = []
        for s in self.steps:
            if s.is_control and self.tree.nodes[s.node].operator is Operator.AND:
                continue
            w = list(zero)
            if s.label is not None:
                w[col[s.label]] = 1
            for p in s.consumes:
                for q in s.produces:
                    edges.append((p, q, w))
        changed = True
        while changed:
            changed = False
            weighted = list(edges)
            for entry, exit_, pairs in self._and_points.values():
                w = [sum(tails[ci][k] for ci, _ in pairs) for k in range(len(labels))]
                weighted.append((entry, exit_, w))
            for p, q, w in weighted:
                if p in exits:
                    continue
                cur, nxt = tails[p], tails[q]
                new = [min(c, a + b) for c, a, b in zip(cur, w, nxt)]
                if new != cur:
                    tails[p] = new
                    changed = True
        return {p: {x: int(row[k]) for x, k in col.items() if row[k]} for p, row in enumerate(tails)}

    def _point_leaf_closure(self) -> list[frozenset[int]]:
        n = self._n_points
        direct: list[set[int]] = [set() for _ in range(n)]
        edges: list[set[int]] = [set() for _ in range(n)]
        for s in self.steps:
            for p in s.consumes:
                if s.leaf is not None:
                    direct[p].add(s.leaf)
                edges[p] |= s.produces
        result = []
        for p in range(n):
            seen = {p}
            stack = [p]
            leaves: set[int] = set()
            while stack:
                q = stack.pop()
                leaves |= direct[q]
                for r in edges[q]:
                    if r not in seen:
                        seen.add(r)
                        stack.append(r)
            result.append(frozenset(leaves))
        return result


def initial_state(t: ProcessTree, root: int = 0) -> ExecutionState:
    return TreeSemantics.of(t, root).initial


def final_state(t: ProcessTree, root: int = 0) -> ExecutionState:
    return TreeSemantics.of(t, root).final


def enabled_steps(t: ProcessTree, s: ExecutionState, root: int = 0) -> list[tuple[Step, ExecutionState]]:
    """All steps enabled in ``s`` with their successor states, in step order."""
    return list(TreeSemantics.of(t, root).successors(s))
