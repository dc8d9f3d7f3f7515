"""Gray-box summary of every subtree: alphabet, start/end activities, empty-trace acceptance."""

from __future__ import annotations

from dataclasses import dataclass

from .tree import Operator, ProcessTree


@dataclass(frozen=True)
class TreeCharacteristics:
    activities: frozenset[str]
    start_activities: frozenset[str]
    end_activities: frozenset[str]
    accepts_empty: bool

    # short aliases matching the usual A / SA / EA notation
    @property
    def A(self) -> frozenset[str]:
        return self.activities

    @property
    def SA(self) -> frozenset[str]:
        return self.start_activities

    @property
    def EA(self) -> frozenset[str]:
        return self.end_activities


_TAU_CHARS = TreeCharacteristics(frozenset(), frozenset(), frozenset(), True)


def _combine(op: Operator, left: TreeCharacteristics, right: TreeCharacteristics) -> TreeCharacteristics:
    acts = left.activities | right.activities
    if op is Operator.SEQ:
        sa = left.start_activities | right.start_activities if left.accepts_empty else left.start_activities
        ea = left.end_activities | right.end_activities if right.accepts_empty else right.end_activities
        empty = left.accepts_empty and right.accepts_empty
    elif op is Operator.XOR:
        sa = left.start_activities | right.start_activities
        ea = left.end_activities | right.end_activities
        empty = left.accepts_empty or right.accepts_empty
    elif op is Operator.AND:
        sa = left.start_activities | right.start_activities
        ea = left.end_activities | right.end_activities
        empty = left.accepts_empty and right.accepts_empty
    else:
        # loop: both start and end are governed by the do-child
        if left.accepts_empty:
            sa = left.start_activities | right.start_activities
            ea = left.end_activities | right.end_activities
        else:
            sa = left.start_activities
            ea = left.end_activities
        empty = left.accepts_empty
    return TreeCharacteristics(acts, sa, ea, empty)


def compute_characteristics(t: ProcessTree) -> dict[int, TreeCharacteristics]:
    """Bottom-up characteristics for every node, keyed by node index.

    The result is cached on the (immutable) tree, so repeated calls are free.
    N-ary seq/xor/and nodes are folded left-deep, which matches what
    :func:`~ptapprox.tree.binarize` would produce.
    """
    cached = t._cache.get("characteristics")
    if cached is not None:
        return cached
    table: dict[int, TreeCharacteristics] = {}
    for v in range(len(t.nodes) - 1, -1, -1):
        n = t.nodes[v]
        if n.is_tau:
            table[v] = _TAU_CHARS
        elif n.is_leaf:
            s = frozenset({n.activity})
            table[v] = TreeCharacteristics(s, s, s, False)
        else:
            acc = table[n.children[0]]
            for c in n.children[1:]:
                acc = _combine(n.operator, acc, table[c])
            table[v] = acc
    result = dict(sorted(table.items()))
    t._cache["characteristics"] = result
    return result
