"""Process trees: data model, textual format, binarization and structural queries.

Textual grammar (whitespace insignificant)::

    tree := leaf | op '(' tree (',' tree)+ ')'
    op   := '->' | 'X' | '+' | '*'          (seq, xor, and, loop)
    leaf := 'tau' | identifier | quoted-string

The Unicode glyphs ``→ × ∧ ⟳ ↺ τ`` are accepted as input aliases.

Nodes are stored in a flat table indexed in depth-first pre-order, so the root
is always node 0. Duplicate activity labels are allowed; leaves are told apart
by their index. Heights count edges, a single leaf has height 0.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

SKIP = ">>"
TAU = "tau"
RESERVED_NAMES = frozenset({SKIP, "≫", TAU, "τ"})


class Operator(enum.Enum):
    SEQ = "->"
    XOR = "X"
    AND = "+"
    LOOP = "*"

    def __str__(self) -> str:
        return self.value


_OPERATOR_TOKENS = {
    "->": Operator.SEQ,
    "→": Operator.SEQ,
    "X": Operator.XOR,
    "×": Operator.XOR,
    "+": Operator.AND,
    "∧": Operator.AND,
    "*": Operator.LOOP,
    "⟳": Operator.LOOP,
    "↺": Operator.LOOP,
    "↻": Operator.LOOP,
}


class TreeSyntaxError(ValueError):
    """Raised for malformed tree text; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position


def check_activity(name: str) -> str:
    if not isinstance(name, str) or not name:
        raise ValueError(f"activity names must be non-empty strings, got {name!r}")
    if name in RESERVED_NAMES:
        raise ValueError(f"{name!r} is reserved and cannot be used as an activity name")
    return name


@dataclass(frozen=True)
class Node:
    """One entry of the node table.

    Exactly one of ``operator`` / ``activity`` is set for operator nodes and
    activity leaves; both are ``None`` for a tau leaf.
    """

    operator: Operator | None
    activity: str | None
    children: tuple[int, ...] = ()
    parent: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.operator is None

    @property
    def is_tau(self) -> bool:
        return self.operator is None and self.activity is None

    @property
    def label(self) -> str:
        if self.operator is not None:
            return self.operator.value
        return TAU if self.activity is None else self.activity


@dataclass(frozen=True, eq=False)
class ProcessTree:
    """Immutable ordered process tree; the root is node 0.

    Build instances with :func:`parse_tree` or :meth:`ProcessTree.build`
    rather than by hand. Equality is structural (labels and shape).
    """

    nodes: tuple[Node, ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    root = 0

    def __post_init__(self) -> None:
        _validate(self.nodes)

    # -- construction -------------------------------------------------------

    @classmethod
    def build(cls, spec) -> "ProcessTree":
        """Build from a nested spec: ``str`` activity, ``None`` for tau, or
        ``(Operator, [child_spec, ...])``."""
        rows: list[list] = []

        def visit(s, parent: int | None) -> int:
            idx = len(rows)
            if s is None:
                rows.append([None, None, [], parent])
            elif isinstance(s, str):
                rows.append([None, check_activity(s), [], parent])
            else:
                op, kids = s
                rows.append([op, None, [], parent])
                for k in kids:
                    rows[idx][2].append(visit(k, idx))
            return idx

        visit(spec, None)
        return cls(tuple(Node(op, act, tuple(ch), par) for op, act, ch, par in rows))

    def to_spec(self, v: int = 0):
        n = self.nodes[v]
        if n.is_leaf:
            return n.activity
        return (n.operator, [self.to_spec(c) for c in n.children])

    # -- queries --------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, v: int) -> Node:
        self._check_index(v)
        return self.nodes[v]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProcessTree):
            return NotImplemented
        return self.render() == other.render()

    def __hash__(self) -> int:
        return hash(self.render())

    def __str__(self) -> str:
        return self.render()

    def _check_index(self, v: int) -> None:
        if not isinstance(v, int) or not 0 <= v < len(self.nodes):
            raise IndexError(f"unknown node index {v!r}")

    def children(self, v: int) -> tuple[int, ...]:
        return self[v].children

    def descendants(self, v: int = 0) -> range:
        """Indices of the subtree rooted at ``v`` (pre-order makes them contiguous)."""
        self._check_index(v)
        return range(v, v + self._subtree_sizes()[v])

    def leaves(self, v: int = 0) -> list[int]:
        return [u for u in self.descendants(v) if self.nodes[u].is_leaf]

    def height(self, v: int = 0) -> int:
        self._check_index(v)
        return self._heights()[v]

    def activities(self, v: int = 0) -> frozenset[str]:
        return frozenset(
            self.nodes[u].activity for u in self.leaves(v) if self.nodes[u].activity is not None
        )

    def is_binary(self) -> bool:
        return all(n.is_leaf or len(n.children) == 2 for n in self.nodes)

    def subtree(self, v: int) -> "ProcessTree":
        """Standalone copy of the subtree rooted at ``v`` (re-indexed from 0)."""
        self._check_index(v)
        if v == 0:
            return self
        return ProcessTree.build(self.to_spec(v))

    def render(self, v: int = 0) -> str:
        """Canonical text, e.g. ``->(*(X(a, b), tau), c)``."""
        key = ("render", v)
        if key not in self._cache:
            n = self.nodes[v]
            if n.is_tau:
                text = TAU
            elif n.is_leaf:
                text = _render_activity(n.activity)
            else:
                text = f"{n.operator.value}({', '.join(self.render(c) for c in n.children)})"
            self._cache[key] = text
        return self._cache[key]

    def _subtree_sizes(self) -> list[int]:
        if "sizes" not in self._cache:
            sizes = [1] * len(self.nodes)
            for v in range(len(self.nodes) - 1, -1, -1):
                for c in self.nodes[v].children:
                    sizes[v] += sizes[c]
            self._cache["sizes"] = sizes
        return self._cache["sizes"]

    def _heights(self) -> list[int]:
        if "heights" not in self._cache:
            hs = [0] * len(self.nodes)
            for v in range(len(self.nodes) - 1, -1, -1):
                kids = self.nodes[v].children
                if kids:
                    hs[v] = 1 + max(hs[c] for c in kids)
            self._cache["heights"] = hs
        return self._cache["heights"]


def _validate(nodes: Sequence[Node]) -> None:
    if not nodes:
        raise ValueError("a process tree needs at least one node")
    if nodes[0].parent is not None:
        raise ValueError("node 0 must be the root")
    expected_next = 1
    # Pre-order numbering: children of v are laid out contiguously after v.
    for v, n in enumerate(nodes):
        if n.is_leaf:
            if n.children:
                raise ValueError(f"leaf node {v} has children")
            if n.activity is not None:
                check_activity(n.activity)
            continue
        if len(n.children) < 2:
            raise ValueError(f"operator node {v} ({n.operator.value}) needs at least 2 children")
        if n.operator is Operator.LOOP and len(n.children) != 2:
            raise ValueError(f"loop node {v} must have exactly 2 children, has {len(n.children)}")
        for c in n.children:
            if not 0 < c < len(nodes) or nodes[c].parent != v:
                raise ValueError(f"inconsistent parent/child link {v} -> {c}")
    seen = [False] * len(nodes)
    stack = [0]
    while stack:
        v = stack.pop()
        if seen[v]:
            raise ValueError("node table contains a cycle or shared child")
        seen[v] = True
        if v != 0 and v != expected_next:
            raise ValueError("nodes are not numbered in depth-first pre-order")
        expected_next = v + 1
        stack.extend(reversed(nodes[v].children))
    if not all(seen):
        raise ValueError("node table contains unreachable nodes")


_IDENT = re.compile(r"[^\W][\w.\-]*", re.UNICODE)
_IDENT_FULL = re.compile(r"[^\W][\w.\-]*\Z", re.UNICODE)


def _render_activity(name: str) -> str:
    if _IDENT_FULL.match(name) and name not in _OPERATOR_TOKENS:
        return name
    return json.dumps(name, ensure_ascii=False)


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise TreeSyntaxError(f"expected {ch!r}, found {found!r}", self.pos)
        self.pos += 1

    def parse(self):
        spec = self.tree()
        self.skip_ws()
        if self.pos != len(self.text):
            raise TreeSyntaxError(f"unexpected trailing input {self.text[self.pos]!r}", self.pos)
        return spec

    def tree(self):
        self.skip_ws()
        start = self.pos
        op = self._operator_token()
        if op is not None:
            self.expect("(")
            kids = [self.tree()]
            while self.peek() == ",":
                self.pos += 1
                kids.append(self.tree())
            self.expect(")")
            if len(kids) < 2:
                raise TreeSyntaxError(f"operator {op.value} needs at least 2 children", start)
            if op is Operator.LOOP and len(kids) != 2:
                raise TreeSyntaxError(f"loop needs exactly 2 children, got {len(kids)}", start)
            return (op, kids)
        return self.leaf()

    def _operator_token(self) -> Operator | None:
        for tok in sorted(_OPERATOR_TOKENS, key=len, reverse=True):
            if self.text.startswith(tok, self.pos):
                after = self.pos + len(tok)
                # "X" is also a legal activity name unless an argument list follows.
                rest = self.text[after:].lstrip()
                if tok == "X" and not rest.startswith("("):
                    return None
                self.pos = after
                return _OPERATOR_TOKENS[tok]
        return None

    def leaf(self):
        start = self.pos
        ch = self.peek()
        if ch in ("'", '"'):
            name = self._quoted(ch)
            if name in RESERVED_NAMES:
                raise TreeSyntaxError(f"{name!r} is reserved and cannot be an activity", start)
            return name
        m = _IDENT.match(self.text, self.pos)
        if not m:
            found = ch or "end of input"
            raise TreeSyntaxError(f"expected a tree, found {found!r}", self.pos)
        self.pos = m.end()
        word = m.group()
        if word in (TAU, "τ"):
            return None
        return word

    def _quoted(self, quote: str) -> str:
        start = self.pos
        self.pos += 1
        out = []
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    break
                nxt = self.text[self.pos + 1]
                if nxt == "u" and quote == '"':
                    out.append(chr(int(self.text[self.pos + 2 : self.pos + 6], 16)))
                    self.pos += 6
                    continue
                out.append({"n": "\n", "t": "\t"}.get(nxt, nxt))
                self.pos += 2
                continue
            if ch == quote:
                self.pos += 1
                if not out:
                    raise TreeSyntaxError("empty activity name", start)
                return "".join(out)
            out.append(ch)
            self.pos += 1
        raise TreeSyntaxError("unterminated quoted string", start)


def parse_tree(text: str) -> ProcessTree:
    """Parse the textual format; child order is kept exactly as written."""
    return ProcessTree.build(_Parser(text).parse())


def load_trees(path: str | Path) -> list[ProcessTree]:
    """Read one tree per non-blank line; lines starting with ``#`` are comments."""
    trees = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            trees.append(parse_tree(stripped))
        except TreeSyntaxError as exc:
            raise TreeSyntaxError(f"line {lineno}: {exc.message}", exc.position) from None
    return trees


def binarize(t: ProcessTree) -> ProcessTree:
    """Language-equivalent binary tree; n-ary nodes fold left-deep.

    ``op(c1, c2, c3)`` becomes ``op(op(c1, c2), c3)``, which is sound for
    seq, xor and and because all three are associative.
    """
    if t.is_binary():
        return t

    def fold(v: int):
        n = t.nodes[v]
        if n.is_leaf:
            return n.activity
        kids = [fold(c) for c in n.children]
        acc = kids[0]
        for k in kids[1:]:
            acc = (n.operator, [acc, k])
        return acc

    return ProcessTree.build(fold(0))


def iter_language(
    t: ProcessTree, v: int = 0, max_loop_repeats: int = 1, max_len: int | None = None
) -> Iterator[tuple[str, ...]]:
    """Enumerate the language of the subtree at ``v`` with every loop taking at
    most ``max_loop_repeats`` redo rounds. Meant for small trees only."""
    yield from sorted(_language(t, v, max_loop_repeats, max_len))


def _language(t: ProcessTree, v: int, k: int, max_len: int | None) -> frozenset:
    key = ("lang", v, k, max_len)
    if key in t._cache:
        return t._cache[key]
    n = t.nodes[v]

    def cap(words: Iterable[tuple]) -> frozenset:
        if max_len is None:
            return frozenset(words)
        return frozenset(w for w in words if len(w) <= max_len)

    if n.is_tau:
        out = frozenset({()})
    elif n.is_leaf:
        out = frozenset({(n.activity,)})
    else:
        langs = [_language(t, c, k, max_len) for c in n.children]
        if n.operator is Operator.XOR:
            out = frozenset().union(*langs)
        elif n.operator is Operator.SEQ:
            out = langs[0]
            for lang in langs[1:]:
                out = cap(a + b for a in out for b in lang)
        elif n.operator is Operator.AND:
            out = langs[0]
            for lang in langs[1:]:
                out = cap(w for a in out for b in lang for w in _shuffles(a, b))
        else:
            body, redo = langs
            out = body
            current = body
            for _ in range(k):
                current = cap(a + r + b for a in current for r in redo for b in body)
                out = out | current
    t._cache[key] = out
    return out


def _shuffles(a: tuple, b: tuple) -> Iterator[tuple]:
    if not a:
        yield b
        return
    if not b:
        yield a
        return
    for rest in _shuffles(a[1:], b):
        yield (a[0],) + rest
    for rest in _shuffles(a, b[1:]):
        yield (b[0],) + rest
