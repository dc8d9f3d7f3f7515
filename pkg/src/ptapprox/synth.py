"""Deterministic synthetic benchmark instances: random trees, sampled traces, noise."""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .eventlog import EventLog, format_variants
from .tree import Operator, ProcessTree

NOISE_KINDS = ("delete", "relabel", "insert")
MAX_LOOP_PROB = 0.2


def activity_name(i: int) -> str:
    """0 -> 'a', 25 -> 'z', 26 -> 'aa', ..."""
    name = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        name = chr(ord("a") + r) + name
    return name


def random_tree(
    rng: random.Random,
    n_leaves: int,
    loop_prob: float = MAX_LOOP_PROB,
    tau_prob: float = 0.1,
) -> ProcessTree:
    """Random binary tree with ``n_leaves`` leaves.

    Loops are drawn with probability ``loop_prob`` (capped at 0.2); the
    remaining mass is split evenly over seq, xor and and. Activity leaves get
    fresh names; a leaf is tau with probability ``tau_prob``.
    """
    if n_leaves < 1:
        raise ValueError("a tree needs at least one leaf")
    loop_prob = min(loop_prob, MAX_LOOP_PROB)
    others = (1.0 - loop_prob) / 3
    ops = [Operator.SEQ, Operator.XOR, Operator.AND, Operator.LOOP]
    weights = [others, others, others, loop_prob]
    counter = iter(range(n_leaves))

    def gen(n: int):
        if n == 1:
            idx = next(counter)
            return None if rng.random() < tau_prob else activity_name(idx)
        op = rng.choices(ops, weights)[0]
        k = rng.randint(1, n - 1)
        return (op, [gen(k), gen(n - k)])

    spec = gen(n_leaves)
    if spec is None:
        spec = activity_name(0)
    return ProcessTree.build(spec)


def sample_trace(
    rng: random.Random, t: ProcessTree, redo_prob: float = 0.3, max_redo: int = 3, v: int = 0
) -> tuple[str, ...]:
    """Random execution of the subtree at ``v``; loops repeat at most ``max_redo`` times."""
    n = t.nodes[v]
    if n.is_tau:
        return ()
    if n.is_leaf:
        return (n.activity,)
    kids = n.children
    if n.operator is Operator.SEQ:
        return tuple(a for c in kids for a in sample_trace(rng, t, redo_prob, max_redo, c))
    if n.operator is Operator.XOR:
        return sample_trace(rng, t, redo_prob, max_redo, rng.choice(kids))
    if n.operator is Operator.AND:
        out: tuple[str, ...] = ()
        for c in kids:
            out = _random_merge(rng, out, sample_trace(rng, t, redo_prob, max_redo, c))
        return out
    body, redo = kids
    out = sample_trace(rng, t, redo_prob, max_redo, body)
    rounds = 0
    while rounds < max_redo and rng.random() < redo_prob:
        out += sample_trace(rng, t, redo_prob, max_redo, redo)
        out += sample_trace(rng, t, redo_prob, max_redo, body)
        rounds += 1
    return out


def _random_merge(rng: random.Random, a: Sequence[str], b: Sequence[str]) -> tuple[str, ...]:
    """Uniformly random interleaving of two sequences."""
    out = []
    i = j = 0
    while i < len(a) or j < len(b):
        left = len(a) - i
        right = len(b) - j
        if rng.random() * (left + right) < left:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    return tuple(out)


def add_noise(
    rng: random.Random,
    trace: Sequence[str],
    noise_prob: float,
    alphabet: Sequence[str],
    kinds: Sequence[str] = NOISE_KINDS,
) -> tuple[str, ...]:
    """Per event, with probability ``noise_prob`` delete it, relabel it, or
    insert a random activity after it (uniform over ``kinds``)."""
    if not 0.0 <= noise_prob <= 1.0:
        raise ValueError("noise_prob must lie in [0, 1]")
    unknown = set(kinds) - set(NOISE_KINDS)
    if unknown or not kinds:
        raise ValueError(f"noise kinds must be a non-empty subset of {NOISE_KINDS}")
    out = []
    for a in trace:
        if rng.random() >= noise_prob:
            out.append(a)
            continue
        kind = rng.choice(list(kinds))
        if kind == "delete":
            continue
        if kind == "relabel":
            choices = [x for x in alphabet if x != a] or list(alphabet)
            out.append(rng.choice(choices))
        else:
            out.append(a)
            out.append(rng.choice(list(alphabet)))
    return tuple(out)


@dataclass(frozen=True)
class Instance:
    tree: ProcessTree
    log: EventLog


def synthesize(
    seed: int,
    n_trees: int,
    tree_size: int,
    n_traces: int,
    noise_prob: float,
    noise_kinds: Sequence[str] = NOISE_KINDS,
    loop_prob: float = MAX_LOOP_PROB,
    tau_prob: float = 0.1,
    redo_prob: float = 0.3,
    min_height: int = 0,
    max_attempts: int = 1000,
) -> list[Instance]:
    """``n_trees`` trees with ``tree_size`` leaves each and ``n_traces`` noisy traces per tree."""
    if not 0.0 <= noise_prob <= 1.0:
        raise ValueError("noise_prob must lie in [0, 1]")
    if n_trees < 0 or tree_size < 1 or n_traces < 0:
        raise ValueError("n_trees and n_traces must be >= 0, tree_size >= 1")
    rng = random.Random(seed)
    instances = []
    for _ in range(n_trees):
        for _attempt in range(max_attempts):
            tree = random_tree(rng, tree_size, loop_prob, tau_prob)
            if tree.height() >= min_height:
                break
        else:
            raise ValueError(f"no tree of height >= {min_height} found in {max_attempts} attempts")
        alphabet = sorted(tree.activities()) or [activity_name(0)]
        traces = [
            add_noise(rng, sample_trace(rng, tree, redo_prob), noise_prob, alphabet, noise_kinds)
            for _ in range(n_traces)
        ]
        instances.append(Instance(tree, EventLog.from_traces(traces)))
    return instances


def write_corpus(instances: Sequence[Instance], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for k, inst in enumerate(instances):
        tree_path = out / f"tree_{k:03d}.ptree"
        log_path = out / f"log_{k:03d}.variants"
        tree_path.write_text(inst.tree.render() + "\n", encoding="utf-8")
        log_path.write_text(format_variants(inst.log), encoding="utf-8")
        written += [tree_path, log_path]
    return written
