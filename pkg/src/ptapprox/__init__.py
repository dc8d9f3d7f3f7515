"""Optimal and approximate alignments between event-log traces and process trees."""

from .alignment import Alignment, Move, MoveKind, optimal_align, validate_alignment
from .approx import ApproxParams, SplitAssignment, approximate_align, compose, interpretation_cost, split
from .characteristics import TreeCharacteristics, compute_characteristics
from .eventlog import EventLog, Variant, load_csv, load_log, load_variants
from .tree import Operator, ProcessTree, binarize, parse_tree

__all__ = [
    "Alignment",
    "ApproxParams",
    "EventLog",
    "Move",
    "MoveKind",
    "Operator",
    "ProcessTree",
    "SplitAssignment",
    "TreeCharacteristics",
    "Variant",
    "approximate_align",
    "binarize",
    "compose",
    "compute_characteristics",
    "interpretation_cost",
    "load_csv",
    "load_log",
    "load_variants",
    "optimal_align",
    "parse_tree",
    "split",
    "validate_alignment",
]
