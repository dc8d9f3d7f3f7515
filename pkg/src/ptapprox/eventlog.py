"""Event logs: CSV ingestion, case grouping and variant deduplication."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .tree import check_activity

Trace = tuple[str, ...]


class LogFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Variant:
    trace: Trace
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"variant count must be >= 1, got {self.count}")
        for a in self.trace:
            check_activity(a)


@dataclass(frozen=True)
class EventLog:
    variants: tuple[Variant, ...] = ()

    def __post_init__(self) -> None:
        seen = set()
        for v in self.variants:
            if v.trace in seen:
                raise ValueError(f"duplicate variant {v.trace!r}")
            seen.add(v.trace)

    @classmethod
    def from_traces(cls, traces: Iterable[Sequence[str]]) -> "EventLog":
        """Group identical traces; variants keep first-appearance order."""
        counts: dict[Trace, int] = {}
        for tr in traces:
            key = tuple(tr)
            counts[key] = counts.get(key, 0) + 1
        return cls(tuple(Variant(tr, n) for tr, n in counts.items()))

    @classmethod
    def from_counts(cls, pairs: Iterable[tuple[Sequence[str], int]]) -> "EventLog":
        counts: dict[Trace, int] = {}
        for tr, n in pairs:
            counts[tuple(tr)] = counts.get(tuple(tr), 0) + n
        return cls(tuple(Variant(tr, n) for tr, n in counts.items()))

    def __len__(self) -> int:
        return len(self.variants)

    def __iter__(self) -> Iterator[Variant]:
        return iter(self.variants)

    @property
    def n_traces(self) -> int:
        return sum(v.count for v in self.variants)

    def traces(self) -> Iterator[Trace]:
        """Every trace, repeated according to its count."""
        for v in self.variants:
            for _ in range(v.count):
                yield v.trace


def parse_timestamp(text: str) -> datetime:
    return datetime.fromisoformat(text.strip())


def load_csv(
    path: str | Path,
    case_column: str = "case",
    activity_column: str = "activity",
    timestamp_column: str | None = None,
    delimiter: str = ",",
) -> EventLog:
    """Read an event table and turn it into a variant log.

    Events are grouped per case (cases in order of first appearance). With a
    timestamp column, each case is sorted by time; events with equal
    timestamps keep their file order.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader, None)
        if header is None:
            return EventLog()
        header = [h.strip() for h in header]
        wanted = [case_column, activity_column] + ([timestamp_column] if timestamp_column else [])
        missing = [c for c in wanted if c not in header]
        if missing:
            raise LogFormatError(f"{path}: missing column(s) {', '.join(missing)}; found {header}")
        ci, ai = header.index(case_column), header.index(activity_column)
        ti = header.index(timestamp_column) if timestamp_column else None
        cases: dict[str, list[tuple]] = {}
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise LogFormatError(f"{path}: row {reader.line_num} has {len(row)} fields, expected {len(header)}")
            activity = row[ai]
            try:
                check_activity(activity)
            except ValueError as exc:
                raise LogFormatError(f"{path}: row {reader.line_num}: {exc}") from None
            stamp = None
            if ti is not None:
                try:
                    stamp = parse_timestamp(row[ti])
                except ValueError:
                    raise LogFormatError(
                        f"{path}: row {reader.line_num}: cannot parse timestamp {row[ti]!r}"
                    ) from None
            events = cases.setdefault(row[ci], [])
            events.append((stamp, len(events), activity))
    traces = []
    for events in cases.values():
        if ti is not None:
            events.sort(key=lambda e: (e[0], e[1]))
        traces.append(tuple(e[2] for e in events))
    return EventLog.from_traces(traces)


def load_variants(path: str | Path) -> EventLog:
    """Read ``count;a1,a2,...`` lines. Blank lines and ``#`` comments are skipped;
    ``3;`` is the empty trace three times."""
    pairs = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        count_text, sep, rest = line.partition(";")
        if not sep:
            raise LogFormatError(f"{path}: line {lineno}: expected 'count;a1,a2,...'")
        try:
            count = int(count_text.strip())
        except ValueError:
            raise LogFormatError(f"{path}: line {lineno}: count {count_text.strip()!r} is not an integer") from None
        if count < 1:
            raise LogFormatError(f"{path}: line {lineno}: count must be >= 1, got {count}")
        trace = tuple(rest.split(",")) if rest else ()
        try:
            for a in trace:
                check_activity(a)
        except ValueError as exc:
            raise LogFormatError(f"{path}: line {lineno}: {exc}") from None
        pairs.append((trace, count))
    return EventLog.from_counts(pairs)


def format_variants(log: EventLog) -> str:
    lines = []
    for v in log:
        if any("," in a or "\n" in a for a in v.trace):
            raise ValueError(f"activity names in {v.trace!r} cannot be written in the variants format")
        lines.append(f"{v.count};{','.join(v.trace)}")
    return "\n".join(lines) + ("\n" if lines else "")


def write_variants(log: EventLog, path: str | Path) -> None:
    Path(path).write_text(format_variants(log), encoding="utf-8")


def load_log(path: str | Path, **csv_options) -> EventLog:
    """Dispatch on extension: ``.csv`` goes through :func:`load_csv`, anything
    else is read as a variants file."""
    if str(path).lower().endswith(".csv"):
        return load_csv(path, **csv_options)
    return load_variants(path)
