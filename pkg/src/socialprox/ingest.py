"""Flat-file readers and writers, and the bundled Southern Women data.

Formats (all UTF-8):

* edge list: ``src<TAB>dst`` per line, ``#`` comments and blank lines skipped
* activity: CSV with header ``user,item,time`` (integer seconds)
* promotions: CSV with header ``item,promotion_time``
* attendance: CSV, header row of event labels after a corner cell, then one
  row per actor with 0/1 cells
"""
from __future__ import annotations

import csv
import hashlib
import io
from collections.abc import Iterable
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import TextIO, Union

import numpy as np

from .activity import ActivityLog
from .graph import BipartiteAttendance

Source = Union[str, Path, TextIO]


class ParseError(ValueError):
    """Malformed input; ``lines`` holds the 1-based offending line (or row) numbers."""

    def __init__(self, message: str, lines: Iterable[int] = ()):
        self.lines = list(lines)
        super().__init__(message)


def _read_text(source: Source) -> str:
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8")
    return source.read()


def parse_edge_list(source: Source, lenient: bool = False) -> tuple[list[tuple[str, str]], list[int]]:
    """Return ``(edges, skipped_line_numbers)``.

    In strict mode (the default) any malformed line raises :class:`ParseError`
    listing every bad line; ``skipped`` is then always empty.
    """
    edges: list[tuple[str, str]] = []
    bad: list[int] = []
    for lineno, raw in enumerate(_read_text(source).split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            bad.append(lineno)
            continue
        edges.append((parts[0], parts[1]))
    if bad and not lenient:
        raise ParseError(f"malformed edge line(s): {', '.join(map(str, bad))}", bad)
    return edges, bad


def write_edge_list(edges: Iterable[tuple[str, str]], out: TextIO) -> None:
    for a, b in edges:
        if "\t" in a or "\t" in b or "\n" in a or "\n" in b:
            raise ValueError(f"label contains a tab or newline: {(a, b)!r}")
        out.write(f"{a}\t{b}\n")


def _csv_rows(source: Source, required: list[str]) -> Iterable[tuple[int, dict[str, str]]]:
    reader = csv.DictReader(io.StringIO(_read_text(source)))
    fields = reader.fieldnames or []
    missing = [c for c in required if c not in fields]
    if missing:
        raise ParseError(f"missing column(s): {', '.join(missing)}", [1])
    for row in reader:
        # header is row 1
        yield reader.line_num, row


def _parse_time(value: str | None, row: int, column: str) -> int:
    try:
        t = int(value)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise ParseError(f"row {row}: {column} must be an integer, got {value!r}", [row]) from None
    if t < 0:
        raise ParseError(f"row {row}: {column} must be nonnegative", [row])
    return t


def parse_activity(source: Source, collapse: bool = True) -> ActivityLog:
    """Read ``user,item,time`` records.

    With ``collapse`` (default) duplicate ``(user, item)`` pairs are merged,
    keeping the earliest time; the merge count is ``log.collapsed``.  Pass
    ``collapse=False`` to keep repeats, e.g. for the entropy filter.
    """
    records = []
    for row_no, row in _csv_rows(source, ["user", "item", "time"]):
        user, item = row["user"], row["item"]
        if not user or not item:
            raise ParseError(f"row {row_no}: empty user or item", [row_no])
        records.append((user, item, _parse_time(row["time"], row_no, "time")))
    log = ActivityLog(tuple(records))
    return log.deduplicated() if collapse else log


def parse_promotions(source: Source) -> dict[str, int]:
    out: dict[str, int] = {}
    for row_no, row in _csv_rows(source, ["item", "promotion_time"]):
        out[row["item"]] = _parse_time(row["promotion_time"], row_no, "promotion_time")
    return out


def write_activity(log: ActivityLog, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["user", "item", "time"])
    writer.writerows(log.records)


def write_promotions(promotions: dict[str, int], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["item", "promotion_time"])
    writer.writerows(promotions.items())


def parse_attendance(source: Source) -> BipartiteAttendance:
    rows = list(csv.reader(io.StringIO(_read_text(source))))
    if not rows:
        raise ParseError("empty attendance file", [1])
    events = rows[0][1:]
    actors, cells = [], []
    for row_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(events) + 1:
            raise ParseError(f"row {row_no}: expected {len(events) + 1} cells, got {len(row)}", [row_no])
        if any(c not in ("0", "1") for c in row[1:]):
            raise ParseError(f"row {row_no}: attendance cells must be 0 or 1", [row_no])
        actors.append(row[0])
        cells.append([c == "1" for c in row[1:]])
    matrix = np.array(cells, dtype=bool).reshape(len(actors), len(events))
    return BipartiteAttendance(tuple(actors), tuple(events), matrix)


def write_attendance(b: BipartiteAttendance, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["actor", *b.events])
    for actor, row in zip(b.actors, b.attended):
        writer.writerow([actor, *(int(x) for x in row)])


def southern_women() -> BipartiteAttendance:
    """Davis, Gardner & Gardner's attendance of 18 women at 14 events.

    This is the standard archival matrix (89 attendances); events are
    labelled ``E1``..``E14`` in chronological order.
    """
    text = resources.files("socialprox").joinpath("data/southern_women.csv").read_text(encoding="utf-8")
    return parse_attendance(io.StringIO(text))


def attendance_checksum(b: BipartiteAttendance) -> str:
    """SHA-256 over labels and matrix, for pinning bundled data."""
    h = hashlib.sha256()
    h.update("\x1f".join(b.actors).encode())
    h.update(b"\x1e")
    h.update("\x1f".join(b.events).encode())
    h.update(b"\x1e")
    h.update(np.ascontiguousarray(b.attended, dtype=np.uint8).tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class DatasetBundle:
    name: str
    attendance: BipartiteAttendance | None = None
    edges: tuple[tuple[str, str], ...] | None = None
    activity: ActivityLog | None = None

    def __post_init__(self) -> None:
        if self.attendance is None and self.edges is None and self.activity is None:
            raise ValueError("dataset bundle needs at least one payload")


def load_dataset(name: str) -> DatasetBundle:
    key = name.lower().replace("_", "-")
    if key == "southern-women":
        return DatasetBundle("southern-women", attendance=southern_women())
    raise KeyError(f"unknown bundled dataset {name!r}")
