"""User activity logs, co-activity, and proximity/activity correlation."""
from __future__ import annotations

import csv
import math
from collections import Counter, defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import TextIO

import numpy as np

from .graph import BipartiteAttendance, DirectedGraph
from .proximity import Metric, PairScope, pair_scores, parse_metric, scoped_pairs


class UndefinedCorrelationError(ValueError):
    """Raised when Pearson's r cannot be computed (too few pairs or zero variance)."""


@dataclass(frozen=True)
class ActivityLog:
    """``(user, item, time)`` records, with optional item promotion times.

    ``collapsed`` counts duplicate ``(user, item)`` records merged by the
    parser.  Co-activity counting treats a user's items as a set, so a log
    that still holds repeats (needed for the entropy filter) counts each
    pair once.
    """

    records: tuple[tuple[str, str, int], ...]
    promotions: Mapping[str, int] | None = None
    collapsed: int = 0

    def __post_init__(self) -> None:
        recs = tuple((str(u), str(i), int(t)) for u, i, t in self.records)
        for u, i, t in recs:
            if t < 0:
                raise ValueError(f"negative time {t} for ({u}, {i})")
        object.__setattr__(self, "records", recs)
        if self.promotions is not None:
            object.__setattr__(self, "promotions", dict(self.promotions))

    def __len__(self) -> int:
        return len(self.records)

    @cached_property
    def user_items(self) -> dict[str, frozenset[str]]:
        acc: dict[str, set[str]] = defaultdict(set)
        for u, i, _ in self.records:
            acc[u].add(i)
        return {u: frozenset(s) for u, s in acc.items()}

    @cached_property
    def items(self) -> tuple[str, ...]:
        """Distinct items in order of first appearance."""
        return tuple(dict.fromkeys(i for _, i, _ in self.records))

    @cached_property
    def users(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(u for u, _, _ in self.records))

    def items_of(self, user: str) -> frozenset[str]:
        return self.user_items.get(user, frozenset())

    def deduplicated(self) -> ActivityLog:
        """Keep one record per ``(user, item)``, at its earliest time."""
        first: dict[tuple[str, str], int] = {}
        for u, i, t in self.records:
            key = (u, i)
            if key not in first or t < first[key]:
                first[key] = t
        merged = len(self.records) - len(first)
        return ActivityLog(tuple((u, i, t) for (u, i), t in first.items()),
                           self.promotions, self.collapsed + merged)

    def restrict_items(self, keep: Iterable[str]) -> ActivityLog:
        keep = set(keep)
        return ActivityLog(tuple(r for r in self.records if r[1] in keep), self.promotions, self.collapsed)


def attendance_log(b: BipartiteAttendance) -> ActivityLog:
    """Activity log of an attendance matrix; the event's column index is its time."""
    rows = np.argwhere(b.attended)
    return ActivityLog(tuple((b.actors[a], b.events[e], int(e)) for a, e in rows.tolist()))


def co_activity(log: ActivityLog, u: str, v: str) -> int:
    return len(log.items_of(u) & log.items_of(v))


@dataclass(frozen=True)
class CorrelationResult:
    metric: Metric
    r: float | None
    pair_count: int
    filter_description: str


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    if len(x) < 2:
        raise UndefinedCorrelationError(f"need at least 2 pairs, got {len(x)}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("zero variance in proximity or co-activity")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def describe_filter(max_coactivity: int | None) -> str:
    return "all" if max_coactivity is None else f"co-activity < {max_coactivity}"


def _pair_coactivity(g: DirectedGraph, log: ActivityLog, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    return np.array([co_activity(log, g.labels[u], g.labels[v]) for u, v in pairs], dtype=np.int64)


def correlate(
    g: DirectedGraph,
    log: ActivityLog,
    metric: Metric | str,
    max_coactivity: int | None = None,
    pairs: PairScope = "linked",
) -> CorrelationResult:
    """Pearson correlation between proximity and co-activity over node pairs.

    By default only linked pairs are used; ``pairs="all"`` takes every
    unordered pair of distinct nodes.  ``max_coactivity`` keeps pairs whose
    co-activity is strictly below the bound.
    """
    metric = parse_metric(metric)
    if metric is Metric.UNIFORM:
        raise ValueError("Uniform is a prediction weighting, not a graph score")
    candidates = scoped_pairs(g, pairs)
    co = _pair_coactivity(g, log, candidates)
    if max_coactivity is not None:
        keep = co < max_coactivity
        candidates = [p for p, k in zip(candidates, keep) if k]
        co = co[keep]
    prox = pair_scores(g, candidates, metric)
    r = pearson(prox, co)
    desc = describe_filter(max_coactivity)
    if pairs != "linked":
        desc += f" ({pairs} pairs)"
    return CorrelationResult(metric, r, len(candidates), desc)


def mean_proximity_by_activity(
    g: DirectedGraph, log: ActivityLog, metric: Metric | str
) -> list[tuple[int, float, int]]:
    """Mean proximity of linked pairs at each co-activity level, as ``(level, mean, count)``."""
    metric = parse_metric(metric)
    if metric is Metric.UNIFORM:
        raise ValueError("Uniform is a prediction weighting, not a graph score")
    linked = g.linked_pairs()
    if not linked or not len(log):
        return []
    co = _pair_coactivity(g, log, linked)
    prox = pair_scores(g, linked, metric)
    rows = []
    for level in np.unique(co).tolist():
        sel = prox[co == level]
        rows.append((int(level), float(sel.mean()), int(sel.size)))
    return rows


def pre_promotion_filter(log: ActivityLog) -> tuple[ActivityLog, int]:
    """Keep records made strictly before their item's promotion.

    Items without a promotion time are dropped entirely; the number of such
    items is returned alongside the filtered log.
    """
    promotions = log.promotions or {}
    missing = {i for i in log.items if i not in promotions}
    kept = tuple(r for r in log.records if r[1] in promotions and r[2] < promotions[r[1]])
    return ActivityLog(kept, promotions, log.collapsed), len(missing)


def entropy_bits(counts: Iterable[int]) -> float:
    counts = [c for c in counts if c > 0]
    total = sum(counts)
    if total == 0:
        return 0.0
    h = -sum((c / total) * math.log2(c / total) for c in counts)
    return h + 0.0  # normalize -0.0


def item_entropies(log: ActivityLog) -> dict[str, tuple[float, float]]:
    """Per item: (user entropy, inter-record time-gap entropy), both in bits."""
    by_item: dict[str, list[tuple[str, int]]] = defaultdict(list)
    for u, i, t in log.records:
        by_item[i].append((u, t))
    out = {}
    for item, recs in by_item.items():
        h_user = entropy_bits(Counter(u for u, _ in recs).values())
        times = sorted(t for _, t in recs)
        gaps = Counter(b - a for a, b in zip(times, times[1:]))
        out[item] = (h_user, entropy_bits(gaps.values()))
    return out


def entropy_filter(log: ActivityLog, threshold: float) -> set[str]:
    """Items whose user and time-gap entropies both strictly exceed ``threshold``."""
    if threshold < 0:
        raise ValueError("entropy threshold must be nonnegative")
    return {item for item, (hu, ht) in item_entropies(log).items() if hu > threshold and ht > threshold}


def write_correlations(results: Iterable[CorrelationResult], out: TextIO) -> None:
    """Write ``metric,filter,r,pairs`` rows; an undefined r is written as an empty field."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["metric", "filter", "r", "pairs"])
    for res in results:
        r = "" if res.r is None else repr(res.r)
        writer.writerow([res.metric.value, res.filter_description, r, res.pair_count])
