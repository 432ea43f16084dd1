"""Local (two-hop) structural proximity between node pairs of a digraph.

All scores are symmetrized averages of a ``u -> z -> v`` term and a
``v -> z -> u`` term, where the intermediate nodes are

    delta       = out(u) & in(v)
    delta_prime = in(u) & out(v)

Sums run over intermediate nodes in increasing id order, so scores are
reproducible bit-for-bit and ``score(u, v) == score(v, u)`` exactly.
"""
from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Literal, TextIO

import numpy as np

from .graph import DirectedGraph


class Metric(str, Enum):
    CN = "CN"
    JC = "JC"
    AA = "AA"
    CS = "CS"
    CS_AL = "CS_AL"
    NC = "NC"
    NC_AL = "NC_AL"
    UNIFORM = "Uniform"

    def __str__(self) -> str:
        return self.value


GRAPH_METRICS: tuple[Metric, ...] = tuple(m for m in Metric if m is not Metric.UNIFORM)

PairScope = Literal["linked", "all"]


def parse_metric(name: str | Metric) -> Metric:
    if isinstance(name, Metric):
        return name
    for m in Metric:
        if m.value.lower() == name.strip().lower():
            return m
    raise ValueError(f"unknown metric {name!r}; expected one of {', '.join(m.value for m in Metric)}")


def parse_metric_list(text: str, allow_uniform: bool = False) -> list[Metric]:
    """Parse ``"CN,CS"`` or ``"all"`` into metrics, preserving order and dropping repeats."""
    if text.strip().lower() == "all":
        metrics = list(GRAPH_METRICS)
        return [Metric.UNIFORM, *metrics] if allow_uniform else metrics
    out: list[Metric] = []
    for part in text.split(","):
        if not part.strip():
            continue
        m = parse_metric(part)
        if m is Metric.UNIFORM and not allow_uniform:
            raise ValueError("Uniform is a prediction weighting, not a graph score")
        if m not in out:
            out.append(m)
    if not out:
        raise ValueError("empty metric list")
    return out


@dataclass(frozen=True)
class CommonNeighborSets:
    delta: tuple[int, ...]
    delta_prime: tuple[int, ...]


def _check_pair(g: DirectedGraph, u: int, v: int) -> None:
    for node in (u, v):
        if not 0 <= node < g.node_count:
            raise IndexError(f"node id {node} out of range for graph with {g.node_count} nodes")
    if u == v:
        raise ValueError("proximity of a node to itself is undefined")


def common_neighbor_sets(g: DirectedGraph, u: int, v: int) -> CommonNeighborSets:
    _check_pair(g, u, v)
    return CommonNeighborSets(
        delta=tuple(sorted(g.out_set(u) & g.in_set(v))),
        delta_prime=tuple(sorted(g.in_set(u) & g.out_set(v))),
    )


def _aa_degree(g: DirectedGraph, z: int) -> int:
    # On symmetric digraphs each undirected edge is stored twice; use the
    # undirected degree there so AA matches its usual undirected form.
    return g.undirected_degree(z) if g.is_symmetric else g.degree(z)


def classic_score(g: DirectedGraph, u: int, v: int, metric: Metric | str) -> float:
    """CN, JC or AA for the pair ``(u, v)``."""
    metric = parse_metric(metric)
    sets = common_neighbor_sets(g, u, v)
    if metric is Metric.CN:
        return 0.5 * (len(sets.delta) + len(sets.delta_prime))
    if metric is Metric.JC:
        fwd = len(g.out_set(u) | g.in_set(v))
        bwd = len(g.out_set(v) | g.in_set(u))
        a = len(sets.delta) / fwd if fwd else 0.0
        b = len(sets.delta_prime) / bwd if bwd else 0.0
        return 0.5 * (a + b)
    if metric is Metric.AA:
        a = sum(1.0 / math.log(_aa_degree(g, z)) for z in sets.delta)
        b = sum(1.0 / math.log(_aa_degree(g, z)) for z in sets.delta_prime)
        return 0.5 * (a + b)
    raise ValueError(f"{metric} is not a classic metric")


def conservative_score(g: DirectedGraph, u: int, v: int, attention_limited: bool = False) -> float:
    """Two-step random-walk proximity (CS), optionally attention limited (CS_AL)."""
    sets = common_neighbor_sets(g, u, v)
    if attention_limited:
        a = sum(1.0 / (g.out_degree(u) * g.in_degree(z) * g.out_degree(z) * g.in_degree(v))
                for z in sets.delta)
        b = sum(1.0 / (g.out_degree(v) * g.in_degree(z) * g.out_degree(z) * g.in_degree(u))
                for z in sets.delta_prime)
    else:
        a = sum(1.0 / (g.out_degree(u) * g.out_degree(z)) for z in sets.delta)
        b = sum(1.0 / (g.out_degree(v) * g.out_degree(z)) for z in sets.delta_prime)
    return 0.5 * (a + b)


def nonconservative_score(g: DirectedGraph, u: int, v: int, attention_limited: bool = False) -> float:
    """Two-step broadcast proximity (NC, equal to CN), optionally attention limited (NC_AL)."""
    sets = common_neighbor_sets(g, u, v)
    if not attention_limited:
        return 0.5 * (len(sets.delta) + len(sets.delta_prime))
    a = sum(1.0 / (g.in_degree(z) * g.in_degree(v)) for z in sets.delta)
    b = sum(1.0 / (g.in_degree(z) * g.in_degree(u)) for z in sets.delta_prime)
    return 0.5 * (a + b)


def score(g: DirectedGraph, u: int, v: int, metric: Metric | str) -> float:
    metric = parse_metric(metric)
    if metric in (Metric.CN, Metric.JC, Metric.AA):
        return classic_score(g, u, v, metric)
    if metric is Metric.CS:
        return conservative_score(g, u, v)
    if metric is Metric.CS_AL:
        return conservative_score(g, u, v, attention_limited=True)
    if metric is Metric.NC:
        return nonconservative_score(g, u, v)
    if metric is Metric.NC_AL:
        return nonconservative_score(g, u, v, attention_limited=True)
    raise ValueError("Uniform is a prediction weighting, not a graph score")


def pair_scores(g: DirectedGraph, pairs: Sequence[tuple[int, int]], metric: Metric | str) -> np.ndarray:
    metric = parse_metric(metric)
    return np.array([score(g, u, v, metric) for u, v in pairs], dtype=float)


def scoped_pairs(g: DirectedGraph, scope: PairScope = "linked") -> list[tuple[int, int]]:
    if scope == "linked":
        return g.linked_pairs()
    if scope == "all":
        n = g.node_count
        return [(u, v) for u in range(n) for v in range(u + 1, n)]
    raise ValueError(f"unknown pair scope {scope!r}")


def edge_proximity_table(g: DirectedGraph, metric: Metric | str) -> list[tuple[int, int, float]]:
    """Score every linked pair once, as ``(u, v, score)`` with ``u < v``."""
    metric = parse_metric(metric)
    if metric is Metric.UNIFORM:
        raise ValueError("Uniform is a prediction weighting, not a graph score")
    return [(u, v, score(g, u, v, metric)) for u, v in g.linked_pairs()]


def write_score_table(
    g: DirectedGraph,
    tables: Iterable[tuple[Metric, list[tuple[int, int, float]]]],
    out: TextIO,
    header: bool = True,
) -> None:
    writer = csv.writer(out, lineterminator="\n")
    if header:
        writer.writerow(["u", "v", "metric", "score"])
    for metric, rows in tables:
        for u, v, s in rows:
            # repr() gives the shortest round-trip decimal
            writer.writerow([g.labels[u], g.labels[v], metric.value, repr(s)])


def score_table_csv(g: DirectedGraph, metrics: Sequence[Metric]) -> str:
    buf = io.StringIO()
    write_score_table(g, ((m, edge_proximity_table(g, m)) for m in metrics), buf)
    return buf.getvalue()
