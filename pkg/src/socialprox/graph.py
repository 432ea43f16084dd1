"""Immutable directed graphs over compact integer node ids.

Edges point in the direction information flows: ``u -> z`` means ``z``
receives what ``u`` broadcasts.  Undirected data (e.g. a bipartite
projection) is stored as a symmetric digraph, one edge per direction.
"""
from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np

EdgeSemantics = Literal["flows", "follows"]
Direction = Literal["out", "in", "both"]


class DirectedGraph:
    """Simple unweighted digraph with both adjacency views precomputed.

    Nodes are ``0..node_count-1``; ``labels[i]`` is the external label of
    node ``i``.  The graph never changes after construction, so it can be
    shared freely between threads.
    """

    def __init__(self, labels: Sequence[str], edges: Iterable[tuple[int, int]], dropped: int = 0):
        self.labels: tuple[str, ...] = tuple(labels)
        n = len(self.labels)
        out_sets: list[set[int]] = [set() for _ in range(n)]
        in_sets: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            out_sets[u].add(v)
            in_sets[v].add(u)
        self.out_adjacency: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in out_sets)
        self.in_adjacency: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in in_sets)
        self._out_sets = tuple(frozenset(s) for s in out_sets)
        self._in_sets = tuple(frozenset(s) for s in in_sets)
        self._index = {label: i for i, label in enumerate(self.labels)}
        if len(self._index) != n:
            raise ValueError("node labels must be unique")
        # number of duplicate edges and self-loops discarded by the builder
        self.dropped = dropped

    def __repr__(self) -> str:
        return f"DirectedGraph(nodes={self.node_count}, edges={self.edge_count})"

    @property
    def node_count(self) -> int:
        return len(self.labels)

    @cached_property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.out_adjacency)

    def index(self, label: str) -> int:
        return self._index[label]

    def has_label(self, label: str) -> bool:
        return label in self._index

    def _check(self, u: int) -> None:
        if not 0 <= u < len(self.labels):
            raise IndexError(f"node id {u} out of range for graph with {len(self.labels)} nodes")

    def out_set(self, u: int) -> frozenset[int]:
        self._check(u)
        return self._out_sets[u]

    def in_set(self, u: int) -> frozenset[int]:
        self._check(u)
        return self._in_sets[u]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.out_set(u)

    def out_degree(self, u: int) -> int:
        return len(self.out_set(u))

    def in_degree(self, u: int) -> int:
        return len(self.in_set(u))

    def degree(self, u: int) -> int:
        """Total degree ``d_out(u) + d_in(u)``."""
        return self.out_degree(u) + self.in_degree(u)

    def undirected_degree(self, u: int) -> int:
        """Number of distinct neighbors in either direction."""
        return len(self.out_set(u) | self._in_sets[u])

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, adj in enumerate(self.out_adjacency) for v in adj]

    @cached_property
    def is_symmetric(self) -> bool:
        return self._out_sets == self._in_sets

    def linked_pairs(self) -> list[tuple[int, int]]:
        """Unordered pairs ``(u, v)`` with ``u < v`` joined in either direction."""
        pairs = set()
        for u, v in self.edges():
            pairs.add((u, v) if u < v else (v, u))
        return sorted(pairs)

    def unlinked_pairs(self) -> list[tuple[int, int]]:
        n = self.node_count
        return [(u, v) for u in range(n) for v in range(u + 1, n)
                if v not in self._out_sets[u] and u not in self._out_sets[v]]

    def reversed(self) -> DirectedGraph:
        return DirectedGraph(self.labels, ((v, u) for u, v in self.edges()))


def neighborhood(g: DirectedGraph, u: int, direction: Direction = "both") -> tuple[int, ...]:
    """Out-, in- or combined neighbors of ``u``, sorted by id."""
    if direction == "out":
        return tuple(sorted(g.out_set(u)))
    if direction == "in":
        return tuple(sorted(g.in_set(u)))
    if direction == "both":
        return tuple(sorted(g.out_set(u) | g.in_set(u)))
    raise ValueError(f"unknown direction {direction!r}")


def build_graph(
    edges: Iterable[tuple[str, str]],
    semantics: EdgeSemantics = "flows",
    nodes: Iterable[str] = (),
) -> DirectedGraph:
    """Build a graph from labelled pairs.

    With ``semantics="follows"`` a pair ``(a, b)`` reads "a follows b" and is
    stored as ``b -> a``.  Duplicate edges and self-loops are dropped; the
    count is kept on ``graph.dropped``.  Node ids follow first appearance,
    starting with any labels passed in ``nodes``.
    """
    if semantics not in ("flows", "follows"):
        raise ValueError(f"unknown edge semantics {semantics!r}")
    index: dict[str, int] = {}
    for label in nodes:
        index.setdefault(label, len(index))
    seen: set[tuple[int, int]] = set()
    ordered: list[tuple[int, int]] = []
    dropped = 0
    for a, b in edges:
        if semantics == "follows":
            a, b = b, a
        u = index.setdefault(a, len(index))
        v = index.setdefault(b, len(index))
        if u == v or (u, v) in seen:
            dropped += 1
            continue
        seen.add((u, v))
        ordered.append((u, v))
    return DirectedGraph(list(index), ordered, dropped=dropped)


@dataclass(frozen=True)
class BipartiteAttendance:
    """Actors x events incidence matrix (who attended what)."""

    actors: tuple[str, ...]
    events: tuple[str, ...]
    attended: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.attended, dtype=bool)
        if m.shape != (len(self.actors), len(self.events)):
            raise ValueError(
                f"attendance matrix has shape {m.shape}, expected "
                f"({len(self.actors)}, {len(self.events)})"
            )
        m.setflags(write=False)
        object.__setattr__(self, "actors", tuple(self.actors))
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "attended", m)

    def event_indices(self, names: Iterable[str]) -> list[int]:
        lookup = {e: i for i, e in enumerate(self.events)}
        return [lookup[name] for name in names]


def project_attendance(b: BipartiteAttendance, event_subset: Iterable[int] | None = None) -> DirectedGraph:
    """Link two actors (both directions) when they share an event in ``event_subset``.

    Every actor becomes a node, including ones left isolated by the subset.
    """
    n_events = len(b.events)
    cols = list(range(n_events)) if event_subset is None else sorted(set(event_subset))
    for e in cols:
        if not 0 <= e < n_events:
            raise IndexError(f"event index {e} out of range (0..{n_events - 1})")
    m = b.attended[:, cols].astype(np.int64)
    shared = m @ m.T
    np.fill_diagonal(shared, 0)
    us, vs = np.nonzero(shared)
    return DirectedGraph(b.actors, zip(us.tolist(), vs.tolist()))


def random_digraph(n: int, p: float, seed: int) -> DirectedGraph:
    """Erdos-Renyi digraph: each ordered pair ``u != v`` is an edge with probability ``p``."""
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    us, vs = np.nonzero(mask)
    return DirectedGraph([f"n{i}" for i in range(n)], zip(us.tolist(), vs.tolist()))
