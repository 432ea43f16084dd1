"""Spreading processes behind the proximity metrics.

``two_step_reach`` enumerates every ``u -> z -> v`` path and adds up the
probability (or expected count) that the process carries a message along
it.  It shares no code with :mod:`socialprox.proximity`, which makes it a
usable oracle for the closed-form scores there.

``generate_cascades`` samples synthetic activity from the same processes.
"""
from __future__ import annotations

from collections.abc import Sequence
from enum import Enum

import numpy as np

from .activity import ActivityLog
from .graph import DirectedGraph


class Process(str, Enum):
    RANDOM_WALK = "random_walk"
    RANDOM_WALK_ATTENTION = "random_walk_attention"
    BROADCAST = "broadcast"
    BROADCAST_ATTENTION = "broadcast_attention"

    def __str__(self) -> str:
        return self.value

    @property
    def attention_limited(self) -> bool:
        return self in (Process.RANDOM_WALK_ATTENTION, Process.BROADCAST_ATTENTION)

    @property
    def is_walk(self) -> bool:
        return self in (Process.RANDOM_WALK, Process.RANDOM_WALK_ATTENTION)


def _path_weight(g: DirectedGraph, u: int, z: int, v: int, process: Process) -> float:
    # hop u->z, then hop z->v
    if process is Process.RANDOM_WALK:
        return (1.0 / g.out_degree(u)) * (1.0 / g.out_degree(z))
    if process is Process.RANDOM_WALK_ATTENTION:
        return (1.0 / g.out_degree(u)) * (1.0 / g.in_degree(z)) * (1.0 / g.out_degree(z)) * (1.0 / g.in_degree(v))
    if process is Process.BROADCAST:
        return 1.0
    if process is Process.BROADCAST_ATTENTION:
        return (1.0 / g.in_degree(z)) * (1.0 / g.in_degree(v))
    raise ValueError(f"unknown process {process!r}")


def two_step_reach(g: DirectedGraph, u: int, v: int, process: Process | str) -> float:
    """Expected delivery of a message from ``u`` to ``v`` over paths of length two.

    The direct edge ``u -> v``, if any, is ignored.
    """
    process = Process(process)
    if u == v:
        raise ValueError("reach from a node to itself is undefined")
    g.out_set(v)  # validates v
    total = 0.0
    for z in sorted(g.out_set(u)):
        if v in g.out_set(z):
            total += _path_weight(g, u, z, v, process)
    return total


def symmetrized_reach(g: DirectedGraph, u: int, v: int, process: Process | str) -> float:
    return 0.5 * (two_step_reach(g, u, v, process) + two_step_reach(g, v, u, process))


def _item_rng(rng_seed: int, item: int) -> np.random.Generator:
    # one independent stream per item, so items can be generated in any order
    return np.random.default_rng([rng_seed, item])


def generate_cascades(
    g: DirectedGraph,
    item_count: int,
    process: Process | str,
    per_item_seed_nodes: int | Sequence[Sequence[str]] = 1,
    rng_seed: int = 0,
    adoption: float = 1.0,
    max_hops: int = 6,
    item_prefix: str = "item",
) -> ActivityLog:
    """Simulate one cascade per item and return the resulting activity log.

    Seeds recommend at ``t=0``.  Each recommendation at hop ``t`` exposes
    out-neighbors (all of them for broadcast, one uniformly chosen for the
    walks).  Attention-limited processes accept an exposure with probability
    ``1/d_in(receiver)``.  An accepted exposure turns into a recommendation
    at ``t+1`` with probability ``adoption``; nobody recommends an item twice.

    ``per_item_seed_nodes`` is either a seed count (seeds drawn uniformly
    per item) or an explicit list of seed labels for each item.
    """
    process = Process(process)
    if g.node_count == 0:
        raise ValueError("cannot simulate cascades on an empty graph")
    if item_count < 1:
        raise ValueError("item_count must be at least 1")
    if not 0.0 <= adoption <= 1.0:
        raise ValueError("adoption must be a probability")
    explicit = not isinstance(per_item_seed_nodes, int)
    if explicit and len(per_item_seed_nodes) != item_count:
        raise ValueError("need one seed list per item")
    width = len(str(item_count - 1))
    records: list[tuple[str, str, int]] = []
    for k in range(item_count):
        rng = _item_rng(rng_seed, k)
        item = f"{item_prefix}{k:0{width}d}"
        if explicit:
            seeds = sorted({g.index(label) for label in per_item_seed_nodes[k]})
        else:
            count = min(per_item_seed_nodes, g.node_count)
            seeds = sorted(rng.choice(g.node_count, size=count, replace=False).tolist())
        adopted = set(seeds)
        records.extend((g.labels[s], item, 0) for s in seeds)
        frontier = seeds
        for hop in range(1, max_hops + 1):
            if not frontier:
                break
            fresh: list[int] = []
            for sender in frontier:
                targets = g.out_adjacency[sender]
                if not targets:
                    continue
                if process.is_walk:
                    targets = (targets[int(rng.integers(len(targets)))],)
                for r in targets:
                    if r in adopted:
                        continue
                    if process.attention_limited and rng.random() >= 1.0 / g.in_degree(r):
                        continue
                    if rng.random() < adoption:
                        adopted.add(r)
                        fresh.append(r)
            fresh.sort()
            records.extend((g.labels[r], item, hop) for r in fresh)
            frontier = fresh
    return ActivityLog(tuple(records))
