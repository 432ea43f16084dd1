import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socialprox.activity import (
    ActivityLog,
    UndefinedCorrelationError,
    co_activity,
    correlate,
    entropy_bits,
    entropy_filter,
    item_entropies,
    mean_proximity_by_activity,
    pearson,
    pre_promotion_filter,
)
from socialprox.graph import build_graph, random_digraph
from socialprox.proximity import Metric, pair_scores


def log_of(user_items: dict[str, list[str]]) -> ActivityLog:
    return ActivityLog(tuple((u, i, 0) for u, items in user_items.items() for i in items))


def test_co_activity_basic():
    log = log_of({"u": ["s1", "s2"], "v": ["s2", "s3"]})
    assert co_activity(log, "u", "v") == 1
    assert co_activity(log, "v", "u") == 1
    assert co_activity(log, "ghost", "v") == 0


def test_co_activity_identical_sets():
    log = log_of({"u": ["a", "b", "c"], "v": ["c", "b", "a"]})
    assert co_activity(log, "u", "v") == 3


def test_co_activity_counts_repeats_once():
    log = ActivityLog((("u", "a", 0), ("u", "a", 4), ("v", "a", 1)))
    assert co_activity(log, "u", "v") == 1


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        ActivityLog((("u", "a", -1),))


def test_pearson_perfect():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [6, 4, 2]) == pytest.approx(-1.0)


def test_pearson_undefined():
    with pytest.raises(UndefinedCorrelationError):
        pearson([1.0], [2.0])
    with pytest.raises(UndefinedCorrelationError):
        pearson([1, 2, 3], [5, 5, 5])


@settings(max_examples=200)
@given(
    st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=20),
    st.floats(0.01, 100),
    st.floats(-100, 100),
    st.integers(0, 2**32 - 1),
)
def test_pearson_affine_invariance(xs, scale, shift, seed):
    x = np.array(xs)
    y = np.random.default_rng(seed).normal(size=len(x))
    if np.ptp(x) < 1e-6:
        return
    r = pearson(x, y)
    assert pearson(scale * x + shift, y) == pytest.approx(r, abs=1e-9)
    assert pearson(x, scale * y + shift) == pytest.approx(r, abs=1e-9)


def chain_graph_and_log():
    # a-b-c-d path plus chords, stored symmetrically
    und = [("a", "b"), ("b", "c"), ("c", "d"), ("a", "c"), ("b", "d"), ("d", "e")]
    g = build_graph(und + [(y, x) for x, y in und])
    log = log_of({
        "a": ["i1", "i2", "i3"],
        "b": ["i1", "i2"],
        "c": ["i2", "i3", "i4", "i5"],
        "d": ["i4"],
        "e": ["i4", "i5", "i6"],
    })
    return g, log


def test_correlate_matches_direct_pearson():
    g, log = chain_graph_and_log()
    pairs = g.linked_pairs()
    co = [co_activity(log, g.labels[u], g.labels[v]) for u, v in pairs]
    for m in (Metric.CN, Metric.CS, Metric.AA):
        res = correlate(g, log, m)
        assert res.pair_count == len(pairs)
        assert res.r == pytest.approx(pearson(pair_scores(g, pairs, m), co))
        assert res.filter_description == "all"


def test_correlate_filter_is_strict():
    g, log = chain_graph_and_log()
    co = [co_activity(log, g.labels[u], g.labels[v]) for u, v in g.linked_pairs()]
    top = max(co)
    res = correlate(g, log, Metric.CN, max_coactivity=top)
    assert res.pair_count == sum(c < top for c in co)
    assert res.filter_description == f"co-activity < {top}"
    unbounded = correlate(g, log, Metric.CN)
    above = correlate(g, log, Metric.CN, max_coactivity=top + 1)
    assert above.r == unbounded.r and above.pair_count == unbounded.pair_count


def test_correlate_all_pairs_scope():
    g, log = chain_graph_and_log()
    res = correlate(g, log, Metric.CN, pairs="all")
    n = g.node_count
    assert res.pair_count == n * (n - 1) // 2


def test_correlate_errors():
    g, log = chain_graph_and_log()
    with pytest.raises(ValueError):
        correlate(g, log, Metric.UNIFORM)
    with pytest.raises(UndefinedCorrelationError):
        correlate(g, log, Metric.CN, max_coactivity=0)
    flat = log_of({x: ["same"] for x in "abcde"})
    with pytest.raises(UndefinedCorrelationError):
        correlate(g, flat, Metric.CS)


def test_mean_by_activity_level_three():
    und = [("a", "b")] + [(x, c) for x in "ab" for c in ("c1", "c2", "c3")] + [("x", "y"), ("x", "w"), ("y", "w")]
    g = build_graph(und + [(q, p) for p, q in und])
    log = log_of({"a": ["s1", "s2", "s3"], "b": ["s1", "s2", "s3"], "x": ["t1", "t2", "t3"], "y": ["t1", "t2", "t3"]})
    rows = mean_proximity_by_activity(g, log, Metric.CN)
    assert (3, 2.0, 2) in rows
    assert [r[0] for r in rows] == sorted(r[0] for r in rows)


def test_mean_by_activity_g1(g1):
    # every linked pair of the 4-cycle shares exactly one item
    log = log_of({"u": ["a", "d"], "z": ["a", "b"], "v": ["b", "c"], "zp": ["c", "d"]})
    rows = mean_proximity_by_activity(g1, log, Metric.CS)
    # adjacent nodes of a 4-cycle share no neighbor, so every score is 0
    assert rows == [(1, 0.0, 4)]
    assert rows[0][1] == pair_scores(g1, g1.linked_pairs(), Metric.CS).mean()


def test_mean_by_activity_empty_log(g1):
    assert mean_proximity_by_activity(g1, ActivityLog(()), Metric.CN) == []


def test_mean_by_activity_weighted_back_to_global_mean():
    g = random_digraph(40, 0.15, seed=11)
    rng = np.random.default_rng(5)
    log = ActivityLog(tuple((lab, f"i{k}", 0) for lab in g.labels for k in range(12) if rng.random() < 0.3))
    for m in (Metric.CN, Metric.CS_AL, Metric.JC):
        rows = mean_proximity_by_activity(g, log, m)
        total = sum(c for _, _, c in rows)
        weighted = sum(mean * c for _, mean, c in rows) / total
        assert total == len(g.linked_pairs())
        assert weighted == pytest.approx(pair_scores(g, g.linked_pairs(), m).mean(), rel=1e-12)


def test_pre_promotion_filter():
    log = ActivityLog(
        (("u", "s1", 5), ("v", "s1", 10), ("w", "s2", 1)),
        promotions={"s1": 10},
    )
    kept, missing = pre_promotion_filter(log)
    assert kept.records == (("u", "s1", 5),)
    assert missing == 1


def test_entropy_bits():
    assert entropy_bits([1, 1, 1, 1]) == 2.0
    assert entropy_bits([1] * 8) == 3.0
    assert entropy_bits([5]) == 0.0
    assert entropy_bits([]) == 0.0


def spread_item(item, n_users, gaps):
    t, recs = 0, []
    for k in range(n_users):
        recs.append((f"user{k}", item, t))
        if k < len(gaps):
            t += gaps[k]
    return recs


def test_item_entropies_uniform_users():
    recs = spread_item("four", 4, [1, 2, 3])
    hu, ht = item_entropies(ActivityLog(tuple(recs)))["four"]
    assert hu == 2.0
    assert ht == pytest.approx(math.log2(3))


def test_entropy_filter_boundary():
    eight = spread_item("eight", 8, list(range(1, 8)))
    ten = spread_item("ten", 10, list(range(1, 10)))
    solo = [("bot", "spam", t) for t in range(0, 100, 3)]
    log = ActivityLog(tuple(eight + ten + solo))
    ent = item_entropies(log)
    assert ent["eight"][0] == 3.0
    assert ent["spam"][0] == 0.0
    assert entropy_filter(log, 3.0) == {"ten"}
    with pytest.raises(ValueError):
        entropy_filter(log, -1)


def test_entropy_filter_single_record_never_kept():
    log = ActivityLog((("u", "x", 0),))
    assert item_entropies(log)["x"] == (0.0, 0.0)
    assert entropy_filter(log, 0.0) == set()
