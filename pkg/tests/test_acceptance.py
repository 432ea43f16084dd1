"""Acceptance gate: one PASS/FAIL line per criterion, printed after the run.

Tolerances are the stated ones; nothing here is loosened to make a case pass.
"""
from __future__ import annotations

import json
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from socialprox.activity import ActivityLog, attendance_log, correlate, entropy_filter, item_entropies
from socialprox.cli import main
from socialprox.dynamics import Process, generate_cascades, symmetrized_reach
from socialprox.graph import DirectedGraph, build_graph, project_attendance, random_digraph
from socialprox.ingest import southern_women
from socialprox.predict import SplitSpec, evaluate, predict_user, run_experiment
from socialprox.proximity import GRAPH_METRICS, Metric, pair_scores, score

from .conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance


def record(criterion: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")


@pytest.fixture(scope="module")
def women():
    b = southern_women()
    return project_attendance(b), attendance_log(b)


# 1. correlation with co-attendance --------------------------------------------

TABLE_R = {
    Metric.CN: 0.515, Metric.NC: 0.515, Metric.JC: 0.504, Metric.AA: 0.519,
    Metric.CS: 0.532, Metric.CS_AL: 0.492, Metric.NC_AL: 0.532,
}


@pytest.mark.parametrize("metric", list(TABLE_R), ids=lambda m: m.value)
def test_c1_southern_women_correlation(women, metric):
    g, log = women
    r = correlate(g, log, metric, pairs="all").r
    ok = abs(r - TABLE_R[metric]) <= 0.02
    record(f"1 correlation {metric.value}", ok, f"r={r:.4f} expected {TABLE_R[metric]} +/- 0.02")
    assert ok


def test_c1_maxima_tie_and_runtime(women):
    g, log = women
    start = time.perf_counter()
    rs = {m: correlate(g, log, m, pairs="all").r for m in GRAPH_METRICS}
    elapsed = time.perf_counter() - start
    top = max(rs.values())
    ok = rs[Metric.CS] == rs[Metric.NC_AL] == top and elapsed < 1.0
    record("1 CS/NC_AL tie as maxima, < 1 s", ok, f"CS={rs[Metric.CS]:.4f} NC_AL={rs[Metric.NC_AL]:.4f} "
           f"max={top:.4f} in {elapsed:.3f}s")
    assert ok


# 2. linked vs unlinked gap -------------------------------------------------------

def test_c2_cn_means(women):
    g, _ = women
    linked = pair_scores(g, g.linked_pairs(), Metric.CN).mean()
    unlinked = pair_scores(g, g.unlinked_pairs(), Metric.CN).mean()
    ok = abs(linked - 13.6) <= 0.5 and abs(unlinked - 10.4) <= 0.5
    record("2 CN linked/unlinked means", ok, f"linked={linked:.3f} unlinked={unlinked:.3f}")
    assert ok


@pytest.mark.parametrize("metric", GRAPH_METRICS, ids=lambda m: m.value)
def test_c2_gap(women, metric):
    g, _ = women
    linked = pair_scores(g, g.linked_pairs(), metric).mean()
    unlinked = pair_scores(g, g.unlinked_pairs(), metric).mean()
    gap = 100.0 * (linked - unlinked) / unlinked
    ok = 11.0 <= gap <= 35.0
    record(f"2 gap {metric.value}", ok, f"{gap:.1f}% (accepted 11%-35%)")
    assert ok


# 3. process oracles ------------------------------------------------------------

ORACLE = {
    Process.RANDOM_WALK: Metric.CS,
    Process.RANDOM_WALK_ATTENTION: Metric.CS_AL,
    Process.BROADCAST: Metric.NC,
    Process.BROADCAST_ATTENTION: Metric.NC_AL,
}


def test_c3_oracle_equivalence():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst, pairs = 0.0, 0
    for k in range(100):
        n = int(rng.integers(10, 41))
        g = random_digraph(n, 0.1, seed=k)
        for u in range(n):
            for v in range(u + 1, n):
                pairs += 1
                for proc, metric in ORACLE.items():
                    worst = max(worst, abs(symmetrized_reach(g, u, v, proc) - score(g, u, v, metric)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 10.0
    record("3 oracle equivalence", ok, f"{pairs} pairs, max |diff|={worst:.2e}, {elapsed:.2f}s")
    assert ok


# 4. identities under property testing ---------------------------------------------

_cases = {"n": 0, "bad": 0}


@st.composite
def graph_pair(draw):
    n = draw(st.integers(2, 10))
    p = draw(st.sampled_from([0.1, 0.3, 0.6, 0.9]))
    g = random_digraph(n, p, draw(st.integers(0, 2**32 - 1)))
    if draw(st.booleans()):
        g = DirectedGraph(g.labels, g.edges() + [(v, u) for u, v in g.edges()])
    u = draw(st.integers(0, n - 1))
    v = draw(st.integers(0, n - 2))
    return g, u, v + 1 if v >= u else v


def _identities_hold(g: DirectedGraph, u: int, v: int) -> bool:
    s = {m: score(g, u, v, m) for m in GRAPH_METRICS}
    ok = s[Metric.NC] == s[Metric.CN]
    ok &= all(s[m] == score(g, v, u, m) and s[m] >= 0.0 for m in GRAPH_METRICS)
    ok &= s[Metric.JC] <= 1.0 and s[Metric.CS] <= 1.0
    ok &= s[Metric.CS_AL] <= s[Metric.CS] and s[Metric.NC_AL] <= s[Metric.NC]
    if g.is_symmetric:
        d = g.undirected_degree
        common = g.out_set(u) & g.out_set(v)
        closed = 0.5 * (1 / d(u) + 1 / d(v)) * sum(1 / d(z) for z in common) if common else 0.0
        ok &= s[Metric.CS] == s[Metric.NC_AL]
        ok &= abs(s[Metric.CS] - closed) <= 1e-12
    return bool(ok)


@settings(max_examples=10_000, deadline=None, database=None,
          suppress_health_check=[HealthCheck.too_slow])
@given(graph_pair())
def _identity_property(case):
    _cases["n"] += 1
    if not _identities_hold(*case):
        _cases["bad"] += 1
        raise AssertionError(case)


def test_c4_metric_identities():
    _cases.update(n=0, bad=0)
    try:
        _identity_property()
        ok = _cases["n"] >= 10_000
    except AssertionError:
        ok = False
    record("4 metric identities", ok, f"{_cases['n']} generated cases, {_cases['bad']} violations")
    assert ok


# 5. prediction fixture -------------------------------------------------------------

def test_c5_two_friend_fixture():
    g = build_graph([("a", "w"), ("b", "w")])
    w, a, b = g.index("w"), g.index("a"), g.index("b")
    vectors = {a: np.array([1.0, 0.0]), b: np.array([0.0, 1.0])}
    actual = np.array([1.0, 0.0])
    p = predict_user(g, w, vectors, Metric.CS, weights={a: 3.0, b: 1.0})
    base = predict_user(g, w, vectors, Metric.UNIFORM)
    pr, re = evaluate(p, actual)
    bpr, bre = evaluate(base, actual)
    lift = 100.0 * (pr - bpr) / bpr
    ok = (p.values.tolist() == [0.75, 0.25] and pr == re == 0.75 and bpr == bre == 0.5 and lift == 50.0)
    record("5 two-friend fixture", ok, f"p={p.values.tolist()} Pr={pr} Re={re} baseline={bpr}/{bre} lift={lift}%")
    assert ok


# 6. Southern Women prediction direction --------------------------------------------

def test_c6_southern_women_direction():
    start = time.perf_counter()
    report = run_experiment(southern_women(), None, SplitSpec(n_train=5, seed=0, trials=200), GRAPH_METRICS)
    elapsed = time.perf_counter() - start
    base = report.metrics[Metric.UNIFORM].precision
    lifts = ", ".join(f"{m.value} {s.precision_lift_pct:+.2f}%" for m, s in report.metrics.items()
                      if m is not Metric.UNIFORM)
    ok = (report.metrics[Metric.CS].precision > base and report.metrics[Metric.JC].precision > base
          and elapsed < 30.0)
    record("6 CS and JC beat Uniform (N=5, 200 splits)", ok, f"{lifts}; {elapsed:.1f}s")
    assert ok


# 7. synthetic end-to-end --------------------------------------------------------------

def test_c7_synthetic_broadcast_attention():
    start = time.perf_counter()
    lifts = []
    for run in range(20):
        g = random_digraph(500, 0.02, seed=run)
        log = generate_cascades(g, 400, Process.BROADCAST_ATTENTION, per_item_seed_nodes=10,
                                rng_seed=run, adoption=0.5)
        report = run_experiment(g, log, SplitSpec(n_train=200, seed=run, trials=3), [Metric.NC_AL])
        lifts.append(report.metrics[Metric.NC_AL].precision_lift_pct)
    elapsed = time.perf_counter() - start
    mean = float(np.mean(lifts))
    ok = mean > 0.0 and elapsed < 120.0
    record("7 synthetic NC_AL lift", ok, f"mean precision lift {mean:+.2f}% over {len(lifts)} runs, {elapsed:.1f}s")
    assert ok


# 8. entropy boundary ----------------------------------------------------------------------

def _spread(item: str, users: int) -> list[tuple[str, str, int]]:
    # triangular times give distinct consecutive gaps 1, 2, 3, ...
    return [(f"user{k}", item, k * (k + 1) // 2) for k in range(users)]


def test_c8_entropy_boundary():
    log = ActivityLog(tuple(_spread("eight", 8) + _spread("ten", 10)))
    ent = item_entropies(log)
    kept = entropy_filter(log, 3.0)
    ok = ent["eight"][0] == 3.0 and "eight" not in kept and "ten" in kept
    record("8 entropy boundary", ok, f"H(eight)={ent['eight']}, H(ten)=({ent['ten'][0]:.3f}, "
           f"{ent['ten'][1]:.3f}), kept={sorted(kept)}")
    assert ok


# 9. reproducibility -----------------------------------------------------------------------

def test_c9_replay_is_byte_identical(tmp_path, capsys):
    g = tmp_path / "g.tsv"
    rg = random_digraph(60, 0.08, seed=4)
    g.write_text("".join(f"{rg.labels[a]}\t{rg.labels[b]}\n" for a, b in rg.edges()), encoding="utf-8")
    sim = tmp_path / "sim.json"
    assert main(["simulate", "--graph", str(g), "--process", "broadcast_attention", "--items", "40",
                 "--seeds-per-item", "3", "--adoption", "0.5", "--seed", "7", "--format", "json",
                 "--out", str(sim)]) == 0
    act = tmp_path / "act.csv"
    records = json.loads(sim.read_text())["records"]
    act.write_text("user,item,time\n" + "".join(f"{u},{i},{t}\n" for u, i, t in records), encoding="utf-8")
    checks = {}
    sim2 = tmp_path / "sim2.json"
    main(["--config", str(sim), "--out", str(sim2)])
    checks["simulate"] = sim.read_bytes() == sim2.read_bytes()

    outs = {}
    for jobs in (1, 2):
        out = tmp_path / f"pred{jobs}.json"
        main(["predict", "--graph", str(g), "--activity", str(act), "--n-train", "15", "--trials", "6",
              "--seed", "3", "--metrics", "CS,NC_AL,JC", "--jobs", str(jobs), "--out", str(out)])
        outs[jobs] = out.read_bytes()
    checks["predict jobs 1 vs 2"] = outs[1] == outs[2] and len(outs[1]) > 0
    replay = tmp_path / "replay.json"
    main(["--config", str(tmp_path / "pred1.json"), "--jobs", "2", "--out", str(replay)])
    checks["predict replay"] = replay.read_bytes() == outs[1]

    for cmd in (["score", "--graph", str(g)], ["correlate", "--dataset", "southern-women", "--pairs", "all"]):
        first = tmp_path / f"{cmd[0]}.json"
        main(cmd + ["--format", "json", "--out", str(first)])
        again = tmp_path / f"{cmd[0]}2.json"
        main(["--config", str(first), "--out", str(again)])
        checks[f"{cmd[0]} replay"] = first.read_bytes() == again.read_bytes()
    capsys.readouterr()
    ok = all(checks.values())
    record("9 reproducibility", ok, ", ".join(f"{k}={'ok' if v else 'DIFF'}" for k, v in checks.items()))
    assert ok
