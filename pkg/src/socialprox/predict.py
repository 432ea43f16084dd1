"""Predict a user's activity from friends' activity, weighted by proximity.

For user ``w`` with friends ``j`` (the in-neighbors whose activity ``w``
sees), the prediction vector is

    p = sum_j f_j * x_j / sum_j x_j

where ``f_j`` is friend ``j``'s binary activity over the test items and
``x_j`` the proximity of ``w`` and ``j`` (1 for the uniform baseline).
Precision is ``u.p / |p|`` and recall ``u.p / |u|``, with ``|z| = sum(z)``
and ``u`` the items ``w`` actually acted on.
"""
from __future__ import annotations

import csv
import io
import json
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from .activity import ActivityLog
from .graph import BipartiteAttendance, DirectedGraph, project_attendance
from .proximity import Metric, parse_metric, score

SplitMode = Literal["random", "temporal"]


class NoEvaluableUsersError(ValueError):
    """No user had both a prediction and test activity under every metric."""


@dataclass(frozen=True)
class SplitSpec:
    n_train: int
    seed: int = 0
    trials: int = 1
    mode: SplitMode = "random"

    def validate(self, total: int) -> None:
        if not 1 <= self.n_train < total:
            raise ValueError(f"n_train must satisfy 1 <= n_train < {total}, got {self.n_train}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.mode not in ("random", "temporal"):
            raise ValueError(f"unknown split mode {self.mode!r}")


def split_items(items: Sequence[str], spec: SplitSpec, trial_index: int = 0) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Split ``items`` into (train, test), both kept in input order.

    Random splits depend only on ``(spec.seed, trial_index)``.  Temporal
    splits take the first ``n_train`` items as given, so callers pass items
    sorted by time.
    """
    spec.validate(len(items))
    if spec.mode == "temporal":
        chosen = set(range(spec.n_train))
    else:
        rng = np.random.default_rng([spec.seed, trial_index])
        chosen = set(rng.choice(len(items), size=spec.n_train, replace=False).tolist())
    train = tuple(x for i, x in enumerate(items) if i in chosen)
    test = tuple(x for i, x in enumerate(items) if i not in chosen)
    return train, test


@dataclass(frozen=True)
class PredictionVector:
    user: str
    values: np.ndarray = field(repr=False)


def friends(g: DirectedGraph, w: int) -> tuple[int, ...]:
    return g.in_adjacency[w]


def predict_user(
    g: DirectedGraph,
    w: int,
    friend_vectors: Mapping[int, Sequence[float]],
    metric: Metric | str,
    weights: Mapping[int, float] | None = None,
) -> PredictionVector | None:
    """Proximity-weighted average of friends' test vectors.

    Returns ``None`` when no friend has positive weight; such users are
    excluded from evaluation.  ``weights`` may carry precomputed
    proximities keyed by friend id.
    """
    metric = parse_metric(metric)
    fr = friends(g, w)
    if set(friend_vectors) != set(fr):
        raise ValueError(f"friend vectors must cover exactly the friends of node {w}")
    if not fr:
        return None
    vecs = [np.asarray(friend_vectors[j], dtype=float) for j in fr]
    length = len(vecs[0])
    if any(len(v) != length for v in vecs):
        raise ValueError("friend vectors differ in length")
    if metric is Metric.UNIFORM:
        x = np.ones(len(fr))
    elif weights is not None:
        x = np.array([weights[j] for j in fr], dtype=float)
    else:
        x = np.array([score(g, w, j, metric) for j in fr], dtype=float)
    total = x.sum()
    if total <= 0.0:
        return None
    p = np.zeros(length)
    for xj, fj in zip(x, vecs):
        p += fj * (xj / total)
    return PredictionVector(g.labels[w], p)


def evaluate(p: PredictionVector | Sequence[float], actual: Sequence[float]) -> tuple[float | None, float | None]:
    """(precision, recall); either is ``None`` where its denominator is zero."""
    pv = np.asarray(p.values if isinstance(p, PredictionVector) else p, dtype=float)
    u = np.asarray(actual, dtype=float)
    if pv.shape != u.shape:
        raise ValueError(f"length mismatch: prediction {pv.shape[0]}, actual {u.shape[0]}")
    hit = float(u @ pv)
    p_sum = float(pv.sum())
    u_sum = float(u.sum())
    precision = hit / p_sum if p_sum > 0 else None
    recall = hit / u_sum if u_sum > 0 else None
    return precision, recall


@dataclass(frozen=True)
class MetricSummary:
    precision: float
    recall: float
    precision_lift_pct: float | None
    recall_lift_pct: float | None
    users_evaluated: int
    users_excluded: int


@dataclass
class PredictionReport:
    metrics: dict[Metric, MetricSummary]
    config: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "metrics": {m.value: vars(s).copy() for m, s in self.metrics.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = ["precision", "recall", "precision_lift_pct", "recall_lift_pct", "users_evaluated", "users_excluded"]
        writer.writerow(["metric", *cols])
        for m, s in self.metrics.items():
            row = [getattr(s, c) for c in cols]
            writer.writerow([m.value, *("" if v is None else repr(v) for v in row)])
        return buf.getvalue()


@dataclass
class _TrialResult:
    # per metric: summed precision / recall over the common user set
    precision_sum: dict[Metric, float]
    recall_sum: dict[Metric, float]
    n_precision: int
    n_recall: int
    excluded: dict[Metric, int]


def _run_trial(g: DirectedGraph, actual: np.ndarray, metrics: Sequence[Metric]) -> _TrialResult:
    """Evaluate every user in one split; ``actual`` is nodes x test items."""
    excluded = dict.fromkeys(metrics, 0)
    pr_sum = dict.fromkeys(metrics, 0.0)
    re_sum = dict.fromkeys(metrics, 0.0)
    n_pr = n_re = 0
    for w in range(g.node_count):
        fr = friends(g, w)
        u = actual[w]
        if not fr or not u.any():
            continue
        vectors = {j: actual[j] for j in fr}
        results = {}
        for m in metrics:
            pv = predict_user(g, w, vectors, m)
            if pv is None:
                excluded[m] += 1
            else:
                results[m] = evaluate(pv, u)
        if len(results) != len(metrics):
            continue
        n_re += 1
        for m, (_, rec) in results.items():
            re_sum[m] += rec
        if all(prec is not None for prec, _ in results.values()):
            n_pr += 1
            for m, (prec, _) in results.items():
                pr_sum[m] += prec
    return _TrialResult(pr_sum, re_sum, n_pr, n_re, excluded)


def _southern_trial(args: tuple[BipartiteAttendance, SplitSpec, int, tuple[Metric, ...]]) -> _TrialResult:
    b, spec, trial, metrics = args
    train, test = split_items(b.events, spec, trial)
    train_idx = b.event_indices(train)
    g = project_attendance(b, train_idx)
    actual = b.attended[:, b.event_indices(test)].astype(float)
    return _run_trial(g, actual, metrics)


def _follower_trial(args: tuple[DirectedGraph, ActivityLog, tuple[str, ...], SplitSpec, int, tuple[Metric, ...]]) -> _TrialResult:
    g, log, items, spec, trial, metrics = args
    _, test = split_items(items, spec, trial)
    col = {item: k for k, item in enumerate(test)}
    actual = np.zeros((g.node_count, len(test)))
    for user, item, _ in log.records:
        if item in col and g.has_label(user):
            actual[g.index(user), col[item]] = 1.0
    return _run_trial(g, actual, metrics)


def _lift(value: float, baseline: float) -> float | None:
    if baseline == 0.0:
        return None
    return 100.0 * (value - baseline) / baseline


def _summarize(results: Sequence[_TrialResult], metrics: Sequence[Metric]) -> dict[Metric, MetricSummary]:
    used_pr = [r for r in results if r.n_precision > 0]
    used_re = [r for r in results if r.n_recall > 0]
    if not used_pr or not used_re:
        raise NoEvaluableUsersError("no user could be evaluated under every metric")
    precision = {m: float(np.mean([r.precision_sum[m] / r.n_precision for r in used_pr])) for m in metrics}
    recall = {m: float(np.mean([r.recall_sum[m] / r.n_recall for r in used_re])) for m in metrics}
    evaluated = sum(r.n_recall for r in results)
    out = {}
    for m in metrics:
        out[m] = MetricSummary(
            precision=precision[m],
            recall=recall[m],
            precision_lift_pct=_lift(precision[m], precision[Metric.UNIFORM]),
            recall_lift_pct=_lift(recall[m], recall[Metric.UNIFORM]),
            users_evaluated=evaluated,
            users_excluded=sum(r.excluded[m] for r in results),
        )
    return out


def _normalize_metrics(metrics: Sequence[Metric | str]) -> tuple[Metric, ...]:
    ms = [parse_metric(m) for m in metrics]
    if Metric.UNIFORM not in ms:
        ms.insert(0, Metric.UNIFORM)
    return tuple(dict.fromkeys(ms))


def _map_trials(fn, tasks: list, jobs: int) -> list[_TrialResult]:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [fn(t) for t in tasks]


def items_by_first_time(log: ActivityLog) -> tuple[str, ...]:
    first: dict[str, int] = {}
    for _, item, t in log.records:
        if item not in first or t < first[item]:
            first[item] = t
    # dicts keep first-appearance order and sorted() is stable
    return tuple(sorted(first, key=first.__getitem__))


def run_experiment(
    g_or_attendance: DirectedGraph | BipartiteAttendance,
    log: ActivityLog | None,
    spec: SplitSpec,
    metrics: Sequence[Metric | str],
    jobs: int = 1,
    config: Mapping[str, Any] | None = None,
) -> PredictionReport:
    """Run repeated train/test splits and average precision and recall.

    With a :class:`BipartiteAttendance`, events are split and each trial
    projects the training events into a friendship graph.  With a
    :class:`DirectedGraph` plus log, proximity comes from the full graph and
    only the items are split.  Results are averaged over users, then over
    trials.  Uniform is always included as the lift baseline, and every
    metric is scored on the same set of users.
    """
    ms = _normalize_metrics(metrics)
    if isinstance(g_or_attendance, BipartiteAttendance):
        b = g_or_attendance
        spec.validate(len(b.events))
        tasks = [(b, spec, t, ms) for t in range(spec.trials)]
        results = _map_trials(_southern_trial, tasks, jobs)
    else:
        if log is None:
            raise ValueError("follower-graph mode needs an activity log")
        g = g_or_attendance
        items = items_by_first_time(log) if spec.mode == "temporal" else log.items
        spec.validate(len(items))
        tasks = [(g, log, items, spec, t, ms) for t in range(spec.trials)]
        results = _map_trials(_follower_trial, tasks, jobs)
    cfg = dict(config or {})
    cfg.setdefault("n_train", spec.n_train)
    cfg.setdefault("trials", spec.trials)
    cfg.setdefault("seed", spec.seed)
    cfg.setdefault("split", spec.mode)
    cfg.setdefault("metrics", [m.value for m in ms])
    return PredictionReport(_summarize(results, ms), cfg)
