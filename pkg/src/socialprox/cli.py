"""Command-line entry point: ``socialprox <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 data error.

Every JSON output carries the fully resolved configuration under
``"config"``; passing that file back with ``--config`` reproduces the
output byte for byte.  ``--out`` and ``--jobs`` are never recorded since
they do not change the result.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any

from . import __version__
from .activity import (
    ActivityLog,
    CorrelationResult,
    UndefinedCorrelationError,
    attendance_log,
    co_activity,
    correlate,
    describe_filter,
    entropy_filter,
    pre_promotion_filter,
    write_correlations,
)
from .dynamics import Process, generate_cascades
from .graph import BipartiteAttendance, DirectedGraph, build_graph, project_attendance
from .ingest import (
    ParseError,
    load_dataset,
    parse_activity,
    parse_attendance,
    parse_edge_list,
    parse_promotions,
    write_activity,
    write_edge_list,
)
from .predict import NoEvaluableUsersError, SplitSpec, run_experiment
from .proximity import edge_proximity_table, parse_metric_list, scoped_pairs, write_score_table

log = logging.getLogger("socialprox")

USAGE_ERROR = 1
DATA_ERROR = 2

# options that never affect output and so stay out of the recorded config
_UNRECORDED = {"out", "jobs", "config", "func", "verbose"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser, fmt: str) -> None:
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default=fmt)
    p.add_argument("--config", help="JSON config (or a JSON report) whose settings become defaults")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_graph_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="tab-separated edge list")
    p.add_argument("--edge-semantics", choices=["flows", "follows"], default="flows")
    p.add_argument("--dataset", choices=["southern-women"], help="use a bundled dataset instead of files")
    p.add_argument("--lenient", action="store_true", help="skip malformed edge lines instead of failing")


def _add_activity_filters(p: argparse.ArgumentParser) -> None:
    p.add_argument("--activity", help="CSV with user,item,time")
    p.add_argument("--promotions", help="CSV with item,promotion_time")
    p.add_argument("--pre-promotion", action="store_true", help="keep only records before promotion")
    p.add_argument("--entropy-threshold", type=float, help="keep items whose user and gap entropies exceed this")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="socialprox", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", help="proximity of every linked pair")
    _add_graph_inputs(p)
    p.add_argument("--metrics", default="all")
    _add_common(p, "csv")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("project", help="project an attendance matrix onto actors")
    p.add_argument("--dataset", choices=["southern-women"])
    p.add_argument("--attendance", help="attendance CSV")
    p.add_argument("--events", help="comma-separated event labels to project (default: all)")
    _add_common(p, "csv")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("correlate", help="correlate proximity with co-activity")
    _add_graph_inputs(p)
    _add_activity_filters(p)
    p.add_argument("--metrics", default="all")
    p.add_argument("--max-coactivity", default="none",
                   help="comma-separated strict upper bounds, 'none' for no bound (e.g. 200,400,800,none)")
    p.add_argument("--pairs", choices=["linked", "all"], default="linked")
    _add_common(p, "csv")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("predict", help="proximity-weighted activity prediction")
    _add_graph_inputs(p)
    _add_activity_filters(p)
    p.add_argument("--metrics", default="all")
    p.add_argument("--n-train", type=int, required=False)
    p.add_argument("--trials", type=int, help="default: 200 for bundled data, 1 otherwise")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", choices=["random", "temporal"], default="random")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for trials")
    _add_common(p, "json")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="generate synthetic cascades on a graph")
    p.add_argument("--graph")
    p.add_argument("--edge-semantics", choices=["flows", "follows"], default="flows")
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--process", default="broadcast")
    p.add_argument("--items", type=int, default=100)
    p.add_argument("--seeds-per-item", type=int, default=1)
    p.add_argument("--adoption", type=float, default=1.0)
    p.add_argument("--max-hops", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, "csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("filter", help="filter an activity log")
    _add_activity_filters(p)
    _add_common(p, "csv")
    p.set_defaults(func=cmd_filter)
    parser.commands = sub.choices
    return parser


# ---- helpers -------------------------------------------------------------

def _resolved(args: argparse.Namespace) -> dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _UNRECORDED}


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def _json(payload: dict[str, Any]) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _load_graph(args: argparse.Namespace) -> DirectedGraph:
    if getattr(args, "dataset", None) == "southern-women":
        if args.graph:
            raise UsageError("--graph and --dataset are mutually exclusive")
        b = load_dataset("southern-women").attendance
        return project_attendance(b)
    if not args.graph:
        raise UsageError("--graph is required")
    edges, skipped = parse_edge_list(args.graph, lenient=args.lenient)
    if skipped:
        log.warning("skipped %d malformed edge line(s): %s", len(skipped), ", ".join(map(str, skipped)))
    g = build_graph(edges, semantics=args.edge_semantics)
    if g.dropped:
        log.info("dropped %d duplicate edge(s) or self-loop(s)", g.dropped)
    return g


def _load_activity(args: argparse.Namespace, collapse: bool = True) -> ActivityLog:
    if getattr(args, "dataset", None) == "southern-women":
        if args.activity:
            raise UsageError("--activity and --dataset are mutually exclusive")
        activity = attendance_log(load_dataset("southern-women").attendance)
    elif not args.activity:
        raise UsageError("--activity is required")
    else:
        activity = parse_activity(args.activity, collapse=collapse)
        if activity.collapsed:
            log.info("collapsed %d duplicate (user, item) record(s)", activity.collapsed)
    if args.promotions:
        activity = ActivityLog(activity.records, parse_promotions(args.promotions), activity.collapsed)
    return _apply_filters(args, activity)


def _apply_filters(args: argparse.Namespace, activity: ActivityLog) -> ActivityLog:
    if args.entropy_threshold is not None:
        if args.entropy_threshold < 0:
            raise UsageError("--entropy-threshold must be nonnegative")
        keep = entropy_filter(activity, args.entropy_threshold)
        log.info("entropy filter kept %d of %d item(s)", len(keep), len(activity.items))
        activity = activity.restrict_items(keep)
    if args.pre_promotion:
        if not activity.promotions:
            raise UsageError("--pre-promotion needs --promotions")
        activity, missing = pre_promotion_filter(activity)
        if missing:
            log.warning("dropped %d item(s) without a promotion time", missing)
    return activity


def _metrics(args: argparse.Namespace, allow_uniform: bool = False):
    try:
        return parse_metric_list(args.metrics, allow_uniform=allow_uniform)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---- commands ------------------------------------------------------------

def cmd_score(args: argparse.Namespace) -> None:
    metrics = _metrics(args)
    g = _load_graph(args)
    tables = [(m, edge_proximity_table(g, m)) for m in metrics]
    if args.format == "json":
        rows = [{"u": g.labels[u], "v": g.labels[v], "metric": m.value, "score": s}
                for m, t in tables for u, v, s in t]
        _emit(args, _json({"config": _resolved(args), "rows": rows}))
    else:
        buf = io.StringIO()
        write_score_table(g, tables, buf)
        _emit(args, buf.getvalue())


def cmd_project(args: argparse.Namespace) -> None:
    if args.dataset and args.attendance:
        raise UsageError("--attendance and --dataset are mutually exclusive")
    if args.dataset:
        b: BipartiteAttendance = load_dataset(args.dataset).attendance
    elif args.attendance:
        b = parse_attendance(args.attendance)
    else:
        raise UsageError("--dataset or --attendance is required")
    subset = None
    if args.events:
        try:
            subset = b.event_indices(e.strip() for e in args.events.split(",") if e.strip())
        except KeyError as exc:
            raise UsageError(f"unknown event {exc.args[0]!r}") from None
    g = project_attendance(b, subset)
    edges = [(g.labels[u], g.labels[v]) for u, v in g.edges()]
    if args.format == "json":
        _emit(args, _json({"config": _resolved(args), "edges": [list(e) for e in edges]}))
    else:
        buf = io.StringIO()
        write_edge_list(edges, buf)
        _emit(args, buf.getvalue())


def _parse_bounds(text: str) -> list[int | None]:
    bounds: list[int | None] = []
    for part in text.split(","):
        part = part.strip().lower()
        if not part:
            continue
        if part in ("none", "all", "inf"):
            bounds.append(None)
        else:
            try:
                bounds.append(int(part))
            except ValueError:
                raise UsageError(f"bad --max-coactivity value {part!r}") from None
    return bounds or [None]


def cmd_correlate(args: argparse.Namespace) -> None:
    metrics = _metrics(args)
    bounds = _parse_bounds(args.max_coactivity)
    g = _load_graph(args)
    activity = _load_activity(args)
    results = []
    for m in metrics:
        for bound in bounds:
            try:
                results.append(correlate(g, activity, m, max_coactivity=bound, pairs=args.pairs))
            except UndefinedCorrelationError as exc:
                desc = describe_filter(bound) + ("" if args.pairs == "linked" else f" ({args.pairs} pairs)")
                log.warning("%s, %s: correlation undefined (%s)", m.value, desc, exc)
                results.append(CorrelationResult(m, None, _pair_count(g, activity, bound, args.pairs), desc))
    if args.format == "json":
        rows = [{"metric": r.metric.value, "filter": r.filter_description, "r": r.r, "pairs": r.pair_count}
                for r in results]
        _emit(args, _json({"config": _resolved(args), "rows": rows}))
    else:
        buf = io.StringIO()
        write_correlations(results, buf)
        _emit(args, buf.getvalue())


def _pair_count(g: DirectedGraph, activity: ActivityLog, bound: int | None, scope: str) -> int:
    pairs = scoped_pairs(g, scope)  # type: ignore[arg-type]
    if bound is None:
        return len(pairs)
    return sum(co_activity(activity, g.labels[u], g.labels[v]) < bound for u, v in pairs)


def cmd_predict(args: argparse.Namespace) -> None:
    metrics = _metrics(args, allow_uniform=True)
    if args.n_train is None:
        raise UsageError("--n-train is required")
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if args.dataset == "southern-women":
        if args.graph or args.activity:
            raise UsageError("--dataset cannot be combined with --graph/--activity")
        subject: DirectedGraph | BipartiteAttendance = load_dataset(args.dataset).attendance
        activity = None
        total = len(subject.events)
        args.trials = 200 if args.trials is None else args.trials
    else:
        subject = _load_graph(args)
        activity = _load_activity(args)
        total = len(activity.items)
        args.trials = 1 if args.trials is None else args.trials
    spec = SplitSpec(n_train=args.n_train, seed=args.seed, trials=args.trials, mode=args.split)
    try:
        spec.validate(total)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = run_experiment(subject, activity, spec, metrics, jobs=args.jobs, config=_resolved(args))
    _emit(args, report.to_json() if args.format == "json" else report.to_csv())


def cmd_simulate(args: argparse.Namespace) -> None:
    try:
        process = Process(args.process)
    except ValueError:
        raise UsageError(f"unknown process {args.process!r}; expected one of "
                         + ", ".join(p.value for p in Process)) from None
    if not 0.0 <= args.adoption <= 1.0:
        raise UsageError("--adoption must lie in [0, 1]")
    if args.items < 1:
        raise UsageError("--items must be at least 1")
    g = _load_graph(args)
    if g.node_count == 0:
        raise ParseError("graph is empty")
    cascades = generate_cascades(g, args.items, process, per_item_seed_nodes=args.seeds_per_item,
                                 rng_seed=args.seed, adoption=args.adoption, max_hops=args.max_hops)
    if args.format == "json":
        _emit(args, _json({"config": _resolved(args), "records": [list(r) for r in cascades.records]}))
    else:
        buf = io.StringIO()
        write_activity(cascades, buf)
        _emit(args, buf.getvalue())


def cmd_filter(args: argparse.Namespace) -> None:
    args.dataset = None
    # keep repeated records: user entropy is computed over them
    activity = _load_activity(args, collapse=args.entropy_threshold is None)
    activity = activity.deduplicated()
    if args.format == "json":
        _emit(args, _json({"config": _resolved(args), "records": [list(r) for r in activity.records]}))
    else:
        buf = io.StringIO()
        write_activity(activity, buf)
        _emit(args, buf.getvalue())


# ---- entry point ---------------------------------------------------------

def _config_defaults(argv: list[str]) -> dict[str, Any]:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    data = json.loads(Path(known.config).read_text(encoding="utf-8"))
    return dict(data.get("config", data))


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        defaults = _config_defaults(argv)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"socialprox: error: cannot read --config: {exc}", file=sys.stderr)
        return USAGE_ERROR
    if defaults:
        command = defaults.pop("command", None)
        if command and not any(a in parser.commands for a in argv):
            argv.insert(0, command)
        sub = parser.commands.get(command or (argv[0] if argv else ""))
        if sub is not None:
            known = {a.dest for a in sub._actions}
            sub.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"socialprox {args.command}: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ParseError, NoEvaluableUsersError, UndefinedCorrelationError, KeyError, OSError, ValueError) as exc:
        print(f"socialprox {args.command}: data error: {exc}", file=sys.stderr)
        return DATA_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
