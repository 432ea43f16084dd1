"""Structural proximity metrics and proximity-weighted activity prediction."""
from .activity import (
    ActivityLog,
    CorrelationResult,
    UndefinedCorrelationError,
    co_activity,
    correlate,
    entropy_filter,
    mean_proximity_by_activity,
    pre_promotion_filter,
)
from .dynamics import Process, generate_cascades, symmetrized_reach, two_step_reach
from .graph import BipartiteAttendance, DirectedGraph, build_graph, neighborhood, project_attendance
from .ingest import parse_activity, parse_edge_list, southern_women
from .predict import PredictionReport, SplitSpec, evaluate, predict_user, run_experiment, split_items
from .proximity import (
    GRAPH_METRICS,
    CommonNeighborSets,
    Metric,
    classic_score,
    common_neighbor_sets,
    conservative_score,
    edge_proximity_table,
    nonconservative_score,
    score,
)

__version__ = "0.1.0"
