"""Crossroad importance ranking from taxi trips.

Trips are grouped into transitions (OD region pairs) and paths (distinct
crossroad sequences); scores are propagated over the resulting
transition-path-crossroad graph until they settle.
"""

from .baseline import baseline_rank, baseline_scores, crossroad_flow
from .graph import TripartiteGraph, build_graph, prepare
from .network import RegionAssignment, RoadNetwork, RoadSegment, level_score, load_network
from .propagation import PropagationConfig, ScoreState, rank, run_crrank
from .trips import Transition, Trip, assign_od, group_transitions

__version__ = "0.1.0"

__all__ = [
    "PropagationConfig", "RegionAssignment", "RoadNetwork", "RoadSegment", "ScoreState",
    "Transition", "Trip", "TripartiteGraph", "assign_od", "baseline_rank", "baseline_scores",
    "build_graph", "crossroad_flow", "group_transitions", "level_score", "load_network",
    "prepare", "rank", "run_crrank",
]
