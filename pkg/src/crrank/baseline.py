"""Flow x topology comparison ranking.

The reference baseline only names its two ingredients (crossroad traffic
flow and road topology), so this is a reconstruction: the product of each
crossroad's flow share and its topology-score share, renormalized.
"""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Sequence

from .network import DEFAULT_LAMBDA, RoadNetwork, node_topology_score
from .propagation import RankEntry, rank
from .trips import Transition


def crossroad_flow(transitions: Sequence[Transition]) -> dict[int, int]:
    """Trips traversing each crossroad; a path visiting a node twice counts once."""
    if not transitions:
        raise ValueError("no transitions")
    flow: dict[int, int] = defaultdict(int)
    for t in transitions:
        for p in t.paths:
            for n in set(p.crossroads):
                flow[n] += p.trip_count
    return dict(sorted(flow.items()))


def baseline_scores(
    flows: dict[int, int], network: RoadNetwork, lam: float = DEFAULT_LAMBDA
) -> dict[int, float]:
    if not flows:
        raise ValueError("empty flow table")
    ids = sorted(flows)
    for n in ids:
        if n not in network.nodes:
            raise ValueError(f"crossroad {n} not in network")
    topo = {n: node_topology_score(n, network, lam) for n in ids}
    flow_total = math.fsum(flows[n] for n in ids)
    topo_total = math.fsum(topo.values())
    raw = {n: (flows[n] / flow_total) * (topo[n] / topo_total) for n in ids}
    total = math.fsum(raw.values())
    return {n: raw[n] / total for n in ids}


def baseline_rank(
    flows: dict[int, int], network: RoadNetwork, lam: float = DEFAULT_LAMBDA
) -> list[RankEntry]:
    scores = baseline_scores(flows, network, lam)
    ids = list(scores)
    return rank([scores[n] for n in ids], ids)
