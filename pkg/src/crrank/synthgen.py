"""Synthetic grid networks, demand-driven trips, and the hub-vs-local fixture."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

from .network import RegionAssignment, RoadNetwork, RoadSegment
from .trips import PathRecord, Transition, Trip, assign_od

# demand route policy: "shortest", "random", or an explicit crossroad sequence
RoutePolicy = Union[str, tuple[int, ...]]

BASE_TM = 8 * 3600  # trips start inside the morning peak


class UnreachableOD(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    boundary_level: int = 1
    interior_level: int = 2
    spacing: float = 100.0

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.rows}x{self.cols}")
        for lvl in (self.boundary_level, self.interior_level):
            if lvl not in (1, 2, 3):
                raise ValueError(f"level {lvl} not in {{1,2,3}}")

    def node(self, r: int, c: int) -> int:
        return r * self.cols + c

    def cell(self, i: int, j: int) -> int:
        return i * (self.cols - 1) + j

    @property
    def region_count(self) -> int:
        return (self.rows - 1) * (self.cols - 1)


@dataclass(frozen=True)
class ODDemand:
    origin: int
    destination: int
    count: int
    route: RoutePolicy = "shortest"
    via: int | None = None
    avoid: tuple[int, ...] = ()

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("trip count must be >= 1")


@dataclass(frozen=True)
class DemandSpec:
    od_pairs: tuple[ODDemand, ...]
    seed: int = 0


def make_grid_network(spec: GridSpec) -> tuple[RoadNetwork, RegionAssignment]:
    """rows x cols crossroads joined to grid neighbours in both directions.

    Node (r, c) sits at (c * spacing, r * spacing); cell (i, j) has lower-left
    corner (i, j). Every segment lies on a cell boundary, so no node carries a
    region of its own and each directed segment records the cell on its
    right-hand side (None past the outer ring).
    """
    R, Cc = spec.rows, spec.cols

    def cell(i, j):
        return spec.cell(i, j) if 0 <= i < R - 1 and 0 <= j < Cc - 1 else None

    nodes = [
        (spec.node(r, c), (c * spec.spacing, r * spec.spacing)) for r in range(R) for c in range(Cc)
    ]
    edges: list[RoadSegment] = []

    def add(a, b, level, right, left):
        edges.append(RoadSegment(len(edges), a, b, level, right, left))

    for r in range(R):
        for c in range(Cc):
            if c + 1 < Cc:  # horizontal link
                level = spec.boundary_level if r in (0, R - 1) else spec.interior_level
                south, north = cell(r - 1, c), cell(r, c)
                add(spec.node(r, c), spec.node(r, c + 1), level, south, north)  # eastbound
                add(spec.node(r, c + 1), spec.node(r, c), level, north, south)  # westbound
            if r + 1 < R:  # vertical link
                level = spec.boundary_level if c in (0, Cc - 1) else spec.interior_level
                west, east = cell(r, c - 1), cell(r, c)
                add(spec.node(r, c), spec.node(r + 1, c), level, east, west)  # northbound
                add(spec.node(r + 1, c), spec.node(r, c), level, west, east)  # southbound
    return RoadNetwork.build(nodes, edges), RegionAssignment({}, spec.region_count)


def shortest_path(
    network: RoadNetwork, src: int, dst: int, avoid: Sequence[int] = ()
) -> list[int] | None:
    """Fewest-hop path; among equals, always step to the lowest-id next node."""
    blocked = set(avoid) - {src, dst}
    pred: dict[int, list[int]] = {n: [] for n in network.nodes}
    for e in network.edges.values():
        pred[e.to_node].append(e.from_node)
    dist = {dst: 0}
    queue = deque([dst])
    while queue:
        n = queue.popleft()
        for p in pred[n]:
            if p not in dist and p not in blocked:
                dist[p] = dist[n] + 1
                queue.append(p)
    if src not in dist:
        return None
    path = [src]
    while path[-1] != dst:
        here = path[-1]
        path.append(
            min(s for s in network.successors(here) if dist.get(s) == dist[here] - 1)
        )
    return path


def _endpoint_edges(network, regions, region, at_start):
    out = []
    for e in network.edges.values():
        node = e.from_node if at_start else e.to_node
        resolved = regions.node_region.get(node, e.region_right)
        if resolved == region:
            out.append(e)
    return out


def candidate_routes(
    network: RoadNetwork,
    regions: RegionAssignment,
    origin: int,
    destination: int,
    via: int | None = None,
    avoid: Sequence[int] = (),
) -> list[tuple[int, ...]]:
    """Simple routes whose OD resolves to (origin, destination), shortest first.

    One candidate per (first segment, last segment) combination: the first
    segment leaves the origin region, the middle is a shortest path (through
    ``via`` if given), the last segment enters the destination region.
    """
    avoid = set(avoid)
    starts = _endpoint_edges(network, regions, origin, True)
    ends = _endpoint_edges(network, regions, destination, False)
    found = set()
    for e1 in starts:
        for e2 in ends:
            if e1.id == e2.id:
                seq = [e1.from_node, e1.to_node]
            else:
                a, b = e1.to_node, e2.from_node
                blocked = avoid | {e1.from_node, e2.to_node}
                if via is None or via in (e1.from_node, e2.to_node):
                    mid = shortest_path(network, a, b, blocked)
                else:
                    h1 = shortest_path(network, a, via, blocked)
                    h2 = None
                    if h1 is not None:
                        h2 = shortest_path(network, via, b, blocked | set(h1))
                    mid = None if h1 is None or h2 is None else h1 + h2[1:]
                if mid is None:
                    continue
                seq = [e1.from_node] + mid + [e2.to_node]
            if len(set(seq)) != len(seq) or avoid & set(seq):
                continue
            if via is not None and via not in seq:
                continue
            found.add(tuple(seq))
    return sorted(found, key=lambda s: (len(s), s))


def _trip_for(network: RoadNetwork, trip_id: int, seq: Sequence[int], tm: float) -> Trip:
    seq = tuple(seq)
    first = network.edge_between(seq[0], seq[1])
    last = network.edge_between(seq[-2], seq[-1])
    if first is None or last is None or any(
        network.edge_between(a, b) is None for a, b in zip(seq, seq[1:])
    ):
        raise ValueError(f"route {seq} is not a walk on the network")
    return Trip(trip_id, seq, first.id, last.id, tm)


def generate_trips(
    network: RoadNetwork, regions: RegionAssignment, demand: DemandSpec
) -> list[tuple[Trip, tuple[int, int]]]:
    """Emit ``count`` trips per OD demand along the route its policy selects.

    ``random`` draws one candidate route per trip from a generator seeded by
    ``demand.seed``; explicit routes are checked to resolve to the declared OD.
    """
    rng = random.Random(demand.seed)
    out: list[tuple[Trip, tuple[int, int]]] = []
    for od in demand.od_pairs:
        for region in (od.origin, od.destination):
            if not 0 <= region < regions.region_count:
                raise ValueError(f"region {region} does not exist")
        pair = (od.origin, od.destination)
        if isinstance(od.route, str):
            routes = candidate_routes(network, regions, *pair, via=od.via, avoid=od.avoid)
            if not routes:
                raise UnreachableOD(f"no route for OD pair {pair}")
            if od.route not in ("shortest", "random"):
                raise ValueError(f"unknown route policy {od.route!r}")
        else:
            routes = [tuple(od.route)]
        for _ in range(od.count):
            seq = routes[0] if od.route == "shortest" or len(routes) == 1 else rng.choice(routes)
            trip = _trip_for(network, len(out), seq, BASE_TM + 60 * len(out))
            resolved = assign_od(trip, network, regions)
            if resolved != pair:
                raise ValueError(f"route {seq} resolves to OD {resolved}, expected {pair}")
            out.append((trip, pair))
    return out


# -- hub vs local crossroad fixture ---------------------------------------------


class Figure1(NamedTuple):
    network: RoadNetwork
    regions: RegionAssignment
    trips: list[tuple[Trip, tuple[int, int]]]
    g: int  # hub crossroad
    j: int  # locally loaded crossroad
    G: int
    H: int


FIGURE1_GRID = GridSpec(5, 5, boundary_level=1, interior_level=2)
FIGURE1_LOCAL_TRIPS = 6  # per direction between G and H
FIGURE1_HUB_TRIPS = 3  # per hub OD pair


def figure1_scenario() -> Figure1:
    """Two crossroads with equal topology and equal traffic but different reach.

    On a 5x5 grid, ``j`` = (1,1) only carries trips between the two cells G
    and H that it borders; ``g`` = (2,2) carries the same number of trips
    spread over four OD pairs that cross the grid. Hub routes avoid ``j`` and
    local routes avoid ``g``.
    """
    spec = FIGURE1_GRID
    network, regions = make_grid_network(spec)
    g, j = spec.node(2, 2), spec.node(1, 1)
    G, H = spec.cell(0, 0), spec.cell(0, 1)
    west, east = spec.cell(1, 0), spec.cell(2, 3)
    south, north = spec.cell(0, 2), spec.cell(3, 1)

    local = [
        ODDemand(G, H, FIGURE1_LOCAL_TRIPS, via=j, avoid=(g,)),
        ODDemand(H, G, FIGURE1_LOCAL_TRIPS, via=j, avoid=(g,)),
    ]
    hub = [
        ODDemand(o, d, FIGURE1_HUB_TRIPS, via=g, avoid=(j,))
        for o, d in ((west, east), (east, west), (south, north), (north, south))
    ]
    trips = generate_trips(network, regions, DemandSpec(tuple(local + hub)))
    return Figure1(network, regions, trips, g, j, G, H)


# -- random instances for property tests --------------------------------------


@dataclass
class RandomInstance:
    network: RoadNetwork
    transitions: list[Transition] = field(default_factory=list)


def random_instance(
    seed: int, max_transitions: int = 200, max_paths: int = 200, max_crossroads: int = 200
) -> RandomInstance:
    """Random network plus transitions whose paths are simple walks on it.

    Sizes stay within the given caps: M <= max_transitions, K <= max_paths,
    and at most ``max_crossroads`` distinct crossroads overall.
    """
    rng = random.Random(seed)
    n = rng.randint(3, max(3, max_crossroads))
    nodes = [(i, (float(rng.randint(0, 1000)), float(rng.randint(0, 1000)))) for i in range(n)]
    links = {(i, (i + 1) % n) for i in range(n)}
    for _ in range(rng.randint(0, 2 * n)):
        a, b = rng.sample(range(n), 2)
        links.add((min(a, b), max(a, b)))
    edges = []
    for a, b in sorted(links):
        level = rng.choice((1, 2, 3))
        edges.append(RoadSegment(len(edges), a, b, level))
        edges.append(RoadSegment(len(edges), b, a, level))
    network = RoadNetwork.build(nodes, edges)

    def walk():
        length = rng.randint(2, min(n, 12))
        seq = [rng.randrange(n)]
        while len(seq) < length:
            nxt = [s for s in network.successors(seq[-1]) if s not in seq]
            if not nxt:
                break
            seq.append(rng.choice(nxt))
        return tuple(seq)

    m_target = rng.randint(1, max_transitions)
    k_budget = max_paths
    transitions: list[Transition] = []
    ods = set()
    while len(transitions) < m_target and k_budget > 0:
        od = (rng.randrange(50), rng.randrange(50))
        if od in ods:
            continue
        ods.add(od)
        seqs = sorted({walk() for _ in range(rng.randint(1, min(4, k_budget)))})
        k_budget -= len(seqs)
        idx = len(transitions)
        paths = tuple(PathRecord(idx, s, rng.randint(1, 20)) for s in seqs)
        transitions.append(Transition(od[0], od[1], paths))
    return RandomInstance(network, transitions)
