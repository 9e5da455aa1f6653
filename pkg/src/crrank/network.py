"""Directed road network with leveled segments and region annotations.

File format (one record per line, blank lines and ``#`` comments ignored)::

    N,<id>[,<x>,<y>]
    E,<id>,<from>,<to>,<level>[,<region_right>][,<region_left>]

Region assignment file::

    REGIONS,<count>
    R,<node_id>,<region_id>
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

DEFAULT_LAMBDA = 0.2
LEVELS = (1, 2, 3)


class NetworkError(ValueError):
    """Malformed or inconsistent network / region input."""


@dataclass(frozen=True)
class RoadSegment:
    id: int
    from_node: int
    to_node: int
    level: int
    region_right: int | None = None
    region_left: int | None = None


@dataclass(frozen=True)
class Crossroad:
    id: int
    coords: tuple[float, float] | None = None
    incident_edges: tuple[int, ...] = ()


@dataclass(frozen=True)
class RegionAssignment:
    node_region: dict[int, int]
    region_count: int

    def __post_init__(self):
        if self.region_count < 0:
            raise NetworkError(f"negative region count {self.region_count}")
        for node, region in self.node_region.items():
            if not 0 <= region < self.region_count:
                raise NetworkError(
                    f"node {node}: region {region} outside [0, {self.region_count})"
                )


@dataclass(frozen=True)
class RoadNetwork:
    """Immutable directed road network.

    Use :meth:`build` rather than the constructor; it validates the records
    and fills the incidence and adjacency indexes.
    """

    nodes: dict[int, Crossroad]
    edges: dict[int, RoadSegment]
    adjacency: dict[int, tuple[int, ...]] = field(repr=False)

    @classmethod
    def build(
        cls,
        nodes: Iterable[tuple[int, tuple[float, float] | None]],
        edges: Iterable[RoadSegment],
    ) -> "RoadNetwork":
        coords: dict[int, tuple[float, float] | None] = {}
        for node_id, xy in nodes:
            if node_id in coords:
                raise NetworkError(f"duplicate node id {node_id}")
            coords[node_id] = xy

        edge_map: dict[int, RoadSegment] = {}
        for e in edges:
            if e.id in edge_map:
                raise NetworkError(f"duplicate edge id {e.id}")
            if e.level not in LEVELS:
                raise NetworkError(f"edge {e.id}: level {e.level} not in {{1,2,3}}")
            if e.from_node == e.to_node:
                raise NetworkError(f"edge {e.id}: self-loop at node {e.from_node}")
            for end in (e.from_node, e.to_node):
                if end not in coords:
                    raise NetworkError(f"edge {e.id}: references missing node {end}")
            edge_map[e.id] = e

        incident: dict[int, list[int]] = {n: [] for n in coords}
        out: dict[int, list[int]] = {n: [] for n in coords}
        for eid in sorted(edge_map):
            e = edge_map[eid]
            incident[e.from_node].append(eid)
            incident[e.to_node].append(eid)
            out[e.from_node].append(eid)

        node_map = {
            n: Crossroad(n, coords[n], tuple(incident[n])) for n in sorted(coords)
        }
        adjacency = {n: tuple(out[n]) for n in sorted(coords)}
        return cls(node_map, dict(sorted(edge_map.items())), adjacency)

    def out_edges(self, node: int) -> tuple[int, ...]:
        return self.adjacency[node]

    def successors(self, node: int) -> list[int]:
        return sorted({self.edges[e].to_node for e in self.adjacency[node]})

    def edge_between(self, a: int, b: int) -> RoadSegment | None:
        """Lowest-id segment a->b, or None."""
        for eid in self.adjacency.get(a, ()):
            if self.edges[eid].to_node == b:
                return self.edges[eid]
        return None

    @property
    def has_coords(self) -> bool:
        return all(n.coords is not None for n in self.nodes.values())


def level_score(level: int | RoadSegment, lam: float = DEFAULT_LAMBDA) -> float:
    """Per-segment weight: 1+lam for level 1, 1 for level 2, 1-lam for level 3."""
    if isinstance(level, RoadSegment):
        level = level.level
    if level == 1:
        return 1.0 + lam
    if level == 2:
        return 1.0
    if level == 3:
        return 1.0 - lam
    raise NetworkError(f"level {level} not in {{1,2,3}}")


def node_topology_score(node: int, network: RoadNetwork, lam: float = DEFAULT_LAMBDA) -> float:
    """Sum of level scores over every directed segment touching ``node``."""
    if node not in network.nodes:
        raise NetworkError(f"unknown crossroad {node}")
    incident = network.nodes[node].incident_edges
    if not incident:
        raise NetworkError(f"isolated crossroad {node}")
    # fsum is exactly rounded, so the result does not depend on edge order
    return math.fsum(level_score(network.edges[e], lam) for e in incident)


# -- file I/O ---------------------------------------------------------------


def _records(path: Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, [f.strip() for f in line.split(",")]


def _opt_int(s: str) -> int | None:
    return int(s) if s != "" else None


def _nonneg(s: str, what: str) -> int:
    v = int(s)
    if v < 0:
        raise ValueError(f"{what} must be non-negative, got {v}")
    return v


def load_network(path: str | Path) -> RoadNetwork:
    path = Path(path)
    nodes: list[tuple[int, tuple[float, float] | None]] = []
    edges: list[RoadSegment] = []
    for lineno, rec in _records(path):
        kind = rec[0]
        try:
            if kind == "N":
                if len(rec) not in (2, 4):
                    raise ValueError(f"expected N,<id>[,<x>,<y>], got {len(rec)} fields")
                xy = None
                if len(rec) == 4 and rec[2] != "" and rec[3] != "":
                    xy = (float(rec[2]), float(rec[3]))
                nodes.append((_nonneg(rec[1], "node id"), xy))
            elif kind == "E":
                if not 5 <= len(rec) <= 7:
                    raise ValueError(f"expected 5-7 fields for an edge, got {len(rec)}")
                rec = rec + [""] * (7 - len(rec))
                edges.append(
                    RoadSegment(
                        id=_nonneg(rec[1], "edge id"),
                        from_node=_nonneg(rec[2], "node id"),
                        to_node=_nonneg(rec[3], "node id"),
                        level=int(rec[4]),
                        region_right=_opt_int(rec[5]),
                        region_left=_opt_int(rec[6]),
                    )
                )
            else:
                raise ValueError(f"unknown record type {kind!r}")
        except ValueError as exc:
            raise NetworkError(f"{path}:{lineno}: {exc}") from None
    return RoadNetwork.build(nodes, edges)


def load_regions(path: str | Path) -> RegionAssignment:
    path = Path(path)
    count = None
    node_region: dict[int, int] = {}
    for lineno, rec in _records(path):
        try:
            if rec[0] == "REGIONS":
                count = _nonneg(rec[1], "region count")
            elif rec[0] == "R":
                node = _nonneg(rec[1], "node id")
                if node in node_region:
                    raise ValueError(f"node {node} assigned twice")
                node_region[node] = _nonneg(rec[2], "region id")
            else:
                raise ValueError(f"unknown record type {rec[0]!r}")
        except (ValueError, IndexError) as exc:
            raise NetworkError(f"{path}:{lineno}: {exc}") from None
    if count is None:
        raise NetworkError(f"{path}: missing REGIONS header")
    return RegionAssignment(node_region, count)


def _fmt_opt(v) -> str:
    return "" if v is None else str(v)


def write_network(network: RoadNetwork, path: str | Path) -> None:
    lines = []
    for n in network.nodes.values():
        if n.coords is None:
            lines.append(f"N,{n.id}")
        else:
            lines.append(f"N,{n.id},{n.coords[0]!r},{n.coords[1]!r}")
    for e in network.edges.values():
        rec = f"E,{e.id},{e.from_node},{e.to_node},{e.level}"
        if e.region_right is not None or e.region_left is not None:
            rec += f",{_fmt_opt(e.region_right)},{_fmt_opt(e.region_left)}"
        lines.append(rec)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_regions(regions: RegionAssignment, path: str | Path) -> None:
    lines = [f"REGIONS,{regions.region_count}"]
    lines += [f"R,{n},{g}" for n, g in sorted(regions.node_region.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
