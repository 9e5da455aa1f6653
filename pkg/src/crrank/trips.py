"""Map-matched readings to trips, OD regions, and transitions.

Trips file records (either form, may be mixed)::

    T,<trip_id>,<edge_id>,<tm>                              # one reading
    P,<trip_id>,<n1>:<n2>:...,<first_edge_id>,<last_edge_id>  # resolved trip
"""

from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .network import RegionAssignment, RoadNetwork

DEFAULT_MIN_TRIPS = 3


class TripRejected(ValueError):
    def __init__(self, trip_id: int, reason: str):
        super().__init__(f"trip {trip_id}: {reason}")
        self.trip_id = trip_id
        self.reason = reason


@dataclass(frozen=True)
class MappedReading:
    trip_id: int
    edge_id: int
    tm: float


@dataclass(frozen=True)
class Trip:
    id: int
    crossroads: tuple[int, ...]
    first_edge: int
    last_edge: int
    start_tm: float | None = None


@dataclass(frozen=True)
class PathRecord:
    transition: int
    crossroads: tuple[int, ...]
    trip_count: int

    @property
    def key(self) -> tuple[int, tuple[int, ...]]:
        return (self.transition, self.crossroads)


@dataclass(frozen=True)
class Transition:
    origin: int
    destination: int
    paths: tuple[PathRecord, ...]

    @property
    def trip_count(self) -> int:
        return sum(p.trip_count for p in self.paths)

    @property
    def od(self) -> tuple[int, int]:
        return (self.origin, self.destination)

    @property
    def intra_region(self) -> bool:
        return self.origin == self.destination


def readings_to_trip(readings: Sequence[MappedReading], network: RoadNetwork) -> Trip:
    """Chain a time-ordered reading list into a crossroad sequence.

    Consecutive readings on the same edge collapse into one. A jump between
    edges that do not share a node rejects the whole trip.
    """
    if not readings:
        raise ValueError("empty reading list")
    trip_id = readings[0].trip_id
    edges: list[int] = []
    for r in readings:
        if r.trip_id != trip_id:
            raise ValueError(f"mixed trip ids {trip_id} and {r.trip_id}")
        if r.edge_id not in network.edges:
            raise TripRejected(trip_id, f"unknown edge {r.edge_id}")
        if not edges or edges[-1] != r.edge_id:
            edges.append(r.edge_id)

    first = network.edges[edges[0]]
    seq = [first.from_node, first.to_node]
    prev = first
    for eid in edges[1:]:
        e = network.edges[eid]
        if e.from_node != prev.to_node:
            raise TripRejected(
                trip_id, f"discontinuity after edge {prev.from_node}->{prev.to_node}"
            )
        seq.append(e.to_node)
        prev = e
    return Trip(trip_id, tuple(seq), edges[0], edges[-1], readings[0].tm)


def validate_trip(trip: Trip, network: RoadNetwork) -> None:
    """Raise TripRejected unless ``trip`` is a walk on ``network``."""
    seq = trip.crossroads
    if len(seq) < 2:
        raise TripRejected(trip.id, "fewer than 2 crossroads")
    for a, b in zip(seq, seq[1:]):
        if a not in network.nodes or network.edge_between(a, b) is None:
            raise TripRejected(trip.id, f"no segment {a}->{b}")
    for eid in (trip.first_edge, trip.last_edge):
        if eid not in network.edges:
            raise TripRejected(trip.id, f"unknown edge {eid}")
    first, last = network.edges[trip.first_edge], network.edges[trip.last_edge]
    if (first.from_node, first.to_node) != seq[:2]:
        raise TripRejected(trip.id, f"first edge {first.id} does not start the sequence")
    if (last.from_node, last.to_node) != seq[-2:]:
        raise TripRejected(trip.id, f"last edge {last.id} does not end the sequence")


def assign_od(trip: Trip, network: RoadNetwork, regions: RegionAssignment) -> tuple[int, int]:
    """Origin and destination regions of a trip.

    An endpoint with a node-level region uses it. Otherwise the endpoint sits
    on a region boundary and takes the region on the right-hand side of the
    trip's first (origin) or last (destination) directed segment.
    """

    def resolve(node: int, edge_id: int, which: str) -> int:
        region = regions.node_region.get(node)
        if region is None:
            region = network.edges[edge_id].region_right
        if region is None:
            raise TripRejected(trip.id, f"unresolvable OD ({which} at crossroad {node})")
        if not 0 <= region < regions.region_count:
            raise TripRejected(trip.id, f"{which} region {region} out of range")
        return region

    o = resolve(trip.crossroads[0], trip.first_edge, "origin")
    d = resolve(trip.crossroads[-1], trip.last_edge, "destination")
    return o, d


def group_transitions(
    trips: Iterable[tuple[Trip, tuple[int, int]]],
    min_trips: int = DEFAULT_MIN_TRIPS,
) -> list[Transition]:
    """Bucket trips by OD pair and merge identical crossroad sequences.

    Transitions with fewer than ``min_trips`` trips are dropped. Output is
    ordered by (origin, destination); paths within a transition by sequence.
    """
    if min_trips < 1:
        raise ValueError("min_trips must be >= 1")
    buckets: dict[tuple[int, int], Counter] = defaultdict(Counter)
    for trip, od in trips:
        buckets[tuple(od)][tuple(trip.crossroads)] += 1

    out: list[Transition] = []
    for od in sorted(buckets):
        counts = buckets[od]
        if sum(counts.values()) < min_trips:
            continue
        idx = len(out)
        paths = tuple(PathRecord(idx, seq, counts[seq]) for seq in sorted(counts))
        out.append(Transition(od[0], od[1], paths))
    return out


def scale_transitions(transitions: Sequence[Transition], factor: int) -> list[Transition]:
    """Multiply every path's trip count by a positive integer."""
    if factor < 1:
        raise ValueError("factor must be a positive integer")
    return [
        Transition(
            t.origin,
            t.destination,
            tuple(PathRecord(p.transition, p.crossroads, p.trip_count * factor) for p in t.paths),
        )
        for t in transitions
    ]


# -- time-of-day filter -------------------------------------------------------


def parse_time_windows(spec: str) -> list[tuple[int, int]]:
    """``"07:30-10:00,17:00-19:30"`` -> [(27000, 36000), (61200, 70200)] seconds."""

    def hhmm(s: str) -> int:
        h, m = s.strip().split(":")
        h, m = int(h), int(m)
        if not (0 <= h <= 24 and 0 <= m < 60) or h * 60 + m > 24 * 60:
            raise ValueError(f"bad time {s!r}")
        return h * 3600 + m * 60

    windows = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        lo, hi = part.split("-")
        windows.append((hhmm(lo), hhmm(hi)))
    if not windows:
        raise ValueError(f"no time windows in {spec!r}")
    return windows


def in_time_windows(tm: float, windows: Sequence[tuple[int, int]]) -> bool:
    """Inclusive time-of-day test; ``tm`` is read as seconds since a local midnight epoch."""
    tod = tm % 86400
    for lo, hi in windows:
        if lo <= hi and lo <= tod <= hi:
            return True
        if lo > hi and (tod >= lo or tod <= hi):  # wraps past midnight
            return True
    return False


# -- trips file -----------------------------------------------------------------


@dataclass
class IngestResult:
    trips: list[tuple[Trip, tuple[int, int]]]
    rejects: list[tuple[int, str]]
    filtered: int = 0

    @property
    def accepted(self) -> int:
        return len(self.trips)


def read_trips_file(path: str | Path) -> tuple[dict[int, list[MappedReading]], list[Trip]]:
    """Parse a trips file into reading groups and pre-resolved trips."""
    readings: dict[int, list[MappedReading]] = defaultdict(list)
    resolved: list[Trip] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            rec = [f.strip() for f in line.split(",")]
            try:
                if rec[0] == "T" and len(rec) == 4:
                    tid = int(rec[1])
                    readings[tid].append(MappedReading(tid, int(rec[2]), float(rec[3])))
                elif rec[0] == "P" and len(rec) == 5:
                    seq = tuple(int(x) for x in rec[2].split(":"))
                    resolved.append(Trip(int(rec[1]), seq, int(rec[3]), int(rec[4])))
                else:
                    raise ValueError(f"unrecognised record {line!r}")
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return dict(readings), resolved


def ingest_trips(
    path: str | Path,
    network: RoadNetwork,
    regions: RegionAssignment,
    time_windows: Sequence[tuple[int, int]] | None = None,
) -> IngestResult:
    """Load a trips file and resolve every trip to (Trip, OD), collecting rejects."""
    readings, resolved = read_trips_file(path)
    trips: list[Trip] = []
    rejects: list[tuple[int, str]] = []
    filtered = 0
    for tid in sorted(readings):
        group = sorted(readings[tid], key=lambda r: r.tm)  # stable on equal tm
        if time_windows and not in_time_windows(group[0].tm, time_windows):
            filtered += 1
            continue
        try:
            trips.append(readings_to_trip(group, network))
        except TripRejected as exc:
            rejects.append((exc.trip_id, exc.reason))
    for trip in resolved:
        try:
            validate_trip(trip, network)
            trips.append(trip)
        except TripRejected as exc:
            rejects.append((exc.trip_id, exc.reason))

    seen: set[int] = set()
    out: list[tuple[Trip, tuple[int, int]]] = []
    for trip in sorted(trips, key=lambda t: t.id):
        if trip.id in seen:
            rejects.append((trip.id, "duplicate trip id"))
            continue
        seen.add(trip.id)
        try:
            out.append((trip, assign_od(trip, network, regions)))
        except TripRejected as exc:
            rejects.append((exc.trip_id, exc.reason))
    rejects.sort()
    return IngestResult(out, rejects, filtered)


def write_rejects(rejects: Iterable[tuple[int, str]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trip_id", "reason"])
        w.writerows(rejects)


def write_trips(
    trips: Iterable[Trip],
    network: RoadNetwork,
    path: str | Path,
    form: str = "readings",
    start_tm: float = 0.0,
    step: float = 30.0,
) -> None:
    """Serialize trips as reading records (``T``) or resolved paths (``P``)."""
    lines = []
    for trip in trips:
        if form == "paths":
            seq = ":".join(map(str, trip.crossroads))
            lines.append(f"P,{trip.id},{seq},{trip.first_edge},{trip.last_edge}")
        elif form == "readings":
            tm = trip.start_tm if trip.start_tm is not None else start_tm
            for i, (a, b) in enumerate(zip(trip.crossroads, trip.crossroads[1:])):
                if i == 0:
                    eid = trip.first_edge
                elif i == len(trip.crossroads) - 2:
                    eid = trip.last_edge
                else:
                    eid = network.edge_between(a, b).id
                lines.append(f"T,{trip.id},{eid},{float(tm + i * step)!r}")
        else:
            raise ValueError(f"unknown trip file form {form!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
