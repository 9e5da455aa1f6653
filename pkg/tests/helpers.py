from crrank.network import RoadNetwork, RoadSegment
from crrank.trips import PathRecord, Transition


def two_way_network(links, coords=False):
    """Network from (a, b, level) links, each as two directed segments."""
    nodes = sorted({n for a, b, _ in links for n in (a, b)})
    edges = []
    for a, b, level in links:
        edges.append(RoadSegment(len(edges), a, b, level))
        edges.append(RoadSegment(len(edges), b, a, level))
    return RoadNetwork.build([(n, (float(n), 0.0) if coords else None) for n in nodes], edges)


def transitions_from(spec):
    """[(o, d, [(seq, count), ...]), ...] -> Transition list in (o, d) order."""
    out = []
    for idx, (o, d, paths) in enumerate(sorted(spec, key=lambda s: (s[0], s[1]))):
        recs = tuple(PathRecord(idx, tuple(seq), c) for seq, c in sorted(paths))
        out.append(Transition(o, d, recs))
    return out


# 6 crossroads, mixed levels
TOY_LINKS = [(1, 2, 1), (2, 3, 2), (3, 4, 1), (4, 5, 3), (5, 6, 2), (2, 5, 2), (3, 6, 3)]

# 3 transitions, 4 paths, 6 crossroads
TOY_SPEC = [
    (0, 1, [((1, 2, 3), 3), ((1, 2, 5), 1)]),
    (1, 2, [((3, 4, 5), 4)]),
    (2, 0, [((6, 5, 2, 1), 2)]),
]
