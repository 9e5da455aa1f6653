import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crrank.graph import (
    GraphError,
    build_graph,
    dump_graph,
    prepare,
    profile_C0,
    profile_H0,
    profile_L0,
    weight_X_TP,
    weight_Y,
)
from crrank.network import RoadNetwork, RoadSegment
from crrank.synthgen import random_instance
from crrank.trips import PathRecord, Transition, scale_transitions
from helpers import transitions_from, two_way_network
from oracle import dense_setup, from_transitions, levels_from_network


def test_single_path_graph():
    g = build_graph(transitions_from([(0, 1, [((5, 6, 7), 3)])]))
    assert (g.M, g.K, g.N) == (1, 1, 3)
    assert g.W.toarray().tolist() == [[3.0]]
    assert g.U.toarray().tolist() == [[1.0, 1.0, 1.0]]


def test_two_paths_row():
    g = build_graph(transitions_from([(0, 1, [((1, 2), 3), ((1, 3, 2), 1)])]))
    assert g.W.toarray().tolist() == [[3.0, 1.0]]


def test_shared_crossroad_counted_once():
    g = build_graph(transitions_from([(0, 1, [((1, 2), 3)]), (1, 0, [((3, 2), 3)])]))
    assert g.crossroads.tolist() == [1, 2, 3]
    assert g.U.toarray()[:, 1].tolist() == [1.0, 1.0]


def test_revisited_crossroad_is_binary():
    g = build_graph(transitions_from([(0, 1, [((1, 2, 3, 2), 1)])]))
    assert g.U.toarray().tolist() == [[1.0, 1.0, 1.0]]


def test_empty_graph():
    with pytest.raises(GraphError, match="empty graph"):
        build_graph([])


def test_deterministic_order():
    spec = [(3, 1, [((4, 5), 2)]), (0, 2, [((9, 8), 1), ((1, 2), 5)])]
    g = build_graph(list(reversed(transitions_from(spec))))
    assert [t.od for t in g.transitions] == [(0, 2), (3, 1)]
    assert [p.crossroads for p in g.paths] == [(1, 2), (9, 8), (4, 5)]
    assert [p.transition for p in g.paths] == [0, 0, 1]


@pytest.mark.parametrize(
    "taus, expected", [((1, 1), [0.5, 0.5]), ((3, 1), [0.75, 0.25]), ((4,), [1.0])]
)
def test_L0(taus, expected):
    spec = [(m, 0, [((1, 2), t)]) for m, t in enumerate(taus)]
    assert profile_L0(build_graph(transitions_from(spec))).tolist() == expected


@pytest.mark.parametrize(
    "etas, expected",
    [((2, 2), [0.5, 0.5]), ((3, 1, 4), [0.375, 0.125, 0.5]), ((7,), [1.0])],
)
def test_H0(etas, expected):
    paths = [((1, 2 + i), e) for i, e in enumerate(etas)]
    assert profile_H0(build_graph(transitions_from([(0, 1, paths)]))).tolist() == expected


def test_C0_symmetric():
    net = two_way_network([(1, 2, 2), (2, 3, 1), (3, 4, 2)])
    g = build_graph(transitions_from([(0, 1, [((2, 3), 1)])]))
    assert profile_C0(g, net, 0.2).tolist() == [0.5, 0.5]


def test_C0_from_level_table():
    # a: incident levels {1, 2} -> 2.2; b: {3, 3} -> 1.6
    net = RoadNetwork.build(
        [(0, None), (1, None), (2, None), (3, None)],
        [RoadSegment(0, 0, 2, 1), RoadSegment(1, 3, 0, 2),
         RoadSegment(2, 1, 2, 3), RoadSegment(3, 1, 3, 3)],
    )
    g = build_graph(transitions_from([(0, 1, [((0, 1), 1)])]))
    c0 = profile_C0(g, net, 0.2)
    assert c0 == pytest.approx([2.2 / 3.8, 1.6 / 3.8], abs=1e-15)
    assert c0[0] == pytest.approx(0.5789, abs=1e-4)


def test_C0_lambda_zero_is_degree_share():
    net = two_way_network([(1, 2, 1), (2, 3, 3), (2, 4, 2)])
    g = build_graph(transitions_from([(0, 1, [((1, 2, 3), 1)])]))
    # directed degrees: 1 -> 2, 2 -> 6, 3 -> 2
    assert profile_C0(g, net, 0.0) == pytest.approx([0.2, 0.6, 0.2], abs=1e-15)


def test_X_TP_examples():
    g = build_graph(transitions_from([(0, 1, [((1, 2), 3), ((1, 3), 1)])]))
    X_TP, X_PT = weight_X_TP(g)
    assert X_TP.toarray()[:, 0].tolist() == [0.75, 0.25]

    g = build_graph(transitions_from([(0, 1, [((1, 2), 2), ((1, 3), 2)]), (1, 0, [((2, 1), 4)])]))
    X_TP, X_PT = weight_X_TP(g)
    assert X_TP.toarray().T.tolist() == [[0.5, 0.5, 0.0], [0.0, 0.0, 1.0]]
    assert (X_PT.toarray() == X_TP.toarray().T).all()


def test_Y_examples():
    g = build_graph(transitions_from([(0, 1, [((1, 2), 1)])]))
    Y_PV, Y_VP = weight_Y(g, np.array([0.5, 0.5]), np.array([1.0]))
    assert Y_PV.toarray()[:, 0].tolist() == [0.5, 0.5]
    assert Y_VP.toarray().tolist() == [[1.0, 1.0]]

    g = build_graph(transitions_from([(0, 1, [((1, 2), 3), ((1, 3), 1)])]))
    H0 = profile_H0(g)
    Y_PV, Y_VP = weight_Y(g, np.array([0.4, 0.3, 0.3]), H0)
    assert Y_VP.toarray()[:, 0].tolist() == [0.75, 0.25]  # crossroad 1 on both paths
    assert Y_VP.toarray()[:, 1].tolist() == [1.0, 0.0]


def _prepared(seed, **caps):
    inst = random_instance(seed, **caps)
    g = build_graph(inst.transitions)
    prof, mats = prepare(g, inst.network, 0.2)
    return inst, g, prof, mats


@given(st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_weight_invariants(seed):
    _, g, prof, mats = _prepared(seed, max_transitions=60, max_paths=60, max_crossroads=60)
    for v in (prof.L0, prof.H0, prof.C0):
        assert np.all(v >= 0) and abs(v.sum() - 1) < 1e-12
    assert np.allclose(np.asarray(mats.X_TP.sum(axis=0)).ravel(), 1, atol=1e-12, rtol=0)
    assert np.allclose(np.asarray(mats.Y_VP.sum(axis=0)).ravel(), 1, atol=1e-12, rtol=0)
    assert (mats.X_PT != mats.X_TP.T).nnz == 0
    expect = g.U.T.toarray() * prof.C0[:, None]
    assert (mats.Y_PV.toarray() == expect).all()
    assert np.allclose(np.asarray(g.W.sum(axis=1)).ravel(), g.tau)


@given(st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_matrices_match_dense_oracle(seed):
    inst, g, prof, mats = _prepared(seed, max_transitions=15, max_paths=20, max_crossroads=20)
    d = dense_setup(from_transitions(inst.transitions), levels_from_network(inst.network), 0.2)
    assert d["nodes"] == g.crossroads.tolist()
    for name in ("X_TP", "X_PT", "Y_PV", "Y_VP"):
        np.testing.assert_allclose(getattr(mats, name).toarray(), d[name], atol=1e-15, rtol=0)
    for name in ("L0", "H0", "C0"):
        np.testing.assert_allclose(getattr(prof, name), d[name], atol=1e-15, rtol=0)


def test_Y_PV_columns_not_normalized(toy_prepared):
    _, _, mats = toy_prepared
    sums = np.asarray(mats.Y_PV.sum(axis=0)).ravel()
    assert not np.allclose(sums, 1.0)


@given(st.integers(0, 10**6), st.integers(2, 9))
@settings(max_examples=25, deadline=None)
def test_scale_invariance_bitwise(seed, factor):
    inst, g, prof, mats = _prepared(seed, max_transitions=40, max_paths=40, max_crossroads=40)
    g2 = build_graph(scale_transitions(inst.transitions, factor))
    prof2, mats2 = prepare(g2, inst.network, 0.2)
    assert (g2.W.toarray() == factor * g.W.toarray()).all()
    assert np.array_equal(prof.L0, prof2.L0) and np.array_equal(prof.H0, prof2.H0)
    assert (mats.X_TP != mats2.X_TP).nnz == 0
    assert (mats.Y_VP != mats2.Y_VP).nnz == 0


def test_relabeling_permutes_vectors():
    inst = random_instance(11, max_transitions=20, max_paths=30, max_crossroads=25)
    rng = random.Random(3)
    ids = sorted(inst.network.nodes)
    perm = dict(zip(ids, rng.sample([i + 100 for i in ids], len(ids))))
    net2 = RoadNetwork.build(
        [(perm[n], c.coords) for n, c in inst.network.nodes.items()],
        [RoadSegment(e.id, perm[e.from_node], perm[e.to_node], e.level)
         for e in inst.network.edges.values()],
    )
    trans2 = [
        Transition(t.origin, t.destination,
                   tuple(PathRecord(p.transition, tuple(perm[n] for n in p.crossroads), p.trip_count)
                         for p in t.paths))
        for t in inst.transitions
    ]
    g1, g2 = build_graph(inst.transitions), build_graph(trans2)
    p1, _ = prepare(g1, inst.network)
    p2, _ = prepare(g2, net2)
    c1 = dict(zip(g1.crossroads.tolist(), p1.C0))
    c2 = dict(zip(g2.crossroads.tolist(), p2.C0))
    for n, v in c1.items():
        assert c2[perm[n]] == pytest.approx(v, abs=1e-15)
    np.testing.assert_array_equal(p1.L0, p2.L0)


def test_dump_graph(tmp_path, toy_prepared):
    g, prof, _ = toy_prepared
    dump_graph(g, prof, tmp_path / "g.json")
    doc = json.loads((tmp_path / "g.json").read_text())
    assert (doc["M"], doc["K"], doc["N"]) == (3, 4, 6)
    assert sum(v for _, _, v in doc["W"]) == 10
    assert len(doc["U"]) == g.U.nnz
    assert doc["C0"] == prof.C0.tolist()
