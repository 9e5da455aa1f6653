"""Tripartite transition/path/crossroad graph with profile vectors and weights.

Index order is fixed: transitions by (origin, destination), paths by
(transition index, crossroad sequence), crossroads by ascending id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .network import DEFAULT_LAMBDA, RoadNetwork, node_topology_score
from .trips import PathRecord, Transition


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class TripartiteGraph:
    transitions: tuple[Transition, ...]
    paths: tuple[PathRecord, ...]
    crossroads: np.ndarray  # int64 ids, ascending
    W: sp.csr_matrix  # M x K trip counts
    U: sp.csr_matrix  # K x N binary incidence

    @property
    def M(self) -> int:
        return len(self.transitions)

    @property
    def K(self) -> int:
        return len(self.paths)

    @property
    def N(self) -> int:
        return len(self.crossroads)

    @property
    def tau(self) -> np.ndarray:
        return np.array([t.trip_count for t in self.transitions], dtype=float)

    @property
    def eta(self) -> np.ndarray:
        return np.array([p.trip_count for p in self.paths], dtype=float)

    def crossroad_index(self) -> dict[int, int]:
        return {int(c): i for i, c in enumerate(self.crossroads)}


@dataclass(frozen=True)
class ProfileVectors:
    L0: np.ndarray
    H0: np.ndarray
    C0: np.ndarray


@dataclass(frozen=True)
class WeightMatrices:
    X_TP: sp.csr_matrix  # K x M
    X_PT: sp.csr_matrix  # M x K
    Y_PV: sp.csr_matrix  # N x K
    Y_VP: sp.csr_matrix  # K x N


def build_graph(transitions: Sequence[Transition]) -> TripartiteGraph:
    if not transitions:
        raise GraphError("empty graph")
    ordered = sorted(transitions, key=lambda t: t.od)
    if len({t.od for t in ordered}) != len(ordered):
        raise GraphError("duplicate OD pair among transitions")

    trans: list[Transition] = []
    paths: list[PathRecord] = []
    for m, t in enumerate(ordered):
        if not t.paths:
            raise GraphError(f"transition {t.od} has no paths")
        recs = []
        for p in sorted(t.paths, key=lambda p: p.crossroads):
            if p.trip_count < 1:
                raise GraphError(f"path {p.crossroads} of transition {t.od} has no trips")
            if len(p.crossroads) < 2:
                raise GraphError(f"path {p.crossroads} shorter than 2 crossroads")
            recs.append(PathRecord(m, tuple(p.crossroads), p.trip_count))
        if len({r.crossroads for r in recs}) != len(recs):
            raise GraphError(f"transition {t.od} repeats a path")
        trans.append(Transition(t.origin, t.destination, tuple(recs)))
        paths.extend(recs)

    crossroads = np.array(sorted({n for p in paths for n in p.crossroads}), dtype=np.int64)
    col = {int(c): i for i, c in enumerate(crossroads)}

    w_rows = [p.transition for p in paths]
    w_cols = list(range(len(paths)))
    w_vals = [float(p.trip_count) for p in paths]
    W = sp.csr_matrix((w_vals, (w_rows, w_cols)), shape=(len(trans), len(paths)))

    u_rows, u_cols = [], []
    for k, p in enumerate(paths):
        for n in sorted({col[c] for c in p.crossroads}):
            u_rows.append(k)
            u_cols.append(n)
    U = sp.csr_matrix(
        (np.ones(len(u_rows)), (u_rows, u_cols)), shape=(len(paths), len(crossroads))
    )
    W.sort_indices()
    U.sort_indices()
    return TripartiteGraph(tuple(trans), tuple(paths), crossroads, W, U)


def profile_L0(graph: TripartiteGraph) -> np.ndarray:
    tau = graph.tau
    return tau / tau.sum()


def profile_H0(graph: TripartiteGraph) -> np.ndarray:
    eta = graph.eta
    return eta / eta.sum()


def profile_C0(
    graph: TripartiteGraph, network: RoadNetwork, lam: float = DEFAULT_LAMBDA
) -> np.ndarray:
    """Topology prior: each crossroad's summed level scores, normalized over V."""
    score = np.array([node_topology_score(int(n), network, lam) for n in graph.crossroads])
    return score / score.sum()


def weight_X_TP(graph: TripartiteGraph) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Column-normalized transition->path weights and their transpose.

    Column m of X_TP holds transition m's path trip counts divided by its
    total, so every column sums to one.
    """
    tau = graph.tau
    if np.any(tau <= 0):
        raise GraphError("transition with zero trips")
    W = sp.coo_matrix(graph.W)
    X_PT = sp.csr_matrix((W.data / tau[W.row], (W.row, W.col)), shape=W.shape)  # rows sum to 1
    X_PT.sort_indices()
    X_TP = sp.csr_matrix(X_PT.T)
    X_TP.sort_indices()
    return X_TP, X_PT


def weight_Y(
    graph: TripartiteGraph, C0: np.ndarray, H0: np.ndarray
) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Path/crossroad weights (Y_PV is N x K, Y_VP is K x N).

    Y_PV carries the crossroad prior unnormalized; Y_VP splits each
    crossroad's score among its paths in proportion to path popularity.
    """
    UT = sp.csr_matrix(graph.U.T)  # N x K
    UTc = sp.coo_matrix(UT)
    Y_PV = sp.csr_matrix((C0[UTc.row], (UTc.row, UTc.col)), shape=UT.shape)
    Y_PV.sort_indices()

    denom = np.asarray(UT @ H0).ravel()
    assert np.all(denom > 0), "crossroad with no incident path"
    U = sp.coo_matrix(graph.U)
    Y_VP = sp.csr_matrix((H0[U.row] / denom[U.col], (U.row, U.col)), shape=U.shape)
    Y_VP.sort_indices()
    return Y_PV, Y_VP


def prepare(
    graph: TripartiteGraph, network: RoadNetwork, lam: float = DEFAULT_LAMBDA
) -> tuple[ProfileVectors, WeightMatrices]:
    """Profile vectors and all four weight matrices for one graph."""
    prof = ProfileVectors(profile_L0(graph), profile_H0(graph), profile_C0(graph, network, lam))
    X_TP, X_PT = weight_X_TP(graph)
    Y_PV, Y_VP = weight_Y(graph, prof.C0, prof.H0)
    return prof, WeightMatrices(X_TP, X_PT, Y_PV, Y_VP)


def _triplets(mat: sp.spmatrix) -> list[list]:
    coo = sp.coo_matrix(mat)
    order = np.lexsort((coo.col, coo.row))
    return [[int(coo.row[i]), int(coo.col[i]), float(coo.data[i])] for i in order]


def dump_graph(graph: TripartiteGraph, profiles: ProfileVectors, path: str | Path) -> None:
    doc = {
        "M": graph.M,
        "K": graph.K,
        "N": graph.N,
        "crossroads": [int(c) for c in graph.crossroads],
        "transitions": [[t.origin, t.destination] for t in graph.transitions],
        "paths": [[p.transition, list(p.crossroads)] for p in graph.paths],
        "W": _triplets(graph.W),
        "U": [[r, c] for r, c, _ in _triplets(graph.U)],
        "L0": profiles.L0.tolist(),
        "H0": profiles.H0.tolist(),
        "C0": profiles.C0.tolist(),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
