"""Sweep the damping factor on the hub-vs-local fixture and report the g/j margin."""

import argparse

import numpy as np

from crrank.graph import build_graph, prepare
from crrank.propagation import PropagationConfig, run_crrank
from crrank.synthgen import figure1_scenario
from crrank.trips import group_transitions


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=20)
    ap.add_argument("--lam", type=float, default=0.2)
    args = ap.parse_args()

    fig = figure1_scenario()
    graph = build_graph(group_transitions(fig.trips))
    prof, mats = prepare(graph, fig.network, args.lam)
    idx = graph.crossroad_index()
    print("alpha,iterations,C_g,C_j,margin")
    for alpha in np.linspace(0.0, 0.99, args.steps):
        cfg = PropagationConfig(alpha=float(alpha), lam=args.lam, max_iter=2000)
        s = run_crrank(mats, prof, cfg)
        cg, cj = s.C[idx[fig.g]], s.C[idx[fig.j]]
        print(f"{alpha:.4f},{s.iteration},{cg:.6f},{cj:.6f},{cg - cj:.6e}")


if __name__ == "__main__":
    main()
