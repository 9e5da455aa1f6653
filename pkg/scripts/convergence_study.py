"""Iterations to tolerance and per-iteration deltas over seeded random graphs."""

import argparse

import numpy as np

from crrank.graph import build_graph, prepare
from crrank.propagation import PropagationConfig, run_crrank
from crrank.synthgen import random_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--graphs", type=int, default=100)
    ap.add_argument("--size", type=int, default=200, help="cap on M, K and N")
    ap.add_argument("--alphas", default="0.5,0.7,0.85,0.95")
    ap.add_argument("--tol", type=float, default=1e-9)
    args = ap.parse_args()

    print("alpha,median_iterations,max_iterations,non_converged,worst_ratio")
    for alpha in (float(a) for a in args.alphas.split(",")):
        iters, ratios, failed = [], [], 0
        for seed in range(args.graphs):
            inst = random_instance(seed, args.size, args.size, args.size)
            prof, mats = prepare(build_graph(inst.transitions), inst.network)
            s = run_crrank(mats, prof, PropagationConfig(alpha=alpha, tol=args.tol, max_iter=1000))
            iters.append(s.iteration)
            failed += not s.converged(args.tol)
            d = np.array(s.deltas)
            if len(d) > 6:
                # observed contraction rate once the transient has passed
                ratios.append(float(np.max(d[6:] / d[5:-1])))
        worst = max(ratios) if ratios else float("nan")
        print(f"{alpha},{int(np.median(iters))},{max(iters)},{failed},{worst:.3f}")


if __name__ == "__main__":
    main()
