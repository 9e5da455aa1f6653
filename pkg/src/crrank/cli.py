"""Command-line entry point: ``crrank {rank,baseline,stats,synth,export}``."""

from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import json
import os
import random
import shutil
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

from . import analytics
from .baseline import baseline_scores, crossroad_flow
from .config import RunConfig, resolve_config
from .graph import GraphError, build_graph, dump_graph, prepare
from .network import RegionAssignment, RoadNetwork, load_network, load_regions
from .network import write_network, write_regions
from .propagation import PropagationConfig, rank, run_crrank
from .synthgen import DemandSpec, GridSpec, ODDemand, figure1_scenario, generate_trips
from .synthgen import make_grid_network
from .trips import Transition, group_transitions, ingest_trips, write_rejects, write_trips

SCORE_COLUMNS = [
    "entity_kind", "entity_id", "initial_score", "final_score",
    "initial_rank", "final_rank", "rank_delta",
]


class CliError(Exception):
    pass


# -- helpers ------------------------------------------------------------------


@contextlib.contextmanager
def staged_outputs(out_dir: str | Path):
    """Write into a scratch directory; move files into ``out_dir`` only on success."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".partial-", dir=out))
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    for f in sorted(tmp.iterdir()):
        os.replace(f, out / f.name)
    tmp.rmdir()


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _require(cfg: RunConfig, *names: str) -> None:
    for name in names:
        value = getattr(cfg, name)
        if not value:
            raise CliError(f"--{name.replace('_', '-')} is required")
        if name in ("network", "regions", "trips") and not Path(value).is_file():
            raise CliError(f"input file not found: {value}")


def _write_json(doc, path: Path) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


@dataclass
class Loaded:
    network: RoadNetwork
    regions: RegionAssignment
    transitions: list[Transition]
    rejects: list[tuple[int, str]]
    accepted: int
    filtered: int

    @property
    def retained_trips(self) -> int:
        return sum(t.trip_count for t in self.transitions)


def load_inputs(cfg: RunConfig) -> Loaded:
    _require(cfg, "network", "regions", "trips")
    network = load_network(cfg.network)
    regions = load_regions(cfg.regions)
    ingest = ingest_trips(cfg.trips, network, regions, cfg.time_windows)
    transitions = group_transitions(ingest.trips, cfg.min_trips)
    return Loaded(network, regions, transitions, ingest.rejects, ingest.accepted, ingest.filtered)


def _manifest(command: str, cfg: RunConfig, data: Loaded, extra: dict) -> dict:
    doc = {
        "command": command,
        "config": cfg.as_dict(),
        "inputs": {
            k: {"path": getattr(cfg, k), "sha256": _sha256(getattr(cfg, k))}
            for k in ("network", "regions", "trips")
        },
        "trips": {
            "accepted": data.accepted,
            "rejected": len(data.rejects),
            "filtered_by_time": data.filtered,
            "in_retained_transitions": data.retained_trips,
        },
        "transitions": {
            "retained": len(data.transitions),
            "intra_region": sum(t.intra_region for t in data.transitions),
        },
    }
    doc.update(extra)
    return doc


def _score_rows(kind, ids, initial, final):
    r0 = {e.id: e.rank for e in rank(initial, ids)}
    entries = rank(final, ids)
    score0 = dict(zip(ids, initial))
    for e in entries:
        yield [kind, e.id, _fmt(score0[e.id]), _fmt(e.score), r0[e.id], e.rank, r0[e.id] - e.rank]


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


# -- commands -----------------------------------------------------------------


def cmd_rank(cfg: RunConfig, dump: bool = False) -> None:
    data = load_inputs(cfg)
    graph = build_graph(data.transitions)
    prof, mats = prepare(graph, data.network, cfg.lam)
    pcfg = PropagationConfig(cfg.alpha, cfg.tol, cfg.max_iter, cfg.lam, cfg.normalize_per_phase)
    state = run_crrank(mats, prof, pcfg)

    with staged_outputs(cfg.out_dir) as out:
        ids_v = [int(c) for c in graph.crossroads]
        rows = list(_score_rows("crossroad", ids_v, prof.C0, state.C))
        # crossroads no trip visits get no score and rank after every scored one
        unvisited = sorted(set(data.network.nodes) - set(ids_v))
        for r, n in enumerate(unvisited, graph.N + 1):
            rows.append(["crossroad", n, "", "", r, r, 0])
        _write_csv(out / "scores_crossroad.csv", SCORE_COLUMNS, rows)
        _write_csv(out / "scores_path.csv", SCORE_COLUMNS,
                   _score_rows("path", list(range(graph.K)), prof.H0, state.H))
        _write_csv(out / "scores_transition.csv", SCORE_COLUMNS,
                   _score_rows("transition", list(range(graph.M)), prof.L0, state.L))

        reports = analytics.transition_report(prof, state)
        analytics.write_report(reports["transition"], out / "report_transition.csv")
        analytics.write_report(reports["path"], out / "report_path.csv")

        _write_csv(
            out / "transitions.csv",
            ["transition_id", "origin", "destination", "trip_count", "path_count", "intra_region"],
            [[m, t.origin, t.destination, t.trip_count, len(t.paths), int(t.intra_region)]
             for m, t in enumerate(graph.transitions)],
        )
        _write_csv(
            out / "paths.csv",
            ["path_id", "transition_id", "trip_count", "length", "crossroads"],
            [[k, p.transition, p.trip_count, len(p.crossroads), ":".join(map(str, p.crossroads))]
             for k, p in enumerate(graph.paths)],
        )
        write_rejects(data.rejects, out / "rejects.csv")
        if dump:
            dump_graph(graph, prof, out / "graph.json")
        _write_json(
            _manifest("rank", cfg, data, {
                "graph": {"M": graph.M, "K": graph.K, "N": graph.N},
                "propagation": {
                    "iterations": state.iteration,
                    "last_delta": state.last_delta,
                    "converged": state.converged(cfg.tol),
                },
            }),
            out / "manifest_rank.json",
        )
    if not state.converged(cfg.tol):
        print(f"warning: not converged after {state.iteration} iterations "
              f"(last_delta={state.last_delta:.3e})", file=sys.stderr)


def cmd_baseline(cfg: RunConfig) -> None:
    data = load_inputs(cfg)
    if not data.transitions:
        raise GraphError("empty graph")
    flows = crossroad_flow(data.transitions)
    scores = baseline_scores(flows, data.network, cfg.lam)
    ids = list(scores)
    total = sum(flows.values())
    share = [flows[n] / total for n in ids]
    with staged_outputs(cfg.out_dir) as out:
        rows = [r + ["baseline"] for r in
                _score_rows("crossroad", ids, share, [scores[n] for n in ids])]
        _write_csv(out / "baseline_crossroad.csv", SCORE_COLUMNS + ["method"], rows)
        write_rejects(data.rejects, out / "rejects.csv")
        _write_json(_manifest("baseline", cfg, data, {"crossroads_scored": len(ids)}),
                    out / "manifest_baseline.json")


def cmd_stats(cfg: RunConfig) -> None:
    data = load_inputs(cfg)
    if not data.transitions:
        raise GraphError("empty graph")
    visits = analytics.visit_rank_histogram(crossroad_flow(data.transitions))
    lengths = analytics.path_length_histogram(data.transitions)
    fits = {}
    with staged_outputs(cfg.out_dir) as out:
        analytics.write_histogram(visits, out / "hist_visit_rank.csv")
        analytics.write_histogram(lengths, out / "hist_path_length.csv")
        for name, fitter, hist in (("exponential", analytics.fit_exponential, visits),
                                   ("gaussian", analytics.fit_gaussian, lengths)):
            try:
                fit, warning = fitter(hist), None
            except analytics.FitError as exc:
                fit, warning = None, f"{name} fit: {exc}"
                print(f"warning: {warning}", file=sys.stderr)
            analytics.write_fit(fit, out / f"fit_{name}.json", warning)
            fits[name] = "ok" if fit else warning
        _write_json(_manifest("stats", cfg, data, {"fits": fits}), out / "manifest_stats.json")


def cmd_synth(cfg: RunConfig, args: argparse.Namespace) -> None:
    labels = None
    if args.figure1:
        fig = figure1_scenario()
        network, regions, trips = fig.network, fig.regions, fig.trips
        labels = {"g": fig.g, "j": fig.j, "G": fig.G, "H": fig.H}
    else:
        spec = GridSpec(args.rows, args.cols, args.boundary_level, args.interior_level)
        network, regions = make_grid_network(spec)
        rng = random.Random(cfg.seed)
        cells = range(spec.region_count)
        pairs = sorted({(rng.choice(cells), rng.choice(cells)) for _ in range(args.pairs)})
        demand = DemandSpec(
            tuple(ODDemand(o, d, args.trips_per_pair, args.route) for o, d in pairs), cfg.seed
        )
        trips = generate_trips(network, regions, demand)
    with staged_outputs(cfg.out_dir) as out:
        write_network(network, out / "network.txt")
        write_regions(regions, out / "regions.txt")
        write_trips([t for t, _ in trips], network, out / "trips.txt", form=args.trip_form)
        if labels:
            _write_json(labels, out / "figure1.json")


def _tier(r: int, tiers) -> str:
    for t in tiers:
        if r <= t:
            return f"top{t}"
    return "rest"


def cmd_export(cfg: RunConfig) -> None:
    src = Path(cfg.out_dir) / "scores_crossroad.csv"
    if not src.is_file():
        raise CliError(f"no rank output at {src}; run `crrank rank` first")
    with open(src, newline="", encoding="utf-8") as fh:
        scored = [r for r in csv.DictReader(fh) if r["final_score"] != ""]
    items = [(int(r["entity_id"]), float(r["final_score"]), int(r["final_rank"])) for r in scored]
    items.sort(key=lambda t: t[2])
    fmt = cfg.format
    if fmt == "geojson":
        _require(cfg, "network")
        network = load_network(cfg.network)
        if not network.has_coords:
            raise CliError("geojson export needs coordinates on every crossroad")
    with staged_outputs(cfg.out_dir) as out:
        if fmt == "csv":
            _write_csv(out / "export_crossroad.csv", ["id", "score", "rank", "tier"],
                       [[i, repr(s), r, _tier(r, cfg.tiers)] for i, s, r in items])
        elif fmt == "json":
            _write_json([{"id": i, "score": s, "rank": r, "tier": _tier(r, cfg.tiers)}
                         for i, s, r in items], out / "export_crossroad.json")
        elif fmt == "geojson":
            features = []
            for i, s, r in items:
                x, y = network.nodes[i].coords
                features.append({
                    "type": "Feature",
                    "geometry": {"type": "Point", "coordinates": [x, y]},
                    "properties": {"id": i, "score": s, "rank": r, "tier": _tier(r, cfg.tiers)},
                })
            _write_json({"type": "FeatureCollection", "features": features},
                        out / "export_crossroad.geojson")
        else:
            raise CliError(f"unknown export format {fmt!r}")


# -- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--network")
    common.add_argument("--regions")
    common.add_argument("--trips")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--alpha", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--min-trips", dest="min_trips", type=int)
    common.add_argument("--time-window", dest="time_window",
                        help="HH:MM-HH:MM[,HH:MM-HH:MM], applied to each trip's first reading")
    common.add_argument("--normalize-per-phase", dest="normalize_per_phase",
                        action="store_const", const=True)
    common.add_argument("--seed", type=int)
    common.add_argument("--format", choices=["csv", "json", "geojson"])
    common.add_argument("--tiers", help="comma-separated rank cut-offs, default 5,25,100")

    p = argparse.ArgumentParser(prog="crrank", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("rank", parents=[common], help="run score propagation")
    r.add_argument("--dump-graph", action="store_true", help="also write graph.json")
    sub.add_parser("baseline", parents=[common], help="flow x topology ranking")
    sub.add_parser("stats", parents=[common], help="histograms and fits")
    s = sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    s.add_argument("--figure1", action="store_true", help="hub-vs-local fixture")
    s.add_argument("--rows", type=int, default=4)
    s.add_argument("--cols", type=int, default=4)
    s.add_argument("--boundary-level", type=int, default=1)
    s.add_argument("--interior-level", type=int, default=2)
    s.add_argument("--pairs", type=int, default=10, help="random OD pairs to draw")
    s.add_argument("--trips-per-pair", type=int, default=3)
    s.add_argument("--route", choices=["shortest", "random"], default="shortest")
    s.add_argument("--trip-form", choices=["readings", "paths"], default="readings")
    sub.add_parser("export", parents=[common], help="export crossroad ranking")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(vars(args))
        if args.command == "rank":
            cmd_rank(cfg, dump=args.dump_graph)
        elif args.command == "baseline":
            cmd_baseline(cfg)
        elif args.command == "stats":
            cmd_stats(cfg)
        elif args.command == "synth":
            cmd_synth(cfg, args)
        elif args.command == "export":
            cmd_export(cfg)
    except (CliError, ValueError, OSError) as exc:
        print(f"crrank {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
