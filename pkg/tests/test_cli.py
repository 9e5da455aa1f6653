import csv
import json

import pytest

from crrank.cli import main
from crrank.config import CONFIG_ENV
from crrank.network import RoadNetwork, RoadSegment, write_network


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def fig1(tmp_path):
    data = tmp_path / "data"
    assert run("synth", "--figure1", "--out-dir", data) == 0
    return data


def inputs(data):
    return ["--network", data / "network.txt", "--regions", data / "regions.txt",
            "--trips", data / "trips.txt"]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_rank_figure1(fig1, tmp_path):
    out = tmp_path / "out"
    assert run("rank", *inputs(fig1), "--out-dir", out, "--alpha", 0.85, "--dump-graph") == 0
    manifest = json.loads((out / "manifest_rank.json").read_text())
    assert manifest["propagation"]["converged"]
    assert manifest["propagation"]["iterations"] <= 200
    assert manifest["propagation"]["last_delta"] < 1e-9
    assert manifest["trips"]["rejected"] == 0
    assert manifest["inputs"]["trips"]["sha256"]
    labels = json.loads((fig1 / "figure1.json").read_text())
    rows = {int(r["entity_id"]): r for r in read_csv(out / "scores_crossroad.csv")}
    assert float(rows[labels["g"]]["final_score"]) > float(rows[labels["j"]]["final_score"])
    # unvisited crossroads are listed last without scores
    assert len(rows) == 25
    assert [r for r in rows.values() if r["final_score"] == ""]
    for name in ("scores_path.csv", "scores_transition.csv", "report_transition.csv",
                 "report_path.csv", "transitions.csv", "paths.csv", "rejects.csv", "graph.json"):
        assert (out / name).is_file()
    assert not list(out.glob(".partial-*"))


def test_rank_rerun_identical(fig1, tmp_path):
    out = tmp_path / "out"
    run("rank", *inputs(fig1), "--out-dir", out)
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    run("rank", *inputs(fig1), "--out-dir", out)
    assert {p.name: p.read_bytes() for p in out.iterdir()} == first


def test_missing_trips_file(fig1, tmp_path, capsys):
    code = run("rank", "--network", fig1 / "network.txt", "--regions", fig1 / "regions.txt",
               "--trips", tmp_path / "nope.txt", "--out-dir", tmp_path / "out")
    assert code != 0
    assert "nope.txt" in capsys.readouterr().err


def test_empty_graph_leaves_no_outputs(fig1, tmp_path, capsys):
    out = tmp_path / "out"
    assert run("rank", *inputs(fig1), "--out-dir", out, "--min-trips", 100) != 0
    assert "empty graph" in capsys.readouterr().err
    assert not out.exists() or not any(out.iterdir())


def test_non_convergence_warns(fig1, tmp_path, capsys):
    out = tmp_path / "out"
    assert run("rank", *inputs(fig1), "--out-dir", out, "--max-iter", 2) == 0
    assert "not converged" in capsys.readouterr().err
    assert not json.loads((out / "manifest_rank.json").read_text())["propagation"]["converged"]


def test_baseline_tie(fig1, tmp_path):
    out = tmp_path / "out"
    assert run("baseline", *inputs(fig1), "--out-dir", out) == 0
    labels = json.loads((fig1 / "figure1.json").read_text())
    rows = {int(r["entity_id"]): r for r in read_csv(out / "baseline_crossroad.csv")}
    assert rows[labels["g"]]["final_score"] == rows[labels["j"]]["final_score"]
    assert rows[labels["g"]]["method"] == "baseline"


def test_stats(fig1, tmp_path):
    out = tmp_path / "out"
    assert run("stats", *inputs(fig1), "--out-dir", out) == 0
    lengths = read_csv(out / "hist_path_length.csv")
    manifest = json.loads((out / "manifest_stats.json").read_text())
    assert sum(int(r["count"]) for r in lengths) == manifest["trips"]["in_retained_transitions"]
    assert json.loads((out / "fit_exponential.json").read_text())["model"] == "exponential"


def test_stats_degenerate_gaussian(tmp_path, capsys):
    data = tmp_path / "data"
    # one OD pair on the shortest route: every path has the same length
    run("synth", "--rows", 3, "--cols", 3, "--pairs", 1, "--trips-per-pair", 4, "--out-dir", data)
    out = tmp_path / "out"
    assert run("stats", *inputs(data), "--out-dir", out) == 0
    assert "gaussian fit" in capsys.readouterr().err
    assert "warning" in json.loads((out / "fit_gaussian.json").read_text())


def test_synth_grid(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("synth", "--rows", 2, "--cols", 2, "--pairs", 1, "--seed", 3, "--out-dir", a) == 0
    lines = (a / "network.txt").read_text().splitlines()
    assert sum(line.startswith("N,") for line in lines) == 4
    assert sum(line.startswith("E,") for line in lines) == 8
    run("synth", "--rows", 2, "--cols", 2, "--pairs", 1, "--seed", 3, "--out-dir", b)
    for name in ("network.txt", "regions.txt", "trips.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_synth_path_form_ranks_the_same(tmp_path):
    for form in ("readings", "paths"):
        run("synth", "--rows", 4, "--cols", 4, "--pairs", 6, "--trip-form", form,
            "--out-dir", tmp_path / form)
        run("rank", *inputs(tmp_path / form), "--out-dir", tmp_path / form / "out")
    a = (tmp_path / "readings" / "out" / "scores_crossroad.csv").read_bytes()
    b = (tmp_path / "paths" / "out" / "scores_crossroad.csv").read_bytes()
    assert a == b


def test_export(fig1, tmp_path):
    out = tmp_path / "out"
    run("rank", *inputs(fig1), "--out-dir", out)
    assert run("export", "--out-dir", out, "--tiers", "2,5") == 0
    assert run("export", "--out-dir", out, "--format", "json", "--tiers", "2,5") == 0
    rows = read_csv(out / "export_crossroad.csv")
    doc = json.loads((out / "export_crossroad.json").read_text())
    assert [(int(r["id"]), float(r["score"]), int(r["rank"]), r["tier"]) for r in rows] == [
        (d["id"], d["score"], d["rank"], d["tier"]) for d in doc
    ]
    assert [r["tier"] for r in rows[:6]] == ["top2", "top2", "top5", "top5", "top5", "rest"]
    assert run("export", "--out-dir", out, "--format", "geojson", "--network",
               fig1 / "network.txt") == 0
    geo = json.loads((out / "export_crossroad.geojson").read_text())
    assert len(geo["features"]) == len(rows)


def test_export_geojson_needs_coords(tmp_path, capsys):
    out = tmp_path / "out"
    out.mkdir()
    (out / "scores_crossroad.csv").write_text(
        "entity_kind,entity_id,initial_score,final_score,initial_rank,final_rank,rank_delta\n"
        "crossroad,1,0.5,0.6,1,1,0\ncrossroad,2,0.5,0.4,2,2,0\n"
    )
    net = RoadNetwork.build([(1, None), (2, None)], [RoadSegment(0, 1, 2, 1)])
    write_network(net, tmp_path / "n.txt")
    assert run("export", "--out-dir", out, "--format", "geojson", "--network",
               tmp_path / "n.txt") != 0
    assert "coordinates" in capsys.readouterr().err


def test_export_without_rank(tmp_path, capsys):
    assert run("export", "--out-dir", tmp_path) != 0
    assert "run `crrank rank` first" in capsys.readouterr().err


def test_config_env_with_flag_override(fig1, tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"alpha=0.5\nmax-iter=3\nout-dir={tmp_path / 'from_file'}\n")
    monkeypatch.setenv(CONFIG_ENV, str(cfg))
    assert run("rank", *inputs(fig1), "--max-iter", 150) == 0
    manifest = json.loads((tmp_path / "from_file" / "manifest_rank.json").read_text())
    assert manifest["config"]["alpha"] == 0.5
    assert manifest["config"]["max_iter"] == 150
    assert manifest["propagation"]["converged"]
