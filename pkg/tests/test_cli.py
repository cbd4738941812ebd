import json

import numpy as np
import pytest

from cli import main
from fit import sample_powerlaw_degrees
from parsers.edge_list import read_edge_list
from parsers.graph_file import read_graph


def _run(*argv):
    return main([str(a) for a in argv])


def _load(path):
    return json.loads(path.read_text())


def test_generate_writes_valid_graph(tmp_path):
    out = tmp_path / "g.json"
    assert _run("generate", "--n", 1000, "--alpha", 8, "--dim", 3, "--seed", 7, "--out", out) == 0
    pts, g = read_graph(out)
    assert pts.n == 1000
    assert g.edge_count > 0


def test_generate_infeasible_exit_code(tmp_path, capsys):
    assert _run("generate", "--n", 3, "--alpha", 8, "--dim", 4, "--out", tmp_path / "g.json") == 3
    assert "smallest feasible n" in capsys.readouterr().err
    assert _run("generate", "--n", 1000, "--alpha", 3, "--dim", 3, "--out", tmp_path / "g.json") == 3


def test_bad_flags_exit_code():
    with pytest.raises(SystemExit) as info:
        _run("generate", "--n", "many", "--alpha", 8, "--dim", 3, "--out", "g.json")
    assert info.value.code == 2


def test_fixed_radius_graph_is_reciprocal(tmp_path):
    graph, report = tmp_path / "g.json", tmp_path / "s.json"
    assert _run("generate", "--n", 500, "--alpha", 8, "--dim", 2, "--fixed-radius", "--out", graph) == 0
    assert _run("stats", "--graph", graph, "--out", report) == 0
    assert _load(report)["reciprocity"] == 1.0


def test_generate_exports_edge_list(tmp_path):
    graph, edges = tmp_path / "g.json", tmp_path / "g.tsv"
    assert _run("generate", "--n", 200, "--alpha", 8, "--dim", 2, "--out", graph, "--edges-out", edges) == 0
    _, g = read_graph(graph)
    lines = edges.read_text().splitlines()
    assert sum(not line.startswith("#") for line in lines) == g.edge_count
    assert read_edge_list(edges).n == g.n


def test_stats_on_star_edge_list(tmp_path):
    edges, report = tmp_path / "star.tsv", tmp_path / "s.json"
    edges.write_text("B\tA\nC\tA\nB\tC\n")
    assert _run("stats", "--edges", edges, "--hubs", 1, "--out", report) == 0
    doc = _load(report)
    assert doc["kind"] == "stats"
    assert doc["edge_count"] == 3
    assert doc["clustering_in_excl"] == pytest.approx(0.5)
    assert doc["hubs"] == [{"vertex": "A", "indegree": 2}]


def test_stats_undirected_paths_on_generated_graph(tmp_path):
    graph, report = tmp_path / "g.json", tmp_path / "s.json"
    _run("generate", "--n", 2000, "--alpha", 8, "--dim", 3, "--out", graph)
    assert _run("stats", "--graph", graph, "--undirected", "--sample-paths", 100, "--out", report) == 0
    doc = _load(report)
    assert doc["path_mode"] == "undirected_projection"
    assert doc["diameter"] > 0
    assert np.isfinite(doc["avg_path_length"])
    assert doc["diameter_is_lower_bound"]


def test_stats_missing_input_exit_code(tmp_path):
    assert _run("stats", "--edges", tmp_path / "absent.tsv") == 2


def test_stats_prints_to_stdout(tmp_path, capsys):
    edges = tmp_path / "e.tsv"
    edges.write_text("a\tb\n")
    assert _run("stats", "--edges", edges) == 0
    assert json.loads(capsys.readouterr().out)["edge_count"] == 1


def test_theory_report(tmp_path):
    report = tmp_path / "t.json"
    assert _run("theory", "--n", 10_000, "--alpha", 8, "--dim", 3, "--out", report) == 0
    doc = _load(report)
    assert doc["clustering_constant"] == pytest.approx(0.648110, abs=1e-6)
    assert doc["reciprocity_limit"] == pytest.approx(8 / 11)


def test_theory_even_dimension_marks_unavailable(tmp_path):
    report = tmp_path / "t.json"
    assert _run("theory", "--n", 10_000, "--alpha", 8, "--dim", 2, "--out", report) == 0
    doc = _load(report)
    assert doc["clustering_constant"] is None
    assert doc["clustering_available"] is False
    assert 0.0 < doc["clustering_fallback"] < 1.0


def test_fit_synthetic_network(tmp_path):
    rng = np.random.default_rng(5)
    n = 20_000
    indegrees = sample_powerlaw_degrees(n, 10 / 3, 5, 2000, seed=5)
    lines = []
    for v, k in enumerate(indegrees):
        for u in rng.choice(n, size=int(k), replace=False):
            lines.append(f"{u}\t{v}\n")
    edges, report = tmp_path / "net.tsv", tmp_path / "f.json"
    edges.write_text("".join(lines))
    assert _run("fit", "--edges", edges, "--dim", 3, "--out", report) == 0
    doc = _load(report)
    assert doc["kind"] == "fit"
    assert doc["beta_hat"] == pytest.approx(7 / 3, abs=0.15)


def test_fit_on_fixed_radius_graph_has_no_tail(tmp_path):
    graph = tmp_path / "g.json"
    _run("generate", "--n", 5000, "--alpha", 8, "--dim", 2, "--fixed-radius", "--out", graph)
    assert _run("fit", "--graph", graph, "--dim", 2) == 4


def test_fit_lenient_reports_flagged_tail(tmp_path):
    graph, report = tmp_path / "g.json", tmp_path / "f.json"
    _run("generate", "--n", 5000, "--alpha", 8, "--dim", 2, "--fixed-radius", "--out", graph)
    assert _run("fit", "--graph", graph, "--dim", 2, "--lenient", "--out", report) == 0
    assert _load(report)["power_law_plausible"] is False


def test_experiment_writes_summary(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"runs": [{"n": 300, "alpha": 8, "d": 3}], "trials": 1}))
    summary = tmp_path / "summary.csv"
    assert _run("experiment", "--config", config, "--summary", summary) == 0
    assert summary.read_text().startswith("n,alpha,d,trials")


def test_experiment_without_outputs_is_usage_error(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"runs": [{"n": 300, "alpha": 8, "d": 3}]}))
    assert _run("experiment", "--config", config) == 2


def test_compare_report(tmp_path):
    report = tmp_path / "c.json"
    assert _run("compare", "--n", 800, "--alpha", 8, "--dim", 3, "--seed", 1, "--out", report) == 0
    doc = _load(report)
    assert doc["kind"] == "compare"
    assert [row["name"] for row in doc["rows"]][0] == "edge_count"


def test_out_of_range_parameter_is_usage_error(tmp_path):
    assert _run("generate", "--n", 1, "--alpha", 8, "--dim", 3, "--out", tmp_path / "g.json") == 2
