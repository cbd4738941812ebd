import json

import pytest

from errors import GraphFileParseError
from graphstats import compute_stats
from reports import dumps_report, read_report, report_kind, write_report
from theory import theory_report


def test_stats_report_of_star(tmp_path, star):
    path = tmp_path / "stats.json"
    write_report(compute_stats(star), path)
    doc = read_report(path)
    assert list(doc)[0] == "kind"
    assert doc["kind"] == "stats"
    assert doc["edge_count"] == 3
    assert doc["clustering_in_excl"] == pytest.approx(0.5)
    assert doc["in_hist"]["counts"] == [[0, 1], [1, 1], [2, 1]]
    assert doc["triangles"] == {"type1_labeled": 1, "type2_labeled": 0}


def test_theory_report_contains_reciprocity_limit():
    doc = json.loads(dumps_report(theory_report(10_000, 8.0, 3)))
    assert doc["kind"] == "theory"
    assert doc["reciprocity_limit"] == pytest.approx(8 / 11)
    assert doc["expected_paths"]["1"] == pytest.approx(doc["z_exact"])


def test_equal_reports_give_identical_bytes(star):
    assert dumps_report(compute_stats(star)) == dumps_report(compute_stats(star))


def test_report_kind_names():
    assert report_kind(theory_report(1000, 8.0, 3)) == "theory"


def test_unwritable_path_raises_os_error(tmp_path, star):
    with pytest.raises(OSError):
        write_report(compute_stats(star), tmp_path / "missing" / "stats.json")


def test_read_report_rejects_non_report(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("[1, 2]")
    with pytest.raises(GraphFileParseError):
        read_report(path)
    path.write_text("{broken")
    with pytest.raises(GraphFileParseError):
        read_report(path)
