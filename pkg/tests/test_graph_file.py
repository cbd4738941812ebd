import json

import numpy as np
import pytest

from errors import GraphFileParseError, GraphIntegrityError
from generator import ModelParams, RadiusMode, generate
from parsers.graph_file import graph_file, read_graph, write_graph


@pytest.fixture
def generated():
    return generate(ModelParams(n=100, alpha=8.0, d=3, seed=7))


def test_round_trip_preserves_edges(tmp_path, generated):
    pts, g = generated
    path = tmp_path / "g.json"
    write_graph(pts, g, path)
    pts2, g2 = read_graph(path)
    assert g2.same_edges(g)
    assert np.array_equal(pts2.positions, pts.positions)
    assert np.array_equal(pts2.radii, pts.radii)
    assert pts2.params == pts.params


def test_write_read_write_is_byte_identical(tmp_path, generated):
    pts, g = generated
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    write_graph(pts, g, first)
    write_graph(*read_graph(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_missing_edges_section_is_rebuilt(tmp_path, generated):
    pts, g = generated
    path = tmp_path / "g.json"
    write_graph(pts, None, path)
    assert '"edges"' not in path.read_text()
    _, rebuilt = read_graph(path)
    assert rebuilt.same_edges(g)


def test_fixed_radius_mode_round_trip(tmp_path):
    pts, g = generate(ModelParams(n=60, alpha=2.0, d=1, seed=1, radius_mode=RadiusMode.fixed_r0))
    path = tmp_path / "rgg.json"
    write_graph(pts, g, path)
    pts2, g2 = read_graph(path)
    assert pts2.params.radius_mode == RadiusMode.fixed_r0
    assert g2.same_edges(g)


def _doc(generated):
    pts, g = generated
    return json.loads(graph_file.dumps(pts, g))


def test_radius_above_half_is_integrity_error(generated):
    doc = _doc(generated)
    doc["radii"][4] = 0.75
    with pytest.raises(GraphIntegrityError):
        graph_file.loads(json.dumps(doc))


def test_tampered_edges_are_integrity_error(generated):
    doc = _doc(generated)
    doc["edges"] = doc["edges"][1:]
    with pytest.raises(GraphIntegrityError):
        graph_file.loads(json.dumps(doc))
    # Without verification the stored edges are taken as given.
    _, g = graph_file.loads(json.dumps(doc), verify_edges=False)
    assert g.edge_count == len(doc["edges"])


def test_duplicate_edge_is_integrity_error(generated):
    doc = _doc(generated)
    doc["edges"].append(doc["edges"][0])
    with pytest.raises(GraphIntegrityError):
        graph_file.loads(json.dumps(doc))


def test_wrong_coordinate_count_is_integrity_error(generated):
    doc = _doc(generated)
    doc["positions"][0] = [0.1, 0.2]
    with pytest.raises(GraphIntegrityError):
        graph_file.loads(json.dumps(doc))


def test_infeasible_params_are_integrity_error(generated):
    doc = _doc(generated)
    doc["params"]["alpha"] = 3.0
    with pytest.raises(GraphIntegrityError):
        graph_file.loads(json.dumps(doc))


def test_malformed_json_reports_position():
    with pytest.raises(GraphFileParseError) as info:
        graph_file.loads('{\n  "version": 1,\n  "params": [\n')
    assert info.value.line is not None


def test_missing_field_reports_name(generated):
    doc = _doc(generated)
    del doc["radii"]
    with pytest.raises(GraphFileParseError) as info:
        graph_file.loads(json.dumps(doc))
    assert info.value.field == "radii"


def test_unknown_version_rejected(generated):
    doc = _doc(generated)
    doc["version"] = 2
    with pytest.raises(GraphFileParseError):
        graph_file.loads(json.dumps(doc))
