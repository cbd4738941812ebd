import math

import numpy as np
import pytest

from errors import GraphIntegrityError, InvalidInputError, ModelInfeasibleError
from generator import (
    DiGraph,
    ModelParams,
    RadiusMode,
    TorusPointSet,
    build_edges_grid,
    build_edges_naive,
    generate,
    sample_points,
)
from geometry import min_radius, torus_distance
from graphstats import reciprocity
from theory import edge_prob_exact
from utils.cell_grid import CellGrid, cells_per_axis


def test_naive_single_edge_from_rule():
    g = build_edges_naive((np.array([[0.0], [0.3]]), np.array([0.35, 0.10])))
    assert g.edge_list() == [(1, 0)]


def test_naive_reciprocal_pair():
    g = build_edges_naive((np.array([[0.0], [0.3]]), np.array([0.35, 0.45])))
    assert g.edge_list() == [(0, 1), (1, 0)]


def test_naive_single_vertex_has_no_edges():
    g = build_edges_naive((np.array([[0.4]]), np.array([0.3])))
    assert g.n == 1
    assert g.edge_count == 0


def test_distance_equal_to_radius_is_an_edge():
    g = build_edges_naive((np.array([[0.0], [0.25]]), np.array([0.25, 0.1])))
    assert g.has_edge(1, 0)
    assert not g.has_edge(0, 1)


def test_model_params_rejects_alpha_at_or_below_d_plus_one():
    with pytest.raises(ModelInfeasibleError):
        ModelParams(n=1000, alpha=4.0, d=3)


def test_model_params_rejects_small_n():
    with pytest.raises(ModelInfeasibleError):
        ModelParams(n=3, alpha=8.0, d=4)


def test_fixed_radius_mode_ignores_alpha_bound():
    params = ModelParams(n=500, alpha=2.0, d=3, radius_mode=RadiusMode.fixed_r0)
    pts = sample_points(params)
    assert np.all(pts.radii == min_radius(500, 3))


def test_sample_points_deterministic_per_seed():
    params = ModelParams(n=300, alpha=8.0, d=3, seed=11)
    a, b = sample_points(params), sample_points(params)
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.radii, b.radii)
    c = sample_points(params.model_copy(update={"seed": 12}))
    assert not np.array_equal(a.positions, c.positions)


def test_sample_points_ranges():
    pts = sample_points(ModelParams(n=2000, alpha=6.0, d=2, seed=5))
    assert np.all((pts.positions >= 0.0) & (pts.positions < 1.0))
    assert np.all((pts.radii >= pts.r0) & (pts.radii <= 0.5))
    assert not pts.positions.flags.writeable


def test_sample_points_uniform_positions():
    pts = sample_points(ModelParams(n=100_000, alpha=8.0, d=2, seed=1))
    assert abs(pts.positions[:, 0].mean() - 0.5) < 0.005


def test_point_set_rejects_radius_above_half():
    params = ModelParams(n=10, alpha=8.0, d=1, seed=0)
    pts = sample_points(params)
    radii = pts.radii.copy()
    radii[3] = 0.6
    with pytest.raises(GraphIntegrityError):
        TorusPointSet(params=params, positions=pts.positions, radii=radii)


def test_point_set_rejects_nan_radius():
    params = ModelParams(n=10, alpha=8.0, d=1, seed=0)
    pts = sample_points(params)
    radii = pts.radii.copy()
    radii[0] = np.nan
    with pytest.raises(GraphIntegrityError):
        TorusPointSet(params=params, positions=pts.positions, radii=radii)


@pytest.mark.parametrize("seed", range(50))
@pytest.mark.parametrize("d,alpha", [(1, 3.0), (2, 5.0), (3, 8.0), (4, 9.0)])
def test_grid_matches_naive(seed, d, alpha):
    pts = sample_points(ModelParams(n=400, alpha=alpha, d=d, seed=seed))
    naive = build_edges_naive(pts)
    assert build_edges_grid(pts).same_edges(naive)
    assert build_edges_grid(pts, workers=3).same_edges(naive)


def test_grid_matches_naive_with_tight_cell_cap():
    pts = sample_points(ModelParams(n=500, alpha=8.0, d=2, seed=9))
    assert build_edges_grid(pts, max_cells_per_axis=3).same_edges(build_edges_naive(pts))


def test_grid_edges_obey_rule():
    pts = sample_points(ModelParams(n=200, alpha=5.0, d=2, seed=4))
    g = build_edges_grid(pts)
    for u, v in g.edge_list()[:500]:
        assert torus_distance(pts.positions[u], pts.positions[v]) <= pts.radii[v]


def test_fixed_radius_graph_is_symmetric():
    _, g = generate(ModelParams(n=1000, alpha=8.0, d=2, seed=2, radius_mode=RadiusMode.fixed_r0))
    assert g.edge_count > 0
    assert reciprocity(g) == 1.0


def test_generate_is_reproducible():
    params = ModelParams(n=1500, alpha=8.0, d=3, seed=21)
    assert generate(params)[1].same_edges(generate(params, workers=4)[1])


def test_edge_count_scales_like_n_log_n():
    n = 10_000
    _, g = generate(ModelParams(n=n, alpha=8.0, d=3, seed=0))
    assert 0.5 <= g.edge_count / (n * math.log(n)) <= 4.0


@pytest.mark.slow
def test_mean_outdegree_matches_exact_z():
    n = 10_000
    z = edge_prob_exact(n, 8.0, 3)
    means = [generate(ModelParams(n=n, alpha=8.0, d=3, seed=s))[1].edge_count / n for s in range(20)]
    assert np.mean(means) == pytest.approx(z * (n - 1), rel=0.05)


def test_digraph_from_edges_drops_self_loops_and_duplicates():
    g = DiGraph.from_edges(3, [0, 0, 1, 2, 2], [1, 1, 1, 0, 1])
    assert g.edge_list() == [(0, 1), (2, 0), (2, 1)]
    assert list(g.predecessors(1)) == [0, 2]
    assert list(g.in_degree()) == [1, 2, 0]


def test_digraph_rejects_out_of_range_endpoint():
    with pytest.raises(InvalidInputError):
        DiGraph.from_edges(2, [0], [2])


def test_subgraph_renumbers_and_keeps_labels():
    g = DiGraph.from_edges(4, [0, 1, 2, 3], [1, 2, 3, 0], labels=["a", "b", "c", "d"])
    sub = g.subgraph([1, 2, 3])
    assert sub.edge_list() == [(0, 1), (1, 2)]
    assert [sub.label(v) for v in range(3)] == ["b", "c", "d"]


def test_cells_per_axis_bounds():
    assert cells_per_axis(0.3, 2) == 3
    assert cells_per_axis(1e-6, 3, max_cells_per_axis=20) == 20
    assert cells_per_axis(0.6, 1) == 1


def test_cell_grid_reach_covers_integer_products():
    grid = CellGrid(np.array([[0.1, 0.1], [0.6, 0.6]]), 4)
    assert list(grid.reach(np.array([0.25, 0.1]))) == [2, 1]
    assert len(grid.axis_offsets(2)) == 4
