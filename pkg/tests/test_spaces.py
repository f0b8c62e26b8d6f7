from __future__ import annotations

import networkx as nx
import numpy as np
import pytest

from core.errors import DomainError, StructuralError
from spaces.decomposition import Decomposition, DecompositionChain, verify_chain, verify_decomposition
from spaces.families import (
    MetricFamily,
    family_union,
    is_r_disjoint,
    mesh,
    min_separation,
    restrict_family,
    set_distance,
)
from spaces.serialization import (
    chain_from_dict,
    chain_to_dict,
    load_chain,
    point_to_json,
    save_chain,
    space_from_dict,
    space_to_dict,
)
from spaces.space import (
    FiniteMetricSpace,
    check_metric_axioms,
    graph_space,
    grid_space,
    matrix_space,
    path_space,
    product_space,
)


def _family(space, *ranges, tag="F"):
    return MetricFamily(tuple(space.subset(r, tag=f"{tag}{i}") for i, r in enumerate(ranges)), tag=tag)


def test_path_distances_and_diameter(path10):
    assert path10.dist(2, 7) == 5
    assert path10.diameter() == 9
    assert path10.diameter([3, 4, 6]) == 3
    assert path10.ball(5, 2).tolist() == [3, 4, 5, 6, 7]
    assert path10.neighborhood([0, 9], 1).tolist() == [0, 1, 8, 9]


def test_matrix_space_keeps_labels():
    space = matrix_space(["a", "b", "c"], [[0, 2, 3], [2, 0, 1], [3, 1, 0]], name="abc")
    assert space.dist(0, 2) == 3
    assert space.label(1) == "b"
    assert check_metric_axioms(space, 200, np.random.default_rng(1)) == []


def test_invalid_matrices_are_rejected():
    with pytest.raises(StructuralError):
        FiniteMetricSpace([0, 1], [[0, 1], [2, 0]])
    with pytest.raises(StructuralError):
        FiniteMetricSpace([0, 1], [[0, 0], [0, 0]])
    with pytest.raises(DomainError):
        path_space(0)


def test_grid_and_graph_metrics_agree():
    grid = grid_space(3)
    graph = graph_space(nx.grid_2d_graph(3, 3))
    assert np.array_equal(grid.matrix, graph.matrix)
    assert grid.diameter() == 4


def test_product_space_is_sum_metric():
    x, y = path_space(3), path_space(4)
    xy = product_space(x, y)
    assert len(xy) == 12
    # (i, j) sits at index i * |Y| + j
    assert xy.dist(0 * 4 + 1, 2 * 4 + 3) == 2 + 2


def test_metric_axioms_hold_on_random_graph(rng):
    graph = nx.connected_watts_strogatz_graph(40, 4, 0.3, seed=7)
    assert check_metric_axioms(graph_space(graph), 2000, rng) == []


def test_mesh_and_separation(path10):
    fam = _family(path10, [0, 1, 2], [6, 7])
    assert mesh(fam) == 2
    assert min_separation(fam) == 4
    assert is_r_disjoint(fam, 3)
    assert not is_r_disjoint(fam, 4)
    assert set_distance(fam.pieces[0], fam.pieces[1]) == 4


def test_mesh_of_empty_family_is_undefined():
    with pytest.raises(DomainError):
        mesh(MetricFamily(()))


def test_restrict_family_drops_empty_pieces(path10):
    fam = _family(path10, [0, 1, 2], [6, 7])
    restricted = restrict_family(fam, [1, 2, 3])
    assert [p.members for p in restricted.pieces] == [(1, 2)]
    assert family_union(fam).tolist() == [0, 1, 2, 6, 7]


def test_family_cannot_mix_spaces():
    a, b = path_space(3), path_space(3)
    with pytest.raises(StructuralError):
        MetricFamily((a.subset([0]), b.subset([1])))


def test_verify_decomposition_reports_failures(path10):
    whole = path10.whole()
    good = Decomposition(whole, 1, (
        _family(path10, [0, 1, 2], [6, 7, 8], tag="a"),
        _family(path10, [3, 4, 5], [9], tag="b"),
    ))
    assert verify_decomposition(good).passed

    bad = Decomposition(whole, 4, (
        _family(path10, [0, 1, 2], [6, 7, 8], tag="a"),
        _family(path10, [3, 4], tag="b"),
    ))
    report = verify_decomposition(bad)
    assert not report.passed
    assert report.uncovered == [5, 9]
    assert any("distance 4 not > 4" in e for e in report.errors)


def test_chain_serialization_preserves_widths(path10, tmp_path):
    whole = path10.whole()
    dec = Decomposition(whole, 1, (
        _family(path10, [0, 1, 2], [6, 7, 8], tag="a"),
        _family(path10, [3, 4, 5], [9], tag="b"),
    ))
    chain = DecompositionChain.from_steps(path10, [1], [[dec]])
    assert chain.widths == (2,)
    assert chain.terminal_mesh == 2
    assert verify_chain(chain, [2]).passed
    assert not verify_chain(chain, [1]).passed

    restored = chain_from_dict(chain_to_dict(chain))
    assert restored.widths == chain.widths
    assert restored.terminal_mesh == chain.terminal_mesh

    save_chain(chain, tmp_path / "chains" / "chain.json")
    loaded = load_chain(tmp_path / "chains" / "chain.json")
    assert loaded.radii == chain.radii
    assert loaded.widths == chain.widths
    assert loaded.space.points == path10.points


def test_space_serialization_keeps_point_types(tmp_path):
    grid = grid_space(3)
    pairs = product_space(path_space(2), grid)
    for space in (grid, pairs):
        restored = space_from_dict(space_to_dict(space))
        assert restored.points == space.points
        assert restored.index_of(space.points[-1]) == len(space) - 1
    assert pairs.points[5] == (0, (1, 2))


def test_chain_loads_onto_a_matching_space(path10, tmp_path):
    chain = DecompositionChain.from_steps(path10, [1], [[Decomposition.trivial(path10.whole(), 1)]])
    save_chain(chain, tmp_path / "chain.json")
    assert load_chain(tmp_path / "chain.json", space=path10).space is path10
    with pytest.raises(StructuralError):
        load_chain(tmp_path / "chain.json", space=path_space(11))


def test_unknown_point_ids_have_no_json_form():
    with pytest.raises(StructuralError):
        point_to_json(1.5)
