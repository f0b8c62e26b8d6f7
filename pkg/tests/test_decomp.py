from __future__ import annotations

import networkx as nx
import pytest

from core.enums import StrategyKind
from core.errors import ConfigError, DomainError, ResourceError
from decomp.chains import build_chain, sfdc_growth, single_stage_chain, sfdc_chain
from decomp.oracle import exact_decompose, exact_min_families
from decomp.profile import DISCLAIMER, dimension_profile
from decomp.strategies import DecompositionStrategy, MeshRule, carve_pieces, greedy_decompose
from groups.factory import parse_space
from spaces.decomposition import verify_chain, verify_decomposition
from spaces.families import mesh
from spaces.space import graph_space, grid_space, path_space


def test_mesh_rule_parsing():
    assert MeshRule.parse("3R")(2) == 6
    assert MeshRule.parse("R")(4) == 4
    assert MeshRule.parse("5")(9) == 5
    assert str(MeshRule.parse("2r")) == "2R"
    with pytest.raises(ConfigError):
        MeshRule.parse("three")


def test_carved_pieces_respect_mesh(path10):
    pieces = carve_pieces(path10, path10.whole(), 4)
    assert [p.tolist() for p in pieces] == [[0, 1, 2], [3, 4, 5], [6, 7, 8], [9]]


@pytest.mark.parametrize("radius", [1, 2, 3, 5])
def test_greedy_on_a_line_uses_two_families(radius):
    space = path_space(60)
    dec = greedy_decompose(space, radius, 3 * radius)
    assert dec.n == 2
    assert verify_decomposition(dec).passed
    assert all(mesh(fam) <= 3 * radius for fam in dec.subfamilies)


def test_grid_strategy_colors_by_parity():
    space = grid_space(6)
    strategy = DecompositionStrategy(StrategyKind.GRID, MeshRule(factor=3))
    dec = strategy.apply(space, 1)
    assert dec.n == 4
    assert verify_decomposition(dec).passed


def test_grid_strategy_needs_coordinates():
    space = parse_space("free:2@2")
    strategy = DecompositionStrategy(StrategyKind.GRID)
    with pytest.raises(DomainError):
        strategy.apply(space, 1)


def test_exact_oracle_on_small_path(path10):
    assert exact_min_families(path10, 2, 3) == 2
    assert exact_min_families(path10, 2, 9) == 1
    dec = exact_decompose(path10, 2, 3)
    assert dec.n == 2
    assert verify_decomposition(dec).passed


def test_exact_oracle_limit():
    with pytest.raises(ResourceError):
        exact_min_families(path_space(13), 1, 3)


def test_exact_never_beats_greedy_on_free_ball():
    space = parse_space("free:2@1")
    exact = exact_min_families(space, 1, 2)
    assert exact <= greedy_decompose(space, 1, 2).n


def _random_connected_graph(rng) -> nx.Graph:
    n = int(rng.integers(2, 13))
    while True:
        graph = nx.gnp_random_graph(n, float(rng.uniform(0.15, 0.45)), seed=int(rng.integers(2**31)))
        if nx.is_connected(graph):
            return graph


@pytest.mark.slow
def test_exact_never_beats_greedy_on_random_graphs(rng):
    for _ in range(200):
        space = graph_space(_random_connected_graph(rng))
        R = int(rng.integers(1, 4))
        D = R * int(rng.integers(1, 4))
        greedy = greedy_decompose(space, R, D)
        assert verify_decomposition(greedy).passed
        assert exact_min_families(space, R, D) <= greedy.n


def test_build_chain_is_verified_and_stops_early(path10):
    chain = build_chain(path10, [1, 1, 1], stop_mesh=1)
    assert chain.length == 1
    assert chain.widths == (2,)
    assert verify_chain(chain, list(chain.widths)).passed


def test_build_chain_rejects_bad_radii(path10):
    with pytest.raises(ConfigError):
        build_chain(path10, [])
    with pytest.raises(ConfigError):
        build_chain(path10, [3, 1])


def test_sfdc_chain_on_a_line_certifies_constant_two():
    result = sfdc_chain(path_space(30), [1, 2])
    assert result.found
    assert max(result.chain.widths) <= 2
    assert sfdc_growth(result).format() == "const:2"


def test_sfdc_failure_is_reported_not_raised():
    result = sfdc_chain(grid_space(8), [2], strategies=(DecompositionStrategy(mesh_rule=MeshRule(fixed=0)),))
    assert not result.found
    assert result.stage == 1
    with pytest.raises(DomainError):
        sfdc_growth(result)


def test_single_stage_chain_has_one_stage():
    space = parse_space("grigorchuk@2")
    chain = single_stage_chain(space, 1)
    assert chain.length == 1
    assert chain.terminal_mesh <= 3


def test_profile_rows_on_a_line():
    table = dimension_profile("z^1", [5], [1, 2], build=parse_space)
    assert table.disclaimer == DISCLAIMER
    assert [(r.N, r.R) for r in table.rows] == [(5, 1), (5, 2)]
    assert all(r.n_greedy == 2 for r in table.rows)
    assert all(r.n_exact == 2 for r in table.rows)
    assert all(r.wall_ms is None for r in table.rows)


def test_profile_skips_balls_over_budget():
    build = lambda desc: parse_space(desc, budget=50)
    table = dimension_profile("free:2", [3], [1], build=build)
    assert table.rows[0].n_greedy is None
    assert "budget" in table.rows[0].note
