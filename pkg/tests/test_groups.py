from __future__ import annotations

import pytest

from core.errors import ConfigError, ResourceError
from groups.ball import ball, check_left_invariance, check_subadditivity, growth_series
from groups.basic import cyclic, direct_product, free, free_abelian
from groups.factory import lattice_coordinates, parse_group, parse_space
from groups.grigorchuk import grigorchuk
from groups.model import check_group_axioms
from groups.wreath import wreath


def test_free_group_ball_sizes():
    assert growth_series(free(2), 2) == [1, 5, 17]
    assert len(ball(free(2), 2)) == 17


def test_free_abelian_ball_is_l1_ball():
    b = ball(free_abelian(2), 2)
    assert len(b) == 13
    assert b.diameter() == 4
    assert lattice_coordinates(b) is not None


def test_grigorchuk_small_balls():
    g = grigorchuk()
    assert len(ball(g, 1)) == 5
    assert len(ball(g, 2)) == 11


def test_grigorchuk_generators_are_involutions():
    g = grigorchuk().for_radius(2)
    e = g.canonical_key(g.identity())
    for _, s in g.generators:
        assert g.canonical_key(g.multiply(s, s)) == e
    assert g.describe().endswith("S={a, b, c, d}")


def test_lamplighter_ball_sizes():
    lamplighter = wreath(cyclic(2), free_abelian(1))
    assert len(lamplighter.generators) == 3
    b = ball(lamplighter, 2)
    assert b.spec.sphere_sizes[:3] == [1, 3, 6]
    assert len(b) == 10


@pytest.mark.parametrize("desc", ["free:2", "z^2", "cyclic:5", "wreath(cyclic:2,z^1)", "product(z^1,free:2)"])
def test_group_axioms_hold(desc, rng):
    group = parse_group(desc)
    b = ball(group, 2)
    assert check_group_axioms(b.group, b.elements, 300, rng) == []
    assert check_left_invariance(b, 500, rng) == []


def test_cyclic_group_ball_saturates():
    b = ball(cyclic(5), 3)
    assert len(b) == 5
    assert b.spec.sphere_sizes == [1, 2, 2, 0, 0, 0, 0]


def test_direct_product_uses_sum_metric():
    g = direct_product(free_abelian(1), free_abelian(1))
    b = ball(g, 2)
    assert len(b) == 13
    assert "(x,e)" in g.generator_labels


def test_descriptor_errors_name_the_string():
    with pytest.raises(ConfigError, match="bogus"):
        parse_group("bogus")
    with pytest.raises(ConfigError, match="path:abc"):
        parse_space("path:abc")
    with pytest.raises(ConfigError):
        parse_space("free:2")


def test_parse_space_variants():
    assert len(parse_space("path:7")) == 7
    assert len(parse_space("grid:3")) == 9
    assert len(parse_space("z^1@4")) == 9


def test_element_budget_is_enforced():
    with pytest.raises(ResourceError, match="shrink N"):
        ball(free(2), 5, budget=100)


@pytest.mark.parametrize("group", [free(2), grigorchuk(), wreath(cyclic(2), free_abelian(1))], ids=str)
def test_word_length_is_subadditive(group):
    assert check_subadditivity(ball(group, 2)) == []
