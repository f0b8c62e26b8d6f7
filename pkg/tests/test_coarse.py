from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from coarse.embedding import (
    actual_radius,
    embedding_from_function,
    identity_embedding,
    is_quasi_isometry,
    pullback_chain,
    pullback_decomposition,
    pullback_family,
    pulled_radius,
)
from coarse.fibering import (
    StabilizerChain,
    fiber_chain,
    lamp_window_chain,
    lamplighter_head_action,
    piece_base,
    point_action,
    self_action,
    stabilizer,
)
from coarse.growth import (
    GrowthFunction,
    HeuristicResult,
    compose_affine,
    growth_equivalent,
    is_subexponential,
    product_growth,
)
from coarse.product import product_chain
from core.enums import GrowthClass
from core.errors import ConfigError, IntegrityError, StructuralError
from decomp.chains import build_chain
from decomp.strategies import greedy_decompose
from groups.ball import ball
from groups.basic import free_abelian
from spaces.decomposition import Decomposition, DecompositionChain, verify_chain, verify_decomposition
from spaces.families import MetricFamily, SubsetRef
from spaces.space import grid_space, path_space


@pytest.fixture
def triple():
    """x -> 3x from path:10 into path:28."""
    source, target = path_space(10), path_space(28)
    return embedding_from_function(source, target, lambda p: 3 * p, 3, 0, name="3x")


def _family(space, *ranges):
    return MetricFamily(tuple(space.subset(r, tag=f"P{i}") for i, r in enumerate(ranges)), tag="F")


# --- growth functions ---

def test_closed_form_growth_values():
    assert GrowthFunction.constant(3)(100) == 3
    assert GrowthFunction.polynomial(2)(3) == 9
    assert GrowthFunction.exponential(2)(10) == 1024
    assert GrowthFunction.exponential(4)(Fraction(1, 2)) == 2


def test_growth_parse_and_format():
    for text in ("const:2", "poly:2", "poly:2:3", "exp:3"):
        assert GrowthFunction.parse(text).format() == text
    with pytest.raises(ConfigError):
        GrowthFunction.parse("linear")


def test_affine_composition_and_products():
    t = compose_affine(GrowthFunction.exponential(2), 2, 0)
    assert t.kind is GrowthClass.EXPONENTIAL
    assert t.base == 4
    assert t(3) == 64
    p = product_growth(GrowthFunction.constant(2), GrowthFunction.polynomial(1))
    assert p(5) == 10
    assert p.kind is GrowthClass.POLYNOMIAL


def test_subexponential_verdicts():
    assert is_subexponential(GrowthFunction.polynomial(3)) is True
    assert is_subexponential(GrowthFunction.exponential(2)) is False
    assert growth_equivalent(GrowthFunction.polynomial(2), compose_affine(GrowthFunction.polynomial(2), 3, 1)) is True


def test_tabulated_growth_is_heuristic():
    linear = GrowthFunction.tabulated([(1, 2), (2, 4), (4, 8), (8, 16)])
    verdict = is_subexponential(linear)
    assert isinstance(verdict, HeuristicResult)
    assert verdict.heuristic and bool(verdict)
    doubling = GrowthFunction.tabulated([(x, 2 ** x) for x in range(1, 6)])
    assert not is_subexponential(doubling)
    with pytest.raises(ConfigError):
        GrowthFunction.tabulated([(1, 3), (2, 1)])


# --- embeddings and pullbacks ---

def test_scaling_map_is_a_quasi_isometric_embedding(triple):
    assert triple.verify() == []
    assert is_quasi_isometry(triple) != []
    assert is_quasi_isometry(identity_embedding(path_space(10))) == []


def test_pullback_family_certified_and_actual_constants(triple):
    family = _family(triple.target, [0, 1, 2], [9, 10, 11])
    result = pullback_family(triple, family, 5, 2)
    assert result.certified_separation == Fraction(5, 3)
    assert result.actual_separation == 3
    assert result.actual_mesh == 0
    assert result.certified_mesh == Fraction(2, 3)
    assert result.integer_radius == 1


def test_pullback_rejects_a_map_breaking_its_contract():
    source, target = path_space(10), path_space(28)
    lying = embedding_from_function(source, target, lambda p: 3 * p, 1, 0, name="lying")
    assert lying.verify() != []
    with pytest.raises(IntegrityError):
        pullback_family(lying, _family(target, [0, 1, 2], [9, 10, 11]), 5, 2)


def test_pulled_radius_rounds_down():
    assert pulled_radius(9, Fraction(2), Fraction(1)) == 4
    assert pulled_radius(1, Fraction(2), Fraction(3)) == 0


def test_actual_radius_is_one_below_the_separation():
    space = path_space(10)
    dec = Decomposition(space.whole(), 1, (
        _family(space, [0, 1, 2], [6, 7, 8]),
        _family(space, [3, 4, 5], [9]),
    ))
    assert actual_radius(dec) == 3
    lone = Decomposition(space.whole(), 1, (_family(space, range(10)),))
    assert actual_radius(lone) is None


def test_pullback_decomposition_verifies(triple):
    dec = greedy_decompose(triple.target, 3, 9)
    pulled = pullback_decomposition(triple, dec)
    assert pulled.radius == 1
    assert verify_decomposition(pulled).passed
    assert pulled.n <= dec.n


def test_pullback_chain_keeps_widths(triple):
    chain = build_chain(triple.target, [3, 6], stop_mesh=None)
    pulled = pullback_chain(triple, chain, GrowthFunction.constant(2))
    assert list(pulled.chain.radii) == [1, 2]
    assert pulled.certified_radii == [Fraction(1), Fraction(2)]
    assert max(pulled.chain.widths) <= 2
    assert pulled.report.passed
    assert pulled.slack == 0
    assert verify_chain(pulled.chain, pulled.growth).passed


def test_pullback_chain_verifies_against_its_own_bound():
    source, target = path_space(6), path_space(16)
    f = embedding_from_function(source, target, lambda p: 2 * p, 2, 1, name="2x")
    dec = Decomposition(target.whole(), 10, (
        _family(target, [0, 1, 2], [13, 14, 15]),
        _family(target, range(3, 13)),
    ))
    chain = DecompositionChain.from_steps(target, [10], [[dec]])
    s = GrowthFunction.parse("poly:1:2/19")
    assert verify_chain(chain, s).passed

    pulled = pullback_chain(f, chain, s)
    assert pulled.chain.radii == (4,)
    assert pulled.chain.widths == (2,)
    # s(2*4 + 1) = 1 undershoots the width at the floored radius
    assert compose_affine(s, 2, 1)(4) == 1
    assert pulled.slack == 2
    assert pulled.growth(4) == 2
    assert verify_chain(pulled.chain, pulled.growth).passed
    assert growth_equivalent(pulled.growth, s)


def _jittered_embedding(rng, grid: bool) -> tuple:
    """x -> L x + jitter with jitter in [0, c); |d(fx, fy) - L d(x, y)| stays below C."""
    L = int(rng.integers(1, 4))
    c = int(rng.integers(1, L + 1))
    n = int(rng.integers(2, 5 if grid else 12))
    size = L * (n - 1) + c
    if grid:
        source, target = grid_space(n), grid_space(size)
        jitter = {p: tuple(int(v) for v in rng.integers(0, c, size=2)) for p in source.points}
        fn = lambda p: (L * p[0] + jitter[p][0], L * p[1] + jitter[p][1])
        C = 2 * c - 1
    else:
        source, target = path_space(n), path_space(size)
        jitter = {p: int(rng.integers(0, c)) for p in source.points}
        fn = lambda p: L * p + jitter[p]
        C = c
    return embedding_from_function(source, target, fn, L, C, name=f"{L}x~{c}"), L


@pytest.mark.slow
def test_random_quasi_isometric_embeddings_certify_their_pullbacks(rng):
    for k in range(120):
        f, L = _jittered_embedding(rng, grid=k % 3 == 0)
        assert f.verify() == []
        R = int(rng.integers(1, 4)) * L
        chain = build_chain(f.target, [R, 2 * R], stop_mesh=None)
        s = GrowthFunction.constant(max(chain.widths))
        pulled = pullback_chain(f, chain, s)
        assert pulled.report.passed
        assert list(pulled.chain.radii) == [pulled_radius(r, f.L, f.C) for r in chain.radii]
        assert pulled.chain.terminal_mesh <= (chain.terminal_mesh + f.C) / f.L
        assert verify_decomposition(pullback_decomposition(f, chain.steps[0][0])).passed


# --- products ---

def test_product_widths_multiply():
    cx = build_chain(path_space(12), [1], stop_mesh=None)
    cy = build_chain(path_space(8), [1], stop_mesh=None)
    result = product_chain(cx, cy)
    assert result.widths_x == [2] and result.widths_y == [2]
    assert list(result.chain.widths) == [4]
    assert result.chain.terminal_mesh <= cx.terminal_mesh + cy.terminal_mesh
    assert result.report.passed


def test_product_pads_the_shorter_chain():
    cx = build_chain(path_space(20), [1, 2], stop_mesh=None)
    cy = build_chain(path_space(6), [1], stop_mesh=None)
    result = product_chain(cx, cy, GrowthFunction.constant(2), GrowthFunction.constant(2))
    assert list(result.chain.radii) == [1, 2]
    assert result.widths_y[1] == 1
    assert list(result.chain.widths) == [a * b for a, b in zip(result.widths_x, result.widths_y)]
    assert result.growth.format() == "const:2*const:2"


def test_product_rejects_mismatched_radii():
    cx = build_chain(path_space(10), [1, 2], stop_mesh=None)
    cy = build_chain(path_space(10), [2], stop_mesh=None)
    with pytest.raises(StructuralError):
        product_chain(cx, cy)


# --- fibering ---

def test_lamplighter_stabilizer():
    action = lamplighter_head_action(3)
    assert action.lipschitz_constant == 1
    assert action.check_transitive() == []
    assert action.check_isometric(500, np.random.default_rng(0)) == []
    assert len(stabilizer(action, 0)) == 4


def test_fibered_chain_covers_the_lamplighter_ball():
    action = lamplighter_head_action(3)
    cx = build_chain(action.target, [2], stop_mesh=None)
    D = cx.terminal_mesh
    chains = {D: lamp_window_chain(D, [2]), D + 3: lamp_window_chain(D + 3, [2])}
    result = fiber_chain(action, cx, chains, GrowthFunction.constant(max(cx.widths)))
    assert result.chain.length == 2
    assert result.pulled_stages == 1
    assert result.stabilizer_radius == D
    assert result.report.passed
    assert result.report.bounds[1] == 2
    assert result.chain.widths[1] <= 2
    assert result.chain.terminal_mesh <= result.stab_terminal_mesh
    covered = result.chain.terminal_family.union()
    assert covered.tolist() == list(range(len(action.ball)))


def test_fiber_needs_a_stabilizer_chain():
    action = lamplighter_head_action(2)
    cx = build_chain(action.target, [2], stop_mesh=None)
    s = GrowthFunction.constant(max(cx.widths))
    assert cx.terminal_mesh > 0
    with pytest.raises(StructuralError):
        fiber_chain(action, cx, None, s)
    with pytest.raises(StructuralError):
        fiber_chain(action, cx, {0: lamp_window_chain(0, [2])}, s)


def test_left_multiplication_stabilizers_are_balls():
    g_ball = ball(free_abelian(1), 3)
    action = self_action(g_ball)
    assert action.lipschitz_constant == 1
    assert action.check_transitive() == []
    for radius in range(4):
        expected = [i for i in range(len(g_ball)) if g_ball.word_length(i) <= radius]
        assert list(stabilizer(action, radius).members) == expected


def test_stabilizer_inside_another_ball():
    action = self_action(ball(free_abelian(1), 2))
    wide = ball(free_abelian(1), 5)
    members = stabilizer(action, 1, within=wide).members
    assert [wide.element(i) for i in members] == [(0,), (-1,), (1,)]


def test_point_action_reduces_to_the_stabilizer_chain():
    g_ball = ball(free_abelian(1), 4)
    action = point_action(g_ball)
    assert action.lipschitz_constant == 0
    assert len(stabilizer(action, 0)) == len(g_ball)
    cx = build_chain(action.target, [1], stop_mesh=None)
    wide = ball(free_abelian(1), 8)
    stab = build_chain(wide, [2], stop_mesh=None)
    result = fiber_chain(action, cx, {0: stab}, GrowthFunction.constant(1))
    assert result.chain.widths[0] == 1
    assert result.stab_widths == list(stab.widths)
    assert result.chain.widths[1] <= 2
    assert result.chain.terminal_mesh <= stab.terminal_mesh
    assert result.report.passed
    assert result.report.bounds == [1, 2]


def _three_family_chain(space):
    members = [tuple(i for i in range(len(space)) if i % 3 == k) for k in range(3)]
    families = tuple(
        MetricFamily((SubsetRef(space, m, tag=f"p{k}"),), tag=f"f{k}") for k, m in enumerate(members)
    )
    dec = Decomposition(space.whole(), 2, families)
    return DecompositionChain.from_steps(space, [2], [[dec]])


def test_fiber_rejects_a_width_three_stabilizer_chain():
    action = point_action(ball(free_abelian(1), 3))
    cx = build_chain(action.target, [1], stop_mesh=None)
    stab = _three_family_chain(ball(free_abelian(1), 6))
    assert stab.widths == (3,)
    assert verify_chain(stab, 3).passed
    with pytest.raises(StructuralError, match="at most 2"):
        fiber_chain(action, cx, {0: stab}, GrowthFunction.constant(1))


def test_fiber_rejects_a_third_family_from_a_classifier():
    action = point_action(ball(free_abelian(1), 3))
    cx = build_chain(action.target, [1], stop_mesh=None)
    sneaky = StabilizerChain(
        D=0,
        radii=(2,),
        stages=(lambda h: (h[0] % 3, h[0]),),
        widths=(2,),
        terminal_mesh=0,
    )
    with pytest.raises(StructuralError, match="at most 2"):
        fiber_chain(action, cx, {0: sneaky}, GrowthFunction.constant(1))


def test_stabilizer_chain_on_another_group_is_rejected():
    action = point_action(ball(free_abelian(1), 2))
    cx = build_chain(action.target, [1], stop_mesh=None)
    stab = build_chain(ball(free_abelian(2), 2), [2], stop_mesh=None)
    with pytest.raises(StructuralError):
        fiber_chain(action, cx, {0: stab}, GrowthFunction.constant(1))


def test_piece_base_is_the_lowest_canonical_key():
    g_ball = ball(free_abelian(1), 3)
    action = self_action(g_ball)
    piece = SubsetRef(g_ball, (0, 1, 2))
    base = piece_base(action, piece)
    assert g_ball.element(base) == (-1,)
    assert base != piece.members[0]
