from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from core.errors import ConfigError, DomainError, IntegrityError, ResourceError, StructuralError
from decomp.chains import build_chain
from decomp.strategies import greedy_decompose
from groups.factory import parse_space
from spaces.decomposition import Decomposition, DecompositionChain
from spaces.families import MetricFamily
from spaces.space import path_space
from witness.construction import (
    WitnessFamily,
    close_pairs,
    root_cell,
    thicken_chain,
    thicken_stage,
    witness_from_chain,
    witness_sequence,
)
from witness.cover import Cover, effective_parameter, lebesgue_number, multiplicity
from witness.ozawa import bound_term, ozawa_map
from witness.sparse import SparseL1Vector, point_mass, xi
from witness.verify import variation_table, verify_witness


def _interval(space, lo, hi, tag=""):
    return space.subset(range(lo, hi + 1), tag=tag or f"[{lo},{hi}]")


# --- sparse vectors ---

def test_xi_distance_of_overlapping_sets():
    assert xi(["A", "B"]).distance(xi(["B", "C"])) == 1
    assert xi(["A", "B"]).distance(xi(["A", "B"])) == 0


def test_sparse_vector_arithmetic():
    v = xi([0, 1, 2])
    assert v.is_unit()
    assert v[1] == Fraction(1, 3)
    assert v[7] == 0
    half = v.scale(Fraction(1, 2))
    assert half.norm() == Fraction(1, 2)
    assert (half + half) == v
    moved = v.project({0: 0, 1: 0, 2: 2})
    assert moved[0] == Fraction(2, 3)
    assert moved.is_unit()
    assert SparseL1Vector.from_triples(v.to_triples()) == v


def test_sparse_vector_domain_errors():
    with pytest.raises(DomainError):
        xi([])
    with pytest.raises(DomainError):
        SparseL1Vector({"a": -1})
    with pytest.raises(DomainError):
        point_mass("a").scale(-1)


def test_projection_never_increases_distance(rng):
    keys = list(range(12))
    rep = {k: k // 3 for k in keys}
    for _ in range(50):
        a = SparseL1Vector({k: Fraction(int(w)) for k, w in zip(keys, rng.integers(0, 4, 12))})
        b = SparseL1Vector({k: Fraction(int(w)) for k, w in zip(keys, rng.integers(0, 4, 12))})
        assert a.project(rep).distance(b.project(rep)) <= a.distance(b)


# --- covers ---

def test_lebesgue_numbers_on_a_path(path10):
    whole = path10.whole()
    assert lebesgue_number(whole, [whole]) == 9
    overlapping = [_interval(path10, 0, 5), _interval(path10, 3, 8), _interval(path10, 6, 9)]
    assert lebesgue_number(whole, overlapping) == 1
    singletons = [path10.subset([i]) for i in range(10)]
    assert lebesgue_number(whole, singletons) == 0


def test_multiplicity():
    space = path_space(9)
    assert multiplicity([_interval(space, 0, 5), _interval(space, 3, 8)]) == 2
    copies = [space.whole() for _ in range(4)]
    assert multiplicity(copies) == 4


def test_cover_contract(path10):
    whole = path10.whole()
    with pytest.raises(StructuralError, match="uncovered"):
        Cover(whole, (_interval(path10, 0, 4),))
    domain = _interval(path10, 0, 4)
    with pytest.raises(StructuralError, match="leaves the domain"):
        Cover(domain, (_interval(path10, 0, 6),))
    with pytest.raises(StructuralError):
        Cover(whole, (whole, whole), keys=("a", "a"))


def test_cover_profile(path10):
    cover = Cover(path10.whole(), (_interval(path10, 0, 5), _interval(path10, 3, 9)))
    profile = cover.profile()
    assert not profile.saturated
    assert profile.multiplicity == 2
    assert cover.members_containing_ball(0, 2) == [0]


def test_effective_parameter():
    assert effective_parameter(1) is None
    assert effective_parameter(2) == 1
    assert effective_parameter(7) == 3
    assert effective_parameter(8) == 3
    assert effective_parameter(9) == 4


# --- averaging map ---

@pytest.fixture
def three_intervals():
    space = path_space(64)
    members = (_interval(space, 0, 31), _interval(space, 16, 47), _interval(space, 32, 63))
    return Cover(space.whole(), members)


def test_ozawa_map_on_overlapping_intervals(three_intervals):
    assert three_intervals.lebesgue_number() == 8
    f = ozawa_map(three_intervals)
    assert f.lam == 3
    assert f.multiplicity == 2
    assert f.pair_range == 1
    assert all(v.is_unit() for v in f.vectors.values())
    assert f.check_bound() == []
    # points deep inside one member see only that member
    assert f[5] == point_mass(0)


def test_ozawa_map_rejects_too_large_parameter(three_intervals):
    with pytest.raises(DomainError, match="lam=4"):
        ozawa_map(three_intervals, lam=4)


def test_saturated_cover_gives_constant_map(path10):
    whole = path10.whole()
    cover = Cover(whole, (whole, _interval(path10, 0, 3)))
    f = ozawa_map(cover)
    assert f.saturated
    assert {v for v in f.vectors.values()} == {point_mass(0)}
    assert f.check_bound() == []


def test_bound_term():
    assert bound_term(1, 3, 5) == 0
    assert bound_term(2, 0, 5) == 0
    value = bound_term(2, 1, 3)
    assert abs(float(value) - 2 * (1 - 2 ** (-2 / 3))) < 1e-9
    assert value > 2 * (1 - 2 ** (-2 / 3))
    with pytest.raises(DomainError):
        bound_term(0, 1, 3)


def _random_interval_cover(space, rng):
    n = len(space)
    cuts = sorted(set(rng.integers(1, n - 1, size=4).tolist()))
    bounds = [0] + cuts + [n]
    members = []
    for lo, hi in zip(bounds, bounds[1:]):
        pad = int(rng.integers(4, 14))
        members.append(_interval(space, max(0, lo - pad), min(n - 1, hi - 1 + pad)))
    return Cover(space.whole(), tuple(members))


def test_averaging_bound_on_random_interval_covers(rng):
    space = path_space(80)
    checked = 0
    for _ in range(30):
        cover = _random_interval_cover(space, rng)
        if cover.saturated or effective_parameter(cover.lebesgue_number()) is None:
            continue
        f = ozawa_map(cover)
        assert f.check_bound() == []
        checked += 1
    assert checked > 0


def _voronoi_cover(space, rng):
    """Nearest-center cells of a few random centers, each thickened by 2 or 3."""
    k = int(rng.integers(6, 16))
    centers = rng.choice(len(space), size=k, replace=False)
    owner = np.argmin(space.matrix[centers], axis=0)
    members = []
    for j in range(k):
        cell = np.flatnonzero(owner == j)
        pad = int(rng.integers(2, 4))
        members.append(space.subset(space.neighborhood(cell, pad).tolist(), tag=f"c{j}"))
    return Cover(space.whole(), tuple(members))


@pytest.mark.slow
@pytest.mark.parametrize("desc", ["path:80", "z^2@6", "free:2@4"])
def test_averaging_bound_on_random_covers(desc, rng):
    space = parse_space(desc)
    checked = 0
    for _ in range(200):
        cover = _voronoi_cover(space, rng)
        if cover.saturated:
            continue
        assert effective_parameter(cover.lebesgue_number()) is not None
        assert ozawa_map(cover).check_bound() == []
        checked += 1
        if checked == 20:
            break
    assert checked == 20


@pytest.mark.slow
def test_averaging_bound_on_thickened_lattice_covers():
    space = parse_space("z^2@6")
    for radius in (1, 2):
        dec = greedy_decompose(space, radius, 3 * radius)
        members = tuple(
            space.subset(space.neighborhood(p.indices, 8).tolist(), tag=p.tag) for p in dec.pieces
        )
        cover = Cover(space.whole(), members)
        if cover.saturated:
            continue
        assert ozawa_map(cover).check_bound() == []


# --- thickening ---

def test_thickening_detects_overlapping_family():
    space = path_space(20)
    root = root_cell(space.whole("X"))
    first = MetricFamily((_interval(space, 0, 4), _interval(space, 8, 12), _interval(space, 16, 19)), tag="a")
    second = MetricFamily((_interval(space, 5, 7), _interval(space, 13, 15)), tag="b")
    dec = Decomposition(root.core, 3, (first, second))
    with pytest.raises(IntegrityError, match="overlap"):
        thicken_stage(space, [root], [dec], 3, 1)


def test_thickening_builds_a_cover_of_the_parent():
    space = path_space(30)
    root = root_cell(space.whole("X"))
    dec = greedy_decompose(space, 9, 9, source=root.core)
    children, covers = thicken_stage(space, [root], [dec], 3, 1)
    assert [c.key for c in children][:2] == ["X.0", "X.1"]
    cover = covers["X"]
    assert cover.multiplicity() <= dec.n
    assert cover.lebesgue_number() >= 3


def test_thicken_chain_records_stages():
    space = path_space(40)
    chain = build_chain(space, [9], stop_mesh=None)
    thick = thicken_chain(space, chain, [3])
    assert thick.records[0].lebesgue_target_met
    assert len(thick.terminal_cells) == len(chain.terminal_family)
    with pytest.raises(ConfigError):
        thicken_chain(space, chain, [3, 3])


def _collar_chain(space, right_piece):
    """Stage 2 splits the gapped piece {10..12, 16..18} of a path into its two halves."""
    root = space.whole()
    gapped = space.subset([10, 11, 12, 16, 17, 18], tag="gapped")
    left, right, middle = _interval(space, 0, 9), _interval(space, 19, 28), _interval(space, 13, 15)
    first = Decomposition(root, 6, (
        MetricFamily((gapped,), tag="f0"),
        MetricFamily((left, right), tag="f1"),
        MetricFamily((middle,), tag="f2"),
    ))
    split = Decomposition(gapped, 6, (
        MetricFamily((_interval(space, 10, 12),), tag="g0"),
        MetricFamily((right_piece,), tag="g1"),
    ))
    second = [split] + [Decomposition.trivial(p, 6) for p in (left, right, middle)]
    return DecompositionChain.from_steps(space, [6, 6], [[first], second])


def test_later_stage_can_miss_the_lebesgue_target_off_the_cores():
    space = path_space(29)
    chain = _collar_chain(space, _interval(space, 16, 18))
    thick = thicken_chain(space, chain, [2, 2])
    first, second = thick.records
    assert first.lebesgue_target_met
    assert not second.lebesgue_target_met
    assert second.min_lebesgue == 0
    assert second.core_lebesgue == 2
    assert second.to_dict()["lebesgue_target_met"] is False


def test_thickening_rejects_a_core_below_the_target():
    space = path_space(29)
    chain = _collar_chain(space, _interval(space, 17, 18))
    with pytest.raises(IntegrityError, match="core points"):
        thicken_chain(space, chain, [2, 2])


def test_witness_consumes_a_given_chain():
    space = path_space(60)
    chain = build_chain(space, [21], stop_mesh=None)
    family = witness_from_chain(space, 1, chain=chain, projection_samples=50)
    assert family.chain is chain
    assert family.radii == [7]
    report = family.to_dict()
    assert report["chain_radii"] == [21]
    assert report["lebesgue_targets_met"] is True
    with pytest.raises(IntegrityError, match="too coarse"):
        witness_from_chain(space, 1, chain=build_chain(space, [3], stop_mesh=None))


# --- witnesses ---

@pytest.fixture(scope="module")
def line_witness():
    return witness_from_chain(path_space(60), 1, stages=2, projection_samples=100)


def test_witness_on_a_line(line_witness):
    w = line_witness
    assert all(v.is_unit() for v in w.vectors.values())
    assert w.measured_support_radius() <= w.support_radius
    assert len(w.radii) == 2
    assert w.terms[0] <= Fraction(1, 2)
    assert w.terms[1] <= Fraction(1, 4)
    assert w.chain.radii == tuple(3 * r for r in w.radii)
    report = verify_witness(w, 1, 1)
    assert report.passed
    assert report.sup_variation <= 1


def test_witness_report_serializes_vectors(line_witness):
    data = line_witness.to_dict(include_vectors=True)
    assert data["n"] == 1
    assert set(data["vectors"]) == {str(i) for i in range(60)}
    first = data["vectors"]["0"]
    assert sum(Fraction(num, den) for _, num, den in first) == 1


def test_witness_on_a_single_point():
    w = witness_from_chain(path_space(1), 1)
    assert w[0] == point_mass(0)
    assert w.support_radius == 0


@pytest.mark.slow
@pytest.mark.parametrize("desc", ["z^1@200", "z^2@40"])
def test_witness_sequence_on_large_balls(desc):
    space = parse_space(desc)
    families = witness_sequence(space, [1, 2, 3, 4], projection_samples=20)
    for w in families:
        assert all(v.is_unit() for v in w.vectors.values())
        assert w.measured_support_radius() <= w.support_radius
        assert verify_witness(w, w.n, Fraction(1, w.n)).passed


def test_witness_sequence_on_a_small_ball():
    space = parse_space("z^1@6")
    families = witness_sequence(space, [1, 2], projection_samples=20)
    assert [w.n for w in families] == [1, 2]
    for w in families:
        assert verify_witness(w, w.n, Fraction(1, w.n)).passed
    table = variation_table(families, radius=1)
    assert [r.n for r in table.rows] == [1, 2]
    assert table.decreasing
    assert table.to_dict()["rows"][0]["bound"] == "1"


def test_witness_argument_errors():
    space = path_space(60)
    with pytest.raises(ConfigError):
        witness_from_chain(space, 0)
    with pytest.raises(ConfigError):
        witness_sequence(space, [])
    with pytest.raises(DomainError):
        witness_sequence(space, [1, -1])
    with pytest.raises(IntegrityError):
        witness_from_chain(space, 1, radii=[3])
    with pytest.raises(ResourceError):
        witness_from_chain(space, 1, max_radius=5)


def test_close_pairs(path10):
    assert close_pairs(path10, 1) == [(i, i + 1) for i in range(9)]


# --- verification failures ---

def _synthetic(space, vectors, support):
    return WitnessFamily(space=space, n=2, vectors=vectors, support_radius=support)


def test_verify_witness_flags_non_unit_vectors():
    space = path_space(5)
    family = _synthetic(space, {x: point_mass(x).scale(2) for x in range(5)}, 0)
    report = verify_witness(family, 0, Fraction(1, 2))
    assert not report.passed
    assert report.max_norm_deviation == 1
    assert report.errors[0].startswith("condition 1")


def test_verify_witness_flags_wide_support():
    space = path_space(11)
    family = _synthetic(space, {x: point_mass(0) for x in range(11)}, 10)
    report = verify_witness(family, 1, Fraction(1, 2), declared_support=5)
    assert report.max_support_radius == 10
    assert [e.split(":")[0] for e in report.errors] == ["condition 2"]


def test_verify_witness_flags_large_variation():
    space = path_space(4)
    family = _synthetic(space, {x: point_mass(x) for x in range(4)}, 0)
    report = verify_witness(family, 1, Fraction(1, 2))
    assert report.sup_variation == 2
    assert [e.split(":")[0] for e in report.errors] == ["condition 3"]
    with pytest.raises(ConfigError):
        verify_witness(family, -1, 1)
