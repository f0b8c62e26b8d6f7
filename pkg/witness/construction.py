"""Thickened covers and the recursive witness construction.

A cell is a pair (U, V): V a piece of a decomposition chain, U its
thickening inside the parent cell.  Stage i decomposes the core V of
every parent cell at 3 R_i and thickens each piece V' by R_i inside the
parent's U; the thickened pieces cover U.  Every family of a 3R-disjoint
decomposition stays pairwise disjoint after an R-thickening, so each
point of U lies in at most one thickened piece per family.

The witness multiplies per-cell averaging maps down the stages,

    g^{i}_x(U') = g^{i-1}_x(U) * g^U_x(U'),

and finally pushes the mass of every terminal cell onto its lowest point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ConfigError, DomainError, IntegrityError, ResourceError, StructuralError
from decomp.strategies import DecompositionStrategy
from spaces.decomposition import Decomposition, DecompositionChain
from spaces.families import SubsetRef
from spaces.space import FiniteMetricSpace
from utils.threading_utils import ordered_map
from .cover import Cover, LebesgueProfile
from .ozawa import OzawaMap, bound_term, ozawa_map
from .sparse import SparseL1Vector, point_mass

logger = logging.getLogger(__name__)

ROOT_KEY = "X"


@dataclass(frozen=True)
class Cell:
    thick: SubsetRef
    core: SubsetRef
    key: str


@dataclass
class StageRecord:
    """What one thickening stage measured."""
    index: int
    radius: int
    chain_radius: int
    width: int
    cells: int
    covers: int
    saturated_covers: int
    min_lebesgue: int
    core_lebesgue: Optional[int]
    min_effective: Optional[int]
    max_multiplicity: int
    lebesgue_target_met: bool
    term: Optional[Fraction] = None

    def to_dict(self) -> dict:
        return {
            "stage": self.index,
            "radius": self.radius,
            "chain_radius": self.chain_radius,
            "width": self.width,
            "cells": self.cells,
            "covers": self.covers,
            "saturated_covers": self.saturated_covers,
            "min_lebesgue": self.min_lebesgue,
            "core_lebesgue": self.core_lebesgue,
            "min_effective": self.min_effective,
            "max_multiplicity": self.max_multiplicity,
            "lebesgue_target_met": self.lebesgue_target_met,
            "term": None if self.term is None else str(self.term),
        }


@dataclass
class ThickenedChain:
    """Cells per stage (stage 0 is the root cell) and the cover of every parent cell."""
    space: FiniteMetricSpace
    radii: List[int]
    cells: List[List[Cell]]
    covers: List[Dict[str, Cover]]
    records: List[StageRecord]

    @property
    def terminal_cells(self) -> List[Cell]:
        return self.cells[-1]

    def terminal_mesh(self) -> int:
        return max(cell.thick.diameter() for cell in self.terminal_cells)


def root_cell(root: SubsetRef) -> Cell:
    return Cell(root, root, ROOT_KEY)


def thicken_stage(
    space: FiniteMetricSpace,
    parents: Sequence[Cell],
    decompositions: Sequence[Decomposition],
    radius: int,
    stage: int,
) -> Tuple[List[Cell], Dict[str, Cover]]:
    """Children cells (in decomposition piece order) and the cover of each parent."""
    if len(parents) != len(decompositions):
        raise StructuralError(f"stage {stage}: {len(decompositions)} decompositions for {len(parents)} cells")
    children: List[Cell] = []
    covers: Dict[str, Cover] = {}
    for parent, dec in zip(parents, decompositions):
        if dec.source.members != parent.core.members:
            raise StructuralError(f"stage {stage}: decomposition source differs from core of cell {parent.key}")
        members: List[SubsetRef] = []
        keys: List[str] = []
        for fam_index, fam in enumerate(dec.subfamilies):
            thick = [
                np.intersect1d(space.neighborhood(piece.indices, radius), parent.thick.indices)
                for piece in fam.pieces
            ]
            total = sum(t.size for t in thick)
            if total != np.unique(np.concatenate(thick)).size:
                raise IntegrityError(
                    f"stage {stage}: thickened pieces of family {fam_index} in cell {parent.key} "
                    f"overlap at radius {radius} (decomposition radius {dec.radius} is not 3R-disjoint)"
                )
            for piece, points in zip(fam.pieces, thick):
                key = f"{parent.key}.{len(members)}"
                ref = SubsetRef(space, tuple(points.tolist()), tag=key)
                members.append(ref)
                keys.append(key)
                children.append(Cell(ref, piece, key))
        try:
            cover = Cover(parent.thick, tuple(members), tuple(keys))
        except StructuralError as exc:
            raise IntegrityError(f"stage {stage}: cell {parent.key}: {exc}") from None
        if cover.multiplicity() > dec.n:
            raise IntegrityError(
                f"stage {stage}: cell {parent.key} cover multiplicity {cover.multiplicity()} > width {dec.n}"
            )
        covers[parent.key] = cover
    return children, covers


def _record(
    stage: int, radius: int, chain_radius: int, decs, parents, children, covers,
) -> Tuple[StageRecord, List[LebesgueProfile]]:
    profiles = [c.profile() for c in covers.values()]
    effective = [p.effective for p in profiles if not p.saturated]
    cores = [
        c.core_lebesgue(parent.core)
        for parent, c, p in zip(parents, covers.values(), profiles)
        if not p.saturated
    ]
    record = StageRecord(
        index=stage,
        radius=radius,
        chain_radius=chain_radius,
        width=max(d.n for d in decs),
        cells=len(children),
        covers=len(covers),
        saturated_covers=sum(p.saturated for p in profiles),
        min_lebesgue=min(p.lebesgue for p in profiles),
        core_lebesgue=min(cores, default=None),
        min_effective=None if not effective or None in effective else min(effective),
        max_multiplicity=max(p.multiplicity for p in profiles),
        lebesgue_target_met=all(p.saturated or p.lebesgue >= radius for p in profiles),
    )
    return record, profiles


def _check_core(record: StageRecord) -> None:
    """Core points of every unsaturated cover must see R-balls inside one member."""
    if record.core_lebesgue is not None and record.core_lebesgue < record.radius:
        raise IntegrityError(
            f"stage {record.index}: Lebesgue number {record.core_lebesgue} at core points < R={record.radius}"
        )
    if not record.lebesgue_target_met:
        logger.info(
            "stage %d: Lebesgue number %d < R=%d away from the cores",
            record.index, record.min_lebesgue, record.radius,
        )


def thicken_chain(space: FiniteMetricSpace, chain: DecompositionChain, radii: Sequence[int]) -> ThickenedChain:
    """Thicken stage i of *chain* (built at radii >= 3 R_i) by R_i.

    Every stage asserts Lebesgue number >= R_i at the core points of each
    cover.  At stage 1 the core is the whole domain; later covers can fall
    below R_i on the collar U \\ V, which ``lebesgue_target_met`` records.
    """
    radii = [int(r) for r in radii]
    if len(radii) != chain.length:
        raise ConfigError(f"{len(radii)} thickening radii for a chain of length {chain.length}")
    if any(r < 1 for r in radii) or any(b < a for a, b in zip(radii, radii[1:])):
        raise ConfigError(f"thickening radii must be positive and nondecreasing: {radii}")
    if chain.space is not space:
        raise StructuralError("chain lives in another space")
    for i, (r, cr) in enumerate(zip(radii, chain.radii)):
        if cr < 3 * r:
            logger.warning("stage %d: chain radius %d < 3 x thickening radius %d", i + 1, cr, r)

    root = chain.steps[0][0].source if chain.steps else chain.root_piece
    cells = [[root_cell(root)]]
    covers: List[Dict[str, Cover]] = []
    records: List[StageRecord] = []
    for i, radius in enumerate(radii):
        decs = chain.steps[i]
        children, stage_covers = thicken_stage(space, cells[-1], decs, radius, i + 1)
        record, profiles = _record(i + 1, radius, chain.radii[i], decs, cells[-1], children, stage_covers)
        _check_core(record)
        cells.append(children)
        covers.append(stage_covers)
        records.append(record)
        logger.debug(
            "thicken stage %d: R=%d cells=%d lebesgue>=%d m<=%d",
            i + 1, radius, len(children), record.min_lebesgue, record.max_multiplicity,
        )
    return ThickenedChain(space, radii, cells, covers, records)


# --- witness ---

@dataclass
class WitnessFamily:
    """x -> f^n_x, unit vectors over points, with their chain provenance."""
    space: FiniteMetricSpace
    n: int
    vectors: Dict[int, SparseL1Vector] = field(repr=False)
    support_radius: int
    radii: List[int] = field(default_factory=list)
    terms: List[Fraction] = field(default_factory=list)
    records: List[StageRecord] = field(default_factory=list)
    chain: Optional[DecompositionChain] = field(default=None, repr=False)
    representatives: Dict[str, int] = field(default_factory=dict, repr=False)

    def __getitem__(self, point: int) -> SparseL1Vector:
        return self.vectors[point]

    def measured_support_radius(self) -> int:
        return max(
            (self.space.dist(x, s) for x, v in self.vectors.items() for s in v),
            default=0,
        )

    def to_dict(self, include_vectors: bool = False) -> dict:
        out = {
            "space": self.space.name,
            "n": self.n,
            "support_radius": self.support_radius,
            "radii": self.radii,
            "chain_radii": list(self.chain.radii) if self.chain is not None else [3 * r for r in self.radii],
            "terms": [str(t) for t in self.terms],
            "lebesgue_targets_met": all(r.lebesgue_target_met for r in self.records),
            "stages": [r.to_dict() for r in self.records],
        }
        if include_vectors:
            out["vectors"] = {
                self.space.label(x): [list(t) for t in self.vectors[x].to_triples()]
                for x in sorted(self.vectors)
            }
        return out


def close_pairs(space: FiniteMetricSpace, radius: int) -> List[Tuple[int, int]]:
    """All pairs x < y with d(x, y) <= radius."""
    xs, ys = np.nonzero(np.triu(space.matrix <= radius, k=1))
    return list(zip(xs.tolist(), ys.tolist()))


def _stage_term(profiles: Sequence[LebesgueProfile], n: int) -> Optional[Fraction]:
    """Worst averaging-bound term at distance n over the covers; None when some cover is too coarse."""
    worst = Fraction(0)
    for p in profiles:
        if p.saturated:
            continue
        if p.effective is None or p.effective < 2 * n + 1:
            return None
        worst = max(worst, bound_term(p.multiplicity, n, p.effective))
    return worst


def _multiply(g: Dict[int, SparseL1Vector], maps: Dict[str, OzawaMap], points) -> Dict[int, SparseL1Vector]:
    out = {}
    for x in points:
        entries = []
        for cell_key, weight in g[x].items():
            for child, value in maps[cell_key][x].items():
                entries.append((child, weight * value))
        out[x] = SparseL1Vector(entries)
    return out


def witness_from_chain(
    space: FiniteMetricSpace,
    n: int,
    stages: int = 2,
    strategy: DecompositionStrategy = DecompositionStrategy(),
    max_radius: Optional[int] = None,
    radii: Optional[Sequence[int]] = None,
    projection_samples: int = 200,
    seed: int = 0,
    workers: int = 1,
    chain: Optional[DecompositionChain] = None,
) -> WitnessFamily:
    """Build f^n on *space* from a chain of thickened covers.

    With *chain*, that chain is thickened by R_i = chain radius // 3 (or
    *radii*) and every stage must leave covers fine enough for scale n.
    Otherwise, without *radii*, stage i searches R_i upward from
    max(2n + 1, R_{i-1}) until every cover of the stage has Lebesgue term
    at most 1/(2^i n) (saturated covers contribute 0).  The unit norms,
    the support radius, the per-stage recursion and ||f_x - f_y|| <= 1/n
    for d(x, y) <= n are then checked exactly.
    """
    if n < 1:
        raise ConfigError(f"witness scale n must be >= 1, got {n}")
    if chain is not None:
        return _witness_on_chain(space, n, chain, radii, projection_samples, seed, workers)
    if radii is not None:
        radii = [int(r) for r in radii]
        if not radii or any(b < a for a, b in zip(radii, radii[1:])) or radii[0] < 1:
            raise ConfigError(f"witness radii must be positive and nondecreasing: {radii}")
        stages = len(radii)
    if stages < 1:
        raise ConfigError(f"witness needs at least one stage, got {stages}")
    limit = max(space.diameter(), 2 * n + 1) if max_radius is None else int(max_radius)

    root = space.whole(ROOT_KEY)
    parents = [root_cell(root)]
    steps: List[List[Decomposition]] = []
    chosen: List[int] = []
    terms: List[Fraction] = []
    records: List[StageRecord] = []
    stage_covers: List[Dict[str, Cover]] = []
    for i in range(1, stages + 1):
        budget = Fraction(1, 2 ** i * n)
        radius = radii[i - 1] if radii is not None else max(2 * n + 1, chosen[-1] if chosen else 0)
        while True:
            if radius > limit:
                raise ResourceError(
                    f"stage {i}: no radius up to {limit} meets the budget 1/{2 ** i * n} on {space.name}; "
                    f"use a larger ball or fewer stages"
                )
            decs = ordered_map(
                lambda cell, r=radius: strategy.apply(space, 3 * r, source=cell.core), parents, workers
            )
            children, covers = thicken_stage(space, parents, decs, radius, i)
            record, profiles = _record(i, radius, 3 * radius, decs, parents, children, covers)
            _check_core(record)
            term = _stage_term(profiles, n)
            if radii is not None:
                if term is None:
                    raise IntegrityError(
                        f"stage {i}: radius {radius} leaves a cover with effective parameter "
                        f"{record.min_effective} < {2 * n + 1}"
                    )
                break
            if term is not None and term <= budget:
                break
            logger.debug("stage %d: R=%d term=%s over budget %s", i, radius, term, budget)
            if radius == limit:
                radius = limit + 1
                continue
            radius = min(radius + max(1, radius // 4), limit)
        record.term = term
        logger.info(
            "witness n=%d stage %d: R=%d width=%d cells=%d saturated=%d/%d term<=%.3g",
            n, i, radius, record.width, len(children), record.saturated_covers, record.covers, float(term),
        )
        steps.append(list(decs))
        chosen.append(radius)
        terms.append(term)
        records.append(record)
        stage_covers.append(covers)
        parents = children

    chain = DecompositionChain.from_steps(space, [3 * r for r in chosen], steps)
    return _assemble(
        space, n, chain, chosen, terms, records, stage_covers, parents, projection_samples, seed, workers,
    )


def _witness_on_chain(
    space: FiniteMetricSpace,
    n: int,
    chain: DecompositionChain,
    radii: Optional[Sequence[int]],
    projection_samples: int,
    seed: int,
    workers: int,
) -> WitnessFamily:
    if chain.length < 1:
        raise ConfigError("witness needs a chain with at least one stage")
    if len(chain.root_piece) != len(space):
        raise StructuralError(f"chain root covers {len(chain.root_piece)} of {len(space)} points")
    radii = [r // 3 for r in chain.radii] if radii is None else [int(r) for r in radii]
    thick = thicken_chain(space, chain, radii)
    terms: List[Fraction] = []
    for record, covers in zip(thick.records, thick.covers):
        term = _stage_term([c.profile() for c in covers.values()], n)
        if term is None:
            raise IntegrityError(
                f"stage {record.index}: chain radius {record.chain_radius} leaves a cover with "
                f"effective parameter {record.min_effective} < {2 * n + 1}; too coarse for n={n}"
            )
        record.term = term
        terms.append(term)
    logger.info(
        "witness n=%d on %s: radii %s widths %s terms %s",
        n, space.name, radii, list(chain.widths), [str(t) for t in terms],
    )
    return _assemble(
        space, n, chain, radii, terms, thick.records, thick.covers, thick.terminal_cells,
        projection_samples, seed, workers,
    )


def _assemble(
    space: FiniteMetricSpace,
    n: int,
    chain: DecompositionChain,
    chosen: List[int],
    terms: List[Fraction],
    records: List[StageRecord],
    stage_covers: Sequence[Dict[str, Cover]],
    terminal: Sequence[Cell],
    projection_samples: int,
    seed: int,
    workers: int,
) -> WitnessFamily:
    """Multiply the per-cell averaging maps down the stages and check the result."""
    points = list(range(len(space)))
    pairs = close_pairs(space, n)

    g = {x: point_mass(ROOT_KEY) for x in points}
    for i, covers in enumerate(stage_covers):
        maps = {key: ozawa_map(cover, workers=workers) for key, cover in covers.items()}
        nxt = _multiply(g, maps, points)
        for x, y in pairs:
            before = g[x].distance(g[y])
            after = nxt[x].distance(nxt[y])
            if after > before + terms[i]:
                raise IntegrityError(
                    f"stage {i + 1}: ||g_x - g_y|| grew from {before} to {after} "
                    f"(x={space.label(x)}, y={space.label(y)}), more than {float(terms[i]):.6g}"
                )
        g = nxt

    representatives = {cell.key: int(cell.thick.indices[0]) for cell in terminal}
    vectors = {x: g[x].project(representatives) for x in points}
    _check_projection(space, g, vectors, projection_samples, seed)

    support = max(cell.thick.diameter() for cell in terminal)
    family = WitnessFamily(
        space=space, n=n, vectors=vectors, support_radius=support, radii=list(chosen),
        terms=terms, records=records, chain=chain, representatives=representatives,
    )
    _check_witness(family, pairs)
    return family


def _check_projection(space, g, vectors, samples: int, seed: int) -> None:
    size = len(space)
    if size < 2 or samples <= 0:
        return
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        x, y = (int(v) for v in rng.integers(0, size, 2))
        if vectors[x].distance(vectors[y]) > g[x].distance(g[y]):
            raise IntegrityError(f"projection expanded the pair ({space.label(x)}, {space.label(y)})")


def _check_witness(family: WitnessFamily, pairs: Sequence[Tuple[int, int]]) -> None:
    space = family.space
    for x, v in family.vectors.items():
        if not v.is_unit():
            raise IntegrityError(f"f_{space.label(x)} has norm {v.norm()}")
    reach = family.measured_support_radius()
    if reach > family.support_radius:
        raise IntegrityError(f"support radius {reach} > terminal mesh {family.support_radius}")
    bound = Fraction(1, family.n)
    for x, y in pairs:
        diff = family.vectors[x].distance(family.vectors[y])
        if diff > bound:
            raise IntegrityError(
                f"||f_{space.label(x)} - f_{space.label(y)}|| = {diff} > 1/{family.n}"
            )


def witness_sequence(space: FiniteMetricSpace, scales: Sequence[int], **kwargs) -> List[WitnessFamily]:
    """One witness family per scale, in the given order."""
    if not scales:
        raise ConfigError("witness scales must not be empty")
    if any(int(s) < 1 for s in scales):
        raise DomainError(f"witness scales must be positive: {list(scales)}")
    return [witness_from_chain(space, int(s), **kwargs) for s in scales]
