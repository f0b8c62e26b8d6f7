"""Heuristic (R, n)-decompositions: greedy ball carving and lattice cubes.

Both strategies work on a source piece of a space with the intrinsic
distances of the ambient space, so chains can decompose the pieces of a
previous stage without building subspaces.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from core.enums import StrategyKind
from core.errors import ConfigError, DomainError
from spaces.decomposition import Decomposition
from spaces.families import MetricFamily, SubsetRef
from spaces.space import FiniteMetricSpace

logger = logging.getLogger(__name__)

TIE_BREAK = "lowest-index"


@dataclass(frozen=True)
class MeshRule:
    """Piece diameter bound as a function of R: ``kR`` or a fixed integer."""
    factor: int = 3
    fixed: Optional[int] = None

    def __call__(self, radius: int) -> int:
        return self.fixed if self.fixed is not None else self.factor * int(radius)

    def __str__(self) -> str:
        return str(self.fixed) if self.fixed is not None else f"{self.factor}R"

    @classmethod
    def parse(cls, text: str) -> "MeshRule":
        text = str(text).strip().upper()
        m = re.fullmatch(r"(\d*)R", text)
        if m:
            return cls(factor=int(m.group(1) or 1))
        if text.isdigit():
            return cls(fixed=int(text))
        raise ConfigError(f"invalid mesh rule {text!r}; use e.g. '3R' or a fixed integer")


def _source(space: FiniteMetricSpace, source: Optional[SubsetRef]) -> SubsetRef:
    if source is None:
        return space.whole()
    if source.space is not space:
        raise DomainError("source piece belongs to another space")
    return source


def carve_pieces(space: FiniteMetricSpace, source: SubsetRef, mesh_bound: int) -> List[np.ndarray]:
    """Partition *source* into intrinsic balls of radius floor(D/2), lowest index first."""
    if mesh_bound < 0:
        raise ConfigError(f"mesh bound must be >= 0, got {mesh_bound}")
    half = mesh_bound // 2
    uncovered = source.indices.copy()
    pieces: List[np.ndarray] = []
    while uncovered.size:
        center = int(uncovered[0])
        piece = space.ball(center, half, within=uncovered)
        pieces.append(piece)
        uncovered = np.setdiff1d(uncovered, piece, assume_unique=True)
    return pieces


def conflict_graph(space: FiniteMetricSpace, pieces: Sequence[np.ndarray], radius: int) -> nx.Graph:
    """Pieces are nodes; two pieces conflict iff their set distance is <= radius."""
    graph = nx.Graph()
    graph.add_nodes_from(range(len(pieces)))
    matrix = space.matrix
    for i, p in enumerate(pieces[:-1]):
        reach = matrix[p].min(axis=0)
        for j in range(i + 1, len(pieces)):
            if reach[pieces[j]].min() <= radius:
                graph.add_edge(i, j)
    return graph


def first_fit_colors(graph: nx.Graph) -> Dict[int, int]:
    """First-fit coloring visiting nodes in increasing order."""
    return nx.greedy_color(graph, strategy=lambda g, colors: sorted(g.nodes()))


def _assemble(
    source: SubsetRef,
    radius: int,
    pieces: Sequence[np.ndarray],
    colors: Sequence[int],
    label: str,
) -> Decomposition:
    space = source.space
    refs = [
        SubsetRef(space, tuple(p.tolist()), tag=f"{source.tag}/{label}{i}")
        for i, p in enumerate(pieces)
    ]
    families = []
    for color in sorted(set(colors)):
        members = tuple(r for r, c in zip(refs, colors) if c == color)
        families.append(MetricFamily(members, tag=f"{source.tag}/{label}:{color}"))
    return Decomposition(source, radius, tuple(families))


def greedy_decompose(
    space: FiniteMetricSpace,
    radius: int,
    mesh_bound: int,
    source: Optional[SubsetRef] = None,
) -> Decomposition:
    """Carve D-bounded pieces, then first-fit color the R-conflict graph."""
    source = _source(space, source)
    pieces = carve_pieces(space, source, mesh_bound)
    coloring = first_fit_colors(conflict_graph(space, pieces, radius))
    colors = [coloring[i] for i in range(len(pieces))]
    dec = _assemble(source, radius, pieces, colors, "g")
    logger.debug(
        "greedy: |source|=%d R=%d D=%d -> %d pieces, n=%d",
        len(source), radius, mesh_bound, len(pieces), dec.n,
    )
    return dec


def grid_decompose(
    space: FiniteMetricSpace,
    radius: int,
    mesh_bound: int,
    coords: Sequence[Tuple[int, ...]],
    source: Optional[SubsetRef] = None,
) -> Decomposition:
    """Cubes of side D//d + 1 colored by the parity of their cube index.

    Valid for l1 lattice pieces (Z^d balls, paths, grids): same-colored
    cubes are at least side + 1 apart, so the side must reach R.
    """
    source = _source(space, source)
    pts = np.asarray(coords, dtype=np.int64)
    if pts.ndim != 2 or pts.shape[0] != len(space):
        raise DomainError("grid strategy needs one coordinate tuple per point")
    dim = pts.shape[1]
    side = mesh_bound // dim + 1
    if side < radius:
        raise DomainError(
            f"grid cubes of side {side} (D={mesh_bound}, d={dim}) are not {radius}-disjoint by color"
        )
    cells = np.floor_divide(pts[source.indices], side)
    groups: Dict[Tuple[int, ...], List[int]] = {}
    for idx, cell in zip(source.indices.tolist(), map(tuple, cells.tolist())):
        groups.setdefault(cell, []).append(idx)
    order = sorted(groups)
    parity_codes = sorted({tuple(c % 2 for c in cell) for cell in order})
    code_color = {code: i for i, code in enumerate(parity_codes)}
    pieces = [np.asarray(groups[cell], dtype=np.intp) for cell in order]
    colors = [code_color[tuple(c % 2 for c in cell)] for cell in order]
    return _assemble(source, radius, pieces, colors, "c")


@dataclass(frozen=True)
class DecompositionStrategy:
    """A way of producing decompositions at a given R.

    ``mesh_rule`` turns R into the piece diameter bound D.  Ties are
    always broken by lowest point index.
    """
    kind: StrategyKind = StrategyKind.GREEDY
    mesh_rule: MeshRule = MeshRule()
    exact_limit: int = 12
    tie_break: str = TIE_BREAK

    @classmethod
    def from_names(cls, kind: str, mesh_rule: str = "3R", exact_limit: int = 12) -> "DecompositionStrategy":
        try:
            parsed = StrategyKind.from_string(kind)
        except ValueError:
            raise ConfigError(f"unknown strategy {kind!r}") from None
        return cls(parsed, MeshRule.parse(mesh_rule), exact_limit)

    def mesh_for(self, radius: int) -> int:
        return self.mesh_rule(radius)

    def apply(
        self,
        space: FiniteMetricSpace,
        radius: int,
        source: Optional[SubsetRef] = None,
        coords: Optional[Sequence[Tuple[int, ...]]] = None,
    ) -> Decomposition:
        mesh_bound = self.mesh_for(radius)
        if self.kind is StrategyKind.GREEDY:
            return greedy_decompose(space, radius, mesh_bound, source)
        if self.kind is StrategyKind.GRID:
            if coords is None:
                from groups.factory import lattice_coordinates
                coords = lattice_coordinates(space)
            if coords is None:
                raise DomainError(f"grid strategy needs lattice coordinates; {space.name} has none")
            return grid_decompose(space, radius, mesh_bound, coords, source)
        from .oracle import exact_decompose
        return exact_decompose(space, radius, mesh_bound, source, limit=self.exact_limit)

    def describe(self) -> str:
        return f"{self.kind.value}(D={self.mesh_rule})"


