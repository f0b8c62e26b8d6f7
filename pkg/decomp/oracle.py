"""Exhaustive oracle for the minimal number of families on tiny spaces.

A decomposition with n families of D-bounded pieces is the same thing
as a coloring of the points with n colors in which every R-component of
a color class (points joined when at distance <= R) has diameter <= D:
the components are the pieces.  The search enumerates colorings as
restricted growth strings, pruning as soon as a component grows past D.
"""

from __future__ import annotations

import logging
from typing import List, Optional

import numpy as np

from core.errors import ConfigError, ResourceError
from spaces.decomposition import Decomposition
from spaces.families import MetricFamily, SubsetRef
from spaces.space import FiniteMetricSpace

logger = logging.getLogger(__name__)

DEFAULT_LIMIT = 12


def _component(matrix: np.ndarray, colors: List[int], members: List[int], start: int, radius: int) -> List[int]:
    color = colors[start]
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for u in members:
            if u not in seen and colors[u] == color and matrix[v, u] <= radius:
                seen.add(u)
                stack.append(u)
    return sorted(seen)


def _search(matrix: np.ndarray, order: List[int], radius: int, mesh_bound: int, k: int) -> Optional[List[int]]:
    n = len(order)
    colors = [-1] * matrix.shape[0]
    placed: List[int] = []

    def fits(v: int) -> bool:
        comp = _component(matrix, colors, placed, v, radius)
        idx = np.asarray(comp)
        return int(matrix[np.ix_(idx, idx)].max()) <= mesh_bound

    def extend(pos: int, used: int) -> bool:
        if pos == n:
            return True
        v = order[pos]
        placed.append(v)
        for c in range(min(used + 1, k)):
            colors[v] = c
            if fits(v) and extend(pos + 1, max(used, c + 1)):
                return True
        colors[v] = -1
        placed.pop()
        return False

    if extend(0, 0):
        return [colors[v] for v in order]
    return None


def _source_order(space: FiniteMetricSpace, source: Optional[SubsetRef]) -> List[int]:
    return list(range(len(space))) if source is None else list(source.members)


def exact_coloring(
    space: FiniteMetricSpace,
    radius: int,
    mesh_bound: int,
    source: Optional[SubsetRef] = None,
    limit: int = DEFAULT_LIMIT,
):
    """(n, coloring) with n minimal; the coloring is aligned with the source order."""
    if mesh_bound < 0 or radius < 0:
        raise ConfigError("exact search needs R >= 0 and D >= 0")
    order = _source_order(space, source)
    if len(order) > limit:
        raise ResourceError(
            f"exact search limited to {limit} points, got {len(order)}"
        )
    matrix = space.matrix
    for k in range(1, len(order) + 1):
        coloring = _search(matrix, order, radius, mesh_bound, k)
        if coloring is not None:
            logger.debug("exact: |X|=%d R=%d D=%d -> n=%d", len(order), radius, mesh_bound, k)
            return k, coloring
    raise AssertionError("singleton coloring with one color per point always fits")


def exact_min_families(
    space: FiniteMetricSpace,
    radius: int,
    mesh_bound: int,
    limit: int = DEFAULT_LIMIT,
    source: Optional[SubsetRef] = None,
) -> int:
    """Minimal n such that the space (R, n)-decomposes into pieces of diameter <= D."""
    n, _ = exact_coloring(space, radius, mesh_bound, source, limit)
    return n


def exact_decompose(
    space: FiniteMetricSpace,
    radius: int,
    mesh_bound: int,
    source: Optional[SubsetRef] = None,
    limit: int = DEFAULT_LIMIT,
) -> Decomposition:
    """An optimal decomposition realizing ``exact_min_families``."""
    piece_source = space.whole() if source is None else source
    order = list(piece_source.members)
    _, coloring = exact_coloring(space, radius, mesh_bound, piece_source, limit)
    matrix = space.matrix
    colors = [-1] * len(space)
    for v, c in zip(order, coloring):
        colors[v] = c
    families = []
    count = 0
    for color in sorted(set(coloring)):
        members = [v for v in order if colors[v] == color]
        done = set()
        pieces = []
        for v in members:
            if v in done:
                continue
            comp = _component(matrix, colors, members, v, radius)
            done.update(comp)
            pieces.append(SubsetRef(space, tuple(comp), tag=f"{piece_source.tag}/x{count}"))
            count += 1
        families.append(MetricFamily(tuple(pieces), tag=f"{piece_source.tag}/x:{color}"))
    return Decomposition(piece_source, radius, tuple(families))
