"""Word-metric balls of finitely generated groups.

``enumerate_ball(G, N)`` runs a breadth-first search to depth 2N so the
length table covers every g^-1 h with g, h in B(e, N); distances inside
the ball are then exact restrictions of the group's word metric.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ConfigError, IntegrityError, ResourceError
from spaces.space import DIST_DTYPE, FiniteMetricSpace
from .model import Element, GroupModel

logger = logging.getLogger(__name__)

DEFAULT_ELEMENT_BUDGET = 200_000


@dataclass
class BallSpec:
    """B(e, 2N) enumerated in BFS order, levels sorted by canonical key."""
    group: GroupModel
    radius: int
    elements: List[Element]
    words: List[Tuple[int, ...]]
    keys: List[Hashable]
    lengths: Dict[Hashable, int]
    sphere_sizes: List[int]
    _index: Dict[Hashable, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {k: i for i, k in enumerate(self.keys)}

    @property
    def depth(self) -> int:
        return 2 * self.radius

    def ball_size(self, r: int) -> int:
        """|B(e, r)| for r <= 2N."""
        return sum(self.sphere_sizes[: r + 1])

    def growth_series(self, up_to: Optional[int] = None) -> List[int]:
        top = self.depth if up_to is None else min(up_to, self.depth)
        return [self.ball_size(r) for r in range(top + 1)]

    def length_of(self, g: Element) -> int:
        key = self.group.canonical_key(g)
        try:
            return self.lengths[key]
        except KeyError:
            raise IntegrityError(
                f"{self.group.name}: element outside B(e, {self.depth})"
            ) from None

    def index_of(self, g: Element) -> Optional[int]:
        return self._index.get(self.group.canonical_key(g))

    def label(self, i: int) -> str:
        return self.group.word_label(self.words[i])


def enumerate_ball(
    group: GroupModel,
    radius: int,
    budget: int = DEFAULT_ELEMENT_BUDGET,
    check_stable: bool = True,
) -> BallSpec:
    """BFS to depth 2*radius; raises ResourceError when *budget* elements are exceeded."""
    if radius < 0:
        raise ConfigError(f"ball radius must be >= 0, got {radius}")
    model = group.for_radius(radius)
    spec = _bfs(model, radius, budget)
    partner = model.stabilization_partner() if check_stable else None
    if partner is not None:
        finer = _bfs(partner, radius, budget)
        if finer.sphere_sizes != spec.sphere_sizes:
            raise IntegrityError(
                f"{model.describe()}: sphere sizes {spec.sphere_sizes} change to "
                f"{finer.sphere_sizes} at the next depth; use a deeper model"
            )
        logger.debug("%s: sphere sizes stable under refinement", model.describe())
    return spec


def _bfs(group: GroupModel, radius: int, budget: int) -> BallSpec:
    gens = group.generators
    e = group.identity()
    e_key = group.canonical_key(e)
    elements: List[Element] = [e]
    words: List[Tuple[int, ...]] = [()]
    keys: List[Hashable] = [e_key]
    lengths: Dict[Hashable, int] = {e_key: 0}
    sphere_sizes = [1]
    frontier = [0]
    for depth in range(1, 2 * radius + 1):
        found: Dict[Hashable, Tuple[Element, Tuple[int, ...]]] = {}
        for i in frontier:
            g, w = elements[i], words[i]
            for gi, (_, s) in enumerate(gens):
                h = group.multiply(g, s)
                key = group.canonical_key(h)
                if key in lengths or key in found:
                    continue
                found[key] = (h, w + (gi,))
        if len(elements) + len(found) > budget:
            raise ResourceError(
                f"B(e, {2 * radius}) of {group.name} exceeds the element budget "
                f"of {budget}; shrink N or raise the budget"
            )
        frontier = []
        for key in sorted(found):
            h, w = found[key]
            frontier.append(len(elements))
            elements.append(h)
            words.append(w)
            keys.append(key)
            lengths[key] = depth
        sphere_sizes.append(len(found))
    logger.debug("%s: |B(e, %d)| = %d", group.name, 2 * radius, len(elements))
    return BallSpec(group, radius, elements, words, keys, lengths, sphere_sizes)


class GroupBall(FiniteMetricSpace):
    """B(e, N) as a finite metric space, d(g, h) = |g^-1 h|_S.

    Points are the shortest words recorded during enumeration, so labels
    in reports read like ``ab`` or ``x.[t]``.
    """

    def __init__(self, spec: BallSpec):
        group = spec.group
        count = spec.ball_size(spec.radius)
        elements = spec.elements[:count]
        matrix = group.distance_matrix(elements)
        if matrix is None:
            matrix = np.zeros((count, count), dtype=DIST_DTYPE)
            for i, g in enumerate(elements):
                g_inv = group.invert(g)
                for j in range(i + 1, count):
                    d = spec.length_of(group.multiply(g_inv, elements[j]))
                    matrix[i, j] = matrix[j, i] = d
        super().__init__(
            [spec.label(i) for i in range(count)],
            matrix,
            name=f"{group.name}@{spec.radius}",
        )
        self.spec = spec
        self.group = group
        self.elements = elements

    def element(self, i: int) -> Element:
        return self.elements[i]

    def index_of_element(self, g: Element) -> Optional[int]:
        i = self.spec.index_of(g)
        return i if i is not None and i < len(self) else None

    def word_length(self, i: int) -> int:
        return self.spec.lengths[self.spec.keys[i]]


def ball(
    group: GroupModel,
    radius: int,
    budget: int = DEFAULT_ELEMENT_BUDGET,
    spec: Optional[BallSpec] = None,
    check_stable: bool = True,
) -> GroupBall:
    """The metric space B(e, radius) of *group*."""
    if spec is None:
        spec = enumerate_ball(group, radius, budget, check_stable)
    return GroupBall(spec)


def growth_series(group: GroupModel, radius: int, budget: int = DEFAULT_ELEMENT_BUDGET) -> List[int]:
    """|B(e, r)| for r = 0..radius."""
    spec = enumerate_ball(group, (radius + 1) // 2, budget)
    return spec.growth_series(radius)


def check_left_invariance(
    space: GroupBall,
    samples: int = 10_000,
    rng: Optional[np.random.Generator] = None,
) -> List[str]:
    """Check d(xg, xh) = d(g, h) through the length table on sampled triples."""
    rng = rng if rng is not None else np.random.default_rng(0)
    group, spec = space.group, space.spec
    n = len(space)
    errors: List[str] = []
    for i, j, k in rng.integers(0, n, size=(samples, 3)):
        g, h, x = space.elements[i], space.elements[j], space.elements[k]
        xg, xh = group.multiply(x, g), group.multiply(x, h)
        moved = group.canonical_key(group.multiply(group.invert(xg), xh))
        if spec.lengths.get(moved) != space.dist(i, j):
            errors.append(f"d(xg, xh) != d(g, h) for g={space.label(i)}, h={space.label(j)}, x={space.label(k)}")
            break
    return errors


def check_subadditivity(space: GroupBall) -> List[str]:
    """|gh| <= |g| + |h| whenever gh lies in the enumerated range."""
    group, spec = space.group, space.spec
    errors: List[str] = []
    for i, g in enumerate(space.elements):
        for j, h in enumerate(space.elements):
            length = spec.lengths.get(group.canonical_key(group.multiply(g, h)))
            if length is not None and length > space.word_length(i) + space.word_length(j):
                errors.append(f"|gh| > |g| + |h| for g={space.label(i)}, h={space.label(j)}")
                return errors
    return errors
