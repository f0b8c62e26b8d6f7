"""Subsets, metric families, set distance, mesh and R-disjointness."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import DomainError, StructuralError
from .space import FiniteMetricSpace


@dataclass(frozen=True, eq=False)
class SubsetRef:
    """A nonempty index set into a space.

    Pieces compare by identity: two pieces with the same points but
    different parents are different members of a family.  ``tag`` records
    the provenance, so disjoint unions stay visible in reports.
    """
    space: FiniteMetricSpace
    members: Tuple[int, ...]
    tag: str = ""
    _array: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        members = tuple(sorted(set(int(i) for i in self.members)))
        if not members:
            raise DomainError("subsets must be nonempty")
        if members[0] < 0 or members[-1] >= len(self.space):
            raise StructuralError(
                f"subset index out of range for {self.space.name}"
            )
        arr = np.asarray(members, dtype=np.intp)
        arr.setflags(write=False)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "_array", arr)

    @property
    def indices(self) -> np.ndarray:
        return self._array

    @property
    def key(self) -> Tuple[str, Tuple[int, ...]]:
        return (self.tag, self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, index: int) -> bool:
        return index in self.members

    def diameter(self) -> int:
        return self.space.diameter(self._array)

    def intersect(self, indices: Sequence[int], tag: Optional[str] = None) -> Optional["SubsetRef"]:
        """Intersection with *indices*, or None when empty."""
        common = np.intersect1d(self._array, np.asarray(indices, dtype=np.intp))
        if common.size == 0:
            return None
        return SubsetRef(self.space, tuple(common.tolist()), tag=self.tag if tag is None else tag)


@dataclass(frozen=True)
class MetricFamily:
    """A finite list of pieces over one space; pieces may overlap."""
    pieces: Tuple[SubsetRef, ...]
    tag: str = ""

    def __post_init__(self):
        pieces = tuple(self.pieces)
        object.__setattr__(self, "pieces", pieces)
        if pieces:
            space = pieces[0].space
            if any(p.space is not space for p in pieces):
                raise StructuralError(f"family {self.tag!r} mixes parent spaces")

    @property
    def space(self) -> Optional[FiniteMetricSpace]:
        return self.pieces[0].space if self.pieces else None

    def __len__(self) -> int:
        return len(self.pieces)

    def __iter__(self) -> Iterator[SubsetRef]:
        return iter(self.pieces)

    def union(self) -> np.ndarray:
        """Sorted indices covered by the family."""
        if not self.pieces:
            return np.empty(0, dtype=np.intp)
        return np.unique(np.concatenate([p.indices for p in self.pieces]))


def set_distance(a: SubsetRef, b: SubsetRef) -> int:
    """d(A, B) = min over a in A, b in B of d(a, b)."""
    if a.space is not b.space:
        raise StructuralError("set distance between subsets of different spaces")
    return int(a.space.matrix[np.ix_(a.indices, b.indices)].min())


def mesh(family: MetricFamily) -> int:
    """Largest piece diameter; undefined for an empty family."""
    if not family.pieces:
        raise DomainError(f"mesh of the empty family {family.tag!r} is undefined")
    return max(p.diameter() for p in family.pieces)


def separations(family: MetricFamily) -> List[Tuple[int, int, int]]:
    """All (i, j, d(P_i, P_j)) for i < j."""
    pieces = family.pieces
    if len(pieces) < 2:
        return []
    matrix = pieces[0].space.matrix
    out: List[Tuple[int, int, int]] = []
    for i, p in enumerate(pieces[:-1]):
        reach = matrix[p.indices].min(axis=0)
        for j in range(i + 1, len(pieces)):
            out.append((i, j, int(reach[pieces[j].indices].min())))
    return out


def min_separation(family: MetricFamily) -> Optional[int]:
    """Minimum distance between distinct pieces, None with fewer than two pieces."""
    seps = separations(family)
    if not seps:
        return None
    return min(d for _, _, d in seps)


def is_r_disjoint(family: MetricFamily, radius: int) -> bool:
    """True iff every two distinct pieces are at distance strictly greater than *radius*."""
    sep = min_separation(family)
    return sep is None or sep > radius


def restrict_family(family: MetricFamily, indices: Sequence[int], tag: str = "") -> MetricFamily:
    """Pieces intersected with *indices*, empty intersections dropped."""
    kept = [p.intersect(indices) for p in family.pieces]
    return MetricFamily(tuple(p for p in kept if p is not None), tag=tag or family.tag)


def family_union(family: MetricFamily) -> np.ndarray:
    return family.union()
