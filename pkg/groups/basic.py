"""Free, free abelian, cyclic and direct-product group models."""

from __future__ import annotations

import string
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ConfigError
from .model import Element, GroupModel

_AXES = "xyzw"


class FreeGroup(GroupModel):
    """F_k on letters a, b, ...; words are reduced tuples of +-(i+1)."""

    def __init__(self, rank: int):
        super().__init__()
        if rank < 1:
            raise ConfigError(f"free group rank must be >= 1, got {rank}")
        self.rank = rank
        self.name = f"free:{rank}"

    def identity(self) -> Tuple[int, ...]:
        return ()

    def multiply(self, g, h):
        i = 0
        while i < min(len(g), len(h)) and g[len(g) - 1 - i] == -h[i]:
            i += 1
        return g[:len(g) - i] + h[i:]

    def invert(self, g):
        return tuple(-x for x in reversed(g))

    def canonical_key(self, g):
        return g

    def _raw_generators(self):
        letters = string.ascii_lowercase
        gens = []
        for i in range(self.rank):
            label = letters[i] if self.rank <= 26 else f"a{i}"
            gens.append((label, (i + 1,)))
            gens.append((label.upper(), (-(i + 1),)))
        return gens


class FreeAbelianGroup(GroupModel):
    """Z^d with the standard basis; its word metric is the l1 metric."""

    def __init__(self, dim: int):
        super().__init__()
        if dim < 1:
            raise ConfigError(f"free abelian rank must be >= 1, got {dim}")
        self.dim = dim
        self.name = f"z^{dim}"

    def identity(self):
        return (0,) * self.dim

    def multiply(self, g, h):
        return tuple(a + b for a, b in zip(g, h))

    def invert(self, g):
        return tuple(-a for a in g)

    def canonical_key(self, g):
        return g

    def _raw_generators(self):
        gens = []
        for i in range(self.dim):
            label = _AXES[i] if self.dim <= len(_AXES) else f"x{i}"
            unit = tuple(1 if j == i else 0 for j in range(self.dim))
            gens.append((label, unit))
            gens.append((label.upper(), self.invert(unit)))
        return gens

    def distance_matrix(self, elements: Sequence[Element]) -> Optional[np.ndarray]:
        coords = np.asarray(elements, dtype=np.int64).reshape(len(elements), self.dim)
        return np.abs(coords[:, None, :] - coords[None, :, :]).sum(axis=2)


class CyclicGroup(GroupModel):
    """Z/m with generators {1, m-1}."""

    def __init__(self, order: int):
        super().__init__()
        if order < 2:
            raise ConfigError(f"cyclic group order must be >= 2, got {order}")
        self.order = order
        self.name = f"cyclic:{order}"

    def identity(self):
        return 0

    def multiply(self, g, h):
        return (g + h) % self.order

    def invert(self, g):
        return (-g) % self.order

    def canonical_key(self, g):
        return g

    def _raw_generators(self):
        return [("t", 1), ("T", self.order - 1)]


class DirectProduct(GroupModel):
    """G x H with generators S_G x {e} and {e} x S_H (sum word metric)."""

    def __init__(self, left: GroupModel, right: GroupModel):
        super().__init__()
        self.left = left
        self.right = right
        self.name = f"product({left.name},{right.name})"

    def identity(self):
        return (self.left.identity(), self.right.identity())

    def multiply(self, g, h):
        return (self.left.multiply(g[0], h[0]), self.right.multiply(g[1], h[1]))

    def invert(self, g):
        return (self.left.invert(g[0]), self.right.invert(g[1]))

    def canonical_key(self, g):
        return (self.left.canonical_key(g[0]), self.right.canonical_key(g[1]))

    def _raw_generators(self):
        e_l, e_r = self.left.identity(), self.right.identity()
        gens: List[Tuple[str, Element]] = []
        for label, g in self.left.generators:
            gens.append((f"({label},e)", (g, e_r)))
        for label, h in self.right.generators:
            gens.append((f"(e,{label})", (e_l, h)))
        return gens

    def for_radius(self, radius: int) -> GroupModel:
        left, right = self.left.for_radius(radius), self.right.for_radius(radius)
        if left is self.left and right is self.right:
            return self
        return DirectProduct(left, right)

    def cache_key(self) -> str:
        return f"product({self.left.cache_key()},{self.right.cache_key()})"


def free(rank: int) -> FreeGroup:
    return FreeGroup(rank)


def free_abelian(dim: int) -> FreeAbelianGroup:
    return FreeAbelianGroup(dim)


def cyclic(order: int) -> CyclicGroup:
    return CyclicGroup(order)


def direct_product(left: GroupModel, right: GroupModel) -> DirectProduct:
    return DirectProduct(left, right)
