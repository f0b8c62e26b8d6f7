"""Grigorchuk's group acting on the binary tree, truncated at a finite depth.

Elements are permutations of the 2**k vertices of level k, stored as
int16 ``numpy`` arrays (vertex v has its first letter in the most
significant bit).  Generators follow the wreath recursion

    a = swap of the two subtrees,  b = (a, c),  c = (a, d),  d = (1, b).

The product ``g * h`` is the composition ``g o h``.  Faithfulness at depth
k is not assumed: ``stabilization_partner`` supplies the depth k+2 model
and ball enumeration insists that both depths give the same sphere sizes.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, Optional

import numpy as np

from core.errors import ConfigError
from .model import GroupModel

logger = logging.getLogger(__name__)

MIN_DEPTH = 12
MAX_DEPTH = 15


def default_depth(radius: int) -> int:
    """max(12, ceil(log2(4N)) + 6)."""
    return max(MIN_DEPTH, math.ceil(math.log2(max(4 * radius, 1))) + 6)


def level_actions(depth: int) -> Dict[str, np.ndarray]:
    """Permutations of a, b, c, d on level *depth* of the binary tree."""
    ident = np.zeros(1, dtype=np.int64)
    perms = {g: ident for g in "abcd"}
    for k in range(1, depth + 1):
        half = 1 << (k - 1)
        below = perms
        idle = np.arange(half, dtype=np.int64)
        perms = {
            "a": np.concatenate([idle + half, idle]),
            "b": np.concatenate([below["a"], below["c"] + half]),
            "c": np.concatenate([below["a"], below["d"] + half]),
            "d": np.concatenate([idle, below["b"] + half]),
        }
    return {g: p.astype(np.int16) for g, p in perms.items()}


class GrigorchukGroup(GroupModel):
    """Grigorchuk's group; ``depth=None`` picks the depth from the ball radius."""

    def __init__(self, depth: Optional[int] = None):
        super().__init__()
        if depth is not None and not (1 <= depth <= MAX_DEPTH):
            raise ConfigError(f"grigorchuk depth must be in 1..{MAX_DEPTH}, got {depth}")
        self.depth = depth
        self.name = "grigorchuk"
        self._actions = level_actions(depth) if depth is not None else None

    def _require_depth(self) -> int:
        if self.depth is None:
            raise ConfigError("grigorchuk model has no depth yet; call for_radius(N)")
        return self.depth

    def identity(self):
        return np.arange(1 << self._require_depth(), dtype=np.int16)

    def multiply(self, g, h):
        return g[h]

    def invert(self, g):
        inv = np.empty_like(g)
        inv[g] = np.arange(g.size, dtype=g.dtype)
        return inv

    def canonical_key(self, g):
        return g.tobytes()

    def _raw_generators(self):
        self._require_depth()
        return [(name, self._actions[name]) for name in "abcd"]

    def describe(self) -> str:
        depth = "auto" if self.depth is None else self.depth
        return f"grigorchuk(depth={depth}) S={{a, b, c, d}}"

    def for_radius(self, radius: int) -> GroupModel:
        if self.depth is not None:
            return self
        depth = min(default_depth(radius), MAX_DEPTH - 2)
        logger.debug("grigorchuk: depth %d for radius %d", depth, radius)
        return GrigorchukGroup(depth)

    def stabilization_partner(self) -> Optional[GroupModel]:
        depth = self._require_depth()
        if depth + 2 > MAX_DEPTH:
            return None
        return GrigorchukGroup(depth + 2)

    def cache_key(self) -> str:
        return f"grigorchuk@{self.depth if self.depth is not None else 'auto'}"


def grigorchuk(depth: Optional[int] = None) -> GrigorchukGroup:
    return GrigorchukGroup(depth)
