"""Persistent cache of enumerated group balls, stored as JSON.

A cached ball keeps only the BFS words and the sphere-size table.  On
load the words are re-evaluated in the group model and the table is
recomputed; any disagreement discards the entry.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Hashable, List, Optional

from groups.ball import DEFAULT_ELEMENT_BUDGET, BallSpec, GroupBall, ball, enumerate_ball
from groups.model import GroupModel

logger = logging.getLogger(__name__)

CACHE_ENV = "DGLAB_CACHE_DIR"
CACHE_SCHEMA = "ball-cache/1"

# Store relative to the codebase root for portability
_DEFAULT_DIR = Path(__file__).resolve().parent.parent / ".ball_cache"


def default_cache_dir(configured: str = "") -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(configured) if configured else _DEFAULT_DIR


@dataclass
class CacheEntry:
    path: Path
    group: str
    describe: str
    radius: int
    sphere_sizes: List[int]


class BallCache:
    """Group balls keyed by (group cache key, radius).

    ``provide`` has the signature ``parse_space`` expects of a ball
    provider.
    """

    def __init__(self, directory: Optional[Path] = None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()
        self.hits = 0
        self.misses = 0

    def _path(self, model: GroupModel, radius: int) -> Path:
        digest = hashlib.sha256(f"{model.cache_key()}@{radius}".encode("utf-8")).hexdigest()
        return self.directory / f"{digest[:20]}.json"

    def provide(
        self, group: GroupModel, radius: int, budget: int = DEFAULT_ELEMENT_BUDGET, check_stable: bool = True,
    ) -> GroupBall:
        model = group.for_radius(radius)
        path = self._path(model, radius)
        spec = self._load(model, radius, path) if path.exists() else None
        if spec is not None:
            self.hits += 1
            logger.info("ball cache hit: %s @ %d", model.name, radius)
            return ball(model, radius, spec=spec)
        self.misses += 1
        spec = enumerate_ball(group, radius, budget, check_stable)
        self._store(spec, path)
        return ball(model, radius, spec=spec)

    def _store(self, spec: BallSpec, path: Path) -> None:
        data = {
            "schema": CACHE_SCHEMA,
            "group": spec.group.cache_key(),
            "describe": spec.group.describe(),
            "radius": spec.radius,
            "sphere_sizes": spec.sphere_sizes,
            "words": [list(w) for w in spec.words],
        }
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8") as f:
                json.dump(data, f, separators=(",", ":"))
            logger.debug("ball cache stored %s", path.name)
        except OSError as e:
            logger.warning("Failed to store ball in cache: %s", e)

    def _load(self, model: GroupModel, radius: int, path: Path) -> Optional[BallSpec]:
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, ValueError) as e:
            logger.warning("Unreadable cache entry %s: %s", path.name, e)
            return None
        if (data.get("schema") != CACHE_SCHEMA or data.get("group") != model.cache_key()
                or data.get("radius") != radius):
            logger.warning("Cache entry %s does not match %s @ %d; ignored", path.name, model.name, radius)
            return None
        spec = rebuild_spec(model, radius, data.get("words", []))
        if spec is None or spec.sphere_sizes != data.get("sphere_sizes"):
            logger.warning("Cache entry %s failed re-verification; re-enumerating", path.name)
            return None
        return spec

    def entries(self) -> List[CacheEntry]:
        out = []
        if not self.directory.exists():
            return out
        for path in sorted(self.directory.glob("*.json")):
            try:
                with open(path, "r", encoding="utf-8") as f:
                    data = json.load(f)
                out.append(CacheEntry(path, data["group"], data.get("describe", ""),
                                      data["radius"], data["sphere_sizes"]))
            except (OSError, ValueError, KeyError) as e:
                logger.warning("Skipping cache entry %s: %s", path.name, e)
        return out

    def clear(self) -> int:
        removed = 0
        for entry in self.directory.glob("*.json") if self.directory.exists() else []:
            entry.unlink()
            removed += 1
        logger.info("ball cache: removed %d entries from %s", removed, self.directory)
        return removed


def rebuild_spec(model: GroupModel, radius: int, words: List[List[int]]) -> Optional[BallSpec]:
    """BallSpec from BFS words, or None if they are not a valid level-sorted enumeration."""
    if not words or list(words[0]) != []:
        return None
    gens = len(model.generators)
    elements = []
    keys: List[Hashable] = []
    lengths: Dict[Hashable, int] = {}
    sphere_sizes: List[int] = []
    previous = None
    for raw in words:
        word = tuple(int(i) for i in raw)
        if any(i < 0 or i >= gens for i in word) or len(word) > 2 * radius:
            return None
        level = len(word)
        if level == len(sphere_sizes):
            sphere_sizes.append(0)
            previous = None
        elif level != len(sphere_sizes) - 1:
            return None
        g = model.evaluate(word)
        key = model.canonical_key(g)
        if key in lengths or (previous is not None and not previous < key):
            return None
        previous = key
        elements.append(g)
        keys.append(key)
        lengths[key] = level
        sphere_sizes[-1] += 1
    # finite groups run out of elements before depth 2N
    sphere_sizes.extend([0] * (2 * radius + 1 - len(sphere_sizes)))
    return BallSpec(model, radius, elements, [tuple(w) for w in words], keys, lengths, sphere_sizes)
