"""Abstract finitely generated group with canonical element forms."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import Any, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import IntegrityError

logger = logging.getLogger(__name__)

Element = Any


class GroupModel(ABC):
    """Element arithmetic, canonical keys and a finite symmetric generating set.

    Subclasses implement ``identity``, ``multiply``, ``invert``,
    ``canonical_key`` and ``_raw_generators``.  Canonical keys must be
    hashable and mutually comparable so ball levels can be sorted.
    """

    name: str = "group"

    def __init__(self):
        self._generators: Optional[List[Tuple[str, Element]]] = None

    # --- arithmetic ---

    @abstractmethod
    def identity(self) -> Element:
        ...

    @abstractmethod
    def multiply(self, g: Element, h: Element) -> Element:
        ...

    @abstractmethod
    def invert(self, g: Element) -> Element:
        ...

    @abstractmethod
    def canonical_key(self, g: Element) -> Hashable:
        ...

    @abstractmethod
    def _raw_generators(self) -> List[Tuple[str, Element]]:
        """Labelled generators; duplicates are dropped by ``generators``."""

    # --- generating set ---

    @property
    def generators(self) -> List[Tuple[str, Element]]:
        """Deduplicated symmetric generating set as (label, element) pairs."""
        if self._generators is None:
            seen = set()
            gens: List[Tuple[str, Element]] = []
            for label, g in self._raw_generators():
                key = self.canonical_key(g)
                if key in seen:
                    continue
                seen.add(key)
                gens.append((label, g))
            missing = [
                label for label, g in gens
                if self.canonical_key(self.invert(g)) not in seen
            ]
            if missing:
                raise IntegrityError(
                    f"{self.name}: generating set not closed under inverses ({missing})"
                )
            self._generators = gens
        return self._generators

    @property
    def generator_labels(self) -> List[str]:
        return [label for label, _ in self.generators]

    def describe(self) -> str:
        """Group name together with the generating set, as reported with every number."""
        return f"{self.name} S={{{', '.join(self.generator_labels)}}}"

    def word_label(self, word: Sequence[int]) -> str:
        """Printable form of a word given as generator indices."""
        if not word:
            return "e"
        labels = self.generator_labels
        parts = [labels[i] for i in word]
        sep = "" if all(len(p) == 1 for p in parts) else "."
        return sep.join(parts)

    def evaluate(self, word: Sequence[int]) -> Element:
        g = self.identity()
        gens = self.generators
        for i in word:
            g = self.multiply(g, gens[i][1])
        return g

    def equal(self, g: Element, h: Element) -> bool:
        return self.canonical_key(g) == self.canonical_key(h)

    # --- hooks ---

    def for_radius(self, radius: int) -> "GroupModel":
        """The concrete model used to enumerate B(e, 2*radius)."""
        return self

    def stabilization_partner(self) -> Optional["GroupModel"]:
        """A finer model whose balls must agree with this one, if any."""
        return None

    def distance_matrix(self, elements: Sequence[Element]) -> Optional[np.ndarray]:
        """Closed-form word metric on *elements*, or None to use the length table."""
        return None

    def cache_key(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"


def check_group_axioms(
    group: GroupModel,
    elements: Sequence[Element],
    samples: int = 1000,
    rng: Optional[np.random.Generator] = None,
) -> List[str]:
    """Identity, inverse and sampled associativity violations among *elements*."""
    rng = rng if rng is not None else np.random.default_rng(0)
    errors: List[str] = []
    e = group.identity()
    e_key = group.canonical_key(e)
    for g in elements:
        k = group.canonical_key(g)
        if group.canonical_key(group.multiply(e, g)) != k or group.canonical_key(group.multiply(g, e)) != k:
            errors.append(f"identity law fails at {k!r}")
            break
        if group.canonical_key(group.multiply(g, group.invert(g))) != e_key:
            errors.append(f"inverse law fails at {k!r}")
            break
    n = len(elements)
    if n:
        idx = rng.integers(0, n, size=(samples, 3))
        for i, j, l in idx:
            a, b, c = elements[i], elements[j], elements[l]
            left = group.multiply(group.multiply(a, b), c)
            right = group.multiply(a, group.multiply(b, c))
            if group.canonical_key(left) != group.canonical_key(right):
                errors.append(f"associativity fails on sample ({i}, {j}, {l})")
                break
    return errors
