"""Finitely supported nonnegative vectors in l1 with exact rational entries.

Zero entries are never stored.  Keys are opaque but homogeneous within a
vector (cover keys or point indices), so sorting them is always defined.
"""

from __future__ import annotations

from collections.abc import Mapping
from fractions import Fraction
from typing import Callable, Dict, Hashable, Iterable, Iterator, List, Tuple, Union

from core.errors import DomainError

Rational = Union[int, Fraction]


class SparseL1Vector(Mapping):
    """Immutable mapping key -> positive Fraction."""

    __slots__ = ("_data",)

    def __init__(self, entries: Union[Mapping, Iterable[Tuple[Hashable, Rational]]] = ()):
        if isinstance(entries, Mapping):
            entries = entries.items()
        data: Dict[Hashable, Fraction] = {}
        for key, value in entries:
            if value == 0:
                continue
            if not isinstance(value, Fraction):
                value = Fraction(value)
            total = data.get(key, 0) + value
            if total == 0:
                del data[key]
            else:
                data[key] = total
        if any(v < 0 for v in data.values()):
            raise DomainError("l1 witness vectors must be nonnegative")
        self._data = data

    # --- Mapping ---

    def __getitem__(self, key: Hashable) -> Fraction:
        return self._data.get(key, Fraction(0))

    def __iter__(self) -> Iterator[Hashable]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, key) -> bool:
        return key in self._data

    def __eq__(self, other) -> bool:
        if isinstance(other, SparseL1Vector):
            return self._data == other._data
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._data.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k!r}: {v}" for k, v in self.triples_sorted())
        return f"SparseL1Vector({{{inner}}})"

    # --- arithmetic ---

    @property
    def support(self) -> List[Hashable]:
        return sorted(self._data)

    def norm(self) -> Fraction:
        return sum(self._data.values(), Fraction(0))

    def is_unit(self) -> bool:
        return self.norm() == 1

    def distance(self, other: "SparseL1Vector") -> Fraction:
        """||self - other||_1, exact."""
        total = Fraction(0)
        for key, value in self._data.items():
            total += abs(value - other._data.get(key, 0))
        for key, value in other._data.items():
            if key not in self._data:
                total += value
        return total

    def scale(self, q: Rational) -> "SparseL1Vector":
        q = Fraction(q)
        if q < 0:
            raise DomainError("cannot scale a witness vector by a negative number")
        return SparseL1Vector((k, v * q) for k, v in self._data.items())

    def __add__(self, other: "SparseL1Vector") -> "SparseL1Vector":
        return SparseL1Vector(list(self._data.items()) + list(other._data.items()))

    def project(self, representative: Union[Mapping, Callable[[Hashable], Hashable]]) -> "SparseL1Vector":
        """Push mass along key -> representative(key); never increases distances."""
        lookup = representative.__getitem__ if isinstance(representative, Mapping) else representative
        return SparseL1Vector((lookup(k), v) for k, v in self._data.items())

    # --- serialization ---

    def triples_sorted(self) -> List[Tuple[Hashable, Fraction]]:
        return sorted(self._data.items())

    def to_triples(self) -> List[Tuple[Hashable, int, int]]:
        """Sorted (key, numerator, denominator) triples."""
        return [(k, v.numerator, v.denominator) for k, v in self.triples_sorted()]

    @classmethod
    def from_triples(cls, triples: Iterable[Tuple[Hashable, int, int]]) -> "SparseL1Vector":
        return cls((k, Fraction(num, den)) for k, num, den in triples)


def point_mass(key: Hashable) -> SparseL1Vector:
    return SparseL1Vector([(key, 1)])


def xi(keys: Iterable[Hashable]) -> SparseL1Vector:
    """The uniform unit vector on a nonempty finite set of keys."""
    keys = list(dict.fromkeys(keys))
    if not keys:
        raise DomainError("xi of the empty set is undefined")
    weight = Fraction(1, len(keys))
    return SparseL1Vector((k, weight) for k in keys)
