"""Restricted wreath products G wr H = F(H; G) x| H."""

from __future__ import annotations

from typing import Dict, List, Tuple

from .model import Element, GroupModel


class WreathProduct(GroupModel):
    """Lamplighter-style wreath product.

    An element is ``(f, h)`` where ``f`` is a tuple of ``(position, lamp)``
    pairs sorted by the canonical key of the position, lamps never the
    identity of G.  H acts on F(H; G) by translation, hf(h') = f(h^-1 h'),
    and ``(f1, h1)(f2, h2) = (f1 * h1f2, h1 h2)``.  Generators switch the
    lamp at the origin by a generator of G, or walk by a generator of H.
    """

    def __init__(self, lamps: GroupModel, base: GroupModel):
        super().__init__()
        self.lamps = lamps
        self.base = base
        self.name = f"wreath({lamps.name},{base.name})"

    # --- configurations ---

    def _normalize(self, entries: Dict) -> Tuple:
        """entries: base key -> (position, lamp); identity lamps dropped."""
        e_key = self.lamps.canonical_key(self.lamps.identity())
        kept = [
            (k, pos, lamp) for k, (pos, lamp) in entries.items()
            if self.lamps.canonical_key(lamp) != e_key
        ]
        kept.sort(key=lambda item: item[0])
        return tuple((pos, lamp) for _, pos, lamp in kept)

    def translate(self, f: Tuple, h: Element) -> Tuple:
        """The configuration hf: the lamp at p moves to h*p."""
        entries = {}
        for pos, lamp in f:
            moved = self.base.multiply(h, pos)
            entries[self.base.canonical_key(moved)] = (moved, lamp)
        return self._normalize(entries)

    def support(self, g: Element) -> List[Element]:
        return [pos for pos, _ in g[0]]

    def head(self, g: Element) -> Element:
        return g[1]

    # --- group structure ---

    def identity(self):
        return ((), self.base.identity())

    def multiply(self, g, h):
        f1, h1 = g
        f2, h2 = h
        entries = {self.base.canonical_key(pos): (pos, lamp) for pos, lamp in f1}
        for pos, lamp in self.translate(f2, h1):
            key = self.base.canonical_key(pos)
            if key in entries:
                entries[key] = (pos, self.lamps.multiply(entries[key][1], lamp))
            else:
                entries[key] = (pos, lamp)
        return (self._normalize(entries), self.base.multiply(h1, h2))

    def invert(self, g):
        f, h = g
        h_inv = self.base.invert(h)
        flipped = tuple((pos, self.lamps.invert(lamp)) for pos, lamp in f)
        return (self.translate(flipped, h_inv), h_inv)

    def canonical_key(self, g):
        f, h = g
        return (
            tuple((self.base.canonical_key(p), self.lamps.canonical_key(l)) for p, l in f),
            self.base.canonical_key(h),
        )

    def _raw_generators(self):
        origin = self.base.identity()
        gens = []
        for label, sigma in self.lamps.generators:
            gens.append((f"[{label}]", self._normalize({
                self.base.canonical_key(origin): (origin, sigma),
            })))
        gens = [(label, (f, origin)) for label, f in gens]
        for label, tau in self.base.generators:
            gens.append((label, ((), tau)))
        return gens

    def for_radius(self, radius: int) -> GroupModel:
        lamps, base = self.lamps.for_radius(radius), self.base.for_radius(radius)
        if lamps is self.lamps and base is self.base:
            return self
        return WreathProduct(lamps, base)

    def cache_key(self) -> str:
        return f"wreath({self.lamps.cache_key()},{self.base.cache_key()})"


def wreath(lamps: GroupModel, base: GroupModel) -> WreathProduct:
    return WreathProduct(lamps, base)
