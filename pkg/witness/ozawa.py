"""The averaging map of a cover into l1 of its members.

For a cover with effective parameter lam,

    f_x = (1/lam) * sum_{k = lam+1}^{2 lam} xi(S_x(k)),

a unit vector supported on the members containing B(x, lam + 1).  Pairs
at distance D with 2D + 1 <= lam satisfy
||f_x - f_y|| <= 2 (1 - m^(-2D/lam)), m the multiplicity.  That right
side is real; it is turned into a rational upper bound (``bound_term``)
so every comparison stays exact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from mpmath import mp

from core.errors import DomainError
from utils.threading_utils import ordered_map
from .cover import Cover, effective_parameter
from .sparse import SparseL1Vector, xi

logger = logging.getLogger(__name__)

PRECISION_DPS = 50
BOUND_GUARD = Fraction(1, 10 ** 12)


def bound_term(multiplicity: int, distance: int, lam: int) -> Fraction:
    """Rational upper bound of 2(1 - m^(-2D/lam)), guard band included."""
    if lam < 1 or multiplicity < 1 or distance < 0:
        raise DomainError(f"bound term undefined for m={multiplicity} D={distance} lam={lam}")
    if distance == 0 or multiplicity == 1:
        return Fraction(0)
    with mp.workdps(PRECISION_DPS):
        value = 2 * (1 - mp.power(multiplicity, mp.mpf(-2 * distance) / lam))
        text = mp.nstr(value, 40)
    return Fraction(text) + BOUND_GUARD


@dataclass
class OzawaMap:
    """x -> f_x for every point of ``cover.domain``, keyed by point index."""
    cover: Cover
    lam: Optional[int]
    multiplicity: int
    vectors: Dict[int, SparseL1Vector] = field(repr=False)

    @property
    def saturated(self) -> bool:
        return self.lam is None

    @property
    def pair_range(self) -> int:
        """Largest D with 2D + 1 <= lam; unlimited (the diameter) when saturated."""
        if self.lam is None:
            return self.cover.domain.diameter()
        return (self.lam - 1) // 2

    def __getitem__(self, point: int) -> SparseL1Vector:
        return self.vectors[point]

    def bound(self, distance: int) -> Fraction:
        if self.lam is None:
            return Fraction(0)
        return bound_term(self.multiplicity, distance, self.lam)

    def check_bound(self, pairs: Optional[Iterable[Tuple[int, int]]] = None) -> List[str]:
        """Violations of the pair inequality; all in-range pairs when *pairs* is None."""
        space = self.cover.space
        if pairs is None:
            pairs = self.pairs_in_range()
        errors = []
        for x, y in pairs:
            d = space.dist(x, y)
            if d > self.pair_range:
                continue
            diff = self.vectors[x].distance(self.vectors[y])
            limit = self.bound(d)
            if diff > limit:
                errors.append(
                    f"||f_{space.label(x)} - f_{space.label(y)}|| = {diff} > {float(limit):.6g} (D={d})"
                )
        return errors

    def pairs_in_range(self) -> List[Tuple[int, int]]:
        domain = self.cover.domain.indices
        space = self.cover.space
        out = []
        for x in domain:
            for y in space.ball(int(x), self.pair_range, within=domain):
                if y > x:
                    out.append((int(x), int(y)))
        return out


def _averaged(cover: Cover, position: int, lam: int) -> SparseL1Vector:
    column = cover.thresholds()[:, position]
    keys = cover.keys
    total = SparseL1Vector()
    for k in range(lam + 1, 2 * lam + 1):
        members = np.flatnonzero(column >= k)
        if members.size == 0:
            raise DomainError(
                f"S_x(k) empty at x={cover.space.label(int(cover.domain.indices[position]))}, k={k}"
            )
        total = total + xi(keys[j] for j in members)
    return total.scale(Fraction(1, lam))


def ozawa_map(cover: Cover, lam: Optional[int] = None, workers: int = 1) -> OzawaMap:
    """Build the averaging map; *lam* defaults to the cover's effective parameter.

    A saturated cover maps every point to xi of its full members.
    """
    domain = cover.domain.indices
    m = cover.multiplicity()
    if cover.saturated and lam is None:
        full = [key for key, member in zip(cover.keys, cover.members) if len(member) == len(cover.domain)]
        constant = xi(full)
        return OzawaMap(cover, None, m, {int(x): constant for x in domain})

    lebesgue = cover.lebesgue_number()
    if lam is None:
        lam = effective_parameter(lebesgue)
        if lam is None:
            raise DomainError(f"cover Lebesgue number {lebesgue} admits no effective parameter (needs >= 2)")
    elif lam < 1 or 2 * lam + (lam - 1) // 2 > lebesgue:
        needed = 2 * lam + (lam - 1) // 2
        worst = int(np.argmin(cover.thresholds().max(axis=0)))
        raise DomainError(
            f"lam={lam} needs S_x(k) nonempty up to k={needed}; "
            f"fails at x={cover.space.label(int(domain[worst]))}, k={lebesgue + 1}"
        )

    vectors = ordered_map(lambda p: _averaged(cover, p, lam), range(domain.size), workers)
    logger.debug(
        "ozawa map on %s: |U|=%d members=%d lebesgue=%d lam=%d m=%d",
        cover.domain.tag, domain.size, len(cover.members), lebesgue, lam, m,
    )
    return OzawaMap(cover, lam, m, {int(x): v for x, v in zip(domain, vectors)})
