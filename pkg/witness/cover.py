"""Covers of a subspace: Lebesgue number, multiplicity and the effective parameter.

Balls are intrinsic to the covered subspace: B(x, k) means the points of
the domain within distance k of x.  For a member M and a point x,
t_M(x) = min{d(x, w) : w in domain, w not in M} - 1 is the largest k with
B(x, k) inside M (-1 when x is not in M, the domain diameter when M is
the whole domain).  Then S_x(k) = {M : t_M(x) >= k}.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Hashable, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import StructuralError
from spaces.families import SubsetRef

logger = logging.getLogger(__name__)


def effective_parameter(lebesgue: int) -> Optional[int]:
    """Largest lam >= 1 with 2 lam + floor((lam - 1)/2) <= lebesgue, None if there is none.

    The averaging map reads S_x(k + D) for k up to 2 lam and every D with
    2D + 1 <= lam, so all those sets must be nonempty.
    """
    best = None
    lam = 1
    while 2 * lam + (lam - 1) // 2 <= lebesgue:
        best = lam
        lam += 1
    return best


@dataclass
class LebesgueProfile:
    lebesgue: int
    multiplicity: int
    saturated: bool
    effective: Optional[int]

    def to_dict(self) -> dict:
        return {
            "lebesgue": self.lebesgue,
            "multiplicity": self.multiplicity,
            "saturated": self.saturated,
            "effective": self.effective,
        }


@dataclass
class Cover:
    """Members covering ``domain``; ``keys`` name the members in l1 vectors."""
    domain: SubsetRef
    members: Tuple[SubsetRef, ...]
    keys: Tuple[Hashable, ...] = ()
    _thresholds: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.members = tuple(self.members)
        if not self.members:
            raise StructuralError("a cover needs at least one member")
        if not self.keys:
            self.keys = tuple(range(len(self.members)))
        self.keys = tuple(self.keys)
        if len(self.keys) != len(self.members) or len(set(self.keys)) != len(self.keys):
            raise StructuralError("cover keys must be unique, one per member")
        domain = self.domain.indices
        space = self.domain.space
        for m in self.members:
            if m.space is not space:
                raise StructuralError("cover member lives in another space")
            if np.setdiff1d(m.indices, domain).size:
                raise StructuralError(f"cover member {m.tag!r} leaves the domain")
        covered = np.unique(np.concatenate([m.indices for m in self.members]))
        missing = np.setdiff1d(domain, covered)
        if missing.size:
            labels = ", ".join(space.label(i) for i in missing[:10])
            raise StructuralError(f"not a cover: points {labels} uncovered")

    @property
    def space(self):
        return self.domain.space

    def thresholds(self) -> np.ndarray:
        """t[j, p] = t_{M_j}(domain point p), capped at the domain diameter."""
        if self._thresholds is None:
            domain = self.domain.indices
            diam = self.domain.diameter()
            matrix = self.space.matrix
            t = np.full((len(self.members), domain.size), -1, dtype=np.int64)
            for j, m in enumerate(self.members):
                inside = np.searchsorted(domain, m.indices)
                outside = np.setdiff1d(domain, m.indices, assume_unique=True)
                if outside.size == 0:
                    t[j, inside] = diam
                else:
                    reach = matrix[np.ix_(m.indices, outside)].min(axis=1).astype(np.int64) - 1
                    t[j, inside] = np.minimum(reach, diam)
            t.setflags(write=False)
            self._thresholds = t
        return self._thresholds

    @property
    def saturated(self) -> bool:
        """Some member is the whole domain."""
        return any(len(m) == len(self.domain) for m in self.members)

    def lebesgue_number(self) -> int:
        return int(self.thresholds().max(axis=0).min())

    def core_lebesgue(self, core: SubsetRef) -> int:
        """Lebesgue number read only at the domain points of *core*."""
        positions = np.searchsorted(self.domain.indices, np.intersect1d(core.indices, self.domain.indices))
        if positions.size == 0:
            raise StructuralError(f"core {core.tag!r} misses the cover domain")
        return int(self.thresholds()[:, positions].max(axis=0).min())

    def multiplicity(self) -> int:
        counts = np.zeros(len(self.space), dtype=np.int64)
        for m in self.members:
            counts[m.indices] += 1
        return int(counts.max())

    def members_containing_ball(self, position: int, k: int) -> List[int]:
        """Member positions in S_x(k) for the domain point at *position*."""
        return np.flatnonzero(self.thresholds()[:, position] >= k).tolist()

    def profile(self) -> LebesgueProfile:
        lebesgue = self.lebesgue_number()
        return LebesgueProfile(
            lebesgue=lebesgue,
            multiplicity=self.multiplicity(),
            saturated=self.saturated,
            effective=None if self.saturated else effective_parameter(lebesgue),
        )


def lebesgue_number(domain: SubsetRef, members: Sequence[SubsetRef]) -> int:
    return Cover(domain, tuple(members)).lebesgue_number()


def multiplicity(members: Sequence[SubsetRef]) -> int:
    """Largest number of members sharing a point."""
    if not members:
        raise StructuralError("multiplicity of an empty family")
    counts = np.zeros(len(members[0].space), dtype=np.int64)
    for m in members:
        counts[m.indices] += 1
    return int(counts.max())
