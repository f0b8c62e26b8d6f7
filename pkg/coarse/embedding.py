"""Quasi-isometric embeddings and pullbacks of families, decompositions and chains.

An (L, C) embedding satisfies L d(x, y) - C < d(fx, fy) < L d(x, y) + C
on distinct pairs.  With C = 0 both inequalities are read as equalities
(d(fx, fy) = L d(x, y)), the only way the strict form can hold.
All bounds are exact ``Fraction`` values compared against integers.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import ConfigError, DomainError, IntegrityError, StructuralError
from spaces.decomposition import (
    ChainReport,
    Decomposition,
    DecompositionChain,
    verify_chain,
    verify_decomposition,
)
from spaces.families import MetricFamily, SubsetRef, is_r_disjoint, mesh, min_separation
from spaces.space import FiniteMetricSpace
from .growth import GrowthFunction, compose_affine

logger = logging.getLogger(__name__)

FULL_CHECK_LIMIT = 2000
PULLBACK_SUFFIX = "^*"

Rational = Union[int, Fraction]


def _fraction_str(q: Optional[Fraction]) -> Optional[str]:
    return None if q is None else str(q)


@dataclass(frozen=True)
class QIEmbedding:
    """f: X -> Y given by target indices, with constants (L, C)."""
    source: FiniteMetricSpace
    target: FiniteMetricSpace
    mapping: Tuple[int, ...]
    L: Fraction
    C: Fraction
    name: str = "f"
    _array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mapping = tuple(int(i) for i in self.mapping)
        if len(mapping) != len(self.source):
            raise StructuralError(
                f"{self.name}: {len(mapping)} images for {len(self.source)} points"
            )
        if mapping and (min(mapping) < 0 or max(mapping) >= len(self.target)):
            raise StructuralError(f"{self.name}: image index outside {self.target.name}")
        L, C = Fraction(self.L), Fraction(self.C)
        if L <= 0 or C < 0:
            raise ConfigError(f"{self.name}: need L > 0 and C >= 0, got L={L} C={C}")
        arr = np.asarray(mapping, dtype=np.intp)
        arr.setflags(write=False)
        object.__setattr__(self, "mapping", mapping)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "_array", arr)

    @property
    def indices(self) -> np.ndarray:
        return self._array

    def image(self) -> np.ndarray:
        return np.unique(self._array)

    def preimage(self, indices: Sequence[int]) -> np.ndarray:
        """Source indices whose image lies in *indices*."""
        return np.flatnonzero(np.isin(self._array, np.asarray(indices, dtype=np.intp)))

    def verify(
        self,
        samples: int = 20_000,
        rng: Optional[np.random.Generator] = None,
    ) -> List[str]:
        """Violations of the (L, C) inequalities; exhaustive on small sources."""
        n = len(self.source)
        if n <= FULL_CHECK_LIMIT:
            i, j = np.triu_indices(n, k=1)
        else:
            rng = rng if rng is not None else np.random.default_rng(0)
            i, j = rng.integers(0, n, size=(2, samples))
            keep = i != j
            i, j = i[keep], j[keep]
        d = self.source.matrix[i, j].astype(np.int64)
        d_img = self.target.matrix[self._array[i], self._array[j]].astype(np.int64)
        # scale L = p/q and C = r/s to integers: compare q*s*d' with p*s*d -/+ r*q
        p, q = self.L.numerator, self.L.denominator
        r, s = self.C.numerator, self.C.denominator
        lhs = q * s * d_img
        centre = p * s * d
        slack = r * q
        if self.C == 0:
            bad = np.flatnonzero(lhs != centre)
        else:
            bad = np.flatnonzero((lhs <= centre - slack) | (lhs >= centre + slack))
        errors: List[str] = []
        for k in bad[:5]:
            a, b = int(i[k]), int(j[k])
            errors.append(
                f"{self.name}: d({self.source.label(a)}, {self.source.label(b)})={int(d[k])} "
                f"maps to {int(d_img[k])}, outside ({self.L}, {self.C}) bounds"
            )
        if bad.size > 5:
            errors.append(f"{self.name}: {bad.size - 5} further violations")
        return errors

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "source": self.source.name,
            "target": self.target.name,
            "L": str(self.L),
            "C": str(self.C),
            "mapping": list(self.mapping),
        }


def embedding_from_function(
    source: FiniteMetricSpace,
    target: FiniteMetricSpace,
    fn: Callable[[Hashable], Hashable],
    L: Rational,
    C: Rational,
    name: str = "f",
) -> QIEmbedding:
    """Build an embedding from a function on point ids."""
    mapping = tuple(target.index_of(fn(p)) for p in source.points)
    return QIEmbedding(source, target, mapping, Fraction(L), Fraction(C), name=name)


def identity_embedding(space: FiniteMetricSpace, L: Rational = 1, C: Rational = 0) -> QIEmbedding:
    return QIEmbedding(space, space, tuple(range(len(space))), Fraction(L), Fraction(C), name="id")


def is_quasi_isometry(f: QIEmbedding) -> List[str]:
    """``verify()`` plus coarse density: every y lies within distance < C of f(X)."""
    errors = f.verify()
    reach = f.target.matrix[f.image()].min(axis=0)
    far = np.flatnonzero(reach > f.C) if f.C == 0 else np.flatnonzero(reach >= f.C)
    if far.size:
        labels = ", ".join(f.target.label(y) for y in far[:5])
        errors.append(f"{f.name}: image not {f.C}-dense, far points {labels}")
    return errors


def pulled_radius(radius: int, L: Fraction, C: Fraction) -> int:
    """Largest integer r <= (R - C)/L, never below 0.

    Pulled-back pieces are strictly more than (R - C)/L apart, so integer
    distances exceed floor((R - C)/L) as well.
    """
    return max(0, math.floor((Fraction(radius) - C) / L))


# --- families ---

@dataclass
class PullbackResult:
    """A pulled-back family with its certified and measured constants."""
    family: MetricFamily
    radius: int
    certified_separation: Fraction
    certified_mesh: Fraction
    actual_separation: Optional[int]
    actual_mesh: Optional[int]
    dropped: int = 0

    @property
    def integer_radius(self) -> int:
        return max(0, math.floor(self.certified_separation))

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "pieces": len(self.family),
            "dropped": self.dropped,
            "certified_separation": _fraction_str(self.certified_separation),
            "certified_mesh": _fraction_str(self.certified_mesh),
            "actual_separation": self.actual_separation,
            "actual_mesh": self.actual_mesh,
            "integer_radius": self.integer_radius,
        }


def _pull_pieces(
    source: FiniteMetricSpace,
    mapping: np.ndarray,
    pieces: Sequence[SubsetRef],
    within: Optional[np.ndarray] = None,
) -> List[Optional[SubsetRef]]:
    """f^-1(P) for each piece (None when empty), optionally restricted to *within*."""
    out: List[Optional[SubsetRef]] = []
    for piece in pieces:
        pre = np.flatnonzero(np.isin(mapping, piece.indices))
        if within is not None:
            pre = np.intersect1d(pre, within)
        out.append(
            SubsetRef(source, tuple(pre.tolist()), tag=piece.tag + PULLBACK_SUFFIX)
            if pre.size else None
        )
    return out


def pullback_family(f: QIEmbedding, family: MetricFamily, radius: int, mesh_bound: int) -> PullbackResult:
    """f^-1(V) with empty preimages dropped, certified (R - C)/L-disjoint with mesh <= (D + C)/L."""
    if family.space is not None and family.space is not f.target:
        raise StructuralError(f"family {family.tag!r} does not live in {f.target.name}")
    if not is_r_disjoint(family, radius):
        raise DomainError(f"family {family.tag!r} is not {radius}-disjoint")
    if family.pieces and mesh(family) > mesh_bound:
        raise DomainError(f"family {family.tag!r} has mesh {mesh(family)} > {mesh_bound}")

    pulled = _pull_pieces(f.source, f.indices, family.pieces)
    kept = tuple(p for p in pulled if p is not None)
    result = PullbackResult(
        family=MetricFamily(kept, tag=family.tag + PULLBACK_SUFFIX),
        radius=radius,
        certified_separation=(Fraction(radius) - f.C) / f.L,
        certified_mesh=(Fraction(mesh_bound) + f.C) / f.L,
        actual_separation=min_separation(MetricFamily(kept)) if kept else None,
        actual_mesh=mesh(MetricFamily(kept)) if kept else None,
        dropped=len(pulled) - len(kept),
    )
    _certify_family(f, result)
    logger.debug(
        "pullback %s: %d pieces (%d dropped), separation %s > %s, mesh %s <= %s",
        family.tag, len(kept), result.dropped, result.actual_separation,
        result.certified_separation, result.actual_mesh, result.certified_mesh,
    )
    return result


def _certify_family(f: QIEmbedding, result: PullbackResult) -> None:
    if result.actual_separation is not None and not result.actual_separation > result.certified_separation:
        raise IntegrityError(
            f"{f.name}: pulled-back separation {result.actual_separation} not > "
            f"{result.certified_separation}; the map violates its ({f.L}, {f.C}) contract"
        )
    if result.actual_mesh is not None:
        ok = result.actual_mesh <= result.certified_mesh
        if f.C > 0:
            ok = result.actual_mesh < result.certified_mesh
        if not ok:
            raise IntegrityError(
                f"{f.name}: pulled-back mesh {result.actual_mesh} exceeds "
                f"{result.certified_mesh}; the map violates its ({f.L}, {f.C}) contract"
            )


# --- decompositions ---

def preimage_decomposition(
    source_space: FiniteMetricSpace,
    mapping: np.ndarray,
    dec: Decomposition,
    radius: int,
    source: SubsetRef,
) -> Tuple[Decomposition, Dict[int, SubsetRef]]:
    """Pull every subfamily of *dec* back along *mapping* onto *source*.

    Empty pieces and empty subfamilies are dropped.  Returns the new
    decomposition and a map from id(old piece) to its preimage.
    """
    links: Dict[int, SubsetRef] = {}
    families = []
    for fam in dec.subfamilies:
        pulled = _pull_pieces(source_space, mapping, fam.pieces, within=source.indices)
        kept = []
        for old, new in zip(fam.pieces, pulled):
            if new is not None:
                links[id(old)] = new
                kept.append(new)
        if kept:
            families.append(MetricFamily(tuple(kept), tag=fam.tag + PULLBACK_SUFFIX))
    return Decomposition(source, radius, tuple(families)), links


def actual_radius(dec: Decomposition) -> Optional[int]:
    """Largest R at which every subfamily is still R-disjoint (None without pairs)."""
    seps = [min_separation(fam) for fam in dec.subfamilies]
    seps = [s for s in seps if s is not None]
    return min(seps) - 1 if seps else None


def pullback_decomposition(
    f: QIEmbedding,
    dec: Decomposition,
    source: Optional[SubsetRef] = None,
) -> Decomposition:
    """f^-1 of a verified decomposition at integer radius floor((R - C)/L)."""
    report = verify_decomposition(dec)
    if not report.passed:
        raise DomainError(f"decomposition to pull back fails verification: {report.errors[:3]}")
    if dec.source.space is not f.target:
        raise StructuralError(f"decomposition does not live in {f.target.name}")
    pre = f.preimage(dec.source.indices)
    if source is None:
        if pre.size == 0:
            raise DomainError(f"source {dec.source.tag!r} misses the image of {f.name}")
        source = SubsetRef(f.source, tuple(pre.tolist()), tag=dec.source.tag + PULLBACK_SUFFIX)
    elif source.members != tuple(pre.tolist()):
        raise StructuralError("given source is not the preimage of the decomposed set")
    for fam in dec.subfamilies:
        pullback_family(f, fam, dec.radius, mesh(fam))
    pulled, _ = preimage_decomposition(
        f.source, f.indices, dec, pulled_radius(dec.radius, f.L, f.C), source,
    )
    check = verify_decomposition(pulled)
    if not check.passed:
        raise IntegrityError(f"pulled-back decomposition fails verification: {check.errors[:3]}")
    return pulled


# --- chains ---

@dataclass
class PulledChain:
    """A pulled-back chain with its transformed growth bound.

    ``slack`` is the extra constant folded into the bound when the floored
    radii make t(x) = s(Lx + C) too small: the bound is then s(Lx + C + slack).
    """
    chain: DecompositionChain
    growth: GrowthFunction
    certified_radii: List[Fraction]
    report: ChainReport
    slack: Fraction = Fraction(0)

    def to_dict(self) -> dict:
        return {
            "growth": self.growth.format(),
            "slack": str(self.slack),
            "radii": list(self.chain.radii),
            "certified_radii": [str(q) for q in self.certified_radii],
            "widths": list(self.chain.widths),
            "terminal_mesh": self.chain.terminal_mesh,
            "report": self.report.to_dict(),
        }


def pull_chain_along(
    source_space: FiniteMetricSpace,
    mapping: np.ndarray,
    chain: DecompositionChain,
    radii: Sequence[int],
    root: Optional[SubsetRef] = None,
) -> DecompositionChain:
    """Pull every step of *chain* back along *mapping*, stage radii given by *radii*.

    Pieces whose preimage is empty disappear together with their step
    witness; surviving pieces keep the identity links between stages.
    """
    pre = np.flatnonzero(np.isin(mapping, chain.root_piece.indices))
    if root is None:
        if pre.size == 0:
            raise DomainError(f"{chain.space.name}: chain root misses the image")
        root = SubsetRef(source_space, tuple(pre.tolist()), tag=chain.root_piece.tag + PULLBACK_SUFFIX)
    links: Dict[int, SubsetRef] = {}
    steps: List[List[Decomposition]] = []
    for i, step in enumerate(chain.steps):
        pulled_step = []
        for piece, dec in zip(chain.stage_input(i).pieces, step):
            target = root if i == 0 else links.get(id(piece))
            if target is None:
                continue
            pulled, new_links = preimage_decomposition(source_space, mapping, dec, radii[i], target)
            links.update(new_links)
            pulled_step.append(pulled)
        steps.append(pulled_step)
    whole = len(root) == len(source_space)
    return DecompositionChain.from_steps(source_space, radii, steps, root=None if whole else root)


def pullback_chain(f: QIEmbedding, chain: DecompositionChain, s: GrowthFunction) -> PulledChain:
    """Pull back every stage; the new bound is t(x) = s(Lx + C).

    Stage radii are r_i = floor((R_i - C)/L) and the result is verified
    against t at those stored radii.  Since L r_i + C may fall below R_i,
    t can undershoot the widths there; the bound then becomes
    s(Lx + C + L), which is >= s(R_i) at r_i and keeps the growth class.
    """
    if chain.space is not f.target:
        raise StructuralError(f"chain does not live in {f.target.name}")
    given = verify_chain(chain, s)
    if not given.passed:
        raise DomainError(f"chain to pull back fails verification against {s}: {given.errors[:3]}")
    certified = [(Fraction(r) - f.C) / f.L for r in chain.radii]
    radii = [pulled_radius(r, f.L, f.C) for r in chain.radii]
    pulled = pull_chain_along(f.source, f.indices, chain, radii)

    slack = Fraction(0)
    t = compose_affine(s, f.L, f.C)
    report = verify_chain(pulled, t)
    if not report.passed:
        slack = f.L
        t = compose_affine(s, f.L, f.C + slack)
        report = verify_chain(pulled, t)
        logger.debug("pullback along %s: floored radii need slack %s in the bound", f.name, slack)
    if not report.passed:
        raise IntegrityError(f"pulled-back chain fails verification against {t}: {report.errors[:3]}")
    bound = (Fraction(chain.terminal_mesh) + f.C) / f.L
    if pulled.terminal_mesh > bound:
        raise IntegrityError(f"pulled-back terminal mesh {pulled.terminal_mesh} exceeds {bound}")
    logger.info(
        "pullback chain along %s: radii %s -> %s, widths %s, bound %s",
        f.name, list(chain.radii), radii, list(pulled.widths), t,
    )
    return PulledChain(pulled, t, certified, report, slack)
