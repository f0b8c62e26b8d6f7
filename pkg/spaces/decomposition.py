"""Decompositions, decomposition chains and their verifiers.

A ``Decomposition`` witnesses ``source ->(R, n) V``: n R-disjoint
subfamilies whose union covers the source.  A ``DecompositionChain``
strings such steps together: stage 0 is the whole space and every piece
of stage i-1 gets its own decomposition over pieces of stage i.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .families import MetricFamily, SubsetRef, mesh, min_separation
from .space import FiniteMetricSpace

logger = logging.getLogger(__name__)

WidthBound = Union[Callable[[float], int], Sequence[int]]


@dataclass(frozen=True)
class Decomposition:
    """``source`` (R, n)-decomposes over the pieces of ``subfamilies``."""
    source: SubsetRef
    radius: int
    subfamilies: Tuple[MetricFamily, ...]

    def __post_init__(self):
        object.__setattr__(self, "subfamilies", tuple(self.subfamilies))
        object.__setattr__(self, "radius", int(self.radius))

    @property
    def n(self) -> int:
        return len(self.subfamilies)

    @property
    def pieces(self) -> List[SubsetRef]:
        return [p for fam in self.subfamilies for p in fam.pieces]

    @classmethod
    def trivial(cls, piece: SubsetRef, radius: int) -> "Decomposition":
        """``piece`` decomposes into the single family {piece}."""
        return cls(piece, radius, (MetricFamily((piece,), tag=f"{piece.tag}/trivial"),))


@dataclass
class DecompositionReport:
    """Outcome of ``verify_decomposition``; failures are entries, not exceptions."""
    radius: int
    separations: List[Optional[int]] = field(default_factory=list)
    disjoint: List[bool] = field(default_factory=list)
    uncovered: List[int] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "separations": self.separations,
            "disjoint": self.disjoint,
            "uncovered": self.uncovered,
            "passed": self.passed,
            "errors": self.errors,
        }


def verify_decomposition(dec: Decomposition) -> DecompositionReport:
    """Check R-disjointness of each subfamily and that the pieces cover the source."""
    report = DecompositionReport(radius=dec.radius)
    if dec.n == 0:
        report.errors.append("decomposition has no subfamilies")
    for i, fam in enumerate(dec.subfamilies):
        if not fam.pieces:
            report.errors.append(f"subfamily {i} is empty")
        elif fam.space is not dec.source.space:
            report.errors.append(f"subfamily {i} lives in another space")
            report.separations.append(None)
            report.disjoint.append(False)
            continue
        sep = min_separation(fam)
        ok = sep is None or sep > dec.radius
        report.separations.append(sep)
        report.disjoint.append(ok)
        if not ok:
            report.errors.append(
                f"subfamily {i}: distance {sep} not > {dec.radius}"
            )

    source = dec.source.indices
    covered = np.unique(np.concatenate(
        [p.indices for p in dec.pieces] or [np.empty(0, dtype=np.intp)]
    ))
    missing = np.setdiff1d(source, covered)
    if missing.size:
        report.uncovered = missing.tolist()
        labels = ", ".join(dec.source.space.label(i) for i in missing[:10])
        report.errors.append(f"points {labels} uncovered")
    outside = np.setdiff1d(covered, source)
    if outside.size:
        report.errors.append(f"{outside.size} piece points lie outside the source")
    return report


@dataclass(frozen=True)
class DecompositionChain:
    """X ->(R1, n1) V1 ->(R2, n2) ... ->(Rk, nk) Vk with terminal mesh.

    ``steps[i]`` holds one Decomposition per piece of the family being
    decomposed at stage i (the whole space for i = 0), in piece order.
    """
    space: FiniteMetricSpace
    radii: Tuple[int, ...]
    stages: Tuple[MetricFamily, ...]
    steps: Tuple[Tuple[Decomposition, ...], ...]
    widths: Tuple[int, ...]
    terminal_mesh: int
    root: Optional[SubsetRef] = None

    @property
    def length(self) -> int:
        return len(self.stages)

    @property
    def root_piece(self) -> SubsetRef:
        return self.root if self.root is not None else self.space.whole()

    @property
    def terminal_family(self) -> MetricFamily:
        if self.stages:
            return self.stages[-1]
        return MetricFamily((self.root_piece,), tag="stage0")

    def stage_input(self, i: int) -> MetricFamily:
        """The family decomposed by step i (0-based)."""
        if i == 0:
            return MetricFamily((self.root_piece,), tag="stage0")
        return self.stages[i - 1]

    @classmethod
    def from_steps(
        cls,
        space: FiniteMetricSpace,
        radii: Sequence[int],
        steps: Sequence[Sequence[Decomposition]],
        root: Optional[SubsetRef] = None,
    ) -> "DecompositionChain":
        """Assemble stages, widths and terminal mesh from per-stage step witnesses."""
        stages: List[MetricFamily] = []
        widths: List[int] = []
        for i, step in enumerate(steps):
            pieces = [p for dec in step for p in dec.pieces]
            stages.append(MetricFamily(tuple(pieces), tag=f"stage{i + 1}"))
            widths.append(max((dec.n for dec in step), default=0))
        chain = cls(
            space=space,
            radii=tuple(int(r) for r in radii),
            stages=tuple(stages),
            steps=tuple(tuple(step) for step in steps),
            widths=tuple(widths),
            terminal_mesh=0,
            root=root,
        )
        object.__setattr__(chain, "terminal_mesh", mesh(chain.terminal_family))
        return chain

    @classmethod
    def empty(cls, space: FiniteMetricSpace, root: Optional[SubsetRef] = None) -> "DecompositionChain":
        """The length-0 chain: the root is already the terminal family."""
        return cls.from_steps(space, (), (), root=root)


@dataclass
class ChainReport:
    """Outcome of ``verify_chain``."""
    widths: List[int] = field(default_factory=list)
    bounds: List[int] = field(default_factory=list)
    terminal_mesh: Optional[int] = None
    stage_errors: Dict[int, List[str]] = field(default_factory=dict)
    errors: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "widths": self.widths,
            "bounds": self.bounds,
            "terminal_mesh": self.terminal_mesh,
            "passed": self.passed,
            "errors": self.errors,
        }


def _bound_at(bound: WidthBound, i: int, radius: int) -> int:
    if callable(bound):
        return int(bound(radius))
    return int(bound[i])


def verify_chain(chain: DecompositionChain, bound: WidthBound) -> ChainReport:
    """Check radii order, every step witness, stage widths against *bound*, terminal mesh."""
    report = ChainReport(widths=list(chain.widths))
    radii = list(chain.radii)
    if any(b < a for a, b in zip(radii, radii[1:])):
        report.errors.append(f"radii {tuple(radii)} not nondecreasing")
    if any(r < 0 for r in radii):
        report.errors.append("radii must be nonnegative")
    k = len(radii)
    if not (len(chain.stages) == len(chain.steps) == len(chain.widths) == k):
        report.errors.append(
            f"inconsistent chain: {k} radii, {len(chain.stages)} stages, "
            f"{len(chain.steps)} steps, {len(chain.widths)} widths"
        )
        return report
    if not callable(bound) and len(bound) < k:
        report.errors.append(f"width bound lists {len(bound)} values for {k} stages")
        return report

    for i in range(k):
        errs: List[str] = []
        inputs = chain.stage_input(i).pieces
        step = chain.steps[i]
        stage_ids = {id(p) for p in chain.stages[i].pieces}
        limit = _bound_at(bound, i, radii[i])
        report.bounds.append(limit)
        if chain.widths[i] > limit:
            errs.append(f"width {chain.widths[i]} > s({radii[i]})={limit}")
        if len(step) != len(inputs):
            errs.append(f"{len(step)} step witnesses for {len(inputs)} pieces")
        for j, (piece, dec) in enumerate(zip(inputs, step)):
            if dec.source is not piece and dec.source.members != piece.members:
                errs.append(f"witness {j} decomposes another source")
            if dec.radius < radii[i]:
                errs.append(f"witness {j} radius {dec.radius} < {radii[i]}")
            if dec.n > chain.widths[i]:
                errs.append(f"witness {j} uses {dec.n} > {chain.widths[i]} subfamilies")
            if any(id(p) not in stage_ids for p in dec.pieces):
                errs.append(f"witness {j} uses pieces outside stage {i + 1}")
            sub = verify_decomposition(dec)
            errs.extend(f"witness {j}: {e}" for e in sub.errors)
        if errs:
            report.stage_errors[i + 1] = errs
            report.errors.extend(f"stage {i + 1}: {e}" for e in errs)

    report.terminal_mesh = mesh(chain.terminal_family)
    if report.terminal_mesh != chain.terminal_mesh:
        report.errors.append(
            f"terminal mesh {chain.terminal_mesh} != measured {report.terminal_mesh}"
        )
    return report
