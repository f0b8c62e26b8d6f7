"""Products of decomposition chains over X x Y with the sum metric.

Stage i decomposes each product piece U x V into the families
{U'_j x V'_k}; two pieces of one such family differ in a coordinate
where they are more than R_i apart, so the family is R_i-disjoint in
d_X + d_Y.  The shorter chain is padded with trivial steps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import IntegrityError, StructuralError
from spaces.decomposition import ChainReport, Decomposition, DecompositionChain, verify_chain
from spaces.families import MetricFamily, SubsetRef
from spaces.space import FiniteMetricSpace, product_space
from utils.threading_utils import ordered_map
from .growth import GrowthFunction, product_growth

logger = logging.getLogger(__name__)


@dataclass
class ProductChain:
    """A chain on X x Y together with the component widths it came from."""
    chain: DecompositionChain
    growth: Optional[GrowthFunction]
    widths_x: List[int]
    widths_y: List[int]
    report: ChainReport

    def to_dict(self) -> dict:
        return {
            "space": self.chain.space.name,
            "radii": list(self.chain.radii),
            "widths": list(self.chain.widths),
            "widths_x": self.widths_x,
            "widths_y": self.widths_y,
            "terminal_mesh": self.chain.terminal_mesh,
            "growth": self.growth.format() if self.growth is not None else None,
            "report": self.report.to_dict(),
        }


def common_radii(cx: DecompositionChain, cy: DecompositionChain) -> List[int]:
    """The longer radii list; the shorter must be its prefix."""
    a, b = list(cx.radii), list(cy.radii)
    short, long = (a, b) if len(a) <= len(b) else (b, a)
    if long[: len(short)] != short:
        raise StructuralError(f"radii {a} and {b} differ beyond padding")
    return long


def padded_steps(chain: DecompositionChain, radii: Sequence[int]) -> Tuple[SubsetRef, List[List[Decomposition]]]:
    """Root piece and steps, extended by trivial steps ({U} for every piece U)."""
    root = chain.steps[0][0].source if chain.steps else chain.root_piece
    steps = [list(step) for step in chain.steps]
    inputs = [p for dec in steps[-1] for p in dec.pieces] if steps else [root]
    for radius in radii[len(steps):]:
        steps.append([Decomposition.trivial(p, radius) for p in inputs])
    return root, steps


def _box(space: FiniteMetricSpace, u: SubsetRef, v: SubsetRef, y_size: int) -> SubsetRef:
    members = np.add.outer(u.indices * y_size, v.indices).ravel()
    return SubsetRef(space, tuple(members.tolist()), tag=f"{u.tag}x{v.tag}")


def product_chain(
    cx: DecompositionChain,
    cy: DecompositionChain,
    s: Optional[GrowthFunction] = None,
    t: Optional[GrowthFunction] = None,
    space: Optional[FiniteMetricSpace] = None,
    workers: int = 1,
) -> ProductChain:
    """Chain on X x Y whose stage widths are the products of the component widths.

    *space* may pass a prebuilt ``product_space(X, Y)``.  With both growth
    functions given the result is also verified against s * t.
    """
    x, y = cx.space, cy.space
    if space is None:
        space = product_space(x, y)
    elif len(space) != len(x) * len(y):
        raise StructuralError(f"{space.name} is not the product of {x.name} and {y.name}")
    radii = common_radii(cx, cy)
    root_x, steps_x = padded_steps(cx, radii)
    root_y, steps_y = padded_steps(cy, radii)
    y_size = len(y)

    root = _box(space, root_x, root_y, y_size)
    root_arg = None if len(root) == len(space) else root
    inputs: List[Tuple[SubsetRef, SubsetRef, SubsetRef]] = [(root, root_x, root_y)]
    steps: List[List[Decomposition]] = []
    for i, radius in enumerate(radii):
        by_x: Dict[int, Decomposition] = {}
        by_y: Dict[int, Decomposition] = {}
        _link_positions(by_x, steps_x, i, root_x)
        _link_positions(by_y, steps_y, i, root_y)

        def decompose(item, radius=radius, by_x=by_x, by_y=by_y):
            piece, u, v = item
            du, dv = by_x[id(u)], by_y[id(v)]
            families = []
            parts = []
            for j, fam_u in enumerate(du.subfamilies):
                for k, fam_v in enumerate(dv.subfamilies):
                    boxes = []
                    for pu in fam_u.pieces:
                        for pv in fam_v.pieces:
                            box = _box(space, pu, pv, y_size)
                            boxes.append(box)
                            parts.append((box, pu, pv))
                    families.append(MetricFamily(tuple(boxes), tag=f"{piece.tag}/{j}{k}"))
            return Decomposition(piece, radius, tuple(families)), parts

        results = ordered_map(decompose, inputs, workers)
        steps.append([dec for dec, _ in results])
        inputs = [part for _, parts in results for part in parts]

    chain = DecompositionChain.from_steps(space, radii, steps, root=root_arg)
    widths_x = [max(d.n for d in step) for step in steps_x]
    widths_y = [max(d.n for d in step) for step in steps_y]
    expected = [a * b for a, b in zip(widths_x, widths_y)]
    if list(chain.widths) != expected:
        raise IntegrityError(f"product widths {list(chain.widths)} != {expected}")

    growth = product_growth(s, t) if s is not None and t is not None else None
    report = verify_chain(chain, growth if growth is not None else expected)
    if not report.passed:
        raise IntegrityError(f"product chain fails verification: {report.errors[:3]}")
    mesh_x = chain_mesh(steps_x, root_x)
    mesh_y = chain_mesh(steps_y, root_y)
    if chain.terminal_mesh > mesh_x + mesh_y:
        raise IntegrityError(
            f"product terminal mesh {chain.terminal_mesh} > {mesh_x} + {mesh_y}"
        )
    logger.info(
        "product %s: radii %s widths %s x %s = %s, terminal mesh %d",
        space.name, radii, widths_x, widths_y, list(chain.widths), chain.terminal_mesh,
    )
    return ProductChain(chain, growth, widths_x, widths_y, report)


def _link_positions(index: Dict[int, Decomposition], steps, i: int, root: SubsetRef) -> None:
    """Index step i by the stage-(i-1) piece objects, matched by position."""
    inputs = [root] if i == 0 else [p for dec in steps[i - 1] for p in dec.pieces]
    for piece, dec in zip(inputs, steps[i]):
        index[id(piece)] = dec


def chain_mesh(steps: Sequence[Sequence[Decomposition]], root: SubsetRef) -> int:
    pieces = [p for dec in steps[-1] for p in dec.pieces] if steps else [root]
    return max(p.diameter() for p in pieces)
