"""JSON schema for spaces, families, decompositions and chains.

Integers are written as JSON integers so round trips are exact, and
piece order is preserved everywhere.  Point ids keep their type: ints
and strings are stored as themselves, tuples as {"tuple": [...]}.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Hashable, List, Optional, Sequence

import numpy as np

from core.errors import ConfigError, StructuralError
from .decomposition import Decomposition, DecompositionChain
from .families import MetricFamily, SubsetRef
from .space import FiniteMetricSpace

SPACE_SCHEMA = "finite-metric-space/2"
CHAIN_SCHEMA = "decomposition-chain/1"


def point_to_json(point: Hashable):
    if point is None or isinstance(point, (bool, int, str)):
        return point
    if isinstance(point, tuple):
        return {"tuple": [point_to_json(p) for p in point]}
    if isinstance(point, np.integer):
        return int(point)
    raise StructuralError(f"point id {point!r} of type {type(point).__name__} has no JSON form")


def point_from_json(data) -> Hashable:
    if data is None or isinstance(data, (bool, int, str)):
        return data
    if isinstance(data, dict) and set(data) == {"tuple"}:
        return tuple(point_from_json(p) for p in data["tuple"])
    raise StructuralError(f"unreadable point id {data!r}")


def space_to_dict(space: FiniteMetricSpace) -> dict:
    return {
        "schema": SPACE_SCHEMA,
        "name": space.name,
        "points": [point_to_json(p) for p in space.points],
        "matrix": space.matrix.tolist(),
    }


def space_from_dict(data: dict) -> FiniteMetricSpace:
    _check_schema(data, SPACE_SCHEMA)
    points = [point_from_json(p) for p in data["points"]]
    return FiniteMetricSpace(points, data["matrix"], name=data.get("name", ""))


def piece_to_dict(piece: SubsetRef) -> dict:
    return {"tag": piece.tag, "members": list(piece.members)}


def piece_from_dict(space: FiniteMetricSpace, data: dict) -> SubsetRef:
    return SubsetRef(space, tuple(data["members"]), tag=data.get("tag", ""))


def family_to_dict(family: MetricFamily) -> dict:
    return {"tag": family.tag, "pieces": [piece_to_dict(p) for p in family.pieces]}


def family_from_dict(space: FiniteMetricSpace, data: dict) -> MetricFamily:
    return MetricFamily(
        tuple(piece_from_dict(space, p) for p in data["pieces"]),
        tag=data.get("tag", ""),
    )


def decomposition_to_dict(dec: Decomposition) -> dict:
    return {
        "source": piece_to_dict(dec.source),
        "radius": dec.radius,
        "subfamilies": [family_to_dict(f) for f in dec.subfamilies],
    }


def decomposition_from_dict(
    space: FiniteMetricSpace,
    data: dict,
    source: Optional[SubsetRef] = None,
) -> Decomposition:
    """Rebuild a decomposition; *source* substitutes the stored one when given."""
    stored = piece_from_dict(space, data["source"])
    if source is not None and source.members != stored.members:
        raise StructuralError("decomposition source does not match its chain stage")
    return Decomposition(
        source if source is not None else stored,
        int(data["radius"]),
        tuple(family_from_dict(space, f) for f in data["subfamilies"]),
    )


def chain_to_dict(chain: DecompositionChain) -> dict:
    return {
        "schema": CHAIN_SCHEMA,
        "space": space_to_dict(chain.space),
        "radii": list(chain.radii),
        "widths": list(chain.widths),
        "terminal_mesh": chain.terminal_mesh,
        "root": piece_to_dict(chain.root) if chain.root is not None else None,
        "steps": [[decomposition_to_dict(d) for d in step] for step in chain.steps],
    }


def chain_from_dict(data: dict, space: Optional[FiniteMetricSpace] = None) -> DecompositionChain:
    """Rebuild a chain; step sources are re-linked to the pieces of the previous stage."""
    _check_schema(data, CHAIN_SCHEMA)
    stored = space_from_dict(data["space"])
    if space is None:
        space = stored
    elif stored.points != space.points or not np.array_equal(stored.matrix, space.matrix):
        raise StructuralError(f"stored chain lives on {stored.name}, not on {space.name}")
    root = piece_from_dict(space, data["root"]) if data.get("root") else None
    inputs: Sequence[SubsetRef] = [root if root is not None else space.whole()]
    steps: List[List[Decomposition]] = []
    for step_data in data["steps"]:
        if len(step_data) != len(inputs):
            raise StructuralError(
                f"chain step lists {len(step_data)} witnesses for {len(inputs)} pieces"
            )
        step = [
            decomposition_from_dict(space, d, source=src)
            for d, src in zip(step_data, inputs)
        ]
        steps.append(step)
        inputs = [p for dec in step for p in dec.pieces]
    chain = DecompositionChain.from_steps(space, data["radii"], steps, root=root)
    if list(chain.widths) != list(data.get("widths", chain.widths)):
        raise StructuralError("stored widths disagree with the step witnesses")
    return chain


def save_chain(chain: DecompositionChain, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(chain_to_dict(chain), f, indent=2)


def load_chain(path: Path, space: Optional[FiniteMetricSpace] = None) -> DecompositionChain:
    """Read a chain; with *space* the stored space must match it and the chain is rebuilt on it."""
    with open(path, "r", encoding="utf-8") as f:
        return chain_from_dict(json.load(f), space)


def _check_schema(data: dict, expected: str) -> None:
    found = data.get("schema")
    if found != expected:
        raise ConfigError(f"expected schema {expected!r}, found {found!r}")
