"""Finite-scale dimension-growth profiles.

For each ball radius N and each R the profile records the width of the
best heuristic decomposition into pieces of diameter D(R), and the exact
minimum where the ball is small enough.  This is a finite-scale
estimator of d_X(R), never its asymptotic value.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

from core.enums import StrategyKind
from core.errors import DomainError, IntegrityError, ResourceError
from spaces.space import FiniteMetricSpace
from utils.threading_utils import ordered_map
from utils.timing import Stopwatch
from .oracle import DEFAULT_LIMIT, exact_min_families
from .strategies import MeshRule, greedy_decompose, grid_decompose

logger = logging.getLogger(__name__)

DISCLAIMER = "finite-scale estimator of d_X(R); not the asymptotic dimension growth"
COLUMNS = ["space", "N", "R", "D", "n_greedy", "n_exact", "wall_ms"]

SpaceBuilder = Callable[[str], FiniteMetricSpace]


@dataclass
class ProfileRow:
    space: str
    N: int
    R: int
    D: int
    n_greedy: Optional[int]
    n_exact: Optional[int] = None
    wall_ms: Optional[float] = None
    note: str = ""

    def csv_values(self) -> List:
        return [self.space, self.N, self.R, self.D, self.n_greedy, self.n_exact, self.wall_ms]


@dataclass
class ProfileTable:
    rows: List[ProfileRow] = field(default_factory=list)
    strategies: List[str] = field(default_factory=list)
    disclaimer: str = DISCLAIMER

    @property
    def columns(self) -> List[str]:
        return list(COLUMNS)

    def to_dict(self) -> dict:
        return {
            "disclaimer": self.disclaimer,
            "strategies": self.strategies,
            "columns": self.columns,
            "rows": [asdict(r) for r in self.rows],
        }


def space_descriptor(base: str, n: int) -> str:
    """``path:n``/``grid:n`` for the graph families, ``<group>@n`` otherwise."""
    if base in ("path", "grid"):
        return f"{base}:{n}"
    return f"{base}@{n}"


def heuristic_width(space: FiniteMetricSpace, radius: int, mesh_bound: int, coords=None) -> Tuple[int, str]:
    """Smallest width among greedy carving and, with coordinates, lattice cubes."""
    best = greedy_decompose(space, radius, mesh_bound).n
    best_kind = StrategyKind.GREEDY.value
    if coords is not None:
        try:
            n = grid_decompose(space, radius, mesh_bound, coords).n
        except DomainError:
            n = None
        if n is not None and n < best:
            best, best_kind = n, StrategyKind.GRID.value
    return best, best_kind


def dimension_profile(
    base: str,
    ball_radii: Sequence[int],
    radii: Sequence[int],
    build: SpaceBuilder,
    mesh_rule: MeshRule = MeshRule(),
    exact_limit: int = DEFAULT_LIMIT,
    record_timings: bool = False,
    workers: int = 1,
) -> ProfileTable:
    """One row per (N, R); rows are computed in parallel and kept in (N, R) order.

    Resource errors while building a ball turn into annotated rows.
    """
    from groups.factory import lattice_coordinates

    table = ProfileTable(strategies=["greedy", "grid (lattice spaces)", f"exact (|X| <= {exact_limit})"])
    jobs = []
    for n in ball_radii:
        desc = space_descriptor(base, n)
        try:
            space = build(desc)
        except ResourceError as exc:
            logger.warning("profile: %s skipped: %s", desc, exc)
            for r in radii:
                table.rows.append(ProfileRow(base, n, r, mesh_rule(r), None, note=str(exc)))
            continue
        coords = lattice_coordinates(space)
        jobs.extend((n, r, space, coords) for r in radii)

    def row(job) -> ProfileRow:
        n, r, space, coords = job
        d = mesh_rule(r)
        with Stopwatch(enabled=record_timings) as sw:
            width, kind = heuristic_width(space, r, d, coords)
            exact = None
            if len(space) <= exact_limit:
                exact = exact_min_families(space, r, d, limit=exact_limit)
        if exact is not None and exact > width:
            raise IntegrityError(f"{space.name}: exact {exact} exceeds heuristic {width} at R={r}")
        logger.debug("profile %s R=%d D=%d: n=%d (%s) exact=%s", space.name, r, d, width, kind, exact)
        return ProfileRow(base, n, r, d, width, exact, sw.elapsed_ms)

    table.rows.extend(ordered_map(row, jobs, workers))
    table.rows.sort(key=lambda r: (r.N, r.R))
    return table
