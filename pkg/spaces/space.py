"""Finite metric spaces with integer distance matrices.

Every space in the toolkit is a finite point set together with a dense,
read-only ``numpy`` matrix of nonnegative integer distances.  Graph and
word metrics are integer valued, which keeps the strict inequality
``d(A, B) > R`` exact everywhere.
"""

from __future__ import annotations

import logging
from typing import Hashable, List, Optional, Sequence

import networkx as nx
import numpy as np

from core.errors import DomainError, StructuralError

logger = logging.getLogger(__name__)

DIST_DTYPE = np.int32


class FiniteMetricSpace:
    """A finite point set with an integer-valued distance oracle.

    Points are opaque hashable ids kept in a fixed order; everything else
    in the toolkit refers to them by index.  The matrix is validated for
    shape, symmetry, zero diagonal and positivity off the diagonal.  The
    triangle inequality is property-tested (``check_metric_axioms``), not
    assumed.
    """

    def __init__(
        self,
        points: Sequence[Hashable],
        matrix,
        name: str = "",
    ):
        m = np.array(matrix, dtype=DIST_DTYPE, copy=True)
        n = len(points)
        if m.shape != (n, n):
            raise StructuralError(
                f"distance matrix shape {m.shape} does not match {n} points"
            )
        if n == 0:
            raise DomainError("a metric space needs at least one point")
        if (m < 0).any():
            raise StructuralError("distances must be nonnegative")
        if (np.diagonal(m) != 0).any():
            raise StructuralError("dist(p, p) must be 0")
        if not np.array_equal(m, m.T):
            raise StructuralError("distance matrix is not symmetric")
        off = m + np.eye(n, dtype=DIST_DTYPE)
        if (off == 0).any():
            raise StructuralError("dist(p, q) = 0 for distinct points")
        m.setflags(write=False)

        self._points = tuple(points)
        self._index = {p: i for i, p in enumerate(self._points)}
        if len(self._index) != n:
            raise StructuralError("point ids must be unique")
        self._matrix = m
        self.name = name or f"space[{n}]"

    # --- basic access ---

    @property
    def points(self) -> tuple:
        return self._points

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def __len__(self) -> int:
        return len(self._points)

    def __repr__(self) -> str:
        return f"FiniteMetricSpace({self.name!r}, n={len(self)})"

    def index_of(self, point: Hashable) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise StructuralError(f"{point!r} is not a point of {self.name}") from None

    def dist(self, i: int, j: int) -> int:
        """Distance between the points at indices *i* and *j*."""
        return int(self._matrix[i, j])

    def label(self, i: int) -> str:
        return str(self._points[i])

    # --- balls and diameters ---

    def diameter(self, indices: Optional[Sequence[int]] = None) -> int:
        if indices is None:
            return int(self._matrix.max())
        idx = np.asarray(indices, dtype=np.intp)
        return int(self._matrix[np.ix_(idx, idx)].max())

    def ball(self, center: int, radius: int, within: Optional[np.ndarray] = None) -> np.ndarray:
        """Indices of B(center, radius), optionally intersected with *within*."""
        row = self._matrix[center]
        if within is None:
            return np.flatnonzero(row <= radius)
        within = np.asarray(within, dtype=np.intp)
        return within[row[within] <= radius]

    def neighborhood(self, indices: Sequence[int], radius: int) -> np.ndarray:
        """Indices of B(A, radius) = {x : d(x, A) <= radius}."""
        idx = np.asarray(indices, dtype=np.intp)
        reach = self._matrix[idx].min(axis=0)
        return np.flatnonzero(reach <= radius)

    # --- subsets ---

    def whole(self, tag: str = "X"):
        from .families import SubsetRef
        return SubsetRef(self, tuple(range(len(self))), tag=tag)

    def subset(self, indices: Sequence[int], tag: str = ""):
        from .families import SubsetRef
        return SubsetRef(self, tuple(int(i) for i in indices), tag=tag)

    def subspace(self, indices: Sequence[int], name: str = "") -> "FiniteMetricSpace":
        """A new space on the given points with the restricted metric."""
        idx = np.asarray(sorted(set(int(i) for i in indices)), dtype=np.intp)
        return FiniteMetricSpace(
            [self._points[i] for i in idx],
            self._matrix[np.ix_(idx, idx)],
            name=name or f"{self.name}|{len(idx)}",
        )


# --- constructors ---

def matrix_space(points: Sequence[Hashable], matrix, name: str = "") -> FiniteMetricSpace:
    return FiniteMetricSpace(points, matrix, name=name)


def path_space(n: int) -> FiniteMetricSpace:
    """The path 0..n-1 with dist(i, j) = |i - j|."""
    if n < 1:
        raise DomainError("path needs at least one point")
    coords = np.arange(n)
    return FiniteMetricSpace(
        list(range(n)),
        np.abs(coords[:, None] - coords[None, :]),
        name=f"path:{n}",
    )


def graph_space(graph: nx.Graph, name: str = "") -> FiniteMetricSpace:
    """Shortest-path metric of a connected graph (nodes sorted)."""
    if graph.number_of_nodes() == 0:
        raise DomainError("graph has no nodes")
    if not nx.is_connected(graph):
        raise DomainError("graph metric needs a connected graph")
    nodes = sorted(graph.nodes())
    matrix = nx.floyd_warshall_numpy(graph, nodelist=nodes)
    return FiniteMetricSpace(
        nodes, np.rint(matrix).astype(DIST_DTYPE),
        name=name or f"graph[{len(nodes)}]",
    )


def grid_space(n: int) -> FiniteMetricSpace:
    """The n x n grid {0..n-1}^2 with the l1 metric."""
    if n < 1:
        raise DomainError("grid needs at least one point per side")
    pts = [(i, j) for i in range(n) for j in range(n)]
    c = np.array(pts, dtype=DIST_DTYPE)
    matrix = np.abs(c[:, None, :] - c[None, :, :]).sum(axis=2)
    return FiniteMetricSpace(pts, matrix, name=f"grid:{n}")


def product_space(x: FiniteMetricSpace, y: FiniteMetricSpace) -> FiniteMetricSpace:
    """X x Y with the sum metric d_X + d_Y; point (i, j) sits at index i*|Y| + j."""
    nx_, ny = len(x), len(y)
    matrix = (
        x.matrix[:, None, :, None] + y.matrix[None, :, None, :]
    ).reshape(nx_ * ny, nx_ * ny)
    points = [(p, q) for p in x.points for q in y.points]
    return FiniteMetricSpace(points, matrix, name=f"{x.name} x {y.name}")


def check_metric_axioms(
    space: FiniteMetricSpace,
    samples: int = 10_000,
    rng: Optional[np.random.Generator] = None,
) -> List[str]:
    """Return violations of symmetry and the triangle inequality on sampled triples."""
    rng = rng if rng is not None else np.random.default_rng(0)
    n = len(space)
    m = space.matrix
    errors: List[str] = []
    p, q, r = (rng.integers(0, n, size=samples) for _ in range(3))
    asym = np.flatnonzero(m[p, q] != m[q, p])
    if asym.size:
        k = asym[0]
        errors.append(f"asymmetric pair ({p[k]}, {q[k]})")
    bad = np.flatnonzero(m[p, q] > m[p, r] + m[r, q])
    if bad.size:
        k = bad[0]
        errors.append(
            f"triangle inequality fails for ({p[k]}, {q[k]}) via {r[k]}: "
            f"{m[p[k], q[k]]} > {m[p[k], r[k]]} + {m[r[k], q[k]]}"
        )
    return errors
