"""Finite metric and semimetric spaces.

Distance matrices are plain float64 numpy arrays; labels are arbitrary
hashable identifiers kept alongside.  Everything here is immutable after
construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from ._kernels import worst_triangle_violations

__all__ = [
    "ConnectivityError",
    "FiniteMetricSpace",
    "InvalidSemimetricError",
    "MetricValidationError",
    "SemimetricSample",
    "ShapeError",
    "ValidationReport",
    "Violation",
    "WeightedGraph",
    "all_pairs_shortest_paths",
    "default_tolerance",
    "path_metric",
    "quotient_semimetric",
    "validate_metric",
]

REL_TOL = 1e-9


class ShapeError(ValueError):
    """Distance data is not a square matrix."""


class MetricValidationError(ValueError):
    """Matrix fails the axioms required by the container it was given to."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InvalidSemimetricError(MetricValidationError):
    pass


class ConnectivityError(ValueError):
    """Graph is disconnected; ``components`` lists vertex labels per component."""

    def __init__(self, components):
        self.components = components
        sizes = ", ".join(str(len(c)) for c in components)
        preview = "; ".join(str(list(c)[:5]) for c in components[:4])
        super().__init__(
            f"graph has {len(components)} connected components (sizes {sizes}): {preview}"
        )


def default_tolerance(dist) -> float:
    dist = np.asarray(dist, dtype=float)
    if dist.size == 0:
        return 0.0
    m = np.max(np.abs(dist[np.isfinite(dist)])) if np.isfinite(dist).any() else 0.0
    return REL_TOL * float(m)


def _as_square(matrix) -> np.ndarray:
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Violation:
    axiom: str
    indices: tuple
    amount: float

    def __str__(self):
        return f"{self.axiom} at {self.indices} (by {self.amount:.3g})"


@dataclass(frozen=True)
class ValidationReport:
    violations: list
    tolerance: float
    # number of violations per axiom, including ones not listed as witnesses
    counts: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def axioms(self) -> set:
        return {v.axiom for v in self.violations}

    def __str__(self):
        if self.ok:
            return "ok"
        return "; ".join(str(v) for v in self.violations[:10])


def validate_metric(
    matrix, tolerance=None, *, allow_zero=False, triangle=True, max_witnesses=20
) -> ValidationReport:
    """Check the metric axioms and return every violated one with witnesses.

    Parameters
    ----------
    matrix : array_like
        Square matrix of pairwise distances.
    tolerance : float, optional
        Additive slack for the symmetry and triangle checks.  Defaults to
        ``1e-9 * max|entry|``.
    allow_zero : bool
        Accept zero off-diagonal entries (semimetric mode).
    triangle : bool
        Run the O(n^3) triangle-inequality scan.
    max_witnesses : int
        Cap on listed witnesses per axiom; ``counts`` holds the full totals.

    Raises
    ------
    ShapeError
        If the input is not square.

    Examples
    --------
    >>> validate_metric([[0, 1], [1, 0]]).ok
    True
    >>> str(validate_metric([[0, 1], [2, 0]]).violations[0])
    'symmetry at (0, 1) (by 1)'
    """
    d = _as_square(matrix)
    tol = default_tolerance(d) if tolerance is None else float(tolerance)
    n = d.shape[0]
    out: list[Violation] = []
    counts: dict[str, int] = {}

    def record(axiom, idx_arrays, amounts):
        k = len(amounts)
        if k == 0:
            return
        counts[axiom] = k
        order = np.argsort(-amounts, kind="stable")[:max_witnesses]
        for o in order:
            out.append(Violation(axiom, tuple(int(a[o]) for a in idx_arrays), float(amounts[o])))

    bad = ~np.isfinite(d)
    if bad.any():
        i, j = np.nonzero(bad)
        record("finite", (i, j), np.full(len(i), np.inf))
        return ValidationReport(out, tol, counts)

    diag = np.abs(np.diag(d))
    i = np.nonzero(diag > 0)[0]
    record("zero_diagonal", (i, i), diag[i])

    i, j = np.nonzero(d < 0)
    record("nonnegative", (i, j), -d[i, j])

    asym = np.abs(d - d.T)
    i, j = np.nonzero(np.triu(asym > tol, 1))
    record("symmetry", (i, j), asym[i, j])

    if not allow_zero:
        off = ~np.eye(n, dtype=bool)
        i, j = np.nonzero(np.triu(off & (d <= 0), 1))
        record("separation", (i, j), np.zeros(len(i)))

    if triangle and n >= 3 and "symmetry" not in counts:
        sym = np.ascontiguousarray(d)
        excess, via = worst_triangle_violations(sym, tol)
        i, k = np.nonzero(excess)
        record("triangle", (i, k, via[i, k]), excess[i, k])

    return ValidationReport(out, tol, counts)


def _labels(labels, n):
    if labels is None:
        return list(range(n))
    labels = list(labels)
    if len(labels) != n:
        raise ShapeError(f"{len(labels)} labels for {n} points")
    if len(set(labels)) != n:
        raise ValueError("labels must be distinct")
    return labels


@dataclass(frozen=True, eq=False)
class SemimetricSample:
    """Symmetric, zero-diagonal distance data; zero off-diagonal entries allowed.

    Construction checks the cheap axioms (shape, symmetry, zero diagonal,
    nonnegativity).  The triangle inequality is checked by
    :func:`quotient_semimetric`, which needs it.
    """

    dist: np.ndarray
    labels: list = None
    tolerance: float = None

    def __post_init__(self):
        d = _as_square(self.dist).copy()
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "labels", _labels(self.labels, d.shape[0]))
        if self.tolerance is None:
            object.__setattr__(self, "tolerance", default_tolerance(d))
        tol = self.tolerance
        if not np.isfinite(d).all():
            raise MetricValidationError("distances must be finite")
        if np.any(np.diag(d) != 0):
            raise MetricValidationError("diagonal must be zero")
        if np.any(d < 0):
            raise MetricValidationError("distances must be nonnegative")
        if np.any(np.abs(d - d.T) > tol):
            raise MetricValidationError("distance matrix is not symmetric")

    def __len__(self):
        return self.dist.shape[0]


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A finite metric space: labels plus a symmetric distance matrix.

    ``check_triangle`` controls the O(n^3) triangle scan at construction;
    builders that produce metrics by construction (shortest paths, the glued
    cylinder formula) pass False and validate separately when asked.
    """

    dist: np.ndarray
    labels: list = None
    tolerance: float = None
    check_triangle: bool = field(default=True, repr=False)

    def __post_init__(self):
        d = _as_square(self.dist).copy()
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "labels", _labels(self.labels, d.shape[0]))
        if self.tolerance is None:
            object.__setattr__(self, "tolerance", default_tolerance(d))
        report = validate_metric(d, self.tolerance, triangle=self.check_triangle)
        if not report.ok:
            raise MetricValidationError(f"not a metric: {report}", report)

    def __len__(self):
        return self.dist.shape[0]

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if len(self) else 0.0

    def index(self, label: Hashable) -> int:
        return self.labels.index(label)

    def subspace(self, idx: Sequence[int]) -> "FiniteMetricSpace":
        idx = list(idx)
        return FiniteMetricSpace(
            self.dist[np.ix_(idx, idx)], [self.labels[i] for i in idx], self.tolerance, check_triangle=False
        )

    @classmethod
    def point(cls, label=0) -> "FiniteMetricSpace":
        return cls(np.zeros((1, 1)), [label])

    @classmethod
    def from_points(cls, points, labels=None) -> "FiniteMetricSpace":
        """Euclidean distances between rows of ``points``."""
        p = np.asarray(points, dtype=float)
        diff = p[:, None, :] - p[None, :, :]
        return cls(np.sqrt((diff**2).sum(-1)), labels)


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph with strictly positive edge weights."""

    labels: list
    edges: list  # (i, j, weight) with vertex indices

    def __post_init__(self):
        n = len(self.labels)
        clean = []
        for e in self.edges:
            i, j, w = int(e[0]), int(e[1]), float(e[2])
            if i == j:
                raise ValueError(f"self-loop at vertex {self.labels[i]}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) references a missing vertex")
            if not w > 0:
                raise ValueError(f"edge ({i}, {j}) has nonpositive weight {w}")
            clean.append((i, j, w))
        object.__setattr__(self, "edges", clean)

    def __len__(self):
        return len(self.labels)

    @classmethod
    def complete(cls, space: FiniteMetricSpace) -> "WeightedGraph":
        n = len(space)
        iu, ju = np.triu_indices(n, 1)
        return cls(list(space.labels), [(i, j, space.dist[i, j]) for i, j in zip(iu, ju)])


def all_pairs_shortest_paths(n: int, edges, *, return_predecessors=False):
    """Dijkstra from every source on an undirected graph given as (i, j, w).

    Zero weights are kept as edges.  Parallel edges keep the minimum weight.
    Unreachable pairs come back as ``inf``.
    """
    if n == 0:
        return np.zeros((0, 0))
    e = np.asarray(edges, dtype=float).reshape(-1, 3)
    i = e[:, 0].astype(np.int64)
    j = e[:, 1].astype(np.int64)
    w = e[:, 2]
    # collapse parallel edges to their minimum before handing to csgraph,
    # which would otherwise sum duplicates
    key = np.minimum(i, j) * n + np.maximum(i, j)
    order = np.lexsort((w, key))
    key, w = key[order], w[order]
    first = np.ones(len(key), dtype=bool)
    first[1:] = key[1:] != key[:-1]
    key, w = key[first], w[first]
    a, b = key // n, key % n
    g = csr_matrix((np.concatenate([w, w]), (np.concatenate([a, b]), np.concatenate([b, a]))), shape=(n, n))
    method = "D" if len(key) < n * (n - 1) // 4 else "FW"
    if return_predecessors:
        return shortest_path(g, method="D", directed=False, return_predecessors=True)
    return shortest_path(g, method=method, directed=False)


def path_metric(g: WeightedGraph) -> FiniteMetricSpace:
    """Shortest-path metric of a connected weighted graph.

    Examples
    --------
    >>> g = WeightedGraph(["a", "b", "c"], [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)])
    >>> float(path_metric(g).dist[0, 2])
    2.0
    """
    n = len(g)
    ncomp, comp = connected_components(
        csr_matrix((np.ones(len(g.edges)), ([e[0] for e in g.edges], [e[1] for e in g.edges])), shape=(n, n)),
        directed=False,
    )
    if ncomp > 1:
        components = [[g.labels[v] for v in np.nonzero(comp == c)[0]] for c in range(ncomp)]
        raise ConnectivityError(components)
    d = all_pairs_shortest_paths(n, g.edges)
    d = np.minimum(d, d.T)
    return FiniteMetricSpace(d, list(g.labels), check_triangle=False)


def _zero_classes(d: np.ndarray, tol: float) -> np.ndarray:
    """Class index per point under the transitive closure of d <= tol."""
    n = d.shape[0]
    zero = csr_matrix(np.triu(d <= tol, 1))
    _, comp = connected_components(zero, directed=False)
    # relabel classes by first occurrence so class order follows point order
    first = {}
    out = np.empty(n, dtype=np.int64)
    for v, c in enumerate(comp):
        out[v] = first.setdefault(c, len(first))
    return out


def quotient_semimetric(s: SemimetricSample):
    """Identify points at distance zero.

    Returns ``(space, projection)`` where ``projection[i]`` is the class index
    of point ``i``.  Classes are numbered in order of their first member, whose
    label becomes the class label.  The distance between classes is the
    minimum over members, which equals the common value up to tolerance.

    Raises
    ------
    InvalidSemimetricError
        If the triangle inequality fails beyond the tolerance (the classes
        would not be well defined).
    """
    d = np.asarray(s.dist)
    report = validate_metric(d, s.tolerance, allow_zero=True)
    if not report.ok:
        raise InvalidSemimetricError(f"invalid semimetric: {report}", report)
    proj = _zero_classes(d, s.tolerance)
    k = int(proj.max()) + 1 if len(proj) else 0
    q = np.full((k, k), np.inf)
    for c in range(k):
        rows = d[proj == c]
        # column-wise min over members of class c, then over members of each target class
        colmin = rows.min(axis=0)
        np.minimum.at(q[c], proj, colmin)
    np.fill_diagonal(q, 0.0)
    q = np.minimum(q, q.T)
    reps = [int(np.nonzero(proj == c)[0][0]) for c in range(k)]
    space = FiniteMetricSpace(q, [s.labels[r] for r in reps], s.tolerance, check_triangle=False)
    return space, proj
