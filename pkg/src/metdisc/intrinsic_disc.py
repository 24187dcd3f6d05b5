"""Semimetrics pulled back from a piecewise-linear map of a disc mesh.

For a map ``u`` from the vertices of a disc mesh into a metric space, three
vertex semimetrics sit between the mesh and the target:

* ``d_u``: length of the cheapest edge path, each edge weighted by the
  target distance between the images of its endpoints;
* ``|d_u|``: smallest image diameter of a connected vertex set joining two
  vertices;
* ``path |d_u|``: the length metric of ``|d_u|`` on the edge graph.

They satisfy ``d_u >= path|d_u| >= |d_u| >= d(u(.), u(.))`` entrywise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .disc_mesh import TriDiscMesh
from .metric_core import (
    FiniteMetricSpace,
    SemimetricSample,
    all_pairs_shortest_paths,
    quotient_semimetric,
)

__all__ = [
    "DiameterBounds",
    "IntrinsicDiscResult",
    "IsometryReport",
    "PLMap",
    "PreconditionError",
    "SizeCapError",
    "diameter_semimetric",
    "factorization_check",
    "has_no_bubbles",
    "is_monotone",
    "pullback_length_metric",
    "verify_intrinsic_isometry",
]


class SizeCapError(ValueError):
    """Exact computation requested on an instance above the size cap."""


class PreconditionError(ValueError):
    def __init__(self, check: str, detail: str = ""):
        self.check = check
        super().__init__(f"precondition '{check}' failed" + (f": {detail}" if detail else ""))


@dataclass(frozen=True, eq=False)
class PLMap:
    """Vertex assignment of a disc mesh into a metric or Euclidean target.

    Parameters
    ----------
    source : TriDiscMesh
    target : FiniteMetricSpace or None
        ``None`` means Euclidean space; ``assignment`` then holds one
        coordinate row per source vertex and the map is affine on triangles.
    assignment : array_like
        Target point index per source vertex, or an (V, N) coordinate array.
    target_mesh : TriDiscMesh, optional
        Mesh whose vertex metric ``target`` is, when known.
    """

    source: TriDiscMesh
    target: FiniteMetricSpace | None
    assignment: np.ndarray
    target_mesh: TriDiscMesh = field(default=None, repr=False)

    def __post_init__(self):
        nv = self.source.n_vertices
        if self.target is None:
            a = np.asarray(self.assignment, dtype=float)
            if a.ndim == 1:
                a = a[:, None]
            if a.ndim != 2 or len(a) != nv:
                raise ValueError(f"need one image point per source vertex ({nv}), got shape {a.shape}")
            if not np.isfinite(a).all():
                raise ValueError("image coordinates must be finite")
        else:
            a = np.asarray(self.assignment)
            if a.ndim != 1 or len(a) != nv:
                raise ValueError(f"need one target index per source vertex ({nv})")
            if not np.issubdtype(a.dtype, np.integer):
                if not np.all(a == np.round(a)):
                    raise ValueError("target indices must be integers")
                a = a.astype(np.int64)
            if np.any(a < 0) or np.any(a >= len(self.target)):
                raise ValueError("assignment references a missing target point")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @property
    def euclidean(self) -> bool:
        return self.target is None

    @property
    def dim(self) -> int | None:
        return self.assignment.shape[1] if self.euclidean else None

    @property
    def image_distances(self) -> np.ndarray:
        """``d(u(v), u(w))`` for all source vertex pairs."""
        cached = self.__dict__.get("_imdist")
        if cached is None:
            a = self.assignment
            if self.euclidean:
                diff = a[:, None, :] - a[None, :, :]
                cached = np.sqrt((diff**2).sum(-1))
            else:
                cached = self.target.dist[np.ix_(a, a)]
            cached = np.ascontiguousarray(cached)
            cached.setflags(write=False)
            self.__dict__["_imdist"] = cached
        return cached

    def fiber_tolerance(self) -> float:
        diam = self.target.diameter if not self.euclidean else float(self.image_distances.max(initial=0.0))
        return 1e-9 * diam

    @classmethod
    def identity(cls, m: TriDiscMesh, subdivide: bool = False) -> "PLMap":
        from .disc_mesh import vertex_metric

        return cls(m, vertex_metric(m, subdivide), np.arange(m.n_vertices), target_mesh=m)

    @classmethod
    def constant(cls, m: TriDiscMesh, dim: int = 2) -> "PLMap":
        return cls(m, None, np.zeros((m.n_vertices, dim)))


# ---------------------------------------------------------------------- d_u


def _edge_list(m: TriDiscMesh):
    return m.edges[:, 0], m.edges[:, 1]


def pullback_length_metric(u: PLMap) -> SemimetricSample:
    """Shortest edge-path length with edges weighted by image distance."""
    D = u.image_distances
    a, b = _edge_list(u.source)
    d = all_pairs_shortest_paths(u.source.n_vertices, np.column_stack([a, b, D[a, b]]))
    d = np.minimum(d, d.T)
    return SemimetricSample(d, list(u.source.vertices))


# ---------------------------------------------------------------------- |d_u|


def _masks(m: TriDiscMesh):
    nb = [0] * m.n_vertices
    for a, b in m.edges.tolist():
        nb[a] |= 1 << b
        nb[b] |= 1 << a
    return nb


def _reach(start: int, region: int, nbr) -> int:
    """Vertices reachable from the set ``start`` inside ``region | start``."""
    region |= start
    seen = start
    frontier = start
    while frontier:
        new = 0
        f = frontier
        while f:
            low = f & -f
            new |= nbr[low.bit_length() - 1]
            f ^= low
        new &= region & ~seen
        seen |= new
        frontier = new
    return seen


def _connectable(x: int, y: int, compat, nbr) -> bool:
    """Is there a connected vertex set containing x and y, pairwise compatible?

    Exhaustive branching over connected supersets of {x}: each candidate on
    the boundary is either taken (shrinking the allowed set to vertices
    compatible with it) or excluded for the rest of the branch.  A
    reachability test prunes branches that can no longer reach ``y``.
    """
    if not (compat[x] >> y) & 1:
        return False
    ybit = 1 << y

    def grow(C, allowed, ext, excl):
        comp = _reach(C, allowed & ~excl, nbr)
        if not comp & ybit:
            return False
        # if everything still reachable is pairwise compatible, take it all
        rest = comp & ~C
        ok = True
        r = rest
        while r:
            low = r & -r
            if (compat[low.bit_length() - 1] & rest) != rest:
                ok = False
                break
            r ^= low
        if ok:
            return True
        while ext:
            low = ext & -ext
            v = low.bit_length() - 1
            ext ^= low
            if low == ybit:
                return True
            allowed2 = allowed & compat[v]
            C2 = C | low
            ext2 = (ext | nbr[v]) & allowed2 & ~C2 & ~excl
            if grow(C2, allowed2, ext2, excl):
                return True
            excl |= low
        return False

    allowed = compat[x] & compat[y]
    xbit = 1 << x
    return grow(xbit, allowed, nbr[x] & allowed & ~xbit, 0)


@dataclass(frozen=True)
class DiameterBounds:
    lower: np.ndarray
    upper: np.ndarray


def _diameter_exact(u: PLMap) -> np.ndarray:
    D = u.image_distances
    n = len(D)
    nbr = _masks(u.source)
    values = np.unique(D)
    masks = {}
    out = np.zeros((n, n))
    for x in range(n):
        for y in range(x + 1, n):
            lo = int(np.searchsorted(values, D[x, y]))
            hi = len(values) - 1
            # feasibility is monotone in the threshold
            while lo < hi:
                mid = (lo + hi) // 2
                if mid not in masks:
                    masks[mid] = _compat_masks(D, values[mid])
                compat = masks[mid]
                if _connectable(x, y, compat, nbr):
                    hi = mid
                else:
                    lo = mid + 1
            out[x, y] = out[y, x] = values[lo]
    return out


def _compat_masks(D, delta):
    return [sum(1 << int(j) for j in np.flatnonzero(row <= delta)) for row in D]


def _bottleneck_threshold(D, nb, x, y):
    """Smallest t such that x, y connect through vertices v with
    max(D[v, x], D[v, y]) <= t, plus one such path."""
    w = np.maximum(D[:, x], D[:, y])
    order = np.argsort(w, kind="stable")
    parent = list(range(len(D)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    active = np.zeros(len(D), dtype=bool)
    t = w[x]
    for v in order:
        active[v] = True
        for z in nb[v]:
            if active[z]:
                parent[find(z)] = find(v)
        if active[x] and active[y] and find(x) == find(y):
            t = w[v]
            break
    # breadth-first path inside the active set
    prev = {x: -1}
    queue = [x]
    for a in queue:
        if a == y:
            break
        for z in nb[a]:
            if active[z] and z not in prev:
                prev[z] = a
                queue.append(z)
    path = [y]
    while path[-1] != x:
        path.append(prev[path[-1]])
    return float(t), path


def _diameter_bounds(u: PLMap) -> DiameterBounds:
    D = u.image_distances
    n = len(D)
    nb = u.source.neighbors
    a, b = _edge_list(u.source)
    _, pred_u = all_pairs_shortest_paths(n, np.column_stack([a, b, D[a, b]]), return_predecessors=True)
    _, pred_g = all_pairs_shortest_paths(n, np.column_stack([a, b, np.ones(len(a))]), return_predecessors=True)
    lower = np.zeros((n, n))
    upper = np.zeros((n, n))

    def walk(pred, x, y):
        p = [y]
        while p[-1] != x:
            p.append(int(pred[x, p[-1]]))
        return p

    for x in range(n):
        for y in range(x + 1, n):
            t, path = _bottleneck_threshold(D, nb, x, y)
            best = np.inf
            for p in (path, walk(pred_u, x, y), walk(pred_g, x, y)):
                best = min(best, float(D[np.ix_(p, p)].max()))
            lower[x, y] = lower[y, x] = max(D[x, y], t)
            upper[x, y] = upper[y, x] = best
    return DiameterBounds(lower, upper)


def diameter_semimetric(u: PLMap, mode: str = "exact", size_cap: int = 20):
    """Smallest image diameter of a connected vertex set containing both points.

    ``mode="exact"`` returns a :class:`SemimetricSample`; the search is
    exponential, so it refuses sources with more than ``size_cap`` vertices.
    ``mode="bounds"`` returns :class:`DiameterBounds`: the lower bound is the
    node-weighted bottleneck threshold, the upper bound the best image
    diameter among a bottleneck path, a ``d_u`` geodesic and a hop-count
    geodesic.
    """
    n = u.source.n_vertices
    if mode == "exact":
        if n > size_cap:
            raise SizeCapError(
                f"exact diameter semimetric limited to {size_cap} vertices, source has {n}; use mode='bounds'"
            )
        return SemimetricSample(_diameter_exact(u), list(u.source.vertices))
    if mode == "bounds":
        return _diameter_bounds(u)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------- the chain


@dataclass(frozen=True, eq=False)
class IntrinsicDiscResult:
    d_u: SemimetricSample
    abs_d_u: SemimetricSample | DiameterBounds
    path_abs: SemimetricSample | None
    pullback: np.ndarray
    quotient: FiniteMetricSpace
    projection: np.ndarray
    violations: dict
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(v <= self.tolerance for v in self.violations.values())


def factorization_check(u: PLMap, mode: str = "exact", size_cap: int = 20, tolerance: float | None = None):
    """Compute the semimetric chain and the largest violation of each link.

    In bounds mode ``|d_u|`` is known only up to an interval, so the chain
    checked is ``d_u >= upper >= lower >= pullback`` and ``path_abs`` is
    left out.
    """
    du = pullback_length_metric(u)
    pull = np.asarray(u.image_distances)
    if tolerance is None:
        tolerance = 1e-9 * max(float(du.dist.max(initial=0.0)), 1.0)
    ab = diameter_semimetric(u, mode, size_cap)

    def excess(hi, lo):
        return float(max(np.max(lo - hi, initial=0.0), 0.0))

    if mode == "exact":
        a, b = _edge_list(u.source)
        w = ab.dist[a, b]
        pa = all_pairs_shortest_paths(u.source.n_vertices, np.column_stack([a, b, w]))
        pa = SemimetricSample(np.minimum(pa, pa.T), list(u.source.vertices))
        viol = {
            "d_u >= path_abs": excess(du.dist, pa.dist),
            "path_abs >= abs_d_u": excess(pa.dist, ab.dist),
            "abs_d_u >= pullback": excess(ab.dist, pull),
        }
    else:
        pa = None
        viol = {
            "d_u >= upper": excess(du.dist, ab.upper),
            "upper >= lower": excess(ab.upper, ab.lower),
            "lower >= pullback": excess(ab.lower, pull),
        }
    q, proj = quotient_semimetric(du)
    return IntrinsicDiscResult(du, ab, pa, pull, q, proj, viol, tolerance)


# ---------------------------------------------------------------------- fibers


def _components(m: TriDiscMesh, keep: np.ndarray) -> list:
    idx = np.nonzero(keep)[0]
    if len(idx) == 0:
        return []
    e = m.edges
    sel = keep[e[:, 0]] & keep[e[:, 1]]
    n = m.n_vertices
    g = csr_matrix((np.ones(int(sel.sum())), (e[sel, 0], e[sel, 1])), shape=(n, n))
    _, lab = connected_components(g, directed=False)
    groups = {}
    for v in idx:
        groups.setdefault(int(lab[v]), []).append(int(v))
    return sorted(groups.values())


def _image_points(u: PLMap):
    """One representative source vertex per distinct image point."""
    D = u.image_distances
    tol = u.fiber_tolerance()
    reps = []
    for v in range(len(D)):
        if all(D[v, r] > tol for r in reps):
            reps.append(v)
    return reps, tol


def _image_label(u: PLMap, v: int):
    if u.euclidean:
        return [float(c) for c in u.assignment[v]]
    return u.target.labels[int(u.assignment[v])]


def is_monotone(u: PLMap, fiber_tolerance: float | None = None):
    """Check that every vertex fiber is connected in the edge graph.

    A fiber is the set of source vertices whose image lies within
    ``fiber_tolerance`` of an image point.  Returns ``(True, None)`` or
    ``(False, (image point, components))``.
    """
    if u.source.n_vertices == 0:
        raise ValueError("map has an empty image")
    reps, tol = _image_points(u)
    if fiber_tolerance is not None:
        tol = fiber_tolerance
    D = u.image_distances
    for r in reps:
        comps = _components(u.source, D[r] <= tol)
        if len(comps) > 1:
            return False, (_image_label(u, r), comps)
    return True, None


def has_no_bubbles(u: PLMap, fiber_tolerance: float | None = None):
    """Check that every component of every fiber complement meets the boundary.

    Returns ``(True, None)`` or ``(False, (image point, trapped component))``.
    """
    reps, tol = _image_points(u)
    if fiber_tolerance is not None:
        tol = fiber_tolerance
    D = u.image_distances
    on_boundary = np.zeros(u.source.n_vertices, dtype=bool)
    on_boundary[u.source.boundary_vertices] = True
    for r in reps:
        for comp in _components(u.source, D[r] > tol):
            if not on_boundary[comp].any():
                return False, (_image_label(u, r), comp)
    return True, None


@dataclass
class IsometryReport:
    defect: float
    witness: tuple | None
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def verify_intrinsic_isometry(u: PLMap, tolerance: float = 1e-9) -> IsometryReport:
    """Largest gap between ``d_u`` and the target distance of the images.

    Preconditions: ``u`` is monotone and bubble-free, its target is a finite
    metric space, and every target point is hit.

    Raises
    ------
    PreconditionError
        Naming the first failed check.
    """
    if u.euclidean:
        raise PreconditionError("metric target", "target must be a finite metric space, not Euclidean")
    missing = sorted(set(range(len(u.target))) - set(u.assignment.tolist()))
    if missing:
        raise PreconditionError("surjective", f"target points never hit: {missing[:10]}")
    ok, w = is_monotone(u)
    if not ok:
        raise PreconditionError("monotone", f"fiber over {w[0]} has components {w[1]}")
    ok, w = has_no_bubbles(u)
    if not ok:
        raise PreconditionError("no bubbles", f"fiber over {w[0]} traps {w[1]}")
    du = pullback_length_metric(u).dist
    gap = du - u.image_distances
    k = int(np.argmax(gap)) if gap.size else 0
    defect = float(gap.flat[k]) if gap.size else 0.0
    witness = tuple(int(i) for i in np.unravel_index(k, gap.shape)) if defect > 0 else None
    return IsometryReport(defect, witness, tolerance, defect <= tolerance)
