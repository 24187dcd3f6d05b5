"""Triangulated metric discs given by combinatorics plus edge lengths.

Geometry is intrinsic: every quantity is computed from edge lengths, never
from coordinates, so abstract meshes (no embedding) are first class.
Coordinates, when present, are only used to derive lengths and as a planar
chart for piecewise-linear maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .metric_core import FiniteMetricSpace, all_pairs_shortest_paths

__all__ = [
    "ChordArcResult",
    "JordanDomainSample",
    "MeshGeometryError",
    "MeshTopologyError",
    "SampledLoop",
    "TriDiscMesh",
    "boundary_loop",
    "chord_arc_constant",
    "enumerate_jordan_domains",
    "global_isoperimetric_constant",
    "heron_area",
    "is_jordan_domain",
    "isoperimetric_lower_bound",
    "mesh_area",
    "vertex_metric",
]

TWO_PI = 2.0 * math.pi


class MeshTopologyError(ValueError):
    """The complex is not a triangulated disc; ``check`` names the failed test."""

    def __init__(self, check: str, detail: str = ""):
        self.check = check
        super().__init__(f"{check}: {detail}" if detail else check)


class MeshGeometryError(ValueError):
    def __init__(self, triangle: int, detail: str):
        self.triangle = triangle
        super().__init__(f"triangle {triangle}: {detail}")


def _ekey(a, b):
    return (a, b) if a < b else (b, a)


def heron_area(a, b, c):
    """Triangle area from side lengths (Kahan's stable form); vectorized."""
    s = np.sort(np.stack(np.broadcast_arrays(a, b, c)), axis=0)[::-1]
    a, b, c = s[0], s[1], s[2]
    q = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * np.sqrt(np.maximum(q, 0.0))


@dataclass(frozen=True, eq=False)
class TriDiscMesh:
    """A triangulated closed disc with a length on every edge.

    Parameters
    ----------
    triangles : (F, 3) int array
        Vertex indices per triangle.
    edge_lengths : dict
        ``{(i, j): length}``; keys are normalized to ``i < j``.  May be None
        when ``coords`` is given.
    coords : (V, 2|3) array, optional
        Embedding used to derive missing edge lengths.
    vertices : list, optional
        Vertex labels; defaults to ``range(V)``.

    Raises
    ------
    MeshTopologyError
        Non-manifold edge or vertex, disconnected complex, empty or multiple
        boundary cycles, Euler characteristic other than 1.
    MeshGeometryError
        A triangle whose lengths violate the strict triangle inequality.
    """

    triangles: np.ndarray
    edge_lengths: dict = None
    coords: np.ndarray = None
    vertices: list = None
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        tri = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        tri.setflags(write=False)
        object.__setattr__(self, "triangles", tri)
        nv = int(tri.max()) + 1 if tri.size else 0
        if self.coords is not None:
            xyz = np.asarray(self.coords, dtype=float)
            if xyz.ndim != 2 or xyz.shape[1] not in (2, 3):
                raise ValueError("coordinates must be an (n, 2) or (n, 3) array")
            nv = max(nv, len(xyz))
            object.__setattr__(self, "coords", xyz)
        if self.vertices is None:
            object.__setattr__(self, "vertices", list(range(nv)))
        else:
            object.__setattr__(self, "vertices", list(self.vertices))
            if len(self.vertices) < nv:
                raise ValueError(f"{len(self.vertices)} vertex labels for {nv} vertices")
        lengths = {}
        for k, v in (self.edge_lengths or {}).items():
            lengths[_ekey(int(k[0]), int(k[1]))] = float(v)
        for e in self.edges:
            key = (int(e[0]), int(e[1]))
            if key not in lengths:
                if self.coords is None:
                    raise ValueError(f"no length for edge {key}")
                lengths[key] = float(np.linalg.norm(self.coords[key[0]] - self.coords[key[1]]))
        object.__setattr__(self, "edge_lengths", lengths)
        if self.validate:
            self._check_geometry()
            self._check_topology()

    # ------------------------------------------------------------------ combinatorics

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def edges(self) -> np.ndarray:
        """Sorted unique undirected edges, shape (E, 2)."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    @cached_property
    def edge_index(self) -> dict:
        return {(int(a), int(b)): k for k, (a, b) in enumerate(self.edges)}

    @cached_property
    def triangle_edges(self) -> np.ndarray:
        """(F, 3) edge ids; column k is the edge opposite corner k."""
        idx = self.edge_index
        out = np.empty_like(self.triangles)
        for f, (a, b, c) in enumerate(self.triangles.tolist()):
            out[f] = (idx[_ekey(b, c)], idx[_ekey(c, a)], idx[_ekey(a, b)])
        return out

    @cached_property
    def edge_triangles(self) -> list:
        out = [[] for _ in range(len(self.edges))]
        for f, row in enumerate(self.triangle_edges.tolist()):
            for e in row:
                out[e].append(f)
        return out

    @cached_property
    def lengths(self) -> np.ndarray:
        """Edge lengths aligned with :attr:`edges`."""
        return np.array([self.edge_lengths[(int(a), int(b))] for a, b in self.edges])

    @cached_property
    def side_lengths(self) -> np.ndarray:
        """(F, 3) lengths; column k is the side opposite corner k."""
        return self.lengths[self.triangle_edges]

    @cached_property
    def triangle_areas(self) -> np.ndarray:
        s = self.side_lengths
        return heron_area(s[:, 0], s[:, 1], s[:, 2])

    @cached_property
    def triangle_neighbors(self) -> np.ndarray:
        """(F, 3) neighbor across the side opposite corner k, or -1."""
        out = np.full_like(self.triangles, -1)
        for f, row in enumerate(self.triangle_edges.tolist()):
            for k, e in enumerate(row):
                for g in self.edge_triangles[e]:
                    if g != f:
                        out[f, k] = g
        return out

    @cached_property
    def _growth_tables(self):
        return (
            [tuple(r) for r in self.triangle_neighbors.tolist()],
            [tuple(r) for r in self.triangles.tolist()],
            [tuple(r) for r in self.side_lengths.tolist()],
            self.triangle_areas.tolist(),
        )

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        return np.array([e for e, ts in enumerate(self.edge_triangles) if len(ts) == 1], dtype=np.int64)

    @cached_property
    def boundary_cycle(self) -> list:
        """Boundary vertices in traversal order.

        Starts at the lowest boundary vertex and leaves it along the boundary
        edge that its triangle traverses in the same direction.  Only the
        cycle through that vertex is returned.
        """
        bd = self.boundary_edges
        if len(bd) == 0:
            return []
        adj = {}
        for e in bd.tolist():
            u, v = self.edges[e].tolist()
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        start = min(adj)
        options = sorted(adj[start])
        first = options[0]
        for x in options:
            (f,) = self.edge_triangles[self.edge_index[_ekey(start, x)]]
            a, b, c = self.triangles[f].tolist()
            if (start, x) in ((a, b), (b, c), (c, a)):
                first = x
                break
        cycle = [start]
        prev, cur = start, first
        while cur != start and len(cycle) <= len(bd):
            cycle.append(cur)
            nxt = [w for w in adj[cur] if w != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
        return cycle

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.edges[self.boundary_edges].ravel()] = True
        return mask

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges) + self.n_triangles

    @cached_property
    def neighbors(self) -> list:
        nb = [[] for _ in range(self.n_vertices)]
        for a, b in self.edges.tolist():
            nb[a].append(b)
            nb[b].append(a)
        return nb

    # ------------------------------------------------------------------ validation

    def _check_geometry(self):
        s = self.side_lengths
        if np.any(~np.isfinite(s)) or np.any(s <= 0):
            f = int(np.nonzero(np.any(~(s > 0), axis=1) | np.any(~np.isfinite(s), axis=1))[0][0])
            raise MeshGeometryError(f, f"nonpositive edge length {s[f].tolist()}")
        for k in range(3):
            other = s.sum(axis=1) - s[:, k]
            bad = np.nonzero(s[:, k] >= other)[0]
            if len(bad):
                f = int(bad[0])
                raise MeshGeometryError(f, f"side lengths {s[f].tolist()} violate the strict triangle inequality")

    def _check_topology(self):
        if self.n_triangles == 0:
            raise MeshTopologyError("empty mesh", "no triangles")
        t = self.triangles
        if np.any(t < 0):
            raise MeshTopologyError("vertex index", "negative vertex index")
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            f = int(np.nonzero((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2]))[0][0])
            raise MeshTopologyError("degenerate triangle", f"triangle {f} repeats a vertex")
        used = np.zeros(self.n_vertices, dtype=bool)
        used[t.ravel()] = True
        if not used.all():
            raise MeshTopologyError("isolated vertex", f"vertex {self.vertices[int(np.argmin(used))]} in no triangle")
        for e, ts in enumerate(self.edge_triangles):
            if len(ts) > 2:
                a, b = self.edges[e].tolist()
                raise MeshTopologyError("non-manifold edge", f"edge {(a, b)} borders {len(ts)} triangles")
        # edge-connectivity of triangles
        seen = np.zeros(self.n_triangles, dtype=bool)
        stack = [0]
        seen[0] = True
        nbr = self.triangle_neighbors
        while stack:
            f = stack.pop()
            for g in nbr[f]:
                if g >= 0 and not seen[g]:
                    seen[g] = True
                    stack.append(g)
        if not seen.all():
            raise MeshTopologyError("disconnected", f"{int((~seen).sum())} triangles unreachable from triangle 0")
        self._check_vertex_links()
        bd = self.boundary_edges
        if len(bd) == 0:
            raise MeshTopologyError("empty boundary", "every edge borders two triangles (closed surface)")
        deg = np.bincount(self.edges[bd].ravel(), minlength=self.n_vertices)
        if np.any(deg[deg > 0] != 2):
            v = int(np.nonzero(deg > 2)[0][0])
            raise MeshTopologyError("pinched boundary", f"vertex {self.vertices[v]} has {deg[v]} boundary edges")
        if len(self.boundary_cycle) != len(bd):
            raise MeshTopologyError(
                "multiple boundary cycles",
                f"boundary has {len(bd)} edges but the cycle through vertex {self.boundary_cycle[0]} has {len(self.boundary_cycle)}",
            )
        chi = self.euler_characteristic
        if chi != 1:
            raise MeshTopologyError("euler characteristic", f"V - E + F = {chi}, expected 1")

    def _check_vertex_links(self):
        # link of every vertex must be a single path (boundary) or cycle (interior)
        link = [[] for _ in range(self.n_vertices)]
        for a, b, c in self.triangles.tolist():
            link[a].append((b, c))
            link[b].append((c, a))
            link[c].append((a, b))
        for v, segs in enumerate(link):
            adj = {}
            for p, q in segs:
                adj.setdefault(p, []).append(q)
                adj.setdefault(q, []).append(p)
            if any(len(x) > 2 for x in adj.values()):
                raise MeshTopologyError("non-manifold vertex", f"vertex {self.vertices[v]}")
            start = next(iter(adj))
            comp = {start}
            stack = [start]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y not in comp:
                        comp.add(y)
                        stack.append(y)
            if len(comp) != len(adj):
                raise MeshTopologyError("non-manifold vertex", f"vertex {self.vertices[v]} has a disconnected link")

    # ------------------------------------------------------------------ helpers

    def flattened_triangle(self, f: int) -> np.ndarray:
        """Planar corner positions (3, 2) of triangle ``f``.

        Uses the 2-D coordinates when the mesh has them, otherwise lays the
        triangle out from its side lengths with corner 0 at the origin and
        corner 1 on the positive x-axis.
        """
        if self.coords is not None and self.coords.shape[1] == 2:
            return self.coords[self.triangles[f]].copy()
        a, b, c = self.side_lengths[f]  # opposite corners 0, 1, 2
        # |p1 - p0| = c, |p2 - p0| = b, |p2 - p1| = a
        x = (b * b + c * c - a * a) / (2 * c)
        y = math.sqrt(max(b * b - x * x, 0.0))
        return np.array([[0.0, 0.0], [c, 0.0], [x, y]])

    def subdivided_graph(self):
        """Edge graph after one round of midpoint subdivision.

        Every triangle gains its three edge midpoints, and all pairs among its
        six points are joined by straight segments measured in the flattened
        triangle.  Returns ``(n_points, edges)``; the first ``n_vertices``
        points are the original vertices.
        """
        nv = self.n_vertices
        mid = {k: nv + e for k, e in self.edge_index.items()}
        out = []
        for f in range(self.n_triangles):
            p = self.flattened_triangle(f)
            a, b, c = self.triangles[f].tolist()
            pts = [a, b, c, mid[_ekey(b, c)], mid[_ekey(c, a)], mid[_ekey(a, b)]]
            xy = np.vstack([p, (p[1] + p[2]) / 2, (p[2] + p[0]) / 2, (p[0] + p[1]) / 2])
            if self.coords is not None and self.coords.shape[1] == 2:
                # flatten from lengths anyway: the chart may not be isometric
                q = self._intrinsic_flat(f)
                xy = np.vstack([q, (q[1] + q[2]) / 2, (q[2] + q[0]) / 2, (q[0] + q[1]) / 2])
            for i in range(6):
                for j in range(i + 1, 6):
                    out.append((pts[i], pts[j], float(np.linalg.norm(xy[i] - xy[j]))))
        return nv + len(self.edges), out

    def _intrinsic_flat(self, f):
        a, b, c = self.side_lengths[f]
        x = (b * b + c * c - a * a) / (2 * c)
        y = math.sqrt(max(b * b - x * x, 0.0))
        return np.array([[0.0, 0.0], [c, 0.0], [x, y]])


# ---------------------------------------------------------------------- metrics


def vertex_metric(m: TriDiscMesh, subdivide: bool = False) -> FiniteMetricSpace:
    """Shortest-path metric on the vertices of ``m``.

    With ``subdivide`` the paths may also run through edge midpoints and
    straight across triangles (one round of midpoint subdivision), which
    tightens the approximation of the polyhedral geodesic metric from above.
    """
    if subdivide:
        n, edges = m.subdivided_graph()
        d = all_pairs_shortest_paths(n, edges)[: m.n_vertices, : m.n_vertices]
    else:
        edges = [(int(a), int(b), w) for (a, b), w in zip(m.edges, m.lengths)]
        d = all_pairs_shortest_paths(m.n_vertices, edges)
    d = np.minimum(d, d.T)
    return FiniteMetricSpace(d, list(m.vertices), check_triangle=False)


def mesh_area(m: TriDiscMesh) -> float:
    return float(np.sum(m.triangle_areas))


# ---------------------------------------------------------------------- loops


@dataclass(frozen=True, eq=False)
class SampledLoop:
    """Constant-speed closed curve sampled at increasing angles.

    ``points[i]`` is an index into the ambient space and ``angles[i]`` its
    parameter in [0, 2*pi).  Arc length between samples is
    ``total_length * (angle difference) / (2*pi)``.
    """

    angles: np.ndarray
    points: np.ndarray
    total_length: float

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float).ravel()
        p = np.asarray(self.points, dtype=np.int64).ravel()
        if len(a) != len(p) or len(a) == 0:
            raise ValueError("a loop needs one angle per sample and at least one sample")
        if a[0] < 0 or a[-1] >= TWO_PI or np.any(np.diff(a) <= 0):
            raise ValueError("angles must be strictly increasing in [0, 2*pi)")
        if not self.total_length >= 0:
            raise ValueError("total_length must be nonnegative")
        a.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "angles", a)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "total_length", float(self.total_length))

    def __len__(self):
        return len(self.angles)

    @property
    def samples(self):
        return list(zip(self.angles.tolist(), self.points.tolist()))

    def angular_distance(self) -> np.ndarray:
        """Pairwise distance on the unit circle between sample angles."""
        diff = np.abs(self.angles[:, None] - self.angles[None, :])
        return np.minimum(diff, TWO_PI - diff)

    def arc_lengths(self) -> np.ndarray:
        """Shorter-arc length between every pair of samples."""
        return self.total_length / TWO_PI * self.angular_distance()

    def max_gap(self) -> float:
        """Largest arc length between consecutive samples."""
        if len(self) == 1:
            return self.total_length
        gaps = np.diff(np.append(self.angles, self.angles[0] + TWO_PI))
        return float(self.total_length / TWO_PI * gaps.max())

    def speed_defect(self, ambient: FiniteMetricSpace) -> float:
        """Largest mismatch between chord and arc increments of consecutive samples.

        Zero for loops whose consecutive samples are joined by geodesic
        segments of the arc length, as in a mesh boundary traversed edge by edge
        under a metric where each boundary edge is shortest.
        """
        if len(self) == 1:
            return 0.0
        nxt = np.roll(np.arange(len(self)), -1)
        chord = ambient.dist[self.points, self.points[nxt]]
        gaps = np.diff(np.append(self.angles, self.angles[0] + TWO_PI))
        return float(np.max(np.abs(chord - self.total_length / TWO_PI * gaps)))

    @classmethod
    def from_increments(cls, points, increments) -> "SampledLoop":
        """Constant-speed angles from arc-length increments.

        ``increments[i]`` is the length from ``points[i]`` to ``points[i+1]``
        (cyclically).  Angles start at 0.
        """
        inc = np.asarray(increments, dtype=float)
        total = float(inc.sum())
        if total <= 0:
            return cls(np.zeros(1), [points[0]], 0.0)
        cum = np.concatenate([[0.0], np.cumsum(inc)[:-1]])
        return cls(TWO_PI * cum / total, points, total)


def boundary_loop(m: TriDiscMesh) -> SampledLoop:
    """The boundary cycle as a constant-speed loop.

    >>> from metdisc.meshes import triangle_from_lengths
    >>> loop = boundary_loop(triangle_from_lengths(3, 4, 5))
    >>> loop.total_length
    12.0
    """
    cyc = m.boundary_cycle
    inc = [m.edge_lengths[_ekey(cyc[i], cyc[(i + 1) % len(cyc)])] for i in range(len(cyc))]
    return SampledLoop.from_increments(cyc, inc)


@dataclass(frozen=True)
class ChordArcResult:
    value: float
    infinite: bool
    witness: tuple  # pair of sample positions attaining the max
    sampling_error: float  # largest arc gap between consecutive samples

    def __float__(self):
        return self.value


def chord_arc_constant(loop: SampledLoop, ambient: FiniteMetricSpace) -> ChordArcResult:
    """Max over sample pairs of (shorter arc) / (ambient distance).

    Returns ``inf`` with ``infinite=True`` when two distinct samples sit at
    ambient distance zero.
    """
    n = len(loop)
    if n < 2:
        return ChordArcResult(1.0, False, (0, 0), loop.max_gap())
    arc = loop.arc_lengths()
    chord = ambient.dist[np.ix_(loop.points, loop.points)]
    iu, ju = np.triu_indices(n, 1)
    a, c = arc[iu, ju], chord[iu, ju]
    zero = c <= 0
    if np.any(zero & (a > 0)):
        k = int(np.nonzero(zero & (a > 0))[0][0])
        return ChordArcResult(math.inf, True, (int(iu[k]), int(ju[k])), loop.max_gap())
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(c > 0, a / np.where(c > 0, c, 1.0), 1.0)
    k = int(np.argmax(ratio))
    return ChordArcResult(float(ratio[k]), False, (int(iu[k]), int(ju[k])), loop.max_gap())


# ---------------------------------------------------------------------- Jordan domains


@dataclass(frozen=True, eq=False)
class JordanDomainSample:
    """A union of triangles forming a closed disc, with its boundary cycle."""

    triangles: tuple  # sorted triangle ids
    boundary_cycle: tuple  # vertex ids in order
    area: float
    boundary_length: float

    @property
    def ratio(self) -> float:
        return self.area / self.boundary_length**2


def _domain_boundary(m: TriDiscMesh, tris) -> list:
    """Boundary edge ids of a triangle subset (edges used exactly once)."""
    count = {}
    for f in tris:
        for e in m.triangle_edges[f].tolist():
            count[e] = count.get(e, 0) + 1
    return [e for e, c in count.items() if c == 1]


def _cycle_from_edges(m: TriDiscMesh, edge_ids):
    """Vertex cycle through the given edges, or None if they are not one simple cycle."""
    if not edge_ids:
        return None
    adj = {}
    for e in edge_ids:
        a, b = m.edges[e].tolist()
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    if any(len(v) != 2 for v in adj.values()):
        return None
    start = min(adj)
    cyc = [start]
    prev, cur = start, min(adj[start])
    while cur != start:
        cyc.append(cur)
        a, b = adj[cur]
        prev, cur = cur, (b if a == prev else a)
    if len(cyc) != len(adj):
        return None
    return cyc


def is_jordan_domain(m: TriDiscMesh, tris) -> bool:
    """True iff the triangle subset is an edge-connected closed disc bounded by one simple cycle."""
    tris = set(int(f) for f in tris)
    if not tris:
        return False
    start = next(iter(tris))
    seen = {start}
    stack = [start]
    while stack:
        f = stack.pop()
        for g in m.triangle_neighbors[f].tolist():
            if g in tris and g not in seen:
                seen.add(g)
                stack.append(g)
    if seen != tris:
        return False
    bd = _domain_boundary(m, tris)
    if _cycle_from_edges(m, bd) is None:
        return False
    verts = set(m.triangles[list(tris)].ravel().tolist())
    edges = set(m.triangle_edges[list(tris)].ravel().tolist())
    return len(verts) - len(edges) + len(tris) == 1


def _make_domain(m: TriDiscMesh, tris) -> JordanDomainSample:
    tris = tuple(sorted(int(f) for f in tris))
    bd = _domain_boundary(m, tris)
    cyc = _cycle_from_edges(m, bd)
    return JordanDomainSample(
        triangles=tris,
        boundary_cycle=tuple(cyc),
        area=float(m.triangle_areas[list(tris)].sum()),
        boundary_length=float(m.lengths[bd].sum()),
    )


def _grow_region(m: TriDiscMesh, rng: np.random.Generator):
    """One randomized region-growing run.

    Starts from a random triangle and adds edge-adjacent triangles while the
    union stays a disc: a candidate sharing one edge is accepted when its
    third vertex is new, a candidate sharing two edges always is.  The run
    stops at a random target size (log-uniform, or the whole mesh with
    probability 1/8), or when no candidate is admissible.  A per-run
    preference for notch-filling candidates varies the shapes from ragged to
    compact.  Returns (sorted triangle ids, area, boundary length).
    """
    F = m.n_triangles
    nbr, tri, side, areas = m._growth_tables
    if rng.random() < 0.125:
        target = F
    else:
        target = int(round(math.exp(rng.uniform(math.log(2), math.log(max(F, 2))))))
    fill_bias = (0.0, 0.5, 0.9)[int(rng.integers(3))]

    seed = int(rng.integers(F))
    inside = bytearray(F)
    shared = [0] * F  # number of edge-neighbors already inside
    vin = bytearray(m.n_vertices)
    members = []
    area = 0.0
    length = 0.0
    front: list = []
    pos: dict = {}
    twos: set = set()
    rand = rng.random

    def drop(g):
        i = pos.pop(g)
        last = front.pop()
        if i < len(front):
            front[i] = last
            pos[last] = i
        twos.discard(g)

    g = seed
    while True:
        inside[g] = 1
        members.append(g)
        area += areas[g]
        ng, tg, sg = nbr[g], tri[g], side[g]
        for c in range(3):
            vin[tg[c]] = 1
            h = ng[c]
            if h >= 0 and inside[h]:
                length -= sg[c]
            else:
                length += sg[c]
                if h >= 0:
                    k = shared[h] = shared[h] + 1
                    if h not in pos:
                        pos[h] = len(front)
                        front.append(h)
                    if k == 2:
                        twos.add(h)
        if len(members) >= target:
            break
        g = -1
        while front:
            if twos and rand() < fill_bias:
                cand = min(twos) if len(twos) == 1 else sorted(twos)[int(rand() * len(twos))]
            else:
                cand = front[int(rand() * len(front))]
            k = shared[cand]
            if k == 2:
                drop(cand)
                g = cand
                break
            if k == 1:
                nc, tc = nbr[cand], tri[cand]
                j = 0 if (nc[0] >= 0 and inside[nc[0]]) else (1 if (nc[1] >= 0 and inside[nc[1]]) else 2)
                drop(cand)
                if not vin[tc[j]]:
                    g = cand
                    break
                # re-enters the frontier when another neighbor joins
                continue
            drop(cand)
        if g < 0:
            break
    return tuple(sorted(members)), area, length


def _domain_runs(m: TriDiscMesh, budget: int, seed: int):
    """Single triangles followed by ``budget`` region-grown runs, deduplicated.

    Run ``i`` draws from its own generator seeded by ``(seed, i)``, so the
    output for a smaller budget is a prefix of the output for a larger one.
    """
    seen = set()
    for f in range(m.n_triangles):
        key = (f,)
        seen.add(key)
        s = m.side_lengths[f]
        yield key, float(m.triangle_areas[f]), float(s.sum())
    for i in range(int(budget)):
        rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, i])
        key, area, length = _grow_region(m, rng)
        if key in seen:
            continue
        seen.add(key)
        yield key, area, length


def enumerate_jordan_domains(m: TriDiscMesh, budget: int = 0, seed: int = 0) -> list:
    """All single-triangle domains plus up to ``budget`` distinct region-grown ones."""
    return [_make_domain(m, key) for key, _, _ in _domain_runs(m, budget, seed)]


def isoperimetric_lower_bound(m: TriDiscMesh, budget: int = 0, seed: int = 0):
    """Largest area / boundary_length**2 over the enumerated Jordan domains.

    The enumeration is partial, so the value is a lower bound on the best
    constant in the quadratic isoperimetric inequality of the mesh metric.

    Returns
    -------
    (float, JordanDomainSample)
        The constant and a domain attaining it.
    """
    best, best_key = -1.0, None
    for key, area, length in _domain_runs(m, budget, seed):
        r = area / (length * length)
        if r > best:
            best, best_key = r, key
    return best, _make_domain(m, best_key)


def global_isoperimetric_constant(C: float, l0: float, total_area: float) -> float:
    """Local-to-global constant ``max(C, total_area / l0**2)``; ``l0`` may be inf."""
    if not (C > 0 and l0 > 0 and total_area > 0):
        raise ValueError("C, l0 and total_area must be positive")
    if math.isinf(l0):
        return float(C)
    return max(float(C), float(total_area) / float(l0) ** 2)
