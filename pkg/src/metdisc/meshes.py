"""Constructors for the standard test meshes."""

from __future__ import annotations

import math

import numpy as np

from .disc_mesh import TriDiscMesh

__all__ = [
    "concentric_disc",
    "delaunay_disc",
    "equilateral_triangle",
    "fan_disc",
    "grid_square",
    "rectangle",
    "triangle_from_lengths",
    "unit_square",
    "zip_rings",
]


def triangle_from_lengths(a: float, b: float, c: float) -> TriDiscMesh:
    """Single triangle (0, 1, 2) with |01| = a, |12| = b, |20| = c."""
    return TriDiscMesh([[0, 1, 2]], {(0, 1): a, (1, 2): b, (0, 2): c})


def equilateral_triangle(side: float = 1.0) -> TriDiscMesh:
    return triangle_from_lengths(side, side, side)


def unit_square() -> TriDiscMesh:
    """Unit square cut along the diagonal from (0, 0) to (1, 1)."""
    xy = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    lengths = {(0, 1): 1.0, (1, 2): 1.0, (2, 3): 1.0, (0, 3): 1.0, (0, 2): math.sqrt(2.0)}
    return TriDiscMesh([[0, 1, 2], [0, 2, 3]], lengths, coords=xy)


def rectangle(length: float, width: float) -> TriDiscMesh:
    """One ``length`` x ``width`` cell split along a diagonal."""
    xy = np.array([[0.0, 0.0], [length, 0.0], [length, width], [0.0, width]])
    return TriDiscMesh([[0, 1, 2], [0, 2, 3]], coords=xy)


def fan_disc(n: int, radius: float = 1.0) -> TriDiscMesh:
    """Regular n-gon inscribed in a circle, coned off at the center.

    Vertex 0 is the center; 1..n are the polygon corners counterclockwise
    from angle 0.  Radial edges have length exactly ``radius``.
    """
    if n < 3:
        raise ValueError("a fan disc needs at least 3 sectors")
    t = 2 * np.pi * np.arange(n) / n
    xy = np.vstack([[0.0, 0.0], radius * np.column_stack([np.cos(t), np.sin(t)])])
    chord = 2 * radius * math.sin(math.pi / n)
    tris, lengths = [], {}
    for k in range(1, n + 1):
        nxt = k % n + 1
        tris.append([0, k, nxt])
        lengths[(0, k)] = float(radius)
        lengths[(min(k, nxt), max(k, nxt))] = chord
    return TriDiscMesh(tris, lengths, coords=xy)


def grid_square(k: int, side: float = 1.0, diagonal: str = "/") -> TriDiscMesh:
    """k x k grid on [0, side]^2, each cell split into two triangles.

    ``diagonal="/"`` cuts cells from lower-left to upper-right, so the main
    diagonal of the square is a mesh path.
    """
    xs = np.linspace(0.0, side, k + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    xy = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):  # column i, row j
        return j * (k + 1) + i

    tris = []
    for j in range(k):
        for i in range(k):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            if diagonal == "/":
                tris += [[a, b, c], [a, c, d]]
            else:
                tris += [[a, b, d], [b, c, d]]
    return TriDiscMesh(tris, coords=xy)


def zip_rings(lower, lower_angles, upper, upper_angles):
    """Triangulate the band between two vertex rings ordered by angle.

    Both rings must be sorted by angle in [0, 2*pi).  Produces
    ``len(lower) + len(upper)`` triangles, advancing along whichever ring
    has the next smaller angle.
    """
    P, Q = list(lower), list(upper)
    ap = np.append(np.asarray(lower_angles, float), lower_angles[0] + 2 * np.pi)
    aq = np.append(np.asarray(upper_angles, float), upper_angles[0] + 2 * np.pi)
    m, a = len(P), len(Q)
    tris = []
    i = j = 0
    while i < m or j < a:
        if i < m and (j == a or ap[i + 1] <= aq[j + 1]):
            tris.append([P[i], Q[j % a], P[(i + 1) % m]])
            i += 1
        else:
            tris.append([P[i % m], Q[j], Q[(j + 1) % a]])
            j += 1
    return tris


def concentric_disc(ring_sizes, radii=None, offsets=None) -> TriDiscMesh:
    """Center vertex plus concentric rings of the given sizes, zipped together.

    Vertex 0 is the center, then each ring counterclockwise.  ``offsets``
    rotates each ring (fraction of its angular step) to avoid aligned
    corners.
    """
    ring_sizes = list(ring_sizes)
    r = list(radii) if radii is not None else [(k + 1) / len(ring_sizes) for k in range(len(ring_sizes))]
    offs = list(offsets) if offsets is not None else [0.5 * (k % 2) for k in range(len(ring_sizes))]
    xy = [[0.0, 0.0]]
    rings, angles = [], []
    for size, rad, off in zip(ring_sizes, r, offs):
        t = 2 * np.pi * (np.arange(size) + off) / size
        ids = list(range(len(xy), len(xy) + size))
        xy += np.column_stack([rad * np.cos(t), rad * np.sin(t)]).tolist()
        rings.append(ids)
        angles.append(t)
    first = rings[0]
    tris = [[0, first[k], first[(k + 1) % len(first)]] for k in range(len(first))]
    for lo, alo, hi, ahi in zip(rings, angles, rings[1:], angles[1:]):
        tris += zip_rings(lo, alo, hi, ahi)
    return TriDiscMesh(tris, coords=np.array(xy))


def delaunay_disc(n_points: int, rng=None, dim: int = 2) -> TriDiscMesh:
    """Delaunay triangulation of random points in the unit square.

    Retries until every triangle is comfortably nondegenerate.  With
    ``dim=3`` the points are lifted by a random quadratic height so edge
    lengths are no longer planar.
    """
    from scipy.spatial import Delaunay

    rng = np.random.default_rng(rng)
    for _ in range(100):
        p = rng.random((n_points, 2))
        tri = Delaunay(p)
        s = tri.simplices
        e1 = p[s[:, 1]] - p[s[:, 0]]
        e2 = p[s[:, 2]] - p[s[:, 0]]
        area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        if area.min() > 1e-4 and len(np.unique(s)) == n_points:
            break
    else:  # pragma: no cover
        raise RuntimeError("could not draw a nondegenerate Delaunay disc")
    if dim == 3:
        h = rng.normal(size=3)
        z = h[0] * p[:, 0] ** 2 + h[1] * p[:, 0] * p[:, 1] + h[2] * p[:, 1] ** 2
        p = np.column_stack([p, z])
    return TriDiscMesh(s, coords=p)
