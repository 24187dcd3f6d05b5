"""Area and energy of piecewise-linear maps into Euclidean space.

A PL map has one differential per triangle.  Its Busemann Jacobian is
``pi`` over the area of the unit ball of the pulled-back seminorm, which
for a linear map ``A`` is ``sqrt(det(A^T A))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .disc_mesh import MeshGeometryError, TriDiscMesh
from .intrinsic_disc import PLMap

__all__ = [
    "FunctionalReport",
    "InvalidSeminormError",
    "SeminormRep",
    "busemann_jacobian",
    "functional_report",
    "multiplicity_area",
    "pl_area",
    "pl_energy",
    "polygon_from_linear",
    "singular_values",
    "triangle_differential",
]


class InvalidSeminormError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SeminormRep:
    """A seminorm on the plane, either ``v -> |A v|`` or by its unit ball.

    Exactly one of ``linear`` (an (N, 2) matrix) and ``polygon`` (unit ball
    corners, in order) is set, unless ``degenerate`` declares an unbounded
    unit ball.
    """

    linear: np.ndarray = None
    polygon: np.ndarray = None
    degenerate: bool = False

    def __post_init__(self):
        if self.degenerate:
            return
        if (self.linear is None) == (self.polygon is None):
            raise InvalidSeminormError("give exactly one of a linear map or a polygon")
        if self.linear is not None:
            a = np.asarray(self.linear, dtype=float)
            if a.ndim != 2 or a.shape[1] != 2:
                raise InvalidSeminormError(f"linear map must have shape (N, 2), got {a.shape}")
            if not np.isfinite(a).all():
                raise InvalidSeminormError("linear map has non-finite entries")
            object.__setattr__(self, "linear", a)
        else:
            p = np.asarray(self.polygon, dtype=float)
            if p.ndim != 2 or p.shape[1] != 2 or len(p) < 4 or len(p) % 2:
                raise InvalidSeminormError("polygon needs an even number (>= 4) of planar corners")
            _check_ball(p)
            object.__setattr__(self, "polygon", p)

    @property
    def kind(self) -> str:
        if self.degenerate:
            return "degenerate"
        return "linear" if self.linear is not None else "polygon"

    @classmethod
    def sup_norm(cls) -> "SeminormRep":
        return cls(polygon=[[1, -1], [1, 1], [-1, 1], [-1, -1]])


def _shoelace(p: np.ndarray) -> float:
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _check_ball(p: np.ndarray):
    k = len(p) // 2
    scale = float(np.abs(p).max())
    tol = 1e-9 * max(scale, 1e-300)
    if np.abs(p[:k] + p[k:]).max() > tol:
        raise InvalidSeminormError("polygon is not centrally symmetric (corner i must be -corner i+k)")
    e = np.roll(p, -1, axis=0) - p
    cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
    if not (np.all(cross >= -tol * scale) or np.all(cross <= tol * scale)):
        raise InvalidSeminormError("polygon is not convex")
    if abs(_shoelace(p)) <= tol * scale:
        raise InvalidSeminormError("polygon has no interior; declare the seminorm degenerate instead")


def busemann_jacobian(s: SeminormRep) -> float:
    """``pi`` divided by the area of the unit ball (0 for an unbounded ball).

    Examples
    --------
    >>> busemann_jacobian(SeminormRep(linear=np.diag([2.0, 3.0])))
    6.0
    """
    if s.kind == "degenerate":
        return 0.0
    if s.kind == "linear":
        g = s.linear.T @ s.linear
        det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
        return math.sqrt(det) if det > 0 else 0.0
    return math.pi / abs(_shoelace(s.polygon))


def polygon_from_linear(A, n_dirs: int = 10_000) -> SeminormRep:
    """Inscribed polygon of the ellipse ``{v : |A v| <= 1}`` with ``n_dirs``
    corners (``n_dirs`` even).

    Corners are equally spaced in the ellipse's own parametrization, so the
    relative area error is about ``(2 pi / n_dirs)^2 / 6`` whatever the
    eccentricity.
    """
    A = np.asarray(A, dtype=float)
    if n_dirs % 2:
        n_dirs += 1
    _, s, vt = np.linalg.svd(A, full_matrices=False)
    if len(s) < 2 or s[1] <= 1e-14 * max(s[0], 1e-300):
        raise InvalidSeminormError("linear map is degenerate; its unit ball is unbounded")
    t = 2 * np.pi * np.arange(n_dirs) / n_dirs
    p = (np.column_stack([np.cos(t), np.sin(t)]) / s[:2]) @ vt[:2]
    # exact central symmetry despite rounding in cos/sin
    k = n_dirs // 2
    p[k:] = -p[:k]
    return SeminormRep(polygon=p)


def _source_frame(m: TriDiscMesh, f: int) -> np.ndarray:
    """Planar corners of triangle ``f``, isometric to its edge lengths."""
    if m.coords is not None and m.coords.shape[1] == 2:
        p = m.coords[m.triangles[f]]
        s = np.linalg.norm(p[[1, 2, 0]] - p[[2, 0, 1]], axis=1)  # opposite corners 0, 1, 2
        if np.allclose(s, m.side_lengths[f], rtol=1e-9, atol=0):
            return p.astype(float)
    return m._intrinsic_flat(f)


def triangle_differential(m: TriDiscMesh, f: int, u: PLMap) -> SeminormRep:
    """The linear map taking the flattened edge vectors of ``f`` to their images.

    The source frame is the mesh's planar chart when it agrees with the
    edge lengths, otherwise the canonical layout from the lengths.
    """
    if not u.euclidean:
        raise ValueError("differentials need a Euclidean target")
    if m.triangle_areas[f] <= 1e-14 * max(m.side_lengths[f].max() ** 2, 1e-300):
        raise MeshGeometryError(f, "degenerate triangle has no differential")
    p = _source_frame(m, f)
    q = u.assignment[m.triangles[f]]
    E = np.column_stack([p[1] - p[0], p[2] - p[0]])
    F = np.column_stack([q[1] - q[0], q[2] - q[0]])
    return SeminormRep(linear=np.linalg.solve(E.T, F.T).T)


def _differentials(u: PLMap) -> np.ndarray:
    m = u.source
    if not u.euclidean:
        raise ValueError("area and energy need a Euclidean target")
    return np.stack([triangle_differential(m, f, u).linear for f in range(m.n_triangles)])


def singular_values(u: PLMap) -> np.ndarray:
    """(F, 2) singular values of the per-triangle differentials, descending."""
    A = _differentials(u)
    if A.shape[1] == 1:
        A = np.concatenate([A, np.zeros_like(A)], axis=1)
    return np.linalg.svd(A, compute_uv=False)[:, :2]


def pl_area(u: PLMap, per_triangle: bool = False):
    """Busemann area: sum of Jacobian times source triangle area."""
    J = np.array([busemann_jacobian(SeminormRep(linear=a)) for a in _differentials(u)])
    t = J * u.source.triangle_areas
    return t if per_triangle else float(t.sum())


def pl_energy(u: PLMap, per_triangle: bool = False):
    """Squared operator norm of the differential integrated over the source."""
    s1 = singular_values(u)[:, 0]
    t = s1**2 * u.source.triangle_areas
    return t if per_triangle else float(t.sum())


def _owned(dx, dy):
    # boundary points of an edge belong to the triangle traversing it in the
    # lexicographically positive (dy, dx) direction
    return (dy > 0) | ((dy == 0) & (dx > 0))


def _count_hits(tris: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Number of triangles (rows of (T, 3, 2) corners, CCW) containing each point."""
    cnt = np.zeros(len(pts), dtype=np.int64)
    x, y = pts[:, 0], pts[:, 1]
    for a, b, c in tris:
        inside = np.ones(len(pts), dtype=bool)
        for p, q in ((a, b), (b, c), (c, a)):
            dx, dy = q[0] - p[0], q[1] - p[1]
            e = dx * (y - p[1]) - dy * (x - p[0])
            inside &= (e > 0) | ((e == 0) & _owned(dx, dy))
        cnt += inside
    return cnt


def multiplicity_area(u: PLMap, samples: int = 100_000, seed: int = 0, block: int = 16_384):
    """Monte Carlo integral of the fiber cardinality over the image.

    Samples are uniform in the image bounding box, drawn in blocks whose
    generators are spawned from ``seed``, so the result does not depend on
    how blocks are scheduled.  Returns ``(value, standard_error)``.
    """
    if u.dim != 2:
        raise ValueError("multiplicity area needs a planar target")
    img = u.assignment
    lo, hi = img.min(axis=0), img.max(axis=0)
    box = float(np.prod(hi - lo))
    corners = img[u.source.triangles]
    e1 = corners[:, 1] - corners[:, 0]
    e2 = corners[:, 2] - corners[:, 0]
    orient = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    if box <= 0 or samples <= 0 or not np.any(orient != 0):
        return 0.0, 0.0
    # flat images have measure zero; the rest are made counterclockwise
    keep = orient != 0
    tris = corners[keep].copy()
    flip = orient[keep] < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]

    nblocks = -(-samples // block)
    children = np.random.SeedSequence(int(seed)).spawn(nblocks)
    total = 0.0
    total_sq = 0.0
    for b, ss in enumerate(children):
        k = min(block, samples - b * block)
        pts = lo + (hi - lo) * np.random.default_rng(ss).random((k, 2))
        c = _count_hits(tris, pts)
        total += float(c.sum())
        total_sq += float((c.astype(float) ** 2).sum())
    mean = total / samples
    var = max(total_sq / samples - mean**2, 0.0) * samples / max(samples - 1, 1)
    return box * mean, box * math.sqrt(var / samples)


@dataclass
class FunctionalReport:
    area: float
    energy: float
    multiplicity_area: float | None
    multiplicity_stderr: float | None
    samples: int
    worst_triangle_gap: float  # min over triangles of energy - area

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def functional_report(u: PLMap, samples: int = 100_000, seed: int = 0) -> FunctionalReport:
    a = pl_area(u, per_triangle=True)
    e = pl_energy(u, per_triangle=True)
    if u.dim == 2:
        mv, se = multiplicity_area(u, samples, seed)
    else:
        mv = se = None
    gap = float(np.min(e - a)) if len(a) else 0.0
    return FunctionalReport(float(a.sum()), float(e.sum()), mv, se, samples if mv is not None else 0, gap)
