"""Glued metric on the mapping cylinder of a loop in a finite metric space.

A flat collar ``S^1 x [0, 1]`` of circumference ``L`` and height ``R`` is
attached to the base along the loop.  The collar is sampled on an ``a x h``
grid of angles ``2*pi*j/a`` and heights ``k/h`` (k = 1..h); the bottom
circle is identified with the loop and is not sampled separately.
Infima over the attaching circle are taken over the loop's sample angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import min_plus_via
from .disc_mesh import (
    SampledLoop,
    TriDiscMesh,
    chord_arc_constant,
    isoperimetric_lower_bound,
    mesh_area,
)
from .meshes import zip_rings
from .metric_core import FiniteMetricSpace, validate_metric

__all__ = [
    "CylinderReport",
    "CylinderSpace",
    "HypothesisError",
    "ResolutionError",
    "build_cylinder",
    "collar_distance",
    "cylinder_mesh",
    "lgc_bound",
    "loop_lipschitz",
    "transfer_constants",
    "verify_cylinder",
]

TWO_PI = 2.0 * math.pi


class HypothesisError(ValueError):
    """The collar circumference is too short for the loop's Lipschitz constant."""

    def __init__(self, message, pair):
        super().__init__(message)
        self.pair = pair


class ResolutionError(ValueError):
    pass


def _angdist(a, b):
    d = np.abs(np.subtract.outer(a, b)) % TWO_PI
    return np.minimum(d, TWO_PI - d)


def collar_distance(theta1, s1, theta2, s2, L, R):
    """Flat-cylinder distance between collar points (angle, height in [0, 1]).

    Angular and height offsets are scaled by ``L / 2pi`` and ``R`` and
    combined as a Euclidean norm.  Broadcasts like an outer product.
    """
    ang = _angdist(np.asarray(theta1, float), np.asarray(theta2, float))
    dh = np.subtract.outer(np.asarray(s1, float), np.asarray(s2, float))
    return np.hypot(L / TWO_PI * ang, R * dh)


def loop_lipschitz(loop: SampledLoop, base: FiniteMetricSpace):
    """Largest d(p, q) / angular distance over sample pairs, with the pair.

    A lower bound for the Lipschitz constant of the continuous curve.
    """
    n = len(loop)
    if n < 2:
        return 0.0, None
    ang = loop.angular_distance()
    d = base.dist[np.ix_(loop.points, loop.points)]
    iu, ju = np.triu_indices(n, 1)
    ratio = d[iu, ju] / ang[iu, ju]
    k = int(np.argmax(ratio))
    return float(ratio[k]), (int(iu[k]), int(ju[k]))


@dataclass(frozen=True, eq=False)
class CylinderSpace:
    """Base plus sampled collar, with the glued distance matrix.

    Points ``0 .. len(base)-1`` of ``space`` are the base points in order;
    the rest are collar grid points, row-major by height then angle, with
    coordinates in ``collar_coords`` as (angle, height).
    """

    base: FiniteMetricSpace
    loop: SampledLoop
    L: float
    R: float
    grid: tuple
    space: FiniteMetricSpace
    collar_coords: np.ndarray
    lipschitz: float
    base_mesh: TriDiscMesh = field(default=None, repr=False)

    @property
    def n_base(self) -> int:
        return len(self.base)

    @property
    def max_angular_gap(self) -> float:
        if len(self.loop) == 1:
            return math.pi
        a = self.loop.angles
        return float(np.diff(np.append(a, a[0] + TWO_PI)).max())

    @property
    def discretization_error(self) -> float:
        """Bound on the error from restricting infima to loop sample angles.

        Moving the attaching parameter to the nearest sample changes the
        collar leg by at most ``(L/2pi) * gap/2`` and the base leg by at most
        ``Lip * gap/2``; both legs of a two-sided path count, hence the full
        gap.
        """
        return (self.L / TWO_PI + self.lipschitz) * self.max_angular_gap

    def collar_indices(self, k=None) -> np.ndarray:
        """Indices into ``space`` of all collar points, or of height row ``k`` (1..h)."""
        a, h = self.grid
        if k is None:
            return np.arange(self.n_base, self.n_base + a * h)
        return self.n_base + (k - 1) * a + np.arange(a)

    def top_loop(self) -> SampledLoop:
        """The collar's top circle as a loop over ``space``; total length L."""
        a, _ = self.grid
        idx = self.collar_indices(self.grid[1])
        return SampledLoop(self.collar_coords[idx - self.n_base, 0], idx, self.L)


def build_cylinder(base: FiniteMetricSpace, loop: SampledLoop, L: float, R: float, grid=(None, 4),
                   *, base_mesh: TriDiscMesh = None, validate: bool = True) -> CylinderSpace:
    """Glue a flat collar to ``base`` along ``loop`` and compute all distances.

    Distances follow the three-case formula: base pairs keep the base
    distance; a base point x and collar point y are at
    ``min_t d(x, loop(t)) + d_collar((t, 0), y)``; two collar points are at
    the smaller of their collar distance and the cheapest path that drops
    to the base at t, crosses the base to loop(s) and climbs back.

    Parameters
    ----------
    grid : (a, h)
        Angular and height sample counts; ``a`` defaults to the loop size.
    base_mesh : TriDiscMesh, optional
        Mesh the base metric came from; enables isoperimetric checks in
        :func:`verify_cylinder`.
    validate : bool
        Run :func:`validate_metric` on the result.

    Raises
    ------
    HypothesisError
        ``L < 2*pi*Lip(loop)`` at sample resolution.
    ResolutionError
        ``a`` below the loop sample count, or ``h < 1``.
    """
    L, R = float(L), float(R)
    if not (L > 0 and R > 0):
        raise ValueError("L and R must be positive")
    a, h = grid
    a = len(loop) if a is None else int(a)
    h = int(h)
    if a < len(loop):
        raise ResolutionError(f"angular resolution {a} is coarser than the loop ({len(loop)} samples)")
    if h < 1:
        raise ResolutionError("need at least one height row")
    if np.any(loop.points < 0) or np.any(loop.points >= len(base)):
        raise ValueError("loop samples must index base points")

    lip, pair = loop_lipschitz(loop, base)
    slack = 1e-9 * max(L, 1.0)
    if L + slack < TWO_PI * lip:
        raise HypothesisError(
            f"L = {L:.6g} < 2*pi*Lip = {TWO_PI * lip:.6g}; worst sample pair {pair}", pair
        )

    theta = TWO_PI * np.arange(a) / a
    heights = np.arange(1, h + 1) / h
    coords = np.column_stack([np.tile(theta, h), np.repeat(heights, a)])
    t_loop = loop.angles
    gam = loop.points

    # collar point -> attaching point (t, 0) for every loop sample t
    to_attach = collar_distance(coords[:, 0], coords[:, 1], t_loop, np.zeros(len(t_loop)), L, R)
    to_attach = to_attach.reshape(len(coords), len(t_loop))
    # base point -> loop sample
    base_to_loop = base.dist[:, gam]
    loop_loop = base.dist[np.ix_(gam, gam)]

    nb, nc = len(base), len(coords)
    D = np.empty((nb + nc, nb + nc))
    D[:nb, :nb] = base.dist
    bc = min_plus_via(np.ascontiguousarray(base_to_loop), np.ascontiguousarray(to_attach))
    D[:nb, nb:] = bc
    D[nb:, :nb] = bc.T
    # climb down to t, cross the base to s: via[y, s] = min_t d_Y(y, t) + d_X(t, s)
    down = min_plus_via(np.ascontiguousarray(to_attach), np.ascontiguousarray(loop_loop))
    through = min_plus_via(down, np.ascontiguousarray(to_attach))
    direct = collar_distance(coords[:, 0], coords[:, 1], coords[:, 0], coords[:, 1], L, R)
    cc = np.minimum(direct, through)
    cc = np.minimum(cc, cc.T)
    np.fill_diagonal(cc, 0.0)
    D[nb:, nb:] = cc

    labels = list(base.labels) + [f"collar[{j},{k}]" for k in range(1, h + 1) for j in range(a)]
    space = FiniteMetricSpace(D, labels, check_triangle=False)
    if validate:
        rep = validate_metric(D, space.tolerance)
        if not rep.ok:
            raise ValueError(f"glued distance is not a metric: {rep}")
    return CylinderSpace(base, loop, L, R, (a, h), space, coords, lip, base_mesh)


def cylinder_mesh(c: CylinderSpace) -> TriDiscMesh:
    """Base mesh plus the triangulated collar, vertex-aligned with ``c.space``.

    The loop must be the base mesh's boundary cycle.  Collar edges get exact
    flat-cylinder lengths; the glued bottom edges keep their base lengths.
    """
    m = c.base_mesh
    if m is None:
        raise ValueError("cylinder has no base mesh")
    cyc = list(m.boundary_cycle)
    pts = c.loop.points.tolist()
    if sorted(pts) != sorted(cyc) or len(pts) != len(cyc):
        raise ValueError("loop is not the base mesh boundary")
    a, h = c.grid
    nb = c.n_base
    theta = c.collar_coords[:a, 0]
    order = np.argsort(c.loop.angles, kind="stable")
    tris = [list(t) for t in m.triangles.tolist()]
    tris += zip_rings([pts[i] for i in order], c.loop.angles[order], list(range(nb, nb + a)), theta)
    for k in range(1, h):
        lo = list(range(nb + (k - 1) * a, nb + k * a))
        hi = list(range(nb + k * a, nb + (k + 1) * a))
        tris += zip_rings(lo, theta, hi, theta)

    angle = np.empty(nb + a * h)
    height = np.empty(nb + a * h)
    angle[pts] = c.loop.angles
    height[pts] = 0.0
    angle[nb:] = c.collar_coords[:, 0]
    height[nb:] = c.collar_coords[:, 1]
    lengths = dict(m.edge_lengths)
    for t in tris[m.n_triangles:]:
        for u, v in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2])):
            key = (u, v) if u < v else (v, u)
            if key in lengths:
                continue
            lengths[key] = float(collar_distance(angle[u], height[u], angle[v], height[v], c.L, c.R))
    return TriDiscMesh(tris, lengths, vertices=list(c.space.labels))


def transfer_constants(C: float, L: float, R: float) -> float:
    """Isoperimetric constant of the glued space: ``C + max(1/2pi, R/L)``."""
    if not (C >= 0 and L > 0 and R > 0):
        raise ValueError("need C >= 0 and L, R > 0")
    return float(C) + max(1.0 / TWO_PI, float(R) / float(L))


def lgc_bound(C: float):
    """Slope and intercept of the linear contractibility function ``(8C + 1) r``."""
    if not C >= 0:
        raise ValueError("C must be nonnegative")
    return 8.0 * float(C) + 1.0, 0.0


@dataclass
class CylinderReport:
    embedding_error: float
    net_radius: float
    net_radius_bound: float  # R + discretization slack
    collar_area: float
    base_area: float | None
    total_area: float | None
    gammaR_length: float
    gammaR_chord_arc: float
    gammaR_sampling_error: float
    lipschitz: float
    discretization_error: float
    midpoint_defect: float
    C_base: float | None = None
    C_cyl: float | None = None
    C_transfer_bound: float | None = None
    absent: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def verify_cylinder(c: CylinderSpace, budget: int = 0, seed: int = 0) -> CylinderReport:
    """Measure the quantitative properties of the glued space.

    Isoperimetric fields need a base mesh whose boundary is the loop; they
    are listed in ``absent`` otherwise.  With ``budget > 0`` the mesh
    domain search runs that many region-growing attempts per mesh, and the
    same budget of random pairs is used for the approximate-midpoint check.
    """
    nb = c.n_base
    D = c.space.dist
    emb = float(np.max(np.abs(D[:nb, :nb] - c.base.dist))) if nb else 0.0
    net = float(D[nb:, :nb].min(axis=1).max()) if len(D) > nb else 0.0

    top = c.top_loop()
    a = c.grid[0]
    ring = top.points
    gl = float(sum(D[ring[i], ring[(i + 1) % a]] for i in range(a)))
    ca = chord_arc_constant(top, c.space)

    absent = []
    if c.base_mesh is not None:
        base_area = mesh_area(c.base_mesh)
    elif nb == 1:
        base_area = 0.0
    else:
        base_area = None
        absent += ["base_area", "total_area"]
    collar_area = c.L * c.R

    rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, 1])
    npairs = min(max(int(budget), 16), len(D) * (len(D) - 1) // 2)
    x = rng.integers(len(D), size=npairs)
    y = rng.integers(len(D), size=npairs)
    half = D[x, y] / 2
    # best approximate midpoint: min_z max(d(x,z), d(z,y)) - d(x,y)/2
    mid = np.max(np.maximum(D[x], D[y]).min(axis=1) - half) if npairs else 0.0

    report = CylinderReport(
        embedding_error=emb,
        net_radius=net,
        net_radius_bound=c.R + c.discretization_error,
        collar_area=collar_area,
        base_area=base_area,
        total_area=None if base_area is None else base_area + collar_area,
        gammaR_length=gl,
        gammaR_chord_arc=ca.value,
        gammaR_sampling_error=ca.sampling_error,
        lipschitz=c.lipschitz,
        discretization_error=c.discretization_error,
        midpoint_defect=float(mid),
        absent=absent,
    )
    try:
        cm = cylinder_mesh(c)
    except ValueError:
        report.absent += ["C_base", "C_cyl", "C_transfer_bound"]
        return report
    report.C_base = isoperimetric_lower_bound(c.base_mesh, budget, seed)[0]
    report.C_cyl = isoperimetric_lower_bound(cm, budget, seed)[0]
    report.C_transfer_bound = transfer_constants(report.C_base, c.L, c.R)
    return report
