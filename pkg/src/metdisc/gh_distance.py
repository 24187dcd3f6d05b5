"""Gromov-Hausdorff distance between finite metric spaces, and epsilon-nets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric_core import FiniteMetricSpace

__all__ = [
    "Correspondence",
    "FullnessError",
    "NetBound",
    "NetCertificate",
    "SizeCapError",
    "distortion",
    "gh_exact_small",
    "gh_lower_bounds",
    "gh_upper_from_net",
    "min_epsilon_net",
]


class FullnessError(ValueError):
    def __init__(self, missing_x, missing_y):
        self.missing_x, self.missing_y = list(missing_x), list(missing_y)
        super().__init__(f"relation is not full: uncovered X points {self.missing_x}, Y points {self.missing_y}")


class SizeCapError(ValueError):
    pass


@dataclass(frozen=True)
class Correspondence:
    """A relation between point indices of two spaces of sizes ``nx`` and ``ny``."""

    pairs: tuple
    nx: int
    ny: int

    def __post_init__(self):
        pairs = tuple(sorted({(int(i), int(j)) for i, j in self.pairs}))
        for i, j in pairs:
            if not (0 <= i < self.nx and 0 <= j < self.ny):
                raise ValueError(f"pair {(i, j)} out of range")
        object.__setattr__(self, "pairs", pairs)

    def check_full(self):
        xs = {i for i, _ in self.pairs}
        ys = {j for _, j in self.pairs}
        mx = [i for i in range(self.nx) if i not in xs]
        my = [j for j in range(self.ny) if j not in ys]
        if mx or my:
            raise FullnessError(mx, my)

    def transpose(self) -> "Correspondence":
        return Correspondence(tuple((j, i) for i, j in self.pairs), self.ny, self.nx)


def distortion(c: Correspondence, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    """max over pairs (x, y), (x', y') of ``|d_X(x, x') - d_Y(y, y')|``."""
    if (c.nx, c.ny) != (len(X), len(Y)):
        raise ValueError("correspondence does not match the spaces")
    c.check_full()
    i = np.array([p[0] for p in c.pairs])
    j = np.array([p[1] for p in c.pairs])
    return float(np.abs(X.dist[np.ix_(i, i)] - Y.dist[np.ix_(j, j)]).max())


# ---------------------------------------------------------------------- exact


def gh_exact_small(X: FiniteMetricSpace, Y: FiniteMetricSpace, cap: int = 7):
    """Exact Gromov-Hausdorff distance by branch and bound.

    Every full relation contains one of the form ``graph(f)`` plus one pair
    ``(g(y), y)`` for each ``y`` missed by ``f``, where ``f: X -> Y`` and
    ``g`` picks a partner for the missed points, and dropping pairs never
    raises the distortion.  The search enumerates such relations, pruning
    any partial relation whose distortion already reaches the best found.

    Returns ``(d_GH, witness)`` with ``2 * d_GH == distortion(witness)``.
    """
    nx, ny = len(X), len(Y)
    if nx > cap or ny > cap:
        raise SizeCapError(f"exact GH limited to {cap} points per space, got {nx} and {ny}")
    dx = X.dist.tolist()
    dy = Y.dist.tolist()
    # the full product relation is always admissible
    best = [float(np.abs(X.dist[:, :, None, None] - Y.dist[None, None, :, :]).max()) if nx and ny else 0.0]
    best_rel = [[(i, j) for i in range(nx) for j in range(ny)]]
    floor = 2.0 * gh_lower_bounds(X, Y)

    # far-apart points first: they constrain the search most
    xorder = sorted(range(nx), key=lambda i: -max(dx[i]))
    rel: list = []
    covered = [0] * ny

    def add_cost(i, j, cur):
        worst = cur
        for a, b in rel:
            v = dx[i][a] - dy[j][b]
            if v < 0:
                v = -v
            if v > worst:
                worst = v
                if worst >= best[0]:
                    return worst
        return worst

    def finish_y(missing, k, cur):
        if cur >= best[0]:
            return
        if k == len(missing):
            best[0] = cur
            best_rel[0] = list(rel)
            return
        j = missing[k]
        for i in xorder:
            c = add_cost(i, j, cur)
            if c < best[0]:
                rel.append((i, j))
                finish_y(missing, k + 1, c)
                rel.pop()
                if best[0] <= floor:
                    return

    def assign_x(k, cur):
        if cur >= best[0]:
            return
        if k == nx:
            missing = [j for j in range(ny) if not covered[j]]
            finish_y(missing, 0, cur)
            return
        i = xorder[k]
        for j in sorted(range(ny), key=lambda j: abs(max(dy[j]) - max(dx[i]))):
            c = add_cost(i, j, cur)
            if c < best[0]:
                rel.append((i, j))
                covered[j] += 1
                assign_x(k + 1, c)
                covered[j] -= 1
                rel.pop()
                if best[0] <= floor:
                    return

    if nx and ny:
        assign_x(0, 0.0)
    w = Correspondence(tuple(best_rel[0]), nx, ny)
    return best[0] / 2.0, w


# ---------------------------------------------------------------------- bounds


def _hausdorff_1d(a: np.ndarray, b: np.ndarray) -> float:
    a = np.unique(a)
    b = np.unique(b)

    def one_sided(p, q):
        k = np.clip(np.searchsorted(q, p), 1, len(q) - 1) if len(q) > 1 else np.zeros(len(p), dtype=int)
        d = np.abs(p - q[k])
        if len(q) > 1:
            d = np.minimum(d, np.abs(p - q[k - 1]))
        return float(d.max())

    return max(one_sided(a, b), one_sided(b, a))


def gh_lower_bounds(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    """Certified lower bound on d_GH.

    The largest of three halved quantities, each at most the distortion of
    any full relation: the diameter gap, the Hausdorff distance between the
    sets of distance values, and the row bound (every x has a partner y
    whose distance rows are Hausdorff-close, and vice versa).
    """
    if len(X) == 0 or len(Y) == 0:
        return 0.0
    diam = abs(X.diameter - Y.diameter)
    values = _hausdorff_1d(X.dist.ravel(), Y.dist.ravel())
    rows = np.array([[_hausdorff_1d(X.dist[i], Y.dist[j]) for j in range(len(Y))] for i in range(len(X))])
    row = max(rows.min(axis=1).max(), rows.min(axis=0).max())
    return 0.5 * max(diam, values, row)


@dataclass(frozen=True)
class NetBound:
    bound: float  # net radius, an upper bound on d_GH(Z, subset)
    witness: Correspondence
    distortion: float
    subset: tuple


def gh_upper_from_net(Z: FiniteMetricSpace, subset) -> NetBound:
    """Upper bound on d_GH(Z, Z|subset) from the covering radius of the subset.

    Every point is paired with its nearest subset point (lowest index on
    ties).  The distortion of that correspondence is at most twice the
    covering radius, which is checked.
    """
    subset = tuple(int(s) for s in subset)
    if not subset:
        raise ValueError("subset must be nonempty")
    if len(set(subset)) != len(subset):
        raise ValueError("subset has repeated points")
    order = np.argsort(subset, kind="stable")
    sub_sorted = np.asarray(subset)[order]
    d = Z.dist[:, sub_sorted]
    near_sorted = np.argmin(d, axis=1)  # first minimum = lowest point index
    near = order[near_sorted]
    R = float(d[np.arange(len(Z)), near_sorted].max())
    w = Correspondence(tuple((z, int(near[z])) for z in range(len(Z))), len(Z), len(subset))
    dis = distortion(w, Z, Z.subspace(list(subset)))
    slack = 1e-9 * max(Z.diameter, 1.0)
    if dis > 2 * R + slack:  # pragma: no cover - triangle inequality guarantees this
        raise AssertionError(f"net correspondence has distortion {dis} > 2R = {2 * R}")
    return NetBound(R, w, dis, subset)


# ---------------------------------------------------------------------- nets


@dataclass(frozen=True)
class NetCertificate:
    epsilon: float
    net: tuple
    assignment: tuple  # point -> net point (as a point index)
    radius: float

    def verify(self, X: FiniteMetricSpace) -> bool:
        a = np.asarray(self.assignment)
        return bool(np.all(X.dist[np.arange(len(X)), a] <= self.epsilon)) and set(a.tolist()) <= set(self.net)


def _certificate(X, eps, net):
    net = tuple(sorted(int(v) for v in net))
    d = X.dist[:, list(net)]
    k = np.argmin(d, axis=1)
    assign = tuple(int(net[i]) for i in k)
    return NetCertificate(float(eps), net, assign, float(d[np.arange(len(X)), k].max()))


def _greedy_net(D: np.ndarray, eps: float) -> list:
    net = [0]
    near = D[0].copy()
    while near.max() > eps:
        v = int(np.argmax(near))
        net.append(v)
        near = np.minimum(near, D[v])
    return net


def _exact_cover(D: np.ndarray, eps: float, start: list) -> list:
    n = len(D)
    full = (1 << n) - 1
    balls = [sum(1 << int(j) for j in np.flatnonzero(D[i] <= eps)) for i in range(n)]
    # candidate balls per point, biggest first
    covers = [sorted((i for i in range(n) if balls[i] >> p & 1), key=lambda i: -bin(balls[i]).count("1"))
              for p in range(n)]
    biggest = max(bin(b).count("1") for b in balls)
    best = [list(start)]

    def search(chosen, covered):
        if covered == full:
            if len(chosen) < len(best[0]):
                best[0] = list(chosen)
            return
        left = n - bin(covered).count("1")
        if len(chosen) + -(-left // biggest) >= len(best[0]):
            return
        # branch on the uncovered point with fewest covering balls
        unc = full & ~covered
        p, fewest = -1, n + 1
        while unc:
            low = unc & -unc
            q = low.bit_length() - 1
            if len(covers[q]) < fewest:
                p, fewest = q, len(covers[q])
            unc ^= low
        for i in covers[p]:
            chosen.append(i)
            search(chosen, covered | balls[i])
            chosen.pop()

    search([], 0)
    return best[0]


def min_epsilon_net(X: FiniteMetricSpace, epsilon: float, mode: str = "greedy", cap: int = 25) -> NetCertificate:
    """An epsilon-net of ``X`` with its covering certificate.

    ``greedy`` runs farthest-point insertion from point 0; ``exact`` finds a
    minimum-cardinality net by branch and bound over epsilon-balls, seeded
    with the greedy net.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if len(X) == 0:
        return NetCertificate(float(epsilon), (), (), 0.0)
    D = np.asarray(X.dist)
    net = _greedy_net(D, epsilon)
    if mode == "exact":
        if len(X) > cap:
            raise SizeCapError(f"exact nets limited to {cap} points, got {len(X)}; use mode='greedy'")
        net = _exact_cover(D, epsilon, net)
    elif mode != "greedy":
        raise ValueError(f"unknown mode {mode!r}")
    return _certificate(X, epsilon, net)
