import math

import numpy as np
import pytest
from conftest import random_space, seeds
from hypothesis import given
from hypothesis import strategies as st

from metdisc.gh_distance import (
    Correspondence,
    FullnessError,
    SizeCapError,
    distortion,
    gh_exact_small,
    gh_lower_bounds,
    gh_upper_from_net,
    min_epsilon_net,
)
from metdisc.metric_core import FiniteMetricSpace
from oracles import gh_by_all_relations, min_cover_size


def _circle(n, gap=1.0):
    k = np.arange(n)
    g = np.abs(k[:, None] - k[None])
    return FiniteMetricSpace(np.minimum(g, n - g) * gap)


# ---------------------------------------------------------------- distortion


def test_distortion_identity_zero():
    X = _circle(5)
    c = Correspondence(tuple((i, i) for i in range(5)), 5, 5)
    assert distortion(c, X, X) == 0.0


def test_distortion_collapse_to_point():
    X = FiniteMetricSpace([[0, 3], [3, 0]])
    P = FiniteMetricSpace.point()
    assert distortion(Correspondence(((0, 0), (1, 0)), 2, 1), X, P) == 3.0


def test_fullness_error_names_points():
    c = Correspondence(((0, 0), (1, 0)), 3, 2)
    with pytest.raises(FullnessError) as e:
        c.check_full()
    assert e.value.missing_x == [2] and e.value.missing_y == [1]


def test_correspondence_range_checked():
    with pytest.raises(ValueError):
        Correspondence(((0, 5),), 1, 2)


def test_transpose_keeps_distortion(rng):
    X, Y = random_space(rng, 4), random_space(rng, 3)
    c = Correspondence(((0, 0), (1, 1), (2, 2), (3, 0)), 4, 3)
    assert distortion(c.transpose(), Y, X) == distortion(c, X, Y)


# ---------------------------------------------------------------- exact


def test_point_versus_space_is_half_diameter():
    X = _circle(6, 0.5)
    d, w = gh_exact_small(FiniteMetricSpace.point(), X)
    assert d == X.diameter / 2
    assert distortion(w, FiniteMetricSpace.point(), X) == 2 * d


def test_isometric_spaces_zero():
    X = _circle(5)
    perm = [3, 0, 4, 1, 2]
    Y = FiniteMetricSpace(X.dist[np.ix_(perm, perm)])
    d, w = gh_exact_small(X, Y)
    assert d == 0.0
    assert distortion(w, X, Y) == 0.0


def test_size_cap():
    with pytest.raises(SizeCapError):
        gh_exact_small(_circle(8), _circle(3), cap=7)


@pytest.mark.parametrize("seed", range(12))
def test_exact_matches_relation_enumeration(seed):
    rng = np.random.default_rng(seed)
    nx = int(rng.integers(1, 5))
    ny = int(rng.integers(1, max(2, 16 // nx) + 1))
    ny = min(ny, 16 // nx)
    X, Y = random_space(rng, nx), random_space(rng, ny)
    d, w = gh_exact_small(X, Y)
    assert d == gh_by_all_relations(X.dist, Y.dist)
    w.check_full()
    assert distortion(w, X, Y) == 2 * d


@given(seeds, st.integers(1, 6), st.integers(1, 6))
def test_exact_symmetric(seed, nx, ny):
    rng = np.random.default_rng(seed)
    X, Y = random_space(rng, nx), random_space(rng, ny)
    assert gh_exact_small(X, Y)[0] == gh_exact_small(Y, X)[0]


@given(seeds)
def test_exact_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    X, Y, Z = (random_space(rng, int(rng.integers(1, 6))) for _ in range(3))
    xy = gh_exact_small(X, Y)[0]
    yz = gh_exact_small(Y, Z)[0]
    xz = gh_exact_small(X, Z)[0]
    assert xz <= xy + yz + 1e-12


# ---------------------------------------------------------------- bounds


def test_lower_bound_diameter_gap():
    X = FiniteMetricSpace([[0, 4], [4, 0]])
    Y = FiniteMetricSpace([[0, 1], [1, 0]])
    assert gh_lower_bounds(X, Y) >= 1.5
    assert gh_exact_small(X, Y)[0] == 1.5


@given(seeds, st.integers(1, 6), st.integers(1, 6))
def test_lower_bound_certified(seed, nx, ny):
    rng = np.random.default_rng(seed)
    X, Y = random_space(rng, nx), random_space(rng, ny)
    assert gh_lower_bounds(X, Y) <= gh_exact_small(X, Y)[0] + 1e-12


def test_net_bound_on_path():
    Z = FiniteMetricSpace([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    nb = gh_upper_from_net(Z, [1])
    assert nb.bound == 1.0
    assert nb.distortion == 2.0
    assert nb.witness.pairs == ((0, 0), (1, 0), (2, 0))


def test_net_ties_go_to_lowest_index():
    Z = FiniteMetricSpace([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    nb = gh_upper_from_net(Z, [2, 0])
    # point 1 is equidistant; it pairs with point 0, listed second
    assert (1, 1) in nb.witness.pairs


def test_net_subset_validation():
    Z = _circle(4)
    with pytest.raises(ValueError):
        gh_upper_from_net(Z, [])
    with pytest.raises(ValueError):
        gh_upper_from_net(Z, [1, 1])


@given(seeds, st.integers(2, 7))
def test_net_bound_is_upper_bound(seed, n):
    rng = np.random.default_rng(seed)
    Z = random_space(rng, n)
    sub = sorted(rng.choice(n, int(rng.integers(1, n + 1)), replace=False).tolist())
    nb = gh_upper_from_net(Z, sub)
    assert gh_exact_small(Z, Z.subspace(sub))[0] <= nb.bound + 1e-12
    assert nb.distortion <= 2 * nb.bound + 1e-12


# ---------------------------------------------------------------- nets


@pytest.mark.parametrize("n,k", [(12, 1), (12, 2), (10, 1), (9, 4)])
def test_exact_net_on_circle(n, k):
    X = _circle(n, 0.25)
    cert = min_epsilon_net(X, k * 0.25, "exact")
    assert len(cert.net) == math.ceil(n / (2 * k + 1))
    assert cert.verify(X)


@pytest.mark.parametrize("seed", range(6))
def test_exact_net_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    X = random_space(rng, 9)
    eps = float(np.quantile(X.dist[X.dist > 0], 0.3))
    cert = min_epsilon_net(X, eps, "exact")
    assert len(cert.net) == min_cover_size(X.dist, eps)
    assert cert.verify(X) and cert.radius <= eps


@pytest.mark.parametrize("seed", range(8))
def test_greedy_within_log_factor(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 19))
    X = random_space(rng, n)
    eps = float(np.quantile(X.dist[X.dist > 0], rng.uniform(0.1, 0.4)))
    g = min_epsilon_net(X, eps, "greedy")
    e = min_epsilon_net(X, eps, "exact")
    assert g.verify(X) and e.verify(X)
    assert len(e.net) <= len(g.net) <= len(e.net) * math.log(n)


@given(seeds, st.integers(1, 15), st.floats(0.05, 2.0))
def test_greedy_certificate_valid(seed, n, eps):
    X = random_space(np.random.default_rng(seed), n)
    cert = min_epsilon_net(X, eps)
    assert cert.verify(X)
    assert cert.radius <= eps
    # farthest-point nets are eps-separated
    net = list(cert.net)
    sub = X.dist[np.ix_(net, net)]
    assert np.all(sub[~np.eye(len(net), dtype=bool)] > eps)


def test_net_errors():
    X = _circle(30)
    with pytest.raises(SizeCapError):
        min_epsilon_net(X, 1.0, "exact", cap=25)
    with pytest.raises(ValueError):
        min_epsilon_net(X, 0.0)
    with pytest.raises(ValueError):
        min_epsilon_net(X, 1.0, "best")


def test_bad_certificate_rejected():
    X = _circle(6)
    cert = min_epsilon_net(X, 1.0, "exact")
    bad = type(cert)(0.5, cert.net, cert.assignment, cert.radius)
    assert not bad.verify(X)
