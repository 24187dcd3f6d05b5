import numpy as np
import pytest
from conftest import seeds
from hypothesis import given
from hypothesis import strategies as st

from metdisc.disc_mesh import TriDiscMesh, vertex_metric
from metdisc.intrinsic_disc import (
    PLMap,
    PreconditionError,
    SizeCapError,
    diameter_semimetric,
    factorization_check,
    has_no_bubbles,
    is_monotone,
    pullback_length_metric,
    verify_intrinsic_isometry,
)
from metdisc.meshes import concentric_disc, fan_disc, grid_square, unit_square
from maps import (
    boundary_edge_collapse,
    collapsed_annulus,
    contract_edge,
    diagonal_fold,
    random_pl_map,
    square_corner_fold,
)
from oracles import connected_subset_diameters, simple_path_distances


def _pullback_oracle(u):
    D = u.image_distances
    edges = [(a, b, D[a, b]) for a, b in u.source.edges.tolist()]
    return simple_path_distances(u.source.n_vertices, edges)


# ---------------------------------------------------------------- d_u


def test_identity_gives_vertex_metric():
    m = grid_square(3)
    u = PLMap.identity(m)
    assert np.array_equal(pullback_length_metric(u).dist, vertex_metric(m).dist)


def test_constant_map_collapses_everything():
    u = PLMap.constant(fan_disc(7))
    assert np.all(pullback_length_metric(u).dist == 0)
    r = factorization_check(u)
    assert len(r.quotient) == 1
    assert set(r.projection.tolist()) == {0}


def test_fold_matches_path_enumeration():
    u = diagonal_fold(2)  # 9 vertices
    got = pullback_length_metric(u).dist
    assert np.allclose(got, _pullback_oracle(u), rtol=1e-12, atol=1e-15)
    # mirror images across the fold have identical images but sit apart in d_u
    xy = u.source.coords
    mirror = {i: int(np.flatnonzero((xy == xy[i, ::-1]).all(1))[0]) for i in range(len(xy))}
    for i, j in mirror.items():
        assert np.allclose(u.assignment[i], u.assignment[j])
        if i != j:
            assert got[i, j] > 0


# ---------------------------------------------------------------- |d_u|


def test_identity_diameter_semimetric_is_vertex_metric():
    m = fan_disc(8)
    u = PLMap.identity(m)
    assert np.allclose(diameter_semimetric(u).dist, vertex_metric(m).dist, rtol=1e-15)


def test_constant_diameter_semimetric_zero():
    assert np.all(diameter_semimetric(PLMap.constant(unit_square())).dist == 0)


def test_hand_built_seven_vertex_map():
    # heights on a hexagonal fan: centre 8, ring 6 5 2 3 0 0
    m = fan_disc(6)
    u = PLMap(m, None, [[8.0], [6.0], [5.0], [2.0], [3.0], [0.0], [0.0]])
    ex = diameter_semimetric(u).dist
    oracle = connected_subset_diameters(m.neighbors, u.image_distances)
    assert np.array_equal(ex, oracle)
    # the cheapest set from 1 to 4 dips to height 2 along the ring: 4, not |6 - 3|
    assert ex[1, 4] == 4.0
    assert pullback_length_metric(u).dist[1, 4] == 5.0
    b = diameter_semimetric(u, "bounds")
    assert np.all(b.lower <= ex) and np.all(ex <= b.upper)


def test_exact_mode_size_cap():
    u = PLMap.identity(grid_square(4))
    with pytest.raises(SizeCapError, match="bounds"):
        diameter_semimetric(u, "exact", size_cap=20)
    b = diameter_semimetric(u, "bounds")
    assert b.lower.shape == (25, 25)


@pytest.mark.parametrize("seed", range(6))
def test_exact_matches_subset_enumeration(seed):
    rng = np.random.default_rng(seed)
    u = random_pl_map(rng, 8)
    oracle = connected_subset_diameters(u.source.neighbors, u.image_distances)
    assert np.array_equal(diameter_semimetric(u).dist, oracle)


@given(seeds, st.integers(4, 11))
def test_bounds_bracket_exact(seed, n):
    u = random_pl_map(np.random.default_rng(seed), n)
    ex = diameter_semimetric(u).dist
    b = diameter_semimetric(u, "bounds")
    assert np.all(b.lower <= ex) and np.all(ex <= b.upper)


# ---------------------------------------------------------------- the chain


def test_identity_chain_all_equal():
    u = PLMap.identity(fan_disc(6))
    r = factorization_check(u)
    assert np.allclose(r.d_u.dist, r.pullback, rtol=1e-15)
    assert np.allclose(r.path_abs.dist, r.pullback, rtol=1e-15)
    assert np.allclose(r.abs_d_u.dist, r.pullback, rtol=1e-15)
    assert r.passed and max(r.violations.values()) == 0


@pytest.mark.parametrize("seed", range(5))
def test_random_chain_holds_against_oracles(seed):
    u = random_pl_map(np.random.default_rng(100 + seed), 8)
    r = factorization_check(u)
    assert r.passed
    assert all(v == 0 for v in r.violations.values())
    assert np.allclose(r.d_u.dist, _pullback_oracle(u), rtol=1e-12)
    assert np.array_equal(r.abs_d_u.dist, connected_subset_diameters(u.source.neighbors, u.image_distances))


@given(seeds, st.integers(4, 12))
def test_chain_property(seed, n):
    u = random_pl_map(np.random.default_rng(seed), n)
    assert factorization_check(u).passed
    assert factorization_check(u, mode="bounds").passed


@given(seeds)
def test_relabeling_invariance(seed):
    rng = np.random.default_rng(seed)
    u = random_pl_map(rng, 9, kind="plane")
    m = u.source
    perm = rng.permutation(m.n_vertices)  # old -> new
    inv = np.argsort(perm)
    m2 = TriDiscMesh(perm[m.triangles], coords=m.coords[inv])
    u2 = PLMap(m2, None, u.assignment[inv])
    d1 = pullback_length_metric(u).dist
    d2 = pullback_length_metric(u2).dist
    assert np.allclose(d2[np.ix_(perm, perm)], d1, rtol=1e-12, atol=1e-15)
    a1 = diameter_semimetric(u).dist
    a2 = diameter_semimetric(u2).dist
    assert np.array_equal(a2[np.ix_(perm, perm)], a1)


# ---------------------------------------------------------------- fibers


def test_identity_monotone_and_bubble_free():
    for m in (unit_square(), concentric_disc([5, 6])):
        u = PLMap.identity(m)
        assert is_monotone(u) == (True, None)
        assert has_no_bubbles(u) == (True, None)


def test_fold_not_monotone():
    ok, (point, comps) = is_monotone(square_corner_fold())
    assert not ok
    assert point == [1.0, 0.0]
    assert comps == [[1], [3]]


def test_boundary_edge_collapse_monotone():
    assert is_monotone(boundary_edge_collapse())[0]


def test_collapsed_annulus_has_bubble():
    u, trapped = collapsed_annulus()
    ok, (point, comp) = has_no_bubbles(u)
    assert not ok
    assert point == [1.0, 0.0]
    assert comp == trapped
    assert is_monotone(u)[0]


def test_constant_map_has_no_bubbles():
    assert has_no_bubbles(PLMap.constant(fan_disc(5)))[0]


# ---------------------------------------------------------------- isometry


def test_identity_isometry_defect_zero():
    rep = verify_intrinsic_isometry(PLMap.identity(grid_square(3)))
    assert rep.defect == 0 and rep.passed


def test_simplicial_homeomorphism_distorted_lengths():
    m = grid_square(2)
    rng = np.random.default_rng(4)
    lengths = {tuple(e): float(w) * rng.uniform(0.9, 1.1) for e, w in zip(m.edges.tolist(), m.lengths)}
    t = TriDiscMesh(m.triangles, lengths)
    u = PLMap(m, vertex_metric(t), np.arange(m.n_vertices), target_mesh=t)
    assert verify_intrinsic_isometry(u).defect == 0


def test_interior_edge_collapse_against_path_oracle():
    m = grid_square(2)  # vertex 4 is the centre, 1 a boundary midpoint
    t, vmap = contract_edge(m, keep=1, drop=4)
    u = PLMap(m, vertex_metric(t), vmap, target_mesh=t)
    rep = verify_intrinsic_isometry(u, tolerance=1e-9)
    gap = _pullback_oracle(u) - u.image_distances
    assert rep.defect == pytest.approx(gap.max(), abs=1e-12)
    assert rep.defect >= 0


def test_isometry_preconditions():
    with pytest.raises(PreconditionError) as e:
        verify_intrinsic_isometry(square_corner_fold())
    assert e.value.check == "metric target"
    m = unit_square()
    tgt = vertex_metric(m)
    with pytest.raises(PreconditionError) as e:
        verify_intrinsic_isometry(PLMap(m, tgt, [0, 1, 2, 1]))
    assert e.value.check == "surjective"
    # fold onto the vertex metric of the square: surjective needs all 4 hit,
    # so fold a 5-vertex fan onto the square instead
    f = fan_disc(4)
    u = PLMap(f, tgt, [0, 1, 2, 3, 2])
    with pytest.raises(PreconditionError) as e:
        verify_intrinsic_isometry(u)
    assert e.value.check == "monotone"


def test_map_validation():
    m = unit_square()
    with pytest.raises(ValueError):
        PLMap(m, None, np.zeros((3, 2)))
    with pytest.raises(ValueError):
        PLMap(m, vertex_metric(m), [0, 1, 2, 7])
