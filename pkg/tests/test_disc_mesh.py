import itertools
import math

import numpy as np
import pytest
from conftest import seeds
from hypothesis import given
from hypothesis import strategies as st

from metdisc.disc_mesh import (
    MeshGeometryError,
    MeshTopologyError,
    SampledLoop,
    TriDiscMesh,
    boundary_loop,
    chord_arc_constant,
    enumerate_jordan_domains,
    global_isoperimetric_constant,
    heron_area,
    is_jordan_domain,
    isoperimetric_lower_bound,
    mesh_area,
    vertex_metric,
)
from metdisc.meshes import (
    concentric_disc,
    delaunay_disc,
    equilateral_triangle,
    fan_disc,
    grid_square,
    rectangle,
    triangle_from_lengths,
    unit_square,
)
from metdisc.metric_core import FiniteMetricSpace
from oracles import is_disc_subcomplex

TWO_PI = 2 * math.pi


# ---------------------------------------------------------------- loading


def test_345_triangle_valid():
    m = triangle_from_lengths(3, 4, 5)
    assert boundary_loop(m).total_length == 12
    assert mesh_area(m) == 6


def test_sphere_like_rejected():
    with pytest.raises(MeshTopologyError) as e:
        TriDiscMesh([[0, 1, 2], [0, 2, 1]], {(0, 1): 1, (1, 2): 1, (0, 2): 1})
    assert e.value.check == "empty boundary"


def test_degenerate_triangle_names_id():
    with pytest.raises(MeshGeometryError) as e:
        TriDiscMesh([[0, 1, 2], [0, 2, 3]], {(0, 1): 1, (1, 2): 1, (0, 2): 1, (2, 3): 1, (0, 3): 5})
    assert e.value.triangle == 1


def test_nonmanifold_edge_rejected():
    with pytest.raises(MeshTopologyError) as e:
        TriDiscMesh([[0, 1, 2], [0, 1, 3], [0, 1, 4]], coords=np.random.default_rng(0).random((5, 2)))
    assert "manifold" in e.value.check


def test_annulus_rejected():
    # ring of 8 triangles around a hole: two boundary cycles, Euler characteristic 0
    tris = []
    for k in range(4):
        a, b = k, (k + 1) % 4
        tris += [[a, b, 4 + a], [b, 4 + b, 4 + a]]
    t = np.arange(4) * np.pi / 2
    xy = np.vstack([np.column_stack([np.cos(t), np.sin(t)]), 2 * np.column_stack([np.cos(t), np.sin(t)])])
    with pytest.raises(MeshTopologyError):
        TriDiscMesh(tris, coords=xy)


def test_pinched_vertex_rejected():
    # two triangles sharing only a vertex
    xy = [[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1]]
    with pytest.raises(MeshTopologyError):
        TriDiscMesh([[0, 1, 2], [0, 3, 4]], coords=xy)


@pytest.mark.parametrize("n", [8, 16, 64, 256])
def test_fan_boundary_length_closed_form(n):
    loop = boundary_loop(fan_disc(n))
    assert loop.total_length == pytest.approx(2 * n * math.sin(math.pi / n), rel=1e-12)


def test_fan_boundary_tends_to_circle():
    lengths = [boundary_loop(fan_disc(n)).total_length for n in (8, 32, 128, 512)]
    assert np.all(np.diff(lengths) > 0)
    assert abs(lengths[-1] - TWO_PI) < 1e-4


# ---------------------------------------------------------------- metric and area


def test_vertex_metric_345():
    d = vertex_metric(triangle_from_lengths(3, 4, 5)).dist
    assert sorted([d[0, 1], d[1, 2], d[0, 2]]) == [3, 4, 5]


def test_unit_square_corner_distance():
    m = unit_square()
    assert vertex_metric(m).dist[1, 3] == 2.0
    assert vertex_metric(m, subdivide=True).dist[1, 3] == pytest.approx(math.sqrt(2))


def test_fan_center_to_boundary_is_radius():
    d = vertex_metric(fan_disc(32)).dist
    assert np.all(d[0, 1:] == 1.0)


@pytest.mark.parametrize("n", [3, 6, 64])
def test_fan_area_closed_form(n):
    assert mesh_area(fan_disc(n)) == pytest.approx(n * math.sin(math.pi / n) * math.cos(math.pi / n), rel=1e-12)


def test_unit_square_area():
    assert mesh_area(unit_square()) == pytest.approx(1.0, rel=1e-15)


def test_heron_stable_for_needles():
    # thin triangle where the naive formula loses all digits
    a = heron_area(1e8, 1e8, 1.0)
    assert a == pytest.approx(0.5e8, rel=1e-12)


@given(seeds)
def test_subdivision_never_lengthens(seed):
    m = delaunay_disc(15, np.random.default_rng(seed))
    d0 = vertex_metric(m).dist
    d1 = vertex_metric(m, subdivide=True).dist
    assert np.all(d1 <= d0 + 1e-12)
    # and never beats the straight line in the plane
    xy = m.coords
    flat = np.sqrt(((xy[:, None] - xy[None]) ** 2).sum(-1))
    assert np.all(d1 >= flat - 1e-12)


# ---------------------------------------------------------------- loops


def test_345_loop_angles():
    loop = boundary_loop(triangle_from_lengths(3, 4, 5))
    assert len(loop) == 3
    assert loop.total_length == 12
    assert np.allclose(loop.angles, [0, TWO_PI * 3 / 12, TWO_PI * 7 / 12], rtol=0, atol=1e-15)


def test_square_loop_quarters():
    loop = boundary_loop(unit_square())
    assert np.allclose(loop.angles, [0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-15)


def test_fan_loop_equally_spaced():
    loop = boundary_loop(fan_disc(20))
    assert np.allclose(np.diff(loop.angles), TWO_PI / 20, atol=1e-13)
    assert loop.speed_defect(vertex_metric(fan_disc(20))) < 1e-12


def test_loop_rejects_unsorted_angles():
    with pytest.raises(ValueError):
        SampledLoop([0.0, 2.0, 1.0], [0, 1, 2], 3.0)


def test_chord_arc_of_own_arc_metric_is_one():
    n = 10
    k = np.arange(n)
    gap = np.abs(k[:, None] - k[None])
    arc = np.minimum(gap, n - gap) * (1.0 / n)
    loop = SampledLoop(TWO_PI * k / n, k, 1.0)
    assert chord_arc_constant(loop, FiniteMetricSpace(arc)).value == pytest.approx(1.0, abs=1e-12)


def test_chord_arc_fan_tends_to_half_pi():
    vals = []
    for n in (16, 64, 256):
        m = fan_disc(n)
        vals.append(chord_arc_constant(boundary_loop(m), vertex_metric(m)).value)
    assert all(v >= 1 for v in vals)
    assert abs(vals[-1] - math.pi / 2) < 1e-3
    # antipodal: arc n/2 chords over 2 radii
    n = 64
    assert vals[1] == pytest.approx(n / 2 * 2 * math.sin(math.pi / n) / 2, rel=1e-12)


def test_chord_arc_infinite_on_touching_samples():
    d = FiniteMetricSpace([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    loop = SampledLoop([0.0, 2.0, 4.0], [0, 1, 0], 3.0)
    r = chord_arc_constant(loop, d)
    assert r.infinite and math.isinf(r.value)


@given(seeds)
def test_chord_arc_at_least_one(seed):
    m = delaunay_disc(20, np.random.default_rng(seed))
    assert chord_arc_constant(boundary_loop(m), vertex_metric(m)).value >= 1 - 1e-12


# ---------------------------------------------------------------- domains


def test_single_triangle_one_domain():
    doms = enumerate_jordan_domains(equilateral_triangle(), budget=10)
    assert [d.triangles for d in doms] == [(0,)]


def _all_disc_subsets(m):
    return {
        tuple(sorted(s))
        for k in range(1, m.n_triangles + 1)
        for s in itertools.combinations(range(m.n_triangles), k)
        if is_disc_subcomplex(m.triangles.tolist(), s)
    }


def test_two_triangle_square_has_three_domains():
    m = unit_square()
    found = {d.triangles for d in enumerate_jordan_domains(m, budget=50, seed=3)}
    assert found == _all_disc_subsets(m) == {(0,), (1,), (0, 1)}


def test_fan_budget_zero_gives_sectors():
    doms = enumerate_jordan_domains(fan_disc(12), budget=0)
    assert [d.triangles for d in doms] == [(f,) for f in range(12)]


def test_small_mesh_search_reaches_every_domain():
    m = grid_square(2)
    truth = _all_disc_subsets(m)
    found = {d.triangles for d in enumerate_jordan_domains(m, budget=3000, seed=1)}
    assert found <= truth
    assert found == truth


@given(seeds, st.integers(0, 40))
def test_domains_are_valid(seed, budget):
    m = delaunay_disc(14, np.random.default_rng(seed))
    total = mesh_area(m)
    total_len = float(m.lengths.sum())
    tris = m.triangles.tolist()
    for d in enumerate_jordan_domains(m, budget=budget, seed=seed):
        assert is_jordan_domain(m, d.triangles)
        assert is_disc_subcomplex(tris, d.triangles)
        assert len(set(d.boundary_cycle)) == len(d.boundary_cycle)
        assert d.area == pytest.approx(sum(m.triangle_areas[list(d.triangles)]), rel=1e-12)
        assert d.area <= total * (1 + 1e-12)
        assert d.boundary_length <= total_len * (1 + 1e-12)


@given(seeds, st.integers(0, 60), st.integers(0, 60))
def test_bound_monotone_in_budget(seed, b1, b2):
    m = delaunay_disc(12, np.random.default_rng(seed))
    lo, hi = sorted((b1, b2))
    assert isoperimetric_lower_bound(m, lo, seed)[0] <= isoperimetric_lower_bound(m, hi, seed)[0]


def test_domain_enumeration_deterministic():
    m = grid_square(4)
    a = [d.triangles for d in enumerate_jordan_domains(m, 200, seed=9)]
    b = [d.triangles for d in enumerate_jordan_domains(m, 200, seed=9)]
    assert a == b


def test_equilateral_constant():
    C, w = isoperimetric_lower_bound(equilateral_triangle(2.0))
    assert C == pytest.approx(math.sqrt(3) / 36, rel=1e-12)


def test_fan_constant_below_flat_sharp_value():
    C, w = isoperimetric_lower_bound(fan_disc(64), budget=500, seed=0)
    assert 1 / (4 * math.pi) - 0.02 <= C <= 1 / (4 * math.pi) + 1e-6
    assert len(w.triangles) == 64


@pytest.mark.parametrize("length,width", [(10.0, 0.5), (50.0, 1.0)])
def test_thin_strip_constant(length, width):
    m = rectangle(length, width)
    C, w = isoperimetric_lower_bound(m, budget=20)
    assert C == pytest.approx(length * width / (2 * length + 2 * width) ** 2, rel=1e-12)
    assert C < 1 / (4 * math.pi)
    assert w.triangles == (0, 1)


def test_fan_refinement_approaches_sharp_constant():
    vals = [isoperimetric_lower_bound(fan_disc(n), budget=300, seed=0)[0] for n in (8, 16, 32, 64)]
    assert np.all(np.diff(vals) >= -1e-12)
    assert all(v <= 1 / (4 * math.pi) for v in vals)
    assert 1 / (4 * math.pi) - vals[-1] < 0.02


def test_concentric_disc_valid():
    m = concentric_disc([5, 6])
    assert (m.n_vertices, m.n_triangles, m.euler_characteristic) == (12, 16, 1)
    assert sorted(m.boundary_cycle) == list(range(6, 12))


# ---------------------------------------------------------------- global constant


def test_global_constant_examples():
    assert global_isoperimetric_constant(0.1, math.inf, 5) == 0.1
    assert global_isoperimetric_constant(0.1, 1, 5) == 5
    assert global_isoperimetric_constant(10, 1, 5) == 10
    with pytest.raises(ValueError):
        global_isoperimetric_constant(0, 1, 5)
