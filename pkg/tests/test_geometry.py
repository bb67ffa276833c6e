import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from camroute import _pykernels, kernels
from camroute.geometry import (CoverSet, FieldOfView, InvalidGeometry, Position, covers_fov, covers_point,
                               enumerate_cover_sets, fov_triangle, sample_points, vertex_offsets)

import oracles
from layouts import COVER_LAYOUT, COVER_EXTENDED, V, V1, V2, V3, fov


def _tri_array(f):
    p, b, c = fov_triangle(f)
    return np.array([[p.x, p.y], [b.x, b.y], [c.x, c.y]])


# ---- fov_triangle

def test_triangle_along_x():
    p, b, c = fov_triangle(fov(0, 0, 0))
    assert (p.x, p.y) == (0, 0)
    assert b.x == pytest.approx(125.0)
    assert b.y == pytest.approx(72.16878364870322)
    assert c.x == pytest.approx(125.0)
    assert c.y == pytest.approx(-72.16878364870322)


def test_triangle_rotated_quarter_turn():
    _, b, c = fov_triangle(fov(0, 0, math.pi / 2))
    assert (b.x, b.y) == pytest.approx((-72.16878364870322, 125.0))
    assert (c.x, c.y) == pytest.approx((72.16878364870322, 125.0))


def test_triangle_matches_sampling_oracle():
    f = fov(0, 0, 0)
    tri = _tri_array(f)
    ref = oracles.triangle_vertices((0.0, 0.0), 0.0, math.pi / 3, 125.0)
    assert np.allclose(tri, ref, atol=1e-9)
    # points just inside / outside each far vertex
    inside = ref[1:] * 0.999
    outside = ref[1:] * 1.001
    assert all(covers_point(f, Position(*q)) for q in inside)
    assert not any(covers_point(f, Position(*q)) for q in outside)


@pytest.mark.parametrize("aov,dov", [(0.0, 125.0), (math.pi / 3, 0.0), (math.pi, 125.0), (-0.1, 10.0)])
def test_degenerate_fov_rejected(aov, dov):
    with pytest.raises(InvalidGeometry):
        fov_triangle(FieldOfView(Position(0, 0), 0.0, aov, dov))


@given(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4), st.floats(-1e4, 1e4), st.floats(-1e4, 1e4), st.floats(0, 2 * math.pi))
def test_triangle_translation_invariant(ax, ay, tx, ty, los):
    f0 = FieldOfView(Position(ax, ay), los)
    f1 = FieldOfView(Position(ax + tx, ay + ty), los)
    # offsets from the apex are computed without the apex, so they match exactly
    assert vertex_offsets(f0) == vertex_offsets(f1)
    t0 = fov_triangle(f0)
    t1 = fov_triangle(f1)
    for a, b in zip(t0, t1):
        assert b.x == pytest.approx(a.x + tx, abs=1e-8)
        assert b.y == pytest.approx(a.y + ty, abs=1e-8)


# ---- covers_point

def test_covers_point_examples():
    f = fov(0, 0, 0)
    assert covers_point(f, Position(60, 0))
    assert not covers_point(f, Position(130, 0))
    assert covers_point(f, Position(0, 0))


@settings(max_examples=25, deadline=None)
@given(st.floats(-500, 500), st.floats(-500, 500), st.floats(0, 2 * math.pi),
       st.floats(0.2, 2.8), st.floats(5, 300), st.integers(0, 2**31 - 1))
def test_covers_point_agrees_with_barycentric(ax, ay, los, aov, dov, seed):
    f = FieldOfView(Position(ax, ay), los, aov, dov)
    tri = oracles.triangle_vertices((ax, ay), los, aov, dov)
    rng = np.random.default_rng(seed)
    lo = tri.min(axis=0) - 20
    hi = tri.max(axis=0) + 20
    pts = rng.uniform(lo, hi, size=(10_000, 2))
    # points within a micrometre of an edge are decided by rounding; skip them
    clear = oracles.boundary_distance(tri, pts) > 1e-6
    pts = pts[clear]
    want = oracles.barycentric_inside(tri, pts, tol=0.0)
    got = kernels.triangle_mask(pts[:, 0], pts[:, 1], tri.ravel()).astype(bool)
    assert np.array_equal(got, want)


# ---- covers_fov

def test_self_coverage():
    f = fov(10, 20, 1.0)
    assert covers_fov([f], f)


def test_empty_candidates_do_not_cover():
    assert not covers_fov([], fov(0, 0, 0))


def test_cover_layout_trio_covers():
    assert covers_fov([COVER_LAYOUT[V1], COVER_LAYOUT[V2], COVER_LAYOUT[V3]], COVER_LAYOUT[V])
    pts = oracles.dense_samples(_tri_array(COVER_LAYOUT[V]), pitch=1.0)
    cov = np.zeros(len(pts), dtype=bool)
    for k in (V1, V2, V3):
        cov |= oracles.barycentric_inside(_tri_array(COVER_LAYOUT[k]), pts, tol=1e-7)
    assert cov.all()


@pytest.mark.parametrize("pair", [(V1, V2), (V1, V3), (V2, V3)])
def test_fig2_pairs_do_not_cover(pair):
    assert not covers_fov([COVER_LAYOUT[k] for k in pair], COVER_LAYOUT[V])


def test_sample_points_include_vertices_and_centroid():
    f = fov(3.3, -7.1, 0.4)
    px, py = sample_points(f, 5.0)
    tri = _tri_array(f)
    assert np.allclose(np.c_[px[:3], py[:3]], tri)
    assert np.allclose((px[3], py[3]), tri.mean(axis=0))
    assert oracles.barycentric_inside(tri, np.c_[px, py], tol=1e-6).all()


def test_sample_points_reject_bad_spacing():
    with pytest.raises(ValueError):
        sample_points(fov(0, 0, 0), 0.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-150, 150), st.floats(-150, 150), st.floats(0, 2 * math.pi)), min_size=1, max_size=4),
       st.sampled_from([40.0, 20.0, 10.0]))
def test_refining_never_turns_false_into_true(cands, spacing):
    target = fov(0, 0, 0)
    fovs = [fov(x, y, a) for x, y, a in cands]
    coarse = covers_fov(fovs, target, spacing)
    fine = covers_fov(fovs, target, spacing / 2)
    assert not (fine and not coarse)


# ---- enumerate_cover_sets

def test_fig2_cover_sets():
    got = [cs.members for cs in enumerate_cover_sets(V, COVER_LAYOUT)]
    assert got == [(V,), (V1, V2, V3)]


def test_isolated_node_has_only_itself():
    assert enumerate_cover_sets(7, {7: fov(0, 0, 0)}) == [CoverSet(7, (7,))]


def test_extended_fig2_matches_exhaustive_oracle():
    got = [cs.members for cs in enumerate_cover_sets(V, COVER_EXTENDED)]
    tris = {k: _tri_array(f) for k, f in COVER_EXTENDED.items() if k != V}
    want = [(V,)] + oracles.minimal_cover_sets(_tri_array(COVER_EXTENDED[V]), tris)
    assert got == want
    assert len(got) > 2
    # frozen from the oracle run
    assert got == [(0,), (1, 2, 3), (1, 2, 6), (1, 3, 5), (1, 5, 6), (2, 3, 4), (2, 4, 6), (3, 4, 5), (4, 5, 6)]


def test_cardinality_bound():
    assert [cs.members for cs in enumerate_cover_sets(V, COVER_LAYOUT, max_cardinality=2)] == [(V,)]
    with pytest.raises(ValueError):
        enumerate_cover_sets(V, COVER_LAYOUT, max_cardinality=0)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.tuples(st.floats(-60, 160), st.floats(-90, 90), st.floats(-0.6, 0.6)), min_size=2, max_size=7))
def test_enumerated_sets_cover_and_are_minimal(cands):
    fovs = {0: fov(0, 0, 0)}
    fovs.update({i + 1: fov(x, y, a) for i, (x, y, a) in enumerate(cands)})
    sets = enumerate_cover_sets(0, fovs, max_cardinality=3, sample_spacing=10.0)
    assert sets[0].members == (0,)
    keys = [(len(cs.members), cs.members) for cs in sets]
    assert keys == sorted(keys)
    for cs in sets[1:]:
        assert 0 not in cs.members
        assert covers_fov([fovs[k] for k in cs.members], fovs[0], 10.0)
        for drop in cs.members:
            rest = [fovs[k] for k in cs.members if k != drop]
            assert not covers_fov(rest, fovs[0], 10.0)


# ---- compiled core vs fallback

@pytest.mark.skipif(kernels.BACKEND != "cython", reason="extension not built")
def test_cython_and_python_kernels_agree():
    rng = np.random.default_rng(7)
    px, py = rng.uniform(-200, 200, (2, 5000))
    tris = rng.uniform(-150, 150, (20, 6))
    from camroute import _ckernels

    assert np.array_equal(_ckernels.coverage_matrix(px, py, tris), _pykernels.coverage_matrix(px, py, tris))
    for t in tris[:5]:
        assert np.array_equal(_ckernels.triangle_mask(px, py, tuple(t)), _pykernels.triangle_mask(px, py, t))
    for _ in range(20):
        ox, oy = rng.uniform(-10, 10, 2)
        nx, ny = rng.uniform(-100, 100, (2, 12))
        assert np.array_equal(_ckernels.gabriel_mask(ox, oy, nx, ny), _pykernels.gabriel_mask(ox, oy, nx, ny))
