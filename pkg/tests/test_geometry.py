import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from convexopt import geometry as geo
from convexopt.errors import InvalidBody, OriginOutside, ValidationError
from convexopt.geometry import ConvexPolygon, HalfPlane, SupportBody

from strategies import convex_polygons


def test_hull_drops_interior_and_collinear_points():
    pts = [(0, 0), (1, 0), (0.5, 0), (1, 1), (0, 1), (0.5, 0.5)]
    K = ConvexPolygon(np.array(pts, dtype=float))
    assert K.n == 4
    assert geo.area(K) == pytest.approx(1.0, abs=1e-15)


def test_degenerate_inputs_are_rejected():
    with pytest.raises(InvalidBody):
        ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    with pytest.raises(InvalidBody):
        ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(InvalidBody):
        ConvexPolygon(np.array([[0.0, 0.0], [1.0, np.nan], [0.0, 1.0]]))


def test_check_convex_rejects_reflex_vertex():
    with pytest.raises(InvalidBody):
        geo.check_convex([(0, 0), (2, 0), (1, 0.5), (2, 2), (0, 2)])
    geo.check_convex([(0, 0), (2, 0), (2, 2), (0, 2)])


def test_square_measures():
    K = geo.unit_square()
    assert geo.area(K) == 1.0
    assert geo.perimeter(K) == 4.0
    np.testing.assert_allclose(geo.centroid(K), [0.5, 0.5])
    diam, inr, c = geo.diameter_inradius(K)
    assert diam == pytest.approx(math.sqrt(2))
    assert inr == pytest.approx(0.5)
    np.testing.assert_allclose(c, [0.5, 0.5], atol=1e-9)


def test_stadium_area_and_perimeter():
    s = 2.0
    K = geo.stadium(s, 1.0, 4096)
    assert geo.area(K) == pytest.approx(math.pi + 2 * s, rel=1e-6)
    assert geo.perimeter(K) == pytest.approx(2 * math.pi + 2 * s, rel=1e-6)


def test_support_of_square():
    K = geo.unit_square()
    theta = np.array([0.0, math.pi / 2, math.pi, math.pi / 4])
    np.testing.assert_allclose(geo.support(K, theta), [1.0, 1.0, 0.0, math.sqrt(2)], atol=1e-15)


@given(convex_polygons(), convex_polygons())
def test_minkowski_sum_identities(A, B):
    S = geo.minkowski_sum(A, B)
    assert geo.perimeter(S) == pytest.approx(geo.perimeter(A) + geo.perimeter(B), abs=1e-9)
    assert geo.area(S) == pytest.approx(geo.area(A) + 2 * geo.mixed_area(A, B) + geo.area(B), abs=1e-9)
    assert geo.mixed_area(A, B) == pytest.approx(geo.mixed_area(B, A), abs=1e-9)
    theta = np.linspace(0, 2 * math.pi, 97)
    np.testing.assert_allclose(geo.support(S, theta), geo.support(A, theta) + geo.support(B, theta), atol=1e-9)


@given(convex_polygons(), st.floats(0.01, 3.0))
def test_steiner_polynomial(K, t):
    B = geo.regular_polygon(12)
    lhs = geo.area(geo.minkowski_sum(K, B.scaled(t)))
    rhs = geo.area(K) + 2 * t * geo.mixed_area(K, B) + t * t * geo.area(B)
    assert lhs == pytest.approx(rhs, abs=1e-9)


@given(convex_polygons())
def test_mixed_area_with_disk_is_half_perimeter(K):
    assert 2 * geo.mixed_area(K, geo.disk(1.0, 4096)) == pytest.approx(geo.perimeter(K), rel=1e-6)


def test_halfplane_cut_cases():
    K = geo.unit_square()
    assert geo.halfplane_cut(K, HalfPlane((1.0, 0.0), 2.0)) is K
    assert geo.halfplane_cut(K, HalfPlane((1.0, 0.0), -1.0)) is None
    half = geo.halfplane_cut(K, HalfPlane((1.0, 0.0), 0.5))
    assert geo.area(half) == pytest.approx(0.5, abs=1e-15)
    assert geo.contains(K, half)


@given(convex_polygons(), st.floats(0, 2 * math.pi), st.floats(-0.9, 0.9))
def test_cut_is_contained_and_smaller(K, theta, frac):
    n = np.array([math.cos(theta), math.sin(theta)])
    hi = float(geo.support(K, theta))
    lo = -float(geo.support(K, theta + math.pi))
    off = 0.5 * (hi + lo) + 0.5 * frac * (hi - lo)
    C = geo.halfplane_cut(K, HalfPlane(tuple(n), off))
    assert C is not None
    assert geo.contains(K, C)
    assert geo.area(C) <= geo.area(K) + 1e-12


def test_symdiff_nested_is_area_difference():
    outer = geo.disk(2.0, 64)
    inner = geo.unit_square()
    assert geo.symdiff_area(outer, inner) == pytest.approx(geo.area(outer) - geo.area(inner), abs=1e-12)
    assert geo.symdiff_area(inner, inner) == pytest.approx(0.0, abs=1e-14)


def test_symdiff_of_disjoint_bodies():
    A = geo.unit_square()
    B = A.translated(np.array([3.0, 0.0]))
    assert geo.symdiff_area(A, B) == pytest.approx(2.0)


def test_hausdorff_distance_examples():
    A = geo.unit_square()
    assert geo.hausdorff_distance(A, A.translated(np.array([0.3, 0.4]))) == pytest.approx(0.5)
    assert geo.hausdorff_distance(A, A.scaled(2.0, (0.5, 0.5))) == pytest.approx(math.sqrt(2) / 2)


@given(convex_polygons(), convex_polygons())
def test_hausdorff_is_symmetric_and_bounded(A, B):
    d = geo.hausdorff_distance(A, B)
    assert d == pytest.approx(geo.hausdorff_distance(B, A), abs=1e-12)
    theta = np.linspace(0, 2 * math.pi, 1001)
    assert d >= np.abs(geo.support(A, theta) - geo.support(B, theta)).max() - 1e-12


def test_support_round_trip_for_grid_aligned_body():
    K = geo.regular_polygon(16, 1.0, phase=math.pi / 16)
    S = geo.to_support(K, 16)
    K2 = geo.from_support(S)
    assert geo.hausdorff_distance(K, K2) < 1e-12


def test_support_body_convexity():
    m = 32
    S = geo.to_support(geo.disk(1.0, 256), m)
    assert S.is_convex()
    h = S.h.copy()
    h[3] -= 0.2
    assert SupportBody(h).convexity_defect() > 0.1
    assert not SupportBody(h).is_convex()


def test_radii_of_curvature_of_circle():
    S = SupportBody(np.full(64, 2.0))
    np.testing.assert_allclose(S.radii_of_curvature(), 2.0, rtol=1e-12)


def test_radial_round_trip():
    K = geo.ellipse(1.5, 0.8, 128)
    R = geo.to_radial(K, (0.1, -0.05), 256)
    K2 = geo.from_radial(R)
    assert geo.hausdorff_distance(K, K2) < 0.02
    assert R.gradient_bound() > 0


def test_radial_origin_must_be_inside():
    with pytest.raises(OriginOutside):
        geo.to_radial(geo.unit_square(), (2.0, 2.0), 32)


def test_contains_points_and_boundary_distance():
    K = geo.unit_square()
    pts = np.array([[0.5, 0.5], [1.5, 0.5], [0.1, 0.9]])
    np.testing.assert_array_equal(geo.contains_points(K, pts), [True, False, True])
    np.testing.assert_allclose(geo.boundary_distance(K, pts[[0, 2]]), [0.5, 0.1], atol=1e-15)


def test_polygon_equality_ignores_start_vertex():
    v = geo.unit_square().vertices
    assert ConvexPolygon(np.roll(v, 2, axis=0)) == geo.unit_square()


def test_validation_error_family():
    assert issubclass(InvalidBody, ValidationError)
