import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexopt import geometry as geo
from convexopt import penalize as pen
from convexopt.errors import ValidationError, VolumeOutOfRange
from convexopt.functionals import FunctionalSpec

from strategies import convex_polygons

SQUARE = geo.unit_square()
BIG_SQUARE = geo.rectangle(-0.5, -0.5, 1.5, 1.5)


def test_square_pair_closed_form():
    fam = pen.MinkowskiFamily(SQUARE, BIG_SQUARE)
    assert fam.coefficients == pytest.approx((1.0, 2.0, 1.0), abs=1e-15)
    for t in np.linspace(0, 1, 11):
        assert fam.f(t) == pytest.approx((1 + t) ** 2, abs=1e-14)
        assert geo.area(pen.family_at(fam, t)) == pytest.approx((1 + t) ** 2, abs=1e-13)
    t, K = pen.restore_volume(fam, 2.25)
    assert t == pytest.approx(0.5, abs=1e-15)
    assert geo.area(K) == pytest.approx(2.25, abs=1e-14)


def _inside_disk(K):
    _, _, c = geo.diameter_inradius(K)
    R = np.hypot(*(K.vertices - c).T).max()
    return geo.disk(1.3 * R / math.cos(math.pi / 64), 64, c)


@given(convex_polygons(), st.floats(0.01, 0.99))
@settings(max_examples=30)
def test_restore_volume_residual(K, frac):
    D = _inside_disk(K)
    fam = pen.MinkowskiFamily(K, D)
    V0 = geo.area(K) + frac * (geo.area(D) - geo.area(K))
    t, Kt = pen.restore_volume(fam, V0)
    assert 0 <= t <= 1
    assert abs(geo.area(Kt) - V0) <= 1e-9 * V0
    assert geo.contains(D, Kt, 1e-9)


@given(convex_polygons())
@settings(max_examples=30)
def test_family_derivative_is_positive(K):
    D = _inside_disk(K)
    fam = pen.MinkowskiFamily(K, D)
    df0 = fam.df0()
    assert df0 == pytest.approx(2 * (geo.mixed_area(K, D) - geo.area(K)))
    assert df0 > 0
    eps = 1e-6
    assert (fam.f(eps) - fam.f(0)) / eps == pytest.approx(df0, rel=1e-4)
    t0 = fam.linear_growth_interval()
    for t in np.linspace(0, t0, 7):
        assert fam.f(t) - fam.f(0) >= 0.5 * df0 * t - 1e-12


def test_restore_volume_out_of_range():
    fam = pen.MinkowskiFamily(SQUARE, BIG_SQUARE)
    with pytest.raises(VolumeOutOfRange):
        pen.restore_volume(fam, 5.0)
    with pytest.raises(VolumeOutOfRange):
        pen.restore_volume(fam, 0.5)
    assert pen.restore_volume(fam, 1.0)[0] == 0.0


def test_family_requires_containment():
    with pytest.raises(ValidationError):
        pen.MinkowskiFamily(BIG_SQUARE, SQUARE)
    with pytest.raises(ValidationError):
        pen.family_at(pen.MinkowskiFamily(SQUARE, BIG_SQUARE), 1.5)


def test_penalized_objective():
    obj = pen.penalized_objective(None, 3.0, 2.0)
    assert obj(SQUARE) == pytest.approx(4.0 + 3.0)
    with pytest.raises(ValidationError):
        pen.penalized_objective(None, -1.0, 1.0)


def test_penalty_weights_are_positive():
    K = geo.ellipse(0.8, 0.5, 64)
    spec = FunctionalSpec("dirichlet_eig", n=1, h_mesh=0.03)
    assert pen.homothety_penalty(K) > geo.perimeter(K) / geo.area(K)
    assert pen.homothety_penalty(K, spec) > pen.homothety_penalty(K)
    lam = pen.calibrate_penalty(K, geo.disk(2.0, 64), FunctionalSpec("volume"), n_pairs=5)
    assert lam > 0


def test_scaling_degree():
    assert pen.scaling_degree(FunctionalSpec("torsion")) == 4.0
    assert pen.scaling_degree(FunctionalSpec("dirichlet_eig")) == -2.0
    assert pen.scaling_degree(FunctionalSpec("riesz", alpha=0.5)) == 2.5
