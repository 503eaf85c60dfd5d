import math

import numpy as np
import pytest

from convexopt import estimates as est
from convexopt import geometry as geo
from convexopt.errors import ValidationError
from convexopt.functionals import FunctionalSpec

D_IN = geo.disk(0.3, 64)
D_OUT = geo.disk(2.0, 64)


@pytest.fixture(scope="module")
def pairs():
    return est.generate_nested_pairs(D_IN, D_OUT, 30, seed=5)


def test_constants():
    assert est.eig_torsion_constant(1) == pytest.approx(2 * math.exp(1 / (4 * math.pi)))
    assert est.eig_torsion_constant(3) == pytest.approx(9 * est.eig_torsion_constant(1))
    assert est.holder_exponent(2, 1.0) == pytest.approx(1.0)
    assert est.holder_exponent(2, 0.75) == pytest.approx(0.5 / 1.25)
    with pytest.raises(ValidationError):
        est.holder_exponent(2, 0.5)


def test_pairs_are_nested_and_spread(pairs):
    gaps = np.array([p.volume_gap for p in pairs])
    assert np.all(gaps > 0)
    for p in pairs:
        assert geo.contains(D_OUT, p.outer, 1e-9)
        assert geo.contains(p.outer, p.inner, 1e-9)
        assert geo.contains(p.inner, D_IN, 1e-9)
    assert math.log10(gaps.max() / gaps.min()) > 2.0


def test_pair_generation_is_deterministic():
    a = est.generate_nested_pairs(D_IN, D_OUT, 5, seed=9)
    b = est.generate_nested_pairs(D_IN, D_OUT, 5, seed=9)
    for p, q in zip(a, b):
        np.testing.assert_array_equal(p.outer.vertices, q.outer.vertices)
        np.testing.assert_array_equal(p.inner.vertices, q.inner.vertices)


def test_nested_pair_validation():
    with pytest.raises(ValidationError):
        est.NestedPair(inner=D_OUT, outer=D_IN, d_inner=D_IN, d_outer=D_OUT)


def test_volume_ratios_are_one(pairs):
    rep = est.lipschitz_experiment(FunctionalSpec("volume"), pairs)
    np.testing.assert_allclose(rep.ratios, 1.0, atol=1e-12)
    assert rep.bounded
    assert rep.theoretical_bound == 1.0


def test_torsion_lipschitz_within_bound(pairs):
    rep = est.lipschitz_experiment(FunctionalSpec("torsion"), pairs[:12])
    assert rep.evaluated == 12
    assert rep.sign_violations == 0
    assert rep.max_ratio <= rep.theoretical_bound
    d = rep.to_dict()
    assert d["kind"] == "lipschitz" and len(d["ratios"]) == 12


def test_small_decade_test():
    gaps = np.array([1e-4, 2e-4, 1e-2, 1e-1])
    bounded = est._small_decade_test(gaps, np.array([1.0, 1.5, 2.0, 1.0]))
    assert bounded[2]
    blown = est._small_decade_test(gaps, np.array([50.0, 1.0, 2.0, 1.0]))
    assert not blown[2]


def test_eig_torsion_pair_rectangle():
    lhs, rhs = est.eig_torsion_pair(geo.unit_square(), geo.rectangle(0, 0, 1, 0.9), 1, 0.03)
    assert 0 < lhs < rhs


def test_eig_torsion_check(pairs):
    rep = est.eig_torsion_bound_check(pairs[:8], 1)
    assert rep.violations == 0
    assert rep.to_dict()["kind"] == "eig_torsion"


def test_torsion_bounds_disk():
    b = est.torsion_bounds(geo.disk(1.0, 256), 0.04)
    assert b["max_u"] == pytest.approx(0.25, rel=0.01)
    assert b["max_u"] <= b["u_bound"]
    assert b["max_grad"] <= b["grad_bound"] * 1.05
