import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexopt import functionals as fn
from convexopt import geometry as geo
from convexopt.errors import RieszQuadratureBudgetExceeded, ValidationError
from convexopt.functionals import FunctionalSpec

from strategies import convex_polygons

# int int |x - y|^-1 over the unit square
SQUARE_V1 = 4.0 * math.log(1.0 + math.sqrt(2.0)) - 4.0 * (math.sqrt(2.0) - 1.0) / 3.0
# Monte Carlo estimate of the same integral, an independent check
SQUARE_V1_MC = 2.9736841888721317


def _rectangle_asymmetry() -> float:
    """2 x 1 rectangle: by symmetry the optimal disk is centred, so
    ``|K cap B|`` is the disk minus the two caps beyond ``|y| = 1/2``."""
    r = math.sqrt(2.0 / math.pi)
    d = 0.5
    cap = r * r * math.acos(d / r) - d * math.sqrt(r * r - d * d)
    return 2.0 * (2.0 - (math.pi * r * r - 2.0 * cap)) / 2.0


RECTANGLE_ASYMMETRY = _rectangle_asymmetry()


def test_riesz_square_closed_form():
    q = fn.riesz_potential(geo.unit_square(), 1.0)
    assert q.value == pytest.approx(SQUARE_V1, rel=1e-12)
    assert q.value == pytest.approx(SQUARE_V1_MC, rel=5e-4)
    assert q.rel_error < 1e-10


def test_riesz_disk():
    q = fn.riesz_potential(geo.disk(1.0, 256), 1.0)
    assert q.value == pytest.approx(16.0 * math.pi / 3.0, rel=5e-4)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 1.7])
def test_riesz_methods_agree(alpha):
    K = geo.ellipse(1.0, 0.6, 24)
    a = fn.riesz_potential(K, alpha).value
    b = fn.riesz_potential(K, alpha, method="radial").value
    assert a == pytest.approx(b, rel=5e-3)


@given(convex_polygons(max_points=10), st.floats(0.2, 3.0), st.floats(0.1, 1.9))
@settings(max_examples=15)
def test_riesz_scaling(K, t, alpha):
    a = fn.riesz_potential(K, alpha).value
    b = fn.riesz_potential(K.scaled(t), alpha).value
    assert b == pytest.approx(t ** (2.0 + alpha) * a, rel=1e-9)


@given(convex_polygons(max_points=10))
@settings(max_examples=15)
def test_riesz_maximized_by_disk(K):
    """Riesz rearrangement: the equal-area disk has the largest energy."""
    A = geo.area(K)
    disk = 16.0 * math.pi / 3.0 * (A / math.pi) ** 1.5
    assert fn.riesz_potential(K, 1.0).value <= disk * (1 + 1e-6)
    # each inner integral is at most the one over the disk centred at x
    assert fn.riesz_potential(K, 1.0).value <= A * fn.riesz_ball_bound(1.0, A) * (1 + 1e-9)


def test_riesz_budget_and_alpha_checks():
    with pytest.raises(RieszQuadratureBudgetExceeded):
        fn.riesz_potential(geo.disk(1.0, 256), 1.0, budget=1000)
    with pytest.raises(ValidationError):
        fn.riesz_potential(geo.unit_square(), 2.0)


def test_potential_integrals():
    K = geo.unit_square()
    assert fn.potential_integral(K, fn.POTENTIALS["constant"]({"value": 2.0})) == pytest.approx(2.0, rel=1e-12)
    assert fn.potential_integral(K, fn.POTENTIALS["x"]({})) == pytest.approx(0.5, rel=1e-12)
    assert fn.potential_integral(K, fn.POTENTIALS["quadratic"]({})) == pytest.approx(2.0 / 3.0, rel=1e-5)
    well = fn.POTENTIALS["gaussian_well"]({"center": (0.5, 0.5), "width": 0.3})
    assert fn.potential_integral(K, well) < 0


def test_iso_deficit():
    assert fn.iso_deficit(geo.disk(1.0, 4096)) == pytest.approx(0.0, abs=1e-6)
    assert fn.iso_deficit(geo.unit_square()) == pytest.approx(4.0 / (2.0 * math.sqrt(math.pi)) - 1.0)


def test_disk_intersection_area():
    K = geo.unit_square()
    assert fn.disk_intersection_area(K, (0.5, 0.5), 0.3) == pytest.approx(math.pi * 0.09, rel=1e-12)
    assert fn.disk_intersection_area(K, (0.0, 0.0), 0.5) == pytest.approx(math.pi * 0.25 / 4, rel=1e-12)
    assert fn.disk_intersection_area(K, (0.5, 0.5), 10.0) == pytest.approx(1.0, rel=1e-12)
    assert fn.disk_intersection_area(K, (5.0, 5.0), 1.0) == pytest.approx(0.0, abs=1e-14)


def test_fraenkel_asymmetry_values():
    assert fn.fraenkel_asymmetry(geo.rectangle(0, 0, 2, 1)) == pytest.approx(RECTANGLE_ASYMMETRY, abs=1e-9)
    assert fn.fraenkel_asymmetry(geo.disk(1.0, 2048)) < 1e-5


@given(convex_polygons(max_points=10), st.tuples(st.floats(-5, 5), st.floats(-5, 5)), st.floats(0.2, 4.0))
@settings(max_examples=20)
def test_fraenkel_invariance(K, shift, t):
    a = fn.fraenkel_asymmetry(K)
    assert fn.fraenkel_asymmetry(K.translated(np.array(shift))) == pytest.approx(a, abs=1e-6)
    assert fn.fraenkel_asymmetry(K.scaled(t)) == pytest.approx(a, abs=1e-6)
    assert 0.0 <= a <= 2.0


def test_evaluate_kinds():
    K = geo.unit_square()
    assert fn.evaluate(FunctionalSpec("volume"), K) == 1.0
    assert fn.evaluate(FunctionalSpec("perimeter"), K) == 4.0
    tau = fn.evaluate(FunctionalSpec("torsion", h_mesh=0.03), K)
    lam = fn.evaluate(FunctionalSpec("dirichlet_eig", n=1, h_mesh=0.03), K)
    mu = fn.evaluate(FunctionalSpec("neumann_eig", n=2, h_mesh=0.03), K)
    assert tau == pytest.approx(0.0351443, rel=0.01)
    assert lam == pytest.approx(2 * math.pi**2, rel=0.01)
    assert mu == pytest.approx(math.pi**2, rel=0.01)
    g = FunctionalSpec("potential", g_name="x")
    assert fn.evaluate(g, K) == pytest.approx(0.5)


def test_composite_matches_parts():
    K = geo.ellipse(1.0, 0.7, 64)
    spec = FunctionalSpec("composite", args=("tau", "lambda1", "mu2"), F="weighted_sum", weights=(2.0, 1.0, -1.0), h_mesh=0.04)
    q = fn.quantities(spec, K)
    assert fn.combine(spec, q) == pytest.approx(2 * q["tau"] + q["lambda1"] - q["mu2"])
    assert fn.evaluate(spec, K) == pytest.approx(fn.combine(spec, q))
    assert q["lambda1"] == pytest.approx(fn.evaluate(FunctionalSpec("dirichlet_eig", n=1, h_mesh=0.04), K), rel=1e-12)


def test_custom_composite():
    fn.register_composite("ratio_test", lambda v: v[0] / v[1])
    spec = FunctionalSpec("composite", args=("perimeter", "volume"), F="custom:ratio_test")
    assert fn.evaluate(spec, geo.unit_square()) == pytest.approx(4.0)


def test_spec_round_trip():
    spec = FunctionalSpec("composite", args=("mu2",), F="weighted_sum", weights=(-1.0,), h_mesh=0.05)
    assert FunctionalSpec.from_dict(spec.to_dict()) == spec
    pot = FunctionalSpec("potential", g_name="quadratic", g_params=(("center", (1.0, 0.0)),))
    back = FunctionalSpec.from_dict(pot.to_dict())
    assert fn.evaluate(back, geo.unit_square()) == pytest.approx(fn.evaluate(pot, geo.unit_square()))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"kind": "nope"},
        {"kind": "riesz", "alpha": 2.5},
        {"kind": "dirichlet_eig", "n": 0},
        {"kind": "potential", "g_name": "unknown"},
        {"kind": "composite"},
        {"kind": "composite", "args": ("lambda0",)},
        {"kind": "composite", "args": ("tau",), "F": "weighted_sum"},
        {"kind": "torsion", "h_mesh": -1.0},
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValidationError):
        FunctionalSpec(**kwargs)


def test_fem_solve_count():
    assert fn.fem_solves(FunctionalSpec("volume")) == 0
    assert fn.fem_solves(FunctionalSpec("composite", args=("tau", "lambda1", "lambda2"))) == 2
