import math

import numpy as np
import pytest

from convexopt import cutprobe as cp
from convexopt import geometry as geo
from convexopt.errors import DegenerateChart

FINE_DISK = geo.disk(1.0, 2**16)
R_GRID = np.geomspace(0.02, 0.2, 8)


@pytest.fixture(scope="module")
def disk_report():
    return cp.probe(FINE_DISK, 0.0, R_GRID)


def test_chart_of_square_edge():
    ch = cp.build_chart(geo.unit_square(), 0.125)
    np.testing.assert_allclose(ch.base, [0.5, 0.0], atol=1e-15)
    np.testing.assert_allclose(ch.normal, [0.0, 1.0], atol=1e-15)
    assert ch.slope == pytest.approx(0.0, abs=1e-12)
    assert ch.beta == pytest.approx(0.25)
    assert ch.opening_angle == pytest.approx(math.pi)
    np.testing.assert_allclose(ch.graph(np.array([-0.2, 0.0, 0.2])), 0.0, atol=1e-15)


def test_chart_of_square_corner():
    ch = cp.build_chart(geo.unit_square(), 0.0)
    assert ch.opening_angle == pytest.approx(math.pi / 2)
    x = np.array([-0.1, 0.1])
    np.testing.assert_allclose(ch.graph(x), np.abs(x), atol=1e-14)


def test_disk_chart_matches_circle():
    ch = cp.build_chart(FINE_DISK, 0.0)
    x = np.array([-0.3, 0.1, 0.25])
    np.testing.assert_allclose(ch.graph(x), 1 - np.sqrt(1 - x**2), atol=1e-8)


def test_cut_family_geometry():
    K = FINE_DISK
    ch = cp.build_chart(K, 0.0)
    cut = cp.cut_family(K, ch, 0.1)
    # the vertex chart of the 2^16-gon sits within 1e-9 of the circle
    assert cut.M == pytest.approx(1 - math.sqrt(1 - 0.01), rel=1e-6)
    assert cut.M == pytest.approx(0.0050125637, abs=1e-9)
    assert geo.contains(K, cut.body)
    assert geo.area(cut.body) < geo.area(K)
    with pytest.raises(DegenerateChart):
        cp.cut_family(K, ch, ch.beta)


def test_flat_cut_leaves_body_unchanged():
    K = geo.unit_square()
    ch = cp.build_chart(K, 0.125)
    cut = cp.cut_family(K, ch, 0.1)
    assert cut.M == 0.0 and cut.body is K and cut.halfplane is None


def test_disk_probe(disk_report):
    rep = disk_report
    assert rep.slope == pytest.approx(2.0, abs=0.05)
    assert rep.classification == cp.C11_CONSISTENT
    ratio = rep.M / rep.r**2
    assert ratio.min() >= 0.49 and ratio.max() <= 0.51
    assert rep.quasi_min_ratio[0] == pytest.approx(0.5, abs=0.02)


def test_disk_probe_frozen_values(disk_report):
    # regression values of the first run on this grid
    assert disk_report.slope == pytest.approx(2.0036, abs=2e-3)
    assert disk_report.quasi_min_ratio[0] == pytest.approx(0.50002, abs=1e-4)


def test_square_corner_probe():
    rep = cp.probe(geo.unit_square(), 0.0)
    assert rep.slope == pytest.approx(1.0, abs=0.05)
    assert rep.classification == cp.CORNER_LIKE
    # the corner graph is |x|, so M_r = r
    np.testing.assert_allclose(rep.M, rep.r, rtol=1e-9)


def test_square_edge_is_all_flat():
    rep = cp.probe(geo.unit_square(), 0.125)
    assert rep.all_flat
    assert rep.classification == cp.C11_CONSISTENT
    assert math.isnan(rep.slope)


def test_stadium_flat_side_and_cap():
    K = geo.stadium(2.0, 1.0, 4096)
    P = geo.perimeter(K)
    # the boundary starts at (-2, 0) and runs counter-clockwise
    flat = (math.pi / 2 + 1.0) / P
    assert cp.probe(K, flat).all_flat
    cap = (math.pi + 2.0) / P
    rep = cp.probe(K, cap, np.geomspace(0.02, 0.2, 8))
    assert rep.slope == pytest.approx(2.0, abs=0.05)


def test_report_round_trip_keys(disk_report):
    d = disk_report.to_dict()
    assert d["kind"] == "cut_probe"
    assert len(d["cut_segments"]) == 3
    assert len(d["r"]) == len(d["M"]) == 8
