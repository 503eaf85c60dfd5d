"""Acceptance criteria. Each test prints one PASS/FAIL line."""

import math

import numpy as np
import pytest
from scipy.special import jn_zeros

from convexopt import cli, fem, formats
from convexopt import cutprobe as cp
from convexopt import estimates as est
from convexopt import functionals as fn
from convexopt import geometry as geo
from convexopt import optimize as op
from convexopt import penalize as pen
from convexopt.functionals import FunctionalSpec

STADIUM_CONSTANT = 0.405585
D_IN = geo.disk(0.3, 64)
D_OUT = geo.disk(2.0, 64)


@pytest.fixture(scope="module")
def pairs200():
    return est.generate_nested_pairs(D_IN, D_OUT, 200, seed=2024)


def _random_polygons(count, seed):
    rng = np.random.default_rng(seed)
    return [geo.random_convex_polygon(rng, int(rng.integers(3, 40)), float(rng.uniform(0.2, 3.0))) for _ in range(count)]


def test_c1_stadium_constant(report_line):
    res = op.stadium_constant()
    ratios = []
    for K in _random_polygons(500, 1):
        ratios.append(fn.iso_deficit(K) / fn.fraenkel_asymmetry(K) ** 2)
    worst = min(ratios)
    ok = abs(res.constant - STADIUM_CONSTANT) <= 1e-3 and worst >= 0.4005
    report_line("C1 stadium constant", ok, f"constant {res.constant:.6f} at s={res.distance:.4f}, min ratio over 500 polygons {worst:.4f}")


def test_c2_fem_ground_truths(report_line):
    sq = geo.unit_square()
    dk = geo.disk(1.0, 512)
    lam_sq = fem.dirichlet_eigs(sq, 1, 0.03).values[0]
    mu_sq = fem.neumann_eigs(sq, 2, 0.03).values[1]
    lam_dk = fem.dirichlet_eigs(dk, 1, 0.03).values[0]
    tau_dk = fem.torsion(dk, 0.03).tau
    errs = {
        "lambda1 square": lam_sq / (2 * math.pi**2) - 1,
        "mu2 square": mu_sq / math.pi**2 - 1,
        "lambda1 disk": lam_dk / jn_zeros(0, 1)[0] ** 2 - 1,
        "tau disk": tau_dk / (math.pi / 8) - 1,
    }
    ok = all(abs(e) <= 0.01 for e in errs.values())
    report_line("C2 FEM ground truths", ok, ", ".join(f"{k} {v:+.2e}" for k, v in errs.items()))


def test_c3_torsion_bounds(report_line):
    bodies = [p.outer for p in est.generate_nested_pairs(D_IN, D_OUT, 100, seed=7)]
    u_viol = grad_viol = 0
    worst_u = worst_g = 0.0
    for K in bodies:
        b = est.torsion_bounds(K)
        worst_u = max(worst_u, b["max_u"] / b["u_bound"])
        worst_g = max(worst_g, b["max_grad"] / b["grad_bound"])
        u_viol += b["max_u"] > 1.02 * b["u_bound"]
        grad_viol += b["max_grad"] > 1.05 * b["grad_bound"]
    ok = u_viol == 0 and grad_viol == 0
    report_line("C3 torsion bounds", ok, f"violations u {u_viol}, grad {grad_viol}; worst u/bound {worst_u:.3f}, grad/bound {worst_g:.3f}")


def test_c4_eig_torsion_bound(report_line):
    pairs = est.generate_nested_pairs(D_IN, D_OUT, 100, seed=11)
    parts = []
    total = 0
    for n in (1, 2, 3):
        rep = est.eig_torsion_bound_check(pairs, n, tolerance=0.05)
        total += rep.violations
        parts.append(f"n={n}: {rep.violations} violations, min slack {np.min(rep.slack):.3g}")
    report_line("C4 eigenvalue-torsion bound", total == 0, "; ".join(parts))


def test_c5_lipschitz_ratios(report_line, pairs200):
    specs = {
        "tau": FunctionalSpec("torsion"),
        "lambda1": FunctionalSpec("dirichlet_eig", n=1),
        "lambda2": FunctionalSpec("dirichlet_eig", n=2),
        "mu2": FunctionalSpec("neumann_eig", n=2),
        "V1": FunctionalSpec("riesz", alpha=1.0),
        "volume": FunctionalSpec("volume"),
    }
    ok = True
    parts = []
    for name, spec in specs.items():
        rep = est.lipschitz_experiment(spec, pairs200)
        good = rep.bounded and rep.evaluated == len(pairs200)
        if name == "volume":
            good = good and bool(np.all(np.abs(rep.ratios - 1.0) <= 1e-12))
        ok = ok and good
        parts.append(f"{name} small {rep.small_decade_max:.3g}/rest {rep.rest_max:.3g}")
    report_line("C5 Lipschitz ratios", ok, "; ".join(parts))


def test_c6_mixed_volume_identities(report_line):
    polys = _random_polygons(200, 6)
    disk = geo.disk(1.0, 4096)
    steiner = minkowski = mixed = 0.0
    for A, B in zip(polys[::2], polys[1::2]):
        t = float(np.random.default_rng(len(A.vertices)).uniform(0.1, 2.0))
        lhs = geo.area(geo.minkowski_sum(A, B.scaled(t)))
        rhs = geo.area(A) + 2 * t * geo.mixed_area(A, B) + t * t * geo.area(B)
        steiner = max(steiner, abs(lhs - rhs))
        minkowski = max(minkowski, abs(geo.perimeter(geo.minkowski_sum(A, B)) - geo.perimeter(A) - geo.perimeter(B)))
        mixed = max(mixed, abs(2 * geo.mixed_area(A, disk) / geo.perimeter(A) - 1))
    ok = steiner <= 1e-9 and minkowski <= 1e-9 and mixed <= 1e-3
    report_line("C6 mixed-volume identities", ok, f"Steiner {steiner:.1e}, P(A+B) {minkowski:.1e}, 2V(K,disk)/P-1 {mixed:.1e}")


def test_c7_penalization(report_line):
    worst_res = 0.0
    min_df0 = math.inf
    for K in _random_polygons(100, 8):
        _, _, c = geo.diameter_inradius(K)
        R = np.hypot(*(K.vertices - c).T).max()
        D = geo.disk(1.3 * R / math.cos(math.pi / 64), 64, c)
        fam = pen.MinkowskiFamily(K, D)
        V0 = 0.5 * (geo.area(K) + geo.area(D))
        _, Kt = pen.restore_volume(fam, V0)
        worst_res = max(worst_res, abs(geo.area(Kt) - V0) / V0)
        min_df0 = min(min_df0, fam.df0())
    sq = pen.MinkowskiFamily(geo.unit_square(), geo.rectangle(-0.5, -0.5, 1.5, 1.5))
    closed = max(abs(sq.f(t) - (1 + t) ** 2) for t in np.linspace(0, 1, 101))
    ok = worst_res <= 1e-9 and min_df0 > 0 and closed <= 1e-13
    report_line("C7 penalization", ok, f"restore residual {worst_res:.1e}, min f'(0) {min_df0:.3g}, square closed form {closed:.1e}")


def test_c8_cut_probe(report_line):
    disk = cp.probe(geo.disk(1.0, 2**16), 0.0, np.geomspace(0.02, 0.2, 8))
    m_over_r2 = disk.M / disk.r**2
    corner = cp.probe(geo.unit_square(), 0.0)
    edge = cp.probe(geo.unit_square(), 0.125)
    ok = (
        abs(disk.slope - 2.0) <= 0.05
        and bool(np.all((m_over_r2 >= 0.49) & (m_over_r2 <= 0.51)))
        and abs(disk.quasi_min_ratio[0] - 0.5) <= 0.02
        and abs(corner.slope - 1.0) <= 0.05
        and corner.classification == cp.CORNER_LIKE
        and edge.all_flat
    )
    detail = (
        f"disk slope {disk.slope:.4f}, M/r^2 in [{m_over_r2.min():.4f}, {m_over_r2.max():.4f}], "
        f"quasi-min {disk.quasi_min_ratio[0]:.4f}; corner slope {corner.slope:.4f} ({corner.classification}); "
        f"edge all_flat={edge.all_flat}"
    )
    report_line("C8 cut probe", ok, detail)


def _problem(name):
    from pathlib import Path

    d = formats.read_json(Path(__file__).parent.parent / "problems" / f"{name}.json")
    return formats.problem_from_dict(d)


def test_c9_optimizer_sanity(report_line):
    parts = []
    ok = True
    problem, opts, init = _problem("isoperimetric")
    iso = op.solve(problem, init=init, options=opts)
    P = geo.perimeter(iso.body)
    ok = ok and P <= 2 * math.pi * (1 + 5e-3)
    slopes = [p["slope"] for p in iso.probe]
    parts.append(f"iso P/2pi-1 {P / (2 * math.pi) - 1:.1e}")
    for name in ("faber_krahn", "szego_weinberger"):
        problem, opts, init = _problem(name)
        res = op.solve(problem, init=init, options=opts)
        d = op.disk_distance(res.body)
        ok = ok and d <= 0.05
        slopes += [p["slope"] for p in res.probe]
        parts.append(f"{name} d_H {d:.4f} ({res.status})")
    ok = ok and bool(slopes) and min(slopes) >= 1.9
    parts.append(f"min probe slope {min(slopes):.3f} over {len(slopes)} points")
    report_line("C9 optimizer sanity", ok, "; ".join(parts))


def test_c10_determinism(report_line, tmp_path, capsys):
    from pathlib import Path

    problem = Path(__file__).parent.parent / "problems" / "isoperimetric.json"
    texts = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert cli.main(["solve", "--problem", str(problem), "--out", str(out), "--seed", "17"]) == 0
        assert cli.main(["verify-lipschitz", "--functional", "tau", "--pairs", "10", "--seed", "17", "--out", str(out)]) == 0
        texts.append(((out / "isoperimetric.json").read_bytes(), (out / "lipschitz_tau.json").read_bytes()))
    capsys.readouterr()
    ok = texts[0] == texts[1]
    report_line("C10 determinism", ok, f"solve and verify-lipschitz reports identical: {ok}")
