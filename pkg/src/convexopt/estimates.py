"""Empirical checks of Lipschitz-type estimates on nested convex bodies.

The class of admissible bodies is ``{K convex : D' ⊆ K ⊆ D}``. Pairs
``K' ⊆ K`` are drawn from it and a functional ``R`` is evaluated on both
bodies; the ratio ``|R(K) - R(K')| / |K \\ K'|`` should stay bounded as the
perturbation shrinks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import fem
from . import geometry as geo
from .errors import ConvexOptError, EvaluationFailure, SamplerStalled, ValidationError
from .functionals import FunctionalSpec, evaluate, quantities
from .geometry import ConvexPolygon, HalfPlane
from .parallel import parallel_map

log = logging.getLogger(__name__)

MAX_REJECTIONS = 10_000
MIN_EVALUATED = 0.9


def eig_torsion_constant(n: int) -> float:
    """``C(n) = 2 n^2 exp(1/(4 pi))``."""
    return 2.0 * n * n * math.exp(1.0 / (4.0 * math.pi))


def holder_exponent(N: int, gamma: float) -> float:
    """``(N(gamma - 1) + 1) / (2 - gamma)`` for ``gamma`` in ``(1 - 1/N, 1]``."""
    if N < 1:
        raise ValidationError("dimension must be positive")
    if not 1.0 - 1.0 / N < gamma <= 1.0:
        raise ValidationError(f"gamma must lie in ({1.0 - 1.0 / N:g}, 1]")
    return (N * (gamma - 1.0) + 1.0) / (2.0 - gamma)


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True, eq=False)
class NestedPair:
    inner: ConvexPolygon
    outer: ConvexPolygon
    d_inner: ConvexPolygon
    d_outer: ConvexPolygon

    def __post_init__(self):
        tol = 100.0 * self.d_outer.tol
        chain = (self.d_inner, self.inner, self.outer, self.d_outer)
        for a, b in zip(chain, chain[1:]):
            if not geo.contains(b, a, tol):
                raise ValidationError("nested pair violates D' ⊆ K' ⊆ K ⊆ D")

    @property
    def volume_gap(self) -> float:
        """``|K \\ K'|``, exact for nested bodies."""
        return geo.area(self.outer) - geo.area(self.inner)


def _sample_in(K: ConvexPolygon, rng: np.random.Generator, k: int) -> np.ndarray:
    lo, hi = K.vertices.min(axis=0), K.vertices.max(axis=0)
    out = np.empty((0, 2))
    while len(out) < k:
        pts = lo + (hi - lo) * rng.random((4 * k, 2))
        out = np.vstack([out, pts[geo.contains_points(K, pts)]])
    return out[:k]


def _cut_to_area(K: ConvexPolygon, d_inner: ConvexPolygon, theta: float, target: float, margin: float):
    """Cut ``K`` by ``{<x, e_theta> <= c}`` removing about ``target`` area.

    ``c`` is bisected between ``h_K(theta)`` and ``h_{D'}(theta) + margin``.
    Returns ``None`` when even the deepest admissible cut removes nothing.
    """
    direction = np.array([math.cos(theta), math.sin(theta)])
    c_hi = float(geo.support(K, theta))
    c_lo = float(geo.support(d_inner, theta)) + margin
    if c_lo >= c_hi:
        return None
    A = geo.area(K)

    def removed(c):
        cut = geo.halfplane_cut(K, HalfPlane(direction, c))
        return (A - geo.area(cut) if cut is not None else A), cut

    deepest, body = removed(c_lo)
    if deepest <= target:
        return body if deepest > 0 else None
    lo, hi = c_lo, c_hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        got, cut = removed(mid)
        if got > target:
            lo = mid
        else:
            hi = mid
            body = cut
        if abs(got - target) <= 1e-3 * target:
            body = cut
            break
    return body if body is not None and body is not K else None


def generate_nested_pairs(
    d_inner: ConvexPolygon,
    d_outer: ConvexPolygon,
    count: int,
    seed: int = 0,
    decades: tuple[float, float] = (-4.0, -0.5),
) -> list[NestedPair]:
    """Random nested pairs ``D' ⊆ K' ⊆ K ⊆ D``.

    The outer body is ``(1-w) hull(D' ∪ X) + w D`` for random points ``X``
    in ``D`` and random ``w``, i.e. a convex combination of support
    functions. The inner body cuts it by 1 to 5 random half-planes that
    keep ``D'``, bisected so the total removed area is log-uniform over
    ``10**decades`` times the outer area.
    """
    if count < 0:
        raise ValidationError("count must be nonnegative")
    margin = 1e-3 * geo.diameter_inradius(d_outer)[0]
    normals, offsets = d_outer.halfplanes()
    if not np.all(d_inner.vertices @ normals.T < offsets - margin):
        raise ValidationError("D' must lie in the interior of D")
    rng = np.random.default_rng(seed)
    pairs: list[NestedPair] = []
    rejections = 0
    while len(pairs) < count:
        if rejections >= MAX_REJECTIONS:
            raise SamplerStalled(f"{rejections} rejections after {len(pairs)} pairs")
        X = _sample_in(d_outer, rng, int(rng.integers(1, 8)))
        hull = geo.ConvexPolygon(np.vstack([d_inner.vertices, X]))
        w = rng.random()
        outer = geo.minkowski_sum(hull.scaled(1.0 - w), d_outer.scaled(w)) if 0 < w < 1 else hull
        target = geo.area(outer) * 10.0 ** rng.uniform(*decades)
        n_cuts = int(rng.integers(1, 6))
        inner = outer
        for _ in range(n_cuts):
            theta = rng.uniform(0.0, 2.0 * math.pi)
            remaining = target - (geo.area(outer) - geo.area(inner))
            if remaining <= 0:
                break
            share = remaining if n_cuts == 1 else remaining * rng.uniform(0.3, 1.0)
            cut = _cut_to_area(inner, d_inner, theta, share, margin)
            if cut is not None:
                inner = cut
        if inner is outer or geo.area(outer) - geo.area(inner) <= 1e-12 * geo.area(outer):
            rejections += 1
            continue
        try:
            pairs.append(NestedPair(inner, outer, d_inner, d_outer))
        except ValidationError:
            rejections += 1
    return pairs


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class LipschitzReport:
    spec: dict
    count: int
    evaluated: int
    differences: np.ndarray
    volume_gaps: np.ndarray
    ratios: np.ndarray
    max_ratio: float
    small_decade_max: float
    rest_max: float
    bounded: bool
    sign_violations: int
    theoretical_bound: Optional[float]
    skipped: list

    def to_dict(self) -> dict:
        return {
            "kind": "lipschitz",
            "spec": self.spec,
            "count": self.count,
            "evaluated": self.evaluated,
            "differences": self.differences.tolist(),
            "volume_gaps": self.volume_gaps.tolist(),
            "ratios": self.ratios.tolist(),
            "max_ratio": self.max_ratio,
            "small_decade_max": self.small_decade_max,
            "rest_max": self.rest_max,
            "bounded": self.bounded,
            "sign_violations": self.sign_violations,
            "theoretical_bound": self.theoretical_bound,
            "skipped": self.skipped,
        }


def pair_mesh_size(pair: NestedPair) -> float:
    """Common mesh size for both bodies so their lattices coincide."""
    return fem.default_h(pair.outer)


def _evaluate_pair(spec: FunctionalSpec, pair: NestedPair):
    if spec.uses_fem and spec.h_mesh is None:
        spec = spec.with_mesh(pair_mesh_size(pair))
    return evaluate(spec, pair.outer), evaluate(spec, pair.inner)


def _small_decade_test(gaps: np.ndarray, ratios: np.ndarray) -> tuple[float, float, bool]:
    """Max ratio on the smallest decade of ``gaps`` against the max over the rest."""
    small = gaps <= gaps.min() * 10.0
    small_max = float(ratios[small].max())
    rest_max = float(ratios[~small].max()) if (~small).any() else small_max
    return small_max, rest_max, small_max <= 2.0 * rest_max


def _theoretical_bound(spec: FunctionalSpec, pairs: Sequence[NestedPair]) -> Optional[float]:
    if spec.kind == "volume":
        return 1.0
    if spec.kind == "torsion":
        # 2 max(sup u, sup |grad u|^2) with sup u <= diam^2/4 and sup |grad u| <= diam/2
        diam = geo.diameter_inradius(pairs[0].d_outer)[0]
        return 2.0 * max(diam**2 / 4.0, (diam / 2.0) ** 2)
    return None


def lipschitz_experiment(spec: FunctionalSpec, pairs: Sequence[NestedPair], workers: Optional[int] = None) -> LipschitzReport:
    """Ratios ``|R(K) - R(K')| / |K \\ K'|`` over ``pairs``.

    Both bodies of a pair are meshed at the same size (the outer body's
    default), which keeps discretization noise from masquerading as a
    Lipschitz blow-up. Pairs whose evaluation fails are skipped and logged;
    fewer than 90% evaluated raises :class:`EvaluationFailure`.
    """
    if not pairs:
        raise ValidationError("lipschitz_experiment needs at least one pair")

    def job(pair):
        try:
            return _evaluate_pair(spec, pair), None
        except ConvexOptError as exc:
            return None, f"{type(exc).__name__}: {exc}"

    results = parallel_map(job, pairs, workers)
    diffs, gaps, skipped = [], [], []
    for k, (res, err) in enumerate(results):
        if res is None:
            log.warning("pair %d skipped: %s", k, err)
            skipped.append({"index": k, "reason": err})
            continue
        if spec.kind == "neumann_eig":
            gap = geo.symdiff_area(pairs[k].outer, pairs[k].inner)
        else:
            gap = pairs[k].volume_gap
        diffs.append(res[0] - res[1])
        gaps.append(gap)
    if len(diffs) < MIN_EVALUATED * len(pairs):
        raise EvaluationFailure(f"only {len(diffs)} of {len(pairs)} pairs evaluated")
    d = np.array(diffs)
    g = np.array(gaps)
    ratios = np.abs(d) / g
    small_max, rest_max, bounded = _small_decade_test(g, ratios)
    sign_violations = 0
    if spec.kind == "torsion":
        tau_D = evaluate(FunctionalSpec("torsion"), pairs[0].d_outer)
        sign_violations = int(np.sum(d < -1e-6 * tau_D))
    return LipschitzReport(
        spec=spec.to_dict(),
        count=len(pairs),
        evaluated=len(diffs),
        differences=d,
        volume_gaps=g,
        ratios=ratios,
        max_ratio=float(ratios.max()),
        small_decade_max=small_max,
        rest_max=rest_max,
        bounded=bounded,
        sign_violations=sign_violations,
        theoretical_bound=_theoretical_bound(spec, pairs),
        skipped=skipped,
    )


@dataclass(frozen=True)
class EigTorsionReport:
    n: int
    constant: float
    lhs: np.ndarray
    rhs: np.ndarray
    slack: np.ndarray
    violations: int
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "kind": "eig_torsion",
            "n": self.n,
            "constant": self.constant,
            "lhs": self.lhs.tolist(),
            "rhs": self.rhs.tolist(),
            "slack": [s if math.isfinite(s) else None for s in self.slack.tolist()],
            "violations": self.violations,
            "tolerance": self.tolerance,
        }


def eig_torsion_pair(outer: ConvexPolygon, inner: ConvexPolygon, n: int, h_mesh: Optional[float] = None) -> tuple[float, float]:
    """``(LHS, RHS)`` of ``|lam_n(K) - lam_n(K')| <= C(n) lam_n(K)^2 lam_n(K') |tau(K) - tau(K')|``."""
    if h_mesh is None:
        h_mesh = fem.default_h(outer)
    spec = FunctionalSpec("composite", args=("tau", f"lambda{n}"), h_mesh=h_mesh)
    qo = quantities(spec, outer)
    qi = quantities(spec, inner)
    lo, li = qo[f"lambda{n}"], qi[f"lambda{n}"]
    lhs = abs(lo - li)
    rhs = eig_torsion_constant(n) * lo**2 * li * abs(qo["tau"] - qi["tau"])
    return lhs, rhs


def eig_torsion_bound_check(
    pairs: Sequence[NestedPair],
    n: int,
    h_mesh: Optional[float] = None,
    tolerance: float = 0.05,
    workers: Optional[int] = None,
) -> EigTorsionReport:
    """Per-pair slack ``RHS / LHS`` (``inf`` when both sides vanish); violations are slack < 1 - tolerance."""
    if not 1 <= n <= 5:
        raise ValidationError("eigenvalue index must lie in [1, 5]")

    def job(pair):
        return eig_torsion_pair(pair.outer, pair.inner, n, h_mesh)

    res = parallel_map(job, pairs, workers)
    lhs = np.array([r[0] for r in res], dtype=float)
    rhs = np.array([r[1] for r in res], dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        slack = np.where(lhs > 0, rhs / np.where(lhs > 0, lhs, 1.0), np.inf)
    return EigTorsionReport(n, eig_torsion_constant(n), lhs, rhs, slack, int(np.sum(slack < 1.0 - tolerance)), tolerance)


def torsion_bounds(K: ConvexPolygon, h_mesh: Optional[float] = None) -> dict:
    """``sup u`` and ``sup |grad u|`` of the torsion function against ``diam^2/4`` and ``diam/2``."""
    sol = fem.torsion(K, h_mesh)
    diam = geo.diameter_inradius(K)[0]
    return {
        "max_u": sol.max_value(),
        "u_bound": diam**2 / 4.0,
        "max_grad": sol.max_gradient(),
        "grad_bound": diam / 2.0,
    }
