"""Cut probe: local graph charts of the boundary and the ``M_r`` curve.

Near a boundary point ``x0`` with inward unit normal ``xi`` the body is the
epigraph ``{t >= u(x)}`` of a convex function over the tangent line. With
``l`` an affine minorant of ``u`` touching at ``0``,

    M_r = sup_{|x| <= r} (u - l)(x),

and the body is cut by the line through ``(-q r, l(-q r))`` and
``(q r, u(q r))`` where ``q`` is the side of the maximum. ``M_r = O(r^2)``
at every point is the ``C^{1,1}`` signature; a corner gives ``M_r ~ r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import geometry as geo
from .errors import DegenerateChart
from .geometry import ConvexPolygon, HalfPlane

C11_CONSISTENT = "C11_consistent"
CORNER_LIKE = "corner_like"
INCONCLUSIVE = "inconclusive"

SLOPE_SMOOTH = 1.9
SLOPE_CORNER = 1.2
GRID_POINTS = 401


@dataclass(frozen=True, eq=False)
class GraphChart:
    """Boundary of ``K`` near ``base`` as a graph over the tangent line.

    World coordinates of chart point ``(x, t)`` are
    ``base + x * tangent + t * normal``; ``u`` is sampled on ``grid``.
    """

    K: ConvexPolygon
    base: np.ndarray
    normal: np.ndarray
    tangent: np.ndarray
    beta: float
    clearance: float
    slope: float
    grid: np.ndarray
    u: np.ndarray
    opening_angle: float
    boundary_param: float

    def to_world(self, x, t) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return self.base + x[..., None] * self.tangent + t[..., None] * self.normal

    def graph(self, x) -> np.ndarray:
        """Exact ``u`` at arbitrary abscissae (lower end of the vertical chord)."""
        return _vertical_chords(self.K, self.base, self.tangent, self.normal, np.asarray(x, dtype=float))[0]

    def affine(self, x) -> np.ndarray:
        return self.slope * np.asarray(x, dtype=float)


def _vertical_chords(K: ConvexPolygon, base, tangent, normal, x: np.ndarray):
    """Lower and upper ends ``(u, U)`` of ``K`` on the lines ``base + x*tangent + R*normal``."""
    normals, offsets = K.halfplanes()
    nx = normals @ tangent
    nt = normals @ normal
    rhs = offsets - normals @ base
    lo = np.full(x.shape, -np.inf)
    hi = np.full(x.shape, np.inf)
    bound = (rhs[:, None] - nx[:, None] * x[None, :]) / np.where(nt == 0.0, 1.0, nt)[:, None]
    down = nt < 0
    up = nt > 0
    if down.any():
        lo = bound[down].max(axis=0)
    if up.any():
        hi = bound[up].min(axis=0)
    return lo, hi


def _locate(K: ConvexPolygon, s: float) -> tuple[np.ndarray, int, float]:
    """Point at normalized arc length ``s`` from the first vertex, its edge and edge fraction."""
    e = K.edges()
    L = np.hypot(e[:, 0], e[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(L)])
    target = (s % 1.0) * cum[-1]
    i = int(np.clip(np.searchsorted(cum, target, side="right") - 1, 0, K.n - 1))
    frac = (target - cum[i]) / L[i]
    return K.vertices[i] + frac * e[i], i, float(frac)


def build_chart(K: ConvexPolygon, boundary_param: float, grid_points: int = GRID_POINTS) -> GraphChart:
    """Graph chart at the boundary point with normalized arc length ``boundary_param``.

    The inward normal is the edge normal, or at a vertex (within the
    geometric tolerance) the bisector of the two adjacent edge normals. The
    window half-width ``beta`` is half the shorter side of the projection of
    ``K`` onto the tangent line, and the clearance is half the smallest
    vertical chord over the window.
    """
    base, i, frac = _locate(K, boundary_param)
    normals, _ = K.halfplanes()
    e = K.edges()
    L = float(np.hypot(*e[i]))
    tol = K.tol
    at_start = frac * L <= tol
    at_end = (1.0 - frac) * L <= tol
    if at_start or at_end:
        j = i if at_start else (i + 1) % K.n
        base = K.vertices[j]
        nu = normals[j - 1] + normals[j]
        cos_half = float(np.clip(normals[j - 1] @ normals[j], -1.0, 1.0))
        opening = math.pi - math.acos(cos_half)
    else:
        nu = normals[i]
        opening = math.pi
    normal = -nu / np.hypot(*nu)
    tangent = np.array([normal[1], -normal[0]])

    proj = (K.vertices - base) @ tangent
    beta = 0.5 * min(-proj.min(), proj.max())
    diam = geo.diameter_inradius(K)[0]
    step = 2.0 * beta / (grid_points - 1)
    if beta < 10.0 * max(step, 1e-6 * diam):
        raise DegenerateChart(f"chart window {beta:g} is too narrow")
    grid = np.linspace(-beta, beta, grid_points)
    u, U = _vertical_chords(K, base, tangent, normal, grid)
    shift = float(_vertical_chords(K, base, tangent, normal, np.zeros(1))[0][0])
    u = u - shift
    U = U - shift
    base = base + shift * normal
    clearance = 0.5 * float((U - u).min())
    if not clearance > 0:
        raise DegenerateChart("no vertical clearance over the chart window")

    eps = 1e-7 * diam
    left, right = _vertical_chords(K, base, tangent, normal, np.array([-eps, eps]))[0]
    slope = 0.5 * ((right - 0.0) / eps + (0.0 - left) / eps)
    return GraphChart(K, base, normal, tangent, float(beta), clearance, float(slope), grid, u, opening, float(boundary_param))


@dataclass(frozen=True, eq=False)
class Cut:
    r: float
    M: float
    q: int
    body: ConvexPolygon
    halfplane: Optional[HalfPlane]
    segment: np.ndarray  # world endpoints of the cutting line over [-r, r]


def cut_family(K: ConvexPolygon, chart: GraphChart, r: float) -> Cut:
    """Competitor ``K_r = K cap {t >= sigma_r}`` and its gap ``M_r``.

    ``sigma_r(x) = l(x) + (M_r / 2r)(q x + r)``. A zero gap leaves ``K``
    unchanged.
    """
    if not 0.0 < r < 0.5 * chart.beta + 1e-15:
        raise DegenerateChart(f"radius {r:g} outside (0, beta/2) with beta={chart.beta:g}")
    ends = np.array([-r, r])
    gap = chart.graph(ends) - chart.affine(ends)
    k = int(np.argmax(gap))
    q = 1 if k == 1 else -1
    M = float(max(gap.max(), 0.0))
    if M <= 10.0 * K.tol:
        seg = chart.to_world(ends, chart.affine(ends))
        return Cut(r, 0.0, q, K, None, seg)
    s = chart.slope + 0.5 * M * q / r
    # t >= s*x + M/2  <=>  s*x - t <= -M/2
    vec = s * chart.tangent - chart.normal
    H = HalfPlane(vec, float(-0.5 * M + vec @ chart.base))
    body = geo.halfplane_cut(K, H)
    if body is None:
        raise DegenerateChart(f"cut at r={r:g} exhausts the body")
    sigma = chart.affine(ends) + 0.5 * M / r * (q * ends + r)
    return Cut(r, M, q, body, H, chart.to_world(ends, sigma))


@dataclass(frozen=True, eq=False)
class CutProbeReport:
    boundary_param: float
    base_point: np.ndarray
    normal: np.ndarray
    beta: float
    clearance: float
    opening_angle: float
    r: np.ndarray
    M: np.ndarray
    perimeter_drop: np.ndarray
    volume_drop: np.ndarray
    quasi_min_ratio: np.ndarray
    slope: float
    classification: str
    all_flat: bool
    fit_points: int
    cut_segments: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": "cut_probe",
            "boundary_param": self.boundary_param,
            "base_point": self.base_point.tolist(),
            "normal": self.normal.tolist(),
            "beta": self.beta,
            "clearance": self.clearance,
            "opening_angle": self.opening_angle,
            "r": self.r.tolist(),
            "M": self.M.tolist(),
            "perimeter_drop": self.perimeter_drop.tolist(),
            "volume_drop": self.volume_drop.tolist(),
            "quasi_min_ratio": self.quasi_min_ratio.tolist(),
            "slope": self.slope,
            "classification": self.classification,
            "all_flat": self.all_flat,
            "fit_points": self.fit_points,
            "cut_segments": [s.tolist() for s in self.cut_segments],
        }


def default_r_grid(chart: GraphChart, count: int = 12) -> np.ndarray:
    return np.geomspace(chart.beta / 50.0, chart.beta / 2.5, count)


def classify(slope: float) -> str:
    if slope >= SLOPE_SMOOTH:
        return C11_CONSISTENT
    if slope <= SLOPE_CORNER:
        return CORNER_LIKE
    return INCONCLUSIVE


def probe(K: ConvexPolygon, boundary_param: float, r_grid: Optional[Sequence[float]] = None) -> CutProbeReport:
    """Sweep the cut family over ``r_grid`` and fit ``log M_r`` against ``log r``.

    A boundary that is flat over the whole grid (``M_r`` at tolerance level)
    is reported with ``all_flat=True`` and classified ``C11_consistent``.
    The classification only speaks about the probed scales: a polygon has
    corners below any grid resolution.
    """
    chart = build_chart(K, boundary_param)
    r = default_r_grid(chart) if r_grid is None else np.sort(np.asarray(r_grid, dtype=float))
    P, A = geo.perimeter(K), geo.area(K)
    M = np.zeros(len(r))
    dP = np.zeros(len(r))
    dV = np.zeros(len(r))
    segments = []
    for k, rk in enumerate(r):
        cut = cut_family(K, chart, float(rk))
        M[k] = cut.M
        if cut.body is not K:
            dP[k] = P - geo.perimeter(cut.body)
            dV[k] = A - geo.area(cut.body)
        segments.append(cut.segment)
    ratio = np.where(dV > 0, dP / np.where(dV > 0, dV, 1.0), np.nan)
    floor = 10.0 * K.tol
    use = M > floor
    all_flat = not use.any()
    if use.sum() >= 2:
        slope = float(np.polyfit(np.log(r[use]), np.log(M[use]), 1)[0])
        label = classify(slope)
    else:
        slope = float("nan")
        label = C11_CONSISTENT if all_flat else INCONCLUSIVE
    picks = sorted({0, len(r) // 2, len(r) - 1})
    return CutProbeReport(
        boundary_param=float(boundary_param),
        base_point=chart.base,
        normal=chart.normal,
        beta=chart.beta,
        clearance=chart.clearance,
        opening_angle=chart.opening_angle,
        r=r,
        M=M,
        perimeter_drop=dP,
        volume_drop=dV,
        quasi_min_ratio=ratio,
        slope=slope,
        classification=label,
        all_flat=all_flat,
        fit_points=int(use.sum()),
        cut_segments=[segments[i] for i in picks],
    )
