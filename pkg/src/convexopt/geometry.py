"""Planar convex geometry kernel.

Convex bodies are handled in three representations:

* :class:`ConvexPolygon` -- CCW vertex list, the workhorse value type;
* :class:`SupportBody` -- support values on a uniform angular grid;
* :class:`RadialBody` -- radial function about an interior origin.

All values are immutable and every operation is a pure function. Outputs
are passed through a monotone-chain hull so that floating-point turn tests
never leave micro-reflex vertices behind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import InvalidBody, OriginOutside, ValidationError

TOL_REL = 1e-9
TWO_PI = 2.0 * math.pi


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidBody(f"expected an (n, 2) array of points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise InvalidBody("non-finite vertex coordinates")
    return pts


def _length_scale(pts: np.ndarray) -> float:
    ext = pts.max(axis=0) - pts.min(axis=0)
    return float(max(ext.max(), 1e-300))


def convex_hull(points, tol: Optional[float] = None) -> np.ndarray:
    """Monotone-chain hull, CCW, starting at the lexicographically smallest point.

    Points within ``tol`` of the line through their neighbours are dropped,
    so the output has no collinear or near-duplicate vertices.
    """
    pts = _as_points(points)
    if tol is None:
        tol = TOL_REL * _length_scale(pts)
    if _strictly_convex_ccw(pts, tol):
        return _canonical(pts)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def half(seq):
        chain: list = []
        for p in seq:
            while len(chain) >= 2:
                o, a = chain[-2], chain[-1]
                ax, ay = a[0] - o[0], a[1] - o[1]
                bx, by = p[0] - o[0], p[1] - o[1]
                cross = ax * by - ay * bx
                if cross <= tol * math.hypot(bx, by):
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain

    seq = [tuple(p) for p in pts]
    lower = half(seq)
    upper = half(reversed(seq))
    hull = lower[:-1] + upper[:-1]
    return np.array(hull, dtype=float).reshape(-1, 2)


def _strictly_convex_ccw(pts: np.ndarray, tol: float) -> bool:
    """Vectorized check that ``pts`` is already a hull the monotone chain would keep."""
    if len(pts) < 3:
        return False
    e = np.roll(pts, -1, axis=0) - pts
    f = np.roll(e, -1, axis=0)
    if np.hypot(e[:, 0], e[:, 1]).min() <= tol:
        return False
    cross = e[:, 0] * f[:, 1] - e[:, 1] * f[:, 0]
    g = e + f
    if np.any(cross <= tol * np.hypot(g[:, 0], g[:, 1])):
        return False
    turning = np.arctan2(cross, (e * f).sum(axis=1)).sum()
    return abs(turning - TWO_PI) < 1e-6


def _canonical(vertices: np.ndarray) -> np.ndarray:
    k = np.lexsort((vertices[:, 1], vertices[:, 0]))[0]
    return np.roll(vertices, -k, axis=0)


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Convex polygon with CCW vertices in canonical rotation.

    Construction always normalizes: the stored vertex list is the convex
    hull of the input, with collinear and duplicate points removed, starting
    at the lexicographically smallest vertex. Use :func:`check_convex` first
    if non-convex input should be rejected rather than repaired.
    """

    vertices: np.ndarray

    def __post_init__(self):
        pts = _as_points(self.vertices)
        hull = convex_hull(pts)
        if len(hull) < 3:
            raise InvalidBody("polygon has fewer than 3 non-collinear vertices")
        hull = _canonical(hull)
        scale = _length_scale(hull)
        if _shoelace(hull) <= TOL_REL * scale * scale:
            raise InvalidBody("polygon has zero area")
        hull.setflags(write=False)
        object.__setattr__(self, "vertices", hull)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def tol(self) -> float:
        """Length tolerance for orientation and degeneracy tests."""
        return TOL_REL * _length_scale(self.vertices)

    def edges(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    def halfplanes(self) -> tuple[np.ndarray, np.ndarray]:
        """Outward unit normals and offsets with ``K = {x : n.x <= b}``."""
        e = self.edges()
        lengths = np.hypot(e[:, 0], e[:, 1])
        normals = np.column_stack([e[:, 1], -e[:, 0]]) / lengths[:, None]
        offsets = np.einsum("ij,ij->i", normals, self.vertices)
        return normals, offsets

    def normal_angles(self) -> np.ndarray:
        """Outward normal angle of each edge, unwrapped to increase from the first."""
        e = self.edges()
        phi = np.arctan2(-e[:, 0], e[:, 1])
        return phi[0] + np.mod(phi - phi[0], TWO_PI)

    def translated(self, v) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices + np.asarray(v, dtype=float))

    def scaled(self, t: float, center=(0.0, 0.0)) -> "ConvexPolygon":
        c = np.asarray(center, dtype=float)
        return ConvexPolygon(c + t * (self.vertices - c))

    def __eq__(self, other):
        if not isinstance(other, ConvexPolygon):
            return NotImplemented
        if self.n != other.n:
            return False
        return bool(np.allclose(self.vertices, other.vertices, rtol=0.0, atol=max(self.tol, other.tol)))

    def __hash__(self):
        return hash(self.vertices.tobytes())


@dataclass(frozen=True)
class HalfPlane:
    """The set ``{x : <x, normal> <= offset}``; the normal is normalized on construction."""

    normal: tuple
    offset: float

    def __post_init__(self):
        nx, ny = (float(c) for c in self.normal)
        length = math.hypot(nx, ny)
        if length == 0.0 or not math.isfinite(length):
            raise ValidationError("half-plane normal must be a nonzero finite vector")
        object.__setattr__(self, "normal", (nx / length, ny / length))
        object.__setattr__(self, "offset", float(self.offset) / length)


@dataclass(frozen=True, eq=False)
class SupportBody:
    """Support values ``h[i] = h_K(2*pi*i/m)`` on a uniform grid."""

    h: np.ndarray
    m: int = field(init=False)

    def __post_init__(self):
        h = np.array(self.h, dtype=float).ravel()
        if len(h) < 16:
            raise ValidationError("support grid needs m >= 16")
        if not np.all(np.isfinite(h)):
            raise ValidationError("non-finite support values")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "m", len(h))

    @property
    def step(self) -> float:
        return TWO_PI / self.m

    def angles(self) -> np.ndarray:
        return self.step * np.arange(self.m)

    def facet_lengths(self) -> np.ndarray:
        """Length of the facet with normal angle ``theta_i`` (negative when inactive)."""
        d = self.step
        h = self.h
        return (np.roll(h, 1) + np.roll(h, -1) - 2.0 * math.cos(d) * h) / math.sin(d)

    def convexity_defect(self) -> float:
        """Largest violation of ``h[i-1] + h[i+1] >= 2 cos(step) h[i]``."""
        h = self.h
        slack = np.roll(h, 1) + np.roll(h, -1) - 2.0 * math.cos(self.step) * h
        return float(max(0.0, -slack.min()))

    def is_convex(self, tol: Optional[float] = None) -> bool:
        if tol is None:
            tol = TOL_REL * max(1.0, float(np.abs(self.h).max()))
        return self.convexity_defect() <= tol

    def radii_of_curvature(self) -> np.ndarray:
        """Discrete ``h'' + h`` from the centred second difference."""
        h = self.h
        return (np.roll(h, -1) - 2.0 * h + np.roll(h, 1)) / self.step**2 + h


@dataclass(frozen=True, eq=False)
class RadialBody:
    origin: tuple
    rho: np.ndarray
    m: int = field(init=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float).ravel()
        if len(rho) < 3:
            raise ValidationError("radial grid needs at least 3 samples")
        if not np.all(np.isfinite(rho)) or rho.min() <= 0.0:
            raise ValidationError("radial values must be positive and finite")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "m", len(rho))
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))

    @property
    def step(self) -> float:
        return TWO_PI / self.m

    def angles(self) -> np.ndarray:
        return self.step * np.arange(self.m)

    def tangential_gradient(self) -> np.ndarray:
        """Forward-difference derivative of rho with respect to the angle."""
        return (np.roll(self.rho, -1) - self.rho) / self.step

    def gradient_bound(self) -> float:
        """``(sup rho)^2 / inf rho``, the a-priori bound on ``|d rho / d theta|``."""
        return float(self.rho.max() ** 2 / self.rho.min())


# ---------------------------------------------------------------------------
# basic measures


def area(K: ConvexPolygon) -> float:
    return _shoelace(K.vertices)


def perimeter(K: ConvexPolygon) -> float:
    e = K.edges()
    return float(np.hypot(e[:, 0], e[:, 1]).sum())


def centroid(K: ConvexPolygon) -> np.ndarray:
    v = K.vertices
    w = np.roll(v, -1, axis=0)
    cross = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
    a = cross.sum() / 2.0
    return ((v + w) * cross[:, None]).sum(axis=0) / (6.0 * a)


def support_indices(K: ConvexPolygon, theta) -> np.ndarray:
    """Index of a vertex attaining ``max <v, (cos t, sin t)>`` for each angle."""
    phi = K.normal_angles()
    t = phi[0] + np.mod(np.asarray(theta, dtype=float) - phi[0], TWO_PI)
    k = np.searchsorted(phi, t, side="right") - 1
    return (k + 1) % K.n


def support(K: ConvexPolygon, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    v = K.vertices[support_indices(K, theta)]
    return v[..., 0] * np.cos(theta) + v[..., 1] * np.sin(theta)


def contains(outer: ConvexPolygon, inner: ConvexPolygon, tol: Optional[float] = None) -> bool:
    """True when ``inner`` lies in ``outer`` (within ``tol``).

    Compares ``h_inner`` with the offsets of the edge half-planes of
    ``outer``, which is exact for convex polygons and costs
    ``O((n + m) log m)``.
    """
    if tol is None:
        tol = 10.0 * max(outer.tol, inner.tol)
    normals, offsets = outer.halfplanes()
    theta = np.arctan2(normals[:, 1], normals[:, 0])
    return bool(np.all(support(inner, theta) <= offsets + tol))


_CHUNK = 1 << 22


def _halfplane_slack(K: ConvexPolygon, pts: np.ndarray) -> np.ndarray:
    """``min_e (b_e - n_e . p)`` per point, in chunks of bounded memory."""
    normals, offsets = K.halfplanes()
    out = np.empty(len(pts))
    step = max(1, _CHUNK // max(1, len(offsets)))
    for a in range(0, len(pts), step):
        out[a : a + step] = (offsets - pts[a : a + step] @ normals.T).min(axis=1)
    return out


def contains_points(K: ConvexPolygon, points, tol: float = 0.0) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return _halfplane_slack(K, pts) >= -tol


def boundary_distance(K: ConvexPolygon, points) -> np.ndarray:
    """Signed distance to the boundary, positive inside."""
    return _halfplane_slack(K, np.atleast_2d(np.asarray(points, dtype=float)))


# ---------------------------------------------------------------------------
# Minkowski calculus


def minkowski_sum(A: ConvexPolygon, B: ConvexPolygon) -> ConvexPolygon:
    """Minkowski sum by merging the edge sequences of both polygons by angle."""

    def bottom_start(K):
        v = K.vertices
        k = np.lexsort((v[:, 0], v[:, 1]))[0]
        v = np.roll(v, -k, axis=0)
        e = np.roll(v, -1, axis=0) - v
        return v[0], e

    a0, ea = bottom_start(A)
    b0, eb = bottom_start(B)
    edges = np.vstack([ea, eb])
    ang = np.mod(np.arctan2(edges[:, 1], edges[:, 0]), TWO_PI)
    order = np.argsort(ang, kind="stable")
    pts = (a0 + b0) + np.vstack([np.zeros(2), np.cumsum(edges[order], axis=0)[:-1]])
    return ConvexPolygon(pts)


def mixed_area(A: ConvexPolygon, B: ConvexPolygon) -> float:
    """Mixed area ``V(A, B)``, so that ``|A + B| = |A| + 2 V(A, B) + |B|``.

    Evaluated as ``(1/2) sum_e h_A(n_e) |e|`` over the edges of ``B``, which
    avoids the cancellation in ``(|A+B| - |A| - |B|) / 2``.
    """
    e = B.edges()
    lengths = np.hypot(e[:, 0], e[:, 1])
    theta = np.arctan2(-e[:, 0], e[:, 1])
    return 0.5 * float(np.dot(support(A, theta), lengths))


# ---------------------------------------------------------------------------
# clipping


def _clip(vertices: np.ndarray, normal, offset: float, tol: float) -> np.ndarray:
    s = vertices @ np.asarray(normal) - offset
    inside = s <= tol
    if inside.all():
        return vertices
    if not inside.any():
        return np.empty((0, 2))
    nxt = np.roll(np.arange(len(vertices)), -1)
    idx = np.nonzero(inside != inside[nxt])[0]
    t = s[idx] / (s[idx] - s[nxt[idx]])
    cut = vertices[idx] + t[:, None] * (vertices[nxt[idx]] - vertices[idx])
    # kept vertex i sits at slot 2i, the crossing on edge (i, i+1) at 2i+1
    keys = np.concatenate([2 * np.nonzero(inside)[0], 2 * idx + 1])
    pts = np.concatenate([vertices[inside], cut])
    return pts[np.argsort(keys, kind="stable")]


def _finish(pts: np.ndarray, scale: float) -> Optional[ConvexPolygon]:
    if len(pts) < 3:
        return None
    try:
        K = ConvexPolygon(pts)
    except InvalidBody:
        return None
    if area(K) < TOL_REL * scale * scale:
        return None
    return K


def halfplane_cut(K: ConvexPolygon, H: HalfPlane) -> Optional[ConvexPolygon]:
    """``K`` intersected with ``H``; ``None`` when the intersection is empty.

    If ``K`` already lies in ``H`` the same object is returned unchanged.
    """
    pts = _clip(K.vertices, H.normal, H.offset, K.tol)
    if pts is K.vertices:
        return K
    return _finish(pts, _length_scale(K.vertices))


def intersection(A: ConvexPolygon, B: ConvexPolygon) -> Optional[ConvexPolygon]:
    """``A`` clipped by every edge half-plane of ``B``; ``A`` itself if ``A`` is inside ``B``."""
    normals, offsets = B.halfplanes()
    tol = max(A.tol, B.tol)
    pts = A.vertices
    for nrm, off in zip(normals, offsets):
        pts = _clip(pts, nrm, off, tol)
        if len(pts) == 0:
            return None
    if pts is A.vertices:
        return A
    return _finish(pts, _length_scale(A.vertices))


def symdiff_area(A: ConvexPolygon, B: ConvexPolygon) -> float:
    inter = intersection(A, B)
    common = 0.0 if inter is None else area(inter)
    return max(0.0, area(A) + area(B) - 2.0 * common)


# ---------------------------------------------------------------------------
# distances


def hausdorff_distance(A: ConvexPolygon, B: ConvexPolygon) -> float:
    """Exact ``sup_theta |h_A - h_B|``.

    Between consecutive normal angles of either polygon both support points
    are fixed, so the gap is ``<a - b, u(theta)>`` and its extremum on each
    arc is at an endpoint or at the direction of ``+-(a - b)``.
    """
    breaks = np.sort(np.mod(np.concatenate([A.normal_angles(), B.normal_angles()]), TWO_PI))
    breaks = np.concatenate([breaks, [breaks[0] + TWO_PI]])
    lo, hi = breaks[:-1], breaks[1:]
    mid = 0.5 * (lo + hi)
    w = A.vertices[support_indices(A, mid)] - B.vertices[support_indices(B, mid)]
    cands = [lo, hi]
    wa = np.arctan2(w[:, 1], w[:, 0])
    for shift in (0.0, math.pi):
        t = lo + np.mod(wa + shift - lo, TWO_PI)
        cands.append(np.where(t <= hi, t, lo))
    best = 0.0
    for t in cands:
        gap = np.abs(w[:, 0] * np.cos(t) + w[:, 1] * np.sin(t))
        best = max(best, float(gap.max()))
    return best


def diameter_inradius(K: ConvexPolygon) -> tuple[float, float, np.ndarray]:
    """Diameter, inradius and an incenter.

    The diameter is the maximal width, taken over antipodal support pairs;
    the inradius solves the Chebyshev-centre linear program.
    """
    phi = np.mod(K.normal_angles(), TWO_PI)
    breaks = np.sort(np.concatenate([phi, np.mod(phi + math.pi, TWO_PI)]))
    breaks = np.concatenate([breaks, [breaks[0] + TWO_PI]])
    mid = 0.5 * (breaks[:-1] + breaks[1:])
    a = K.vertices[support_indices(K, mid)]
    b = K.vertices[support_indices(K, mid + math.pi)]
    diam = float(np.hypot(*(a - b).T).max())

    normals, offsets = K.halfplanes()
    res = linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=np.column_stack([normals, np.ones(len(offsets))]),
        b_ub=offsets,
        bounds=[(None, None), (None, None), (0.0, None)],
        method="highs",
    )
    if res.status != 0:
        raise InvalidBody(f"inradius linear program failed: {res.message}")
    center = np.array(res.x[:2])
    inr = float(boundary_distance(K, center)[0])
    return diam, inr, center


def inradius(K: ConvexPolygon) -> float:
    return diameter_inradius(K)[1]


# ---------------------------------------------------------------------------
# representation changes


def to_support(K: ConvexPolygon, m: int) -> SupportBody:
    theta = TWO_PI * np.arange(m) / m
    return SupportBody(support(K, theta))


def _support_vertices(h: np.ndarray) -> np.ndarray:
    m = len(h)
    theta = TWO_PI * np.arange(m) / m
    d = TWO_PI / m
    h1 = np.roll(h, -1)
    # intersection of lines i and i+1
    x = (h * np.sin(theta + d) - h1 * np.sin(theta)) / math.sin(d)
    y = (h1 * np.cos(theta) - h * np.cos(theta + d)) / math.sin(d)
    return np.column_stack([x, y])


def from_support(S: SupportBody) -> ConvexPolygon:
    """Polygon ``{x : <x, u_i> <= h_i for all i}``.

    When the discrete convexity inequalities hold, the vertices are the
    intersections of consecutive support lines. Otherwise some constraints
    are redundant and the half-planes are intersected one by one.
    """
    h = S.h
    scale = max(1.0, float(np.abs(h).max()))
    if S.convexity_defect() <= TOL_REL * scale:
        return ConvexPolygon(_support_vertices(h))
    theta = S.angles()
    big = 4.0 * (float(np.abs(h).max()) + 1.0)
    pts = np.array([[-big, -big], [big, -big], [big, big], [-big, big]])
    for t, hi in zip(theta, h):
        pts = _clip(pts, (math.cos(t), math.sin(t)), hi, TOL_REL * scale)
        if len(pts) == 0:
            raise InvalidBody("support values describe an empty set")
    return ConvexPolygon(pts)


def radial_values(K: ConvexPolygon, origin, theta) -> np.ndarray:
    """Distance from ``origin`` to the boundary along each direction."""
    normals, offsets = K.halfplanes()
    o = np.asarray(origin, dtype=float)
    gap = offsets - normals @ o
    if gap.min() <= K.tol:
        raise OriginOutside(f"origin {tuple(o)} is not interior to the body")
    theta = np.asarray(theta, dtype=float)
    u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    gauge = ((u @ normals.T) / gap).max(axis=-1)
    return 1.0 / gauge


def to_radial(K: ConvexPolygon, origin, m: int) -> RadialBody:
    theta = TWO_PI * np.arange(m) / m
    return RadialBody(tuple(origin), radial_values(K, origin, theta))


def from_radial(R: RadialBody) -> ConvexPolygon:
    theta = R.angles()
    o = np.asarray(R.origin)
    return ConvexPolygon(o + R.rho[:, None] * np.column_stack([np.cos(theta), np.sin(theta)]))


# ---------------------------------------------------------------------------
# constructors


def polygon(points) -> ConvexPolygon:
    return ConvexPolygon(np.asarray(points, dtype=float))


def rectangle(x0: float, y0: float, x1: float, y1: float) -> ConvexPolygon:
    return ConvexPolygon(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float))


def unit_square() -> ConvexPolygon:
    return rectangle(0.0, 0.0, 1.0, 1.0)


def regular_polygon(m: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> ConvexPolygon:
    t = phase + TWO_PI * np.arange(m) / m
    c = np.asarray(center, dtype=float)
    return ConvexPolygon(c + radius * np.column_stack([np.cos(t), np.sin(t)]))


def disk(radius: float = 1.0, m: int = 256, center=(0.0, 0.0)) -> ConvexPolygon:
    """Regular ``m``-gon inscribed in the circle of the given radius."""
    return regular_polygon(m, radius, center)


def stadium(distance: float, radius: float = 1.0, m: int = 1024) -> ConvexPolygon:
    """Convex hull of two disks of ``radius`` centred at ``(+-distance/2, 0)``.

    Each semicircle carries ``m // 2`` arc segments, with vertices at the
    four tangency points so the flat sides are exact.
    """
    k = max(2, m // 2)
    t = np.linspace(-math.pi / 2, math.pi / 2, k + 1)
    right = np.column_stack([distance / 2 + radius * np.cos(t), radius * np.sin(t)])
    left = np.column_stack([-distance / 2 - radius * np.cos(t), -radius * np.sin(t)])
    return ConvexPolygon(np.vstack([right, left]))


def ellipse(a: float, b: float, m: int = 256, center=(0.0, 0.0)) -> ConvexPolygon:
    t = TWO_PI * np.arange(m) / m
    return ConvexPolygon(np.asarray(center) + np.column_stack([a * np.cos(t), b * np.sin(t)]))


def random_convex_polygon(rng: np.random.Generator, n_points: int = 12, radius: float = 1.0) -> ConvexPolygon:
    """Hull of ``n_points`` uniform samples from a random ellipse."""
    while True:
        r = radius * np.sqrt(rng.random(n_points))
        t = TWO_PI * rng.random(n_points)
        pts = np.column_stack([r * np.cos(t), r * np.sin(t)])
        aspect = rng.uniform(0.3, 1.0)
        rot = rng.uniform(0, math.pi)
        c, s = math.cos(rot), math.sin(rot)
        pts = pts * np.array([1.0, aspect]) @ np.array([[c, s], [-s, c]])
        try:
            return ConvexPolygon(pts)
        except InvalidBody:
            continue


def check_convex(points: Sequence, tol: Optional[float] = None) -> None:
    """Raise :class:`InvalidBody` unless ``points`` form a convex CCW polygon."""
    pts = _as_points(points)
    if len(pts) < 3:
        raise InvalidBody("a polygon needs at least 3 vertices")
    if tol is None:
        tol = TOL_REL * _length_scale(pts)
    e = np.roll(pts, -1, axis=0) - pts
    lengths = np.hypot(e[:, 0], e[:, 1])
    if lengths.min() < tol:
        raise InvalidBody("consecutive vertices coincide")
    cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
    if cross.min() < -tol * lengths.max():
        raise InvalidBody("vertices are not in convex counter-clockwise position")
    if _shoelace(pts) <= 0:
        raise InvalidBody("vertices are not counter-clockwise")
    turn = np.arctan2(cross, np.einsum("ij,ij->i", e, np.roll(e, -1, axis=0))).sum()
    if abs(turn - TWO_PI) > 1e-6:
        raise InvalidBody("vertex chain winds more than once")
