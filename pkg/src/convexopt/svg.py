"""Deterministic SVG figures for bodies and reports.

Every figure uses a fixed 400x400 viewBox, coordinates printed with four
decimals, and elements emitted in a fixed order.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

import numpy as np

SIZE = 400.0
PAD = 20.0


def _fmt(x: float) -> str:
    s = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Frame:
    """Affine map from data coordinates to the (y-down) SVG canvas, aspect preserved."""

    def __init__(self, points: np.ndarray, equal: bool = True):
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        span = np.maximum(hi - lo, 1e-12)
        if equal:
            s = (SIZE - 2 * PAD) / span.max()
            self.sx = self.sy = s
            self.ox = PAD + 0.5 * (SIZE - 2 * PAD - s * span[0]) - s * lo[0]
            self.oy = PAD + 0.5 * (SIZE - 2 * PAD - s * span[1]) - s * lo[1]
        else:
            self.sx = (SIZE - 2 * PAD) / span[0]
            self.sy = (SIZE - 2 * PAD) / span[1]
            self.ox = PAD - self.sx * lo[0]
            self.oy = PAD - self.sy * lo[1]

    def __call__(self, p) -> tuple[float, float]:
        return self.ox + self.sx * p[0], SIZE - (self.oy + self.sy * p[1])


def _document(elements: Iterable[str], title: str) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {int(SIZE)} {int(SIZE)}" '
        f'width="{int(SIZE)}" height="{int(SIZE)}">'
    )
    body = [head, f"<title>{title}</title>", '<rect width="100%" height="100%" fill="white"/>']
    body.extend(elements)
    body.append("</svg>")
    return "\n".join(body) + "\n"


def _path(points: Sequence, frame: _Frame, closed: bool, style: str) -> str:
    coords = [frame(p) for p in points]
    d = "M" + " L".join(f"{_fmt(x)} {_fmt(y)}" for x, y in coords)
    if closed:
        d += " Z"
    return f'<path d="{d}" {style}/>'


def polygon_svg(vertices: np.ndarray, title: str = "body") -> str:
    v = np.asarray(vertices, dtype=float)
    frame = _Frame(v)
    return _document([_path(v, frame, True, 'fill="#dde8f4" stroke="#1f4e79" stroke-width="1.5"')], title)


def _ramp(t: float) -> str:
    """Blue-to-red ramp for ``t`` in ``[0, 1]``."""
    t = min(1.0, max(0.0, t))
    r = int(round(40 + 200 * t))
    b = int(round(220 - 180 * t))
    return f"#{r:02x}50{b:02x}"


def curvature_svg(vertices: np.ndarray, radii: np.ndarray, title: str = "optimized body") -> str:
    """Body outline colored edge by edge with the curvature ``1/(h'' + h)`` of its support line."""
    v = np.asarray(vertices, dtype=float)
    frame = _Frame(v)
    kappa = 1.0 / np.maximum(np.asarray(radii, dtype=float), 1e-12)
    lo, hi = float(kappa.min()), float(kappa.max())
    els = [_path(v, frame, True, 'fill="#f2f2f2" stroke="none"')]
    n = len(v)
    m = len(kappa)
    for i in range(n):
        p, q = v[i], v[(i + 1) % n]
        ang = math.atan2(q[1] - p[1], q[0] - p[0]) - math.pi / 2
        k = int(round(ang / (2 * math.pi / m))) % m
        t = 0.5 if hi - lo < 1e-12 else (kappa[k] - lo) / (hi - lo)
        els.append(_path([p, q], frame, False, f'stroke="{_ramp(t)}" stroke-width="3" fill="none"'))
    els.append(
        f'<text x="{_fmt(PAD)}" y="{_fmt(SIZE - 6)}" font-size="11" font-family="monospace">'
        f"curvature {lo:.4g} .. {hi:.4g}</text>"
    )
    return _document(els, title)


def probe_svg(report: dict, vertices: np.ndarray) -> str:
    """Body, chart base point and the cutting lines stored in a cut-probe report."""
    v = np.asarray(vertices, dtype=float)
    frame = _Frame(v)
    els = [_path(v, frame, True, 'fill="#eef3e8" stroke="#2d5016" stroke-width="1.2"')]
    colors = ("#c0392b", "#d68910", "#7d3c98")
    for k, seg in enumerate(report.get("cut_segments", [])):
        seg = np.asarray(seg, dtype=float)
        mid = seg.mean(axis=0)
        d = seg[1] - seg[0]
        # extend the chord so the line is visible across the body
        ext = np.array([mid - 1.5 * d, mid + 1.5 * d])
        els.append(_path(ext, frame, False, f'stroke="{colors[k % 3]}" stroke-width="1" fill="none"'))
    x, y = frame(report["base_point"])
    els.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="black"/>')
    slope = report.get("slope")
    label = "flat" if slope is None or not math.isfinite(slope) else f"slope {slope:.3f}"
    els.append(
        f'<text x="{_fmt(PAD)}" y="{_fmt(SIZE - 6)}" font-size="11" font-family="monospace">'
        f"{label} ({report.get('classification')})</text>"
    )
    return _document(els, "cut probe")


def scatter_svg(x: Sequence[float], y: Sequence[float], title: str, xlabel: str, ylabel: str) -> str:
    """Log-log scatter of positive pairs."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    els = []
    if ok.any():
        pts = np.column_stack([np.log10(x[ok]), np.log10(y[ok])])
        frame = _Frame(pts, equal=False)
        order = np.lexsort((pts[:, 1], pts[:, 0]))
        for px, py in pts[order]:
            cx, cy = frame((px, py))
            els.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="2" fill="#1f4e79"/>')
    els.append(
        f'<text x="{_fmt(PAD)}" y="{_fmt(SIZE - 6)}" font-size="11" font-family="monospace">'
        f"x: log10 {xlabel}, y: log10 {ylabel}</text>"
    )
    return _document(els, title)


def render_report(obj: dict, body_vertices: Optional[np.ndarray] = None) -> str:
    """SVG for any body or report object produced by the CLI."""
    if "result" in obj and isinstance(obj["result"], dict):
        inner = obj["result"]
    else:
        inner = obj
    kind = inner.get("kind")
    if kind == "polygon":
        return polygon_svg(np.asarray(inner["vertices"]))
    if kind == "optimize":
        h = np.asarray(inner["support"]["h"], dtype=float)
        m = len(h)
        d = 2 * math.pi / m
        radii = (np.roll(h, -1) - 2 * h + np.roll(h, 1)) / d**2 + h
        return curvature_svg(np.asarray(inner["body"]["vertices"]), radii, obj.get("config", {}).get("problem", {}).get("name", "optimized body"))
    if kind == "cut_probe":
        verts = body_vertices if body_vertices is not None else np.asarray(obj.get("body", {}).get("vertices"))
        return probe_svg(inner, verts)
    if kind == "lipschitz":
        return scatter_svg(inner["volume_gaps"], inner["ratios"], f"Lipschitz ratios: {inner['spec'].get('kind')}", "|K\\K'|", "ratio")
    if kind == "eig_torsion":
        return scatter_svg(inner["lhs"], inner["rhs"], f"eigenvalue-torsion bound n={inner['n']}", "LHS", "RHS")
    if kind == "stadium_constant":
        xs = [s["distance"] for s in inner["scan"]]
        ys = [s["ratio"] for s in inner["scan"]]
        return scatter_svg(xs, ys, "D/alpha^2 over stadiums", "distance", "ratio")
    raise ValueError(f"nothing to render for kind {kind!r}")
