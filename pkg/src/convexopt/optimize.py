"""Shape optimization over convex bodies in support-function coordinates.

The decision variable is the vector ``h`` of support values on a uniform
angular grid. Convexity is the linear system

    h[i-1] + h[i+1] >= 2 cos(step) h[i],

so iterates are kept admissible by projecting onto it (Dykstra's
algorithm). FEM-based terms are evaluated on one reference mesh whose nodes
follow the support-line vertices of each iterate (:class:`SupportMorph`),
which keeps finite differences smooth in ``h``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import cutprobe, fem
from . import geometry as geo
from . import penalize
from .errors import ConvexOptError, EvaluationFailure, InfeasibleInit, ValidationError
from .functionals import (
    FunctionalSpec,
    _parse_arg,
    combine,
    evaluate,
    fraenkel_asymmetry,
    iso_deficit,
    quantities,
)
from .geometry import ConvexPolygon, SupportBody
from .parallel import parallel_map

log = logging.getLogger(__name__)

CLUSTER_REL = 1e-3
REMESH_MIN_ANGLE = 10.0


# ---------------------------------------------------------------------------
# problem description


@dataclass(frozen=True, eq=False)
class Problem:
    """Minimize ``P(K) + R(K)`` over convex ``K`` with optional constraints.

    ``volume`` fixes ``|K|`` and ``perimeter`` fixes ``P(K)``. Without a box
    either constraint is enforced exactly by rescaling each iterate; with a
    box the volume is penalized with weight ``penalty`` (auto-calibrated
    when ``None``) and restored at the end along the Minkowski family
    toward the box.
    """

    R: Optional[FunctionalSpec] = None
    box: Optional[ConvexPolygon] = None
    volume: Optional[float] = None
    perimeter: Optional[float] = None
    penalty: Optional[float] = None
    name: str = "problem"

    def __post_init__(self):
        if self.volume is not None:
            if not self.volume > 0:
                raise ValidationError("target volume must be positive")
            if self.box is not None and not self.volume < geo.area(self.box):
                raise ValidationError("target volume must be smaller than the box area")
        if self.perimeter is not None and not self.perimeter > 0:
            raise ValidationError("target perimeter must be positive")
        if self.volume is not None and self.perimeter is not None:
            raise ValidationError("fix either the volume or the perimeter, not both")
        if self.perimeter is not None and self.box is not None:
            raise ValidationError("a perimeter constraint cannot be combined with a box")
        if self.penalty is not None and self.penalty < 0:
            raise ValidationError("penalty weight must be nonnegative")

    @property
    def mode(self) -> str:
        if self.volume is not None:
            return "penalty" if self.box is not None else "rescale_volume"
        if self.perimeter is not None:
            return "rescale_perimeter"
        return "free"


@dataclass(frozen=True)
class SolverOptions:
    m: int = 64
    budget: int = 4000
    max_iter: int = 200
    rel_tol: float = 1e-8
    fd_step: float = 1e-5
    h_mesh: Optional[float] = None
    seed: int = 0
    workers: Optional[int] = None
    probe_points: int = 8
    probe_m: int = 8192

    def __post_init__(self):
        if not 16 <= self.m <= 128:
            raise ValidationError("support grid size must lie in [16, 128]")
        if self.budget < 1 or self.max_iter < 1:
            raise ValidationError("budget and max_iter must be positive")


@dataclass(frozen=True, eq=False)
class OptimizeResult:
    support: SupportBody
    body: ConvexPolygon
    objective: float
    trace: list
    residuals: dict
    curvature: dict
    probe: list
    iterations: int
    fem_solves: int
    status: str
    remeshes: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": "optimize",
            "support": {"kind": "support", "m": self.support.m, "h": self.support.h.tolist()},
            "body": {"kind": "polygon", "vertices": self.body.vertices.tolist()},
            "objective": self.objective,
            "trace": list(self.trace),
            "residuals": self.residuals,
            "curvature": self.curvature,
            "probe": self.probe,
            "iterations": self.iterations,
            "fem_solves": self.fem_solves,
            "status": self.status,
            "remeshes": self.remeshes,
            "extra": self.extra,
        }


# ---------------------------------------------------------------------------
# projection onto the discrete convexity cone (and the box)


def _constraint_groups(m: int) -> list[np.ndarray]:
    """Convexity constraints split so each group touches disjoint index triples."""
    full = m - m % 3
    groups = [np.arange(g, full, 3) for g in range(3)]
    groups += [np.array([i]) for i in range(full, m)]
    return [g for g in groups if len(g)]


def project_convex(
    h: np.ndarray,
    upper: Optional[np.ndarray] = None,
    tol: float = 1e-13,
    max_iter: int = 5000,
) -> np.ndarray:
    """Euclidean projection onto ``{discrete convexity} ∩ {h <= upper}`` by Dykstra's algorithm."""
    h = np.asarray(h, dtype=float).copy()
    m = len(h)
    c = 2.0 * math.cos(2.0 * math.pi / m)
    a = np.array([1.0, -c, 1.0])
    aa = a @ a
    scale = max(1.0, float(np.abs(h).max()))
    if SupportBody(h).convexity_defect() <= tol * scale and (upper is None or np.all(h <= upper)):
        return h
    groups = _constraint_groups(m)
    trip = [np.stack([(g - 1) % m, g, (g + 1) % m], axis=1) for g in groups]
    incr = [np.zeros((len(g), 3)) for g in groups]
    box_incr = np.zeros(m)
    for _ in range(max_iter):
        prev = h.copy()
        for idx, inc in zip(trip, incr):
            y = h[idx] + inc
            viol = y @ a
            step = np.where(viol < 0.0, viol / aa, 0.0)
            z = y - step[:, None] * a
            inc[:] = y - z
            h[idx] = z
        if upper is not None:
            y = h + box_incr
            z = np.minimum(y, upper)
            box_incr = y - z
            h = z
        if np.abs(h - prev).max() <= tol * scale:
            break
    return h


# ---------------------------------------------------------------------------
# helpers


def ellipse_support(a: float, b: float, m: int) -> SupportBody:
    t = 2.0 * math.pi * np.arange(m) / m
    return SupportBody(np.sqrt((a * np.cos(t)) ** 2 + (b * np.sin(t)) ** 2))


def default_init(problem: Problem, m: int) -> SupportBody:
    """Ellipse with axis ratio 1.44, scaled to the constraint (area ``pi`` otherwise)."""
    S = ellipse_support(1.2, 1.0 / 1.2, m)
    K = geo.from_support(S)
    if problem.perimeter is not None:
        s = problem.perimeter / geo.perimeter(K)
    else:
        target = problem.volume if problem.volume is not None else math.pi
        s = math.sqrt(target / geo.area(K))
    if problem.box is not None:
        _, _, c = geo.diameter_inradius(problem.box)
        shrink = 1.0
        while True:
            h = s * shrink * S.h + c[0] * np.cos(S.angles()) + c[1] * np.sin(S.angles())
            if np.all(h <= geo.support(problem.box, S.angles())):
                return SupportBody(h)
            shrink *= 0.9
            if shrink < 1e-3:
                raise InfeasibleInit("could not fit the initial ellipse in the box")
    return SupportBody(s * S.h)


def _support_area(h: np.ndarray) -> float:
    return geo.area(geo.from_support(SupportBody(h)))


def restore_in_box(h: np.ndarray, upper: np.ndarray, V0: float) -> np.ndarray:
    """Support values of area ``V0`` that stay below ``upper``.

    Too small bodies move along the Minkowski family ``(1-t) h + t upper``,
    whose area is an exact quadratic in ``t``; too large bodies shrink
    about their centroid. Both maps keep ``h <= upper``.
    """
    A0 = _support_area(h)
    if A0 > V0:
        theta = 2.0 * math.pi * np.arange(len(h)) / len(h)
        c = geo.centroid(geo.from_support(SupportBody(h)))
        ch = c[0] * np.cos(theta) + c[1] * np.sin(theta)
        return ch + math.sqrt(V0 / A0) * (h - ch)
    if A0 == V0:
        return h
    A1 = _support_area(upper)
    Ah = _support_area(0.5 * (h + upper))
    # A(t) = A0 + b t + a t^2 through t = 0, 1/2, 1
    a = 2.0 * (A1 - 2.0 * Ah + A0)
    b = A1 - A0 - a
    c = A0 - V0
    disc = math.sqrt(max(b * b - 4.0 * a * c, 0.0))
    t = -2.0 * c / (b + disc) if b + disc > 0 else 1.0
    return (1.0 - t) * h + t * upper


def refine_support(h: np.ndarray, m_fine: int) -> np.ndarray:
    """Trigonometric interpolation of periodic samples onto a finer uniform grid."""
    m = len(h)
    c = np.fft.rfft(h)
    fine = np.zeros(m_fine // 2 + 1, dtype=complex)
    k = len(c)
    if m % 2 == 0:
        c = c.copy()
        c[-1] *= 0.5  # split the Nyquist term symmetrically
    fine[:k] = c
    return np.fft.irfft(fine, m_fine) * (m_fine / m)


class SupportMorph:
    """Move a reference mesh onto bodies given by support values on the same grid.

    Vertex ``i`` of a support polygon is the intersection of support lines
    ``i`` and ``i+1``, so two support vectors induce a vertex-to-vertex and
    edge-fraction-to-edge-fraction correspondence of the boundaries. Each
    node is written as ``c + rho (B - c)`` with ``B`` its radial projection
    on the reference boundary; the image replaces ``B`` by the corresponding
    boundary point of the target. The mesh boundary then coincides with the
    target polygon and the node positions depend linearly on the target
    vertices.
    """

    def __init__(self, mesh: fem.TriMesh, h_ref: np.ndarray, center: np.ndarray):
        self.mesh = mesh
        self.center = np.asarray(center, dtype=float)
        V = geo._support_vertices(h_ref)
        m = len(V)
        d = mesh.nodes - self.center
        phi = np.arctan2(d[:, 1], d[:, 0])
        vphi = np.arctan2(V[:, 1] - self.center[1], V[:, 0] - self.center[0])
        # segment i spans from vertex i-1 to vertex i (support line i)
        start = np.roll(V, 1, axis=0)
        rel = np.mod(phi[:, None] - np.roll(vphi, 1)[None, :], 2 * math.pi)
        span = np.mod(vphi - np.roll(vphi, 1), 2 * math.pi)
        seg = np.argmax(rel <= span[None, :] + 1e-15, axis=1)
        a = start[seg] - self.center
        e = V[seg] - start[seg]
        # solve c + r u = start + s e for s along the edge
        u = np.column_stack([np.cos(phi), np.sin(phi)])
        den = u[:, 0] * e[:, 1] - u[:, 1] * e[:, 0]
        s_edge = (a[:, 0] * u[:, 1] - a[:, 1] * u[:, 0]) / np.where(den == 0, 1.0, den)
        s_edge = np.clip(s_edge, 0.0, 1.0)
        B = a + s_edge[:, None] * e
        rb = np.hypot(B[:, 0], B[:, 1])
        r = np.hypot(d[:, 0], d[:, 1])
        self.seg = seg
        self.s = s_edge
        self.rho = np.where(rb > 0, r / rb, 0.0)
        self.rho[mesh.boundary] = 1.0
        self.m = m

    def __call__(self, h: np.ndarray) -> fem.TriMesh:
        V = geo._support_vertices(h)
        start = np.roll(V, 1, axis=0)
        B = start[self.seg] + self.s[:, None] * (V[self.seg] - start[self.seg])
        nodes = self.center + self.rho[:, None] * (B - self.center)
        return self.mesh.with_nodes(nodes)


def _as_composite(spec: Optional[FunctionalSpec]) -> Optional[FunctionalSpec]:
    """FEM-backed single terms become one-argument composites so clusters can be averaged."""
    if spec is None:
        return None
    if spec.kind == "torsion":
        return FunctionalSpec("composite", args=("tau",), h_mesh=spec.h_mesh, seed=spec.seed)
    if spec.kind == "dirichlet_eig":
        return FunctionalSpec("composite", args=(f"lambda{spec.n}",), h_mesh=spec.h_mesh, seed=spec.seed)
    if spec.kind == "neumann_eig":
        return FunctionalSpec("composite", args=(f"mu{spec.n}",), h_mesh=spec.h_mesh, seed=spec.seed)
    return spec


def _clusters(spec: FunctionalSpec, q: dict, rel: float = CLUSTER_REL) -> dict:
    """Index sets of eigenvalues within ``rel`` (relative) of each requested one."""
    out = {}
    for a in spec.args:
        name, n = _parse_arg(a)
        if name not in ("lambda", "mu"):
            continue
        vn = q[a]
        members = [n]
        k = n - 1
        while k >= 1 and abs(q[f"{name}{k}"] - vn) < rel * abs(vn):
            members.insert(0, k)
            k -= 1
        k = n + 1
        while f"{name}{k}" in q and abs(q[f"{name}{k}"] - vn) < rel * abs(vn):
            members.append(k)
            k += 1
        if len(members) > 1:
            out[a] = [f"{name}{j}" for j in members]
    return out


class _Evaluator:
    """Objective in ``h``-coordinates with FEM solve accounting."""

    def __init__(self, problem: Problem, opts: SolverOptions, h0: np.ndarray):
        self.problem = problem
        self.opts = opts
        self.spec = _as_composite(problem.R)
        self.uses_fem = self.spec is not None and self.spec.uses_fem
        self.solves = 0
        self.remeshes = 0
        self.clusters: dict = {}
        self.cluster_extra = 0
        self.cluster_rel = CLUSTER_REL
        self.upper = None
        if problem.box is not None:
            self.upper = geo.support(problem.box, 2.0 * math.pi * np.arange(opts.m) / opts.m)
        self.penalty = 0.0
        self.reference(h0, first=True)

    def normalize(self, h: np.ndarray) -> np.ndarray:
        mode = self.problem.mode
        if mode == "rescale_volume":
            K = geo.from_support(SupportBody(h))
            return h * math.sqrt(self.problem.volume / geo.area(K))
        if mode == "rescale_perimeter":
            K = geo.from_support(SupportBody(h))
            return h * (self.problem.perimeter / geo.perimeter(K))
        if mode == "penalty":
            return restore_in_box(h, self.upper, self.problem.volume)
        return h

    def body(self, h: np.ndarray) -> ConvexPolygon:
        return geo.from_support(SupportBody(self.normalize(h)))

    def reference(self, h: np.ndarray, first: bool = False) -> None:
        hn = self.normalize(h)
        K = geo.from_support(SupportBody(hn))
        self.center = geo.diameter_inradius(K)[2]
        if self.uses_fem:
            h_mesh = self.opts.h_mesh or fem.default_h(K)
            mesh = fem.triangulate(K, h_mesh, seed=self.opts.seed)
            self.morph = SupportMorph(mesh, hn, self.center)
            if not first:
                self.remeshes += 1

    def mesh(self, hn: np.ndarray) -> fem.TriMesh:
        return self.morph(hn)

    def needs_remesh(self, h: np.ndarray) -> bool:
        if not self.uses_fem:
            return False
        hn = self.normalize(h)
        K = geo.from_support(SupportBody(hn))
        if geo.boundary_distance(K, self.center[None, :])[0] < 0.25 * geo.inradius(K):
            return True
        mesh = self.mesh(hn)
        return mesh.areas().min() <= 0 or mesh.min_angle() < REMESH_MIN_ANGLE

    def R_value(self, hn: np.ndarray, extra_eigs: int = 0) -> tuple[float, dict]:
        spec = self.spec
        if spec is None:
            return 0.0, {}
        K = geo.from_support(SupportBody(hn))
        if spec.kind != "composite":
            return evaluate(spec, K), {}
        mesh = self.mesh(hn) if self.uses_fem else None
        q = quantities(spec, K, mesh, extra_eigs=max(extra_eigs, self.cluster_extra))
        self.solves += _solve_count(spec)
        for a, members in self.clusters.items():
            q[a] = float(np.mean([q[k] for k in members]))
        return combine(spec, q), q

    def __call__(self, h: np.ndarray, extra_eigs: int = 0) -> float:
        hn = self.normalize(h)
        K = geo.from_support(SupportBody(hn))
        R, _ = self.R_value(hn, extra_eigs)
        value = geo.perimeter(K) + R
        if self.problem.mode == "penalty":
            value += self.penalty * abs(geo.area(K) - self.problem.volume)
        return float(value)

    @property
    def has_eigs(self) -> bool:
        return self.uses_fem and any(_parse_arg(a)[0] in ("lambda", "mu") for a in self.spec.args)

    def refresh_clusters(self, h: np.ndarray) -> None:
        self.clusters = {}
        if self.spec is None or self.spec.kind != "composite" or not self.uses_fem:
            return
        self.cluster_extra = 0
        _, q = self.R_value(self.normalize(h), extra_eigs=2)
        self.clusters = _clusters(self.spec, q, self.cluster_rel)
        top = 0
        for a, members in self.clusters.items():
            top = max(top, _parse_arg(members[-1])[1] - _parse_arg(a)[1])
        self.cluster_extra = top


def _solve_count(spec: FunctionalSpec) -> int:
    from .functionals import fem_solves

    return fem_solves(spec)


def _precondition(g: np.ndarray) -> np.ndarray:
    """Sobolev smoothing: Fourier mode ``k`` divided by ``1 + k^2``."""
    c = np.fft.rfft(g)
    k = np.arange(len(c))
    return np.fft.irfft(c / (1.0 + k * k), len(g))


def _probe_summary(h: np.ndarray, count: int, m_fine: int) -> list:
    """Cut-probe slopes on a trigonometric refinement of the final support function."""
    fine = refine_support(h, m_fine)
    K = geo.from_support(SupportBody(fine))
    spacing = geo.perimeter(geo.from_support(SupportBody(h))) / len(h)
    out = []
    for k in range(count):
        s = k / count
        try:
            chart = cutprobe.build_chart(K, s)
            r_hi = chart.beta / 2.2
            r_lo = min(chart.beta / 4.0, spacing)
            rep = cutprobe.probe(K, s, np.geomspace(r_lo, r_hi, 8))
            out.append({"boundary_param": s, "slope": rep.slope, "classification": rep.classification})
        except ConvexOptError as exc:
            out.append({"boundary_param": s, "slope": None, "classification": "error", "reason": str(exc)})
    return out


# ---------------------------------------------------------------------------
# solvers


def solve(
    problem: Problem,
    init: Optional[SupportBody] = None,
    budget: Optional[int] = None,
    options: Optional[SolverOptions] = None,
    callback: Optional[Callable[[int, float], None]] = None,
) -> OptimizeResult:
    """Projected descent on ``P + R`` (plus volume penalty) in support coordinates.

    Each iteration takes a forward-difference gradient (one evaluation per
    support value), smooths it, and runs a backtracking line search along
    the projected path ``t -> Proj(h - t d)``. When the smoothed phase stops
    (relative decrease below ``rel_tol`` or a failed line search) the same
    loop continues with the unsmoothed gradient, which can move single
    support values and so straighten out corners. Stops when that phase
    stops, the FEM budget is spent, or ``max_iter`` is reached.
    """
    opts = options or SolverOptions()
    if budget is not None:
        opts = SolverOptions(**{**opts.__dict__, "budget": int(budget)})
    m = opts.m
    if init is None:
        init = default_init(problem, m)
    elif init.m != m:
        init = SupportBody(refine_support(init.h, m)) if init.m < m else geo.to_support(geo.from_support(init), m)
    h = np.array(init.h, dtype=float)
    scale = float(np.abs(h).max())
    if init.convexity_defect() > 1e-6 * scale:
        raise InfeasibleInit("initial support values are not convex")
    h = project_convex(h)
    if problem.box is not None:
        upper = geo.support(problem.box, init.angles())
        if np.any(h > upper + 1e-9 * scale):
            raise InfeasibleInit("initial body is not inside the box")

    try:
        ev = _Evaluator(problem, opts, h)
        if problem.mode == "penalty":
            K0 = ev.body(h)
            if problem.penalty is not None:
                ev.penalty = problem.penalty
            else:
                R0 = ev.R_value(ev.normalize(h))[0] if problem.R is not None else None
                ev.penalty = penalize.homothety_penalty(K0, problem.R, R0)
        ev.refresh_clusters(h)
        f = ev(h)
    except ConvexOptError as exc:
        raise EvaluationFailure(f"initial evaluation failed: {exc}") from exc

    trace = [f]
    resets: list = []
    status = "max_iter"
    step = None
    it = 0
    eps = opts.fd_step * scale
    per_eval = _solve_count(ev.spec) if ev.uses_fem else 0
    # smoothed steps first; plain gradient steps then remove corners the smoothing cannot reach
    smooth = True
    phases: list = []
    phase_start = 0
    for it in range(1, opts.max_iter + 1):
        if ev.solves + per_eval * (m + 2) > opts.budget:
            status = "budget"
            break
        try:
            base = f
            vals = parallel_map(lambda i: ev(h + eps * np.eye(1, m, i).ravel()), range(m), opts.workers)
            g = (np.array(vals) - base) / eps
            d = _precondition(g) if smooth else g
            if step is None:
                step = 0.05 * scale / max(np.abs(d).max(), 1e-300)
            accepted = False
            t = 2.0 * step
            for _ in range(30):
                trial = project_convex(h - t * d, ev.upper)
                try:
                    ft = ev(trial)
                except ConvexOptError:
                    ft = math.inf
                if ft <= f - 1e-4 * float(g @ (h - trial)) and ft <= f:
                    accepted = True
                    break
                t *= 0.5
                if ev.solves + per_eval > opts.budget:
                    break
        except ConvexOptError as exc:
            status = f"evaluation_failure: {exc}"
            log.warning("aborting after %d iterations: %s", it, exc)
            break
        if not accepted:
            if ev.has_eigs and ev.cluster_rel < 0.05:
                # nonsmooth eigenvalue: average over a wider cluster and retry
                ev.cluster_rel *= 10.0
                ev.refresh_clusters(h)
                f = _restart(ev, h, f, trace, resets)
                continue
            status = "line_search"
            if _next_phase(phases, smooth, it, phase_start, status):
                smooth, step, phase_start, status = False, None, it, "max_iter"
                continue
            break
        decrease = (f - ft) / max(abs(f), 1e-300)
        h, f, step = trial, ft, t
        if problem.mode == "penalty":
            # iterate on the restored body so difference quotients see one branch
            h = ev.normalize(h)
        trace.append(f)
        if callback is not None:
            callback(it, f)
        if decrease < opts.rel_tol:
            status = "converged"
            if _next_phase(phases, smooth, it + 1, phase_start, status):
                smooth, step, phase_start, status = False, None, it, "max_iter"
                continue
            break
        if ev.needs_remesh(h):
            ev.reference(h)
        ev.refresh_clusters(h)
        f = _restart(ev, h, f, trace, resets)

    phases.append({"preconditioned": smooth, "iterations": it - phase_start, "status": status})
    if len(phases) == 2 and phases[1]["iterations"] <= 1 and phases[1]["status"] == "line_search":
        status = phases[0]["status"]
    result = _finish(problem, ev, h, f, trace, it, status, opts)
    result.extra["resets"] = resets
    result.extra["phases"] = phases
    return result


def _next_phase(phases: list, smooth: bool, it: int, start: int, status: str) -> bool:
    """Close the smoothed phase; True when the plain-gradient phase should start."""
    if not smooth:
        return False
    phases.append({"preconditioned": True, "iterations": it - start - 1, "status": status})
    return True


def _restart(ev: _Evaluator, h: np.ndarray, f: float, trace: list, resets: list) -> float:
    """Re-evaluate after the objective changed definition (new mesh or clusters)."""
    g = ev(h)
    if g != f:
        resets.append(len(trace))
        trace.append(g)
    return g


def _finish(problem, ev, h, f, trace, iterations, status, opts) -> OptimizeResult:
    h = ev.normalize(h)
    K = geo.from_support(SupportBody(h))
    extra = {}
    if problem.volume is not None:
        A = geo.area(K)
        if A < problem.volume:
            target = problem.box if problem.box is not None else K.scaled(2.0 * math.sqrt(problem.volume / A), geo.centroid(K))
            t, K = penalize.restore_volume(penalize.MinkowskiFamily(K, target), problem.volume)
            extra["restore_t"] = t
        elif A > problem.volume:
            c = geo.diameter_inradius(K)[2]
            K = K.scaled(math.sqrt(problem.volume / A), c)
            extra["restore_t"] = 0.0
        h = geo.support(K, SupportBody(h).angles())
    S = SupportBody(h)
    residuals = {
        "volume": geo.area(K) - problem.volume if problem.volume is not None else None,
        "perimeter": geo.perimeter(K) - problem.perimeter if problem.perimeter is not None else None,
        "box": float(np.max(h - ev.upper)) if ev.upper is not None else None,
        "convexity": S.convexity_defect(),
    }
    rc = S.radii_of_curvature()
    curvature = {"min_radius": float(rc.min()), "max_radius": float(rc.max())}
    probe = _probe_summary(h, opts.probe_points, opts.probe_m) if opts.probe_points > 0 else []
    objective = geo.perimeter(K) + (evaluate(problem.R, K) if problem.R is not None else 0.0)
    return OptimizeResult(
        support=S,
        body=K,
        objective=float(objective),
        trace=[float(x) for x in trace],
        residuals=residuals,
        curvature=curvature,
        probe=probe,
        iterations=int(iterations),
        fem_solves=int(ev.solves),
        status=status,
        remeshes=ev.remeshes,
        extra=extra,
    )


def perimeter_constrained_eig(
    n: int,
    p0: float,
    budget: int = 20000,
    options: Optional[SolverOptions] = None,
    max_sweeps: int = 8,
) -> OptimizeResult:
    """Minimize ``lambda_n`` at perimeter ``p0`` through ``lambda_n + mu P``.

    For a fixed shape the scale minimizing ``lambda_n/t^2 + mu P t`` has
    ``P = 2 lambda_n / mu``, so ``mu`` starts at ``2 lambda_n / p0`` and is
    updated by ``mu <- mu (P / p0)^3`` until ``P`` is within 1% of ``p0``.
    Each sweep warm-starts from the previous body rescaled to ``p0``.
    """
    if not p0 > 0:
        raise ValidationError("target perimeter must be positive")
    opts = options or SolverOptions()
    probe_points = opts.probe_points
    opts = SolverOptions(**{**opts.__dict__, "probe_points": 0})
    init = default_init(Problem(perimeter=p0), opts.m)
    K = geo.from_support(init)
    lam = evaluate(FunctionalSpec("dirichlet_eig", n=n), K)
    mu = 2.0 * lam / p0
    sweeps = []
    spent = 0
    result = None
    for _ in range(max_sweeps):
        spec = FunctionalSpec("composite", args=(f"lambda{n}",), F="weighted_sum", weights=(1.0 / mu,))
        result = solve(Problem(R=spec, name=f"lambda{n}+muP"), init, budget=max(1, budget - spent), options=opts)
        spent += result.fem_solves
        P = geo.perimeter(result.body)
        lam = evaluate(FunctionalSpec("dirichlet_eig", n=n), result.body)
        sweeps.append({"mu": mu, "perimeter": P, "lambda": lam, "status": result.status})
        if abs(P - p0) <= 0.01 * p0 or spent >= budget:
            break
        mu *= (P / p0) ** 3
        init = SupportBody(result.support.h * (p0 / P))
    assert result is not None
    probe = _probe_summary(result.support.h, probe_points, opts.probe_m) if probe_points > 0 else []
    extra = dict(result.extra, sweeps=sweeps, mu=mu, **{f"lambda{n}": lam})
    return OptimizeResult(
        support=result.support,
        body=result.body,
        objective=lam,
        trace=result.trace,
        residuals=dict(result.residuals, perimeter=geo.perimeter(result.body) - p0),
        curvature=result.curvature,
        probe=probe,
        iterations=result.iterations,
        fem_solves=spent,
        status=result.status,
        remeshes=result.remeshes,
        extra=extra,
    )


# ---------------------------------------------------------------------------
# stadium constant


@dataclass(frozen=True)
class StadiumResult:
    constant: float
    distance: float
    asymmetry: float
    deficit: float
    evaluations: int
    scan: list

    def to_dict(self) -> dict:
        return {
            "kind": "stadium_constant",
            "constant": self.constant,
            "distance": self.distance,
            "asymmetry": self.asymmetry,
            "deficit": self.deficit,
            "evaluations": self.evaluations,
            "scan": self.scan,
        }


def stadium_ratio(s: float, m: int = 4096) -> tuple[float, float, float]:
    """``(D/alpha^2, D, alpha)`` for the hull of unit disks at centre distance ``s``."""
    K = geo.stadium(s, 1.0, m)
    a = fraenkel_asymmetry(K)
    d = iso_deficit(K)
    return d / (a * a), d, a


def stadium_constant(
    budget: int = 40,
    lo: float = 0.01,
    hi: float = 8.0,
    m: int = 4096,
    tol: float = 1e-3,
) -> StadiumResult:
    """Minimize ``D/alpha^2`` over stadiums by a coarse scan then golden-section search.

    The centre distance ``s`` is restricted to ``[lo, hi]`` with ``lo > 0``:
    as ``s -> 0`` both deficit and asymmetry vanish and the ratio is
    numerically meaningless. ``budget`` caps the number of evaluations.
    """
    if not 0 < lo < hi:
        raise ValidationError("need 0 < lo < hi")
    cache: dict = {}

    def F(s):
        if s not in cache:
            cache[s] = stadium_ratio(s, m)
        return cache[s][0]

    n_scan = max(5, min(12, budget // 3))
    grid = np.linspace(lo, hi, n_scan)
    vals = [F(float(s)) for s in grid]
    k = int(np.argmin(vals))
    a, b = float(grid[max(k - 1, 0)]), float(grid[min(k + 1, n_scan - 1)])
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    while b - a > tol and len(cache) < budget:
        if F(c) < F(d):
            b, d = d, c
            c = b - invphi * (b - a)
        else:
            a, c = c, d
            d = a + invphi * (b - a)
    best = min(cache, key=lambda s: cache[s][0])
    ratio, deficit, asym = cache[best]
    scan = [{"distance": float(s), "ratio": float(v)} for s, v in zip(grid, vals)]
    return StadiumResult(float(ratio), float(best), float(asym), float(deficit), len(cache), scan)


def disk_distance(K: ConvexPolygon) -> float:
    """Hausdorff distance to the disk of equal area centred at the centroid."""
    r = math.sqrt(geo.area(K) / math.pi)
    return geo.hausdorff_distance(K, geo.disk(r, 2048, geo.centroid(K)))
