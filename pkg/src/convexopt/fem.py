"""P1 finite elements on triangulated convex polygons.

Torsion (``-Lap u = 1`` with zero boundary values), Dirichlet and Neumann
Laplacian eigenvalues. Meshes come from :func:`triangulate`: boundary nodes
at spacing ``h_mesh``, interior nodes on a jittered triangular lattice
anchored at the global origin, Delaunay connectivity and two Laplacian
smoothing passes. Because the lattice does not depend on the polygon, two
nested bodies meshed with the same ``h_mesh`` share their interior nodes
away from the region where they differ.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.spatial import Delaunay

from . import geometry as geo
from .errors import MeshTooCoarse, SolveFailed, ValidationError
from .geometry import ConvexPolygon

DENSE_MAX = 400
MESH_DIVISOR = 20.0


@dataclass(frozen=True, eq=False)
class TriMesh:
    nodes: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    h_mesh: float

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    def areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def min_angle(self) -> float:
        """Smallest interior angle over all triangles, in degrees."""
        p = self.nodes[self.triangles]
        worst = math.pi
        for k in range(3):
            a = p[:, (k + 1) % 3] - p[:, k]
            b = p[:, (k + 2) % 3] - p[:, k]
            cosang = np.einsum("ij,ij->i", a, b) / (np.hypot(*a.T) * np.hypot(*b.T))
            worst = min(worst, float(np.arccos(np.clip(cosang, -1.0, 1.0)).min()))
        return math.degrees(worst)

    def with_nodes(self, nodes: np.ndarray) -> "TriMesh":
        return TriMesh(np.asarray(nodes, dtype=float), self.triangles, self.boundary, self.h_mesh)

    def to_dict(self) -> dict:
        return {"nodes": self.nodes.tolist(), "triangles": self.triangles.tolist()}

    @cached_property
    def system(self) -> "FemSystem":
        return assemble(self)


@dataclass(frozen=True, eq=False)
class FemSystem:
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    load: np.ndarray
    gradients: np.ndarray  # (n_tri, 3, 2) gradients of the hat functions


@dataclass(frozen=True, eq=False)
class TorsionSolution:
    tau: float
    u: np.ndarray
    mesh: TriMesh

    def max_value(self) -> float:
        return float(self.u.max())

    def gradient_norms(self) -> np.ndarray:
        g = np.einsum("tk,tkd->td", self.u[self.mesh.triangles], self.mesh.system.gradients)
        return np.hypot(g[:, 0], g[:, 1])

    def max_gradient(self) -> float:
        return float(self.gradient_norms().max())


@dataclass(frozen=True, eq=False)
class EigResult:
    """Ascending eigenvalues with mass-orthonormal nodal eigenvectors (columns)."""

    values: np.ndarray
    vectors: np.ndarray
    mesh: TriMesh


# ---------------------------------------------------------------------------
# meshing


def _splitmix(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _lattice_jitter(i: np.ndarray, j: np.ndarray, seed: int, salt: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        key = (i.astype(np.int64).astype(np.uint64) * np.uint64(0x100000001B3)) ^ (
            j.astype(np.int64).astype(np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
        )
        key = key ^ (np.uint64(seed & 0xFFFFFFFFFFFFFFFF) * np.uint64(0x165667B19E3779F9)) ^ np.uint64(salt)
        bits = _splitmix(key)
    return (bits >> np.uint64(11)).astype(np.float64) / float(1 << 53) * 2.0 - 1.0


def _boundary_nodes(K: ConvexPolygon, h: float) -> np.ndarray:
    pts = []
    for v, e in zip(K.vertices, K.edges()):
        k = max(1, int(math.ceil(math.hypot(*e) / h - 1e-9)))
        t = np.arange(k) / k
        pts.append(v + t[:, None] * e)
    return np.vstack(pts)


def _lattice_nodes(K: ConvexPolygon, h: float, seed: int, jitter: float) -> np.ndarray:
    lo = K.vertices.min(axis=0)
    hi = K.vertices.max(axis=0)
    dy = h * math.sqrt(3.0) / 2.0
    jj = np.arange(math.floor(lo[1] / dy) - 1, math.ceil(hi[1] / dy) + 2)
    ii = np.arange(math.floor(lo[0] / h) - 2, math.ceil(hi[0] / h) + 2)
    I, J = np.meshgrid(ii, jj)
    I, J = I.ravel(), J.ravel()
    x = (I + 0.5 * (J % 2)) * h
    y = J * dy
    x = x + jitter * h * _lattice_jitter(I, J, seed, 1)
    y = y + jitter * h * _lattice_jitter(I, J, seed, 2)
    pts = np.column_stack([x, y])
    keep = geo.boundary_distance(K, pts) >= 0.5 * h
    return pts[keep]


def _delaunay(points: np.ndarray, h: float) -> np.ndarray:
    tri = Delaunay(points).simplices
    p = points[tri]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    a = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    tri = tri[np.abs(a) > 1e-10 * h * h]
    a = a[np.abs(a) > 1e-10 * h * h]
    flip = a < 0
    tri[flip] = tri[flip][:, [0, 2, 1]]
    return tri


def _smooth(points: np.ndarray, tri: np.ndarray, n_boundary: int) -> np.ndarray:
    n = len(points)
    rows = np.concatenate([tri[:, 0], tri[:, 1], tri[:, 2], tri[:, 1], tri[:, 2], tri[:, 0]])
    cols = np.concatenate([tri[:, 1], tri[:, 2], tri[:, 0], tri[:, 0], tri[:, 1], tri[:, 2]])
    adj = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    adj.data[:] = 1.0
    deg = np.asarray(adj.sum(axis=1)).ravel()
    avg = (adj @ points) / deg[:, None]
    out = points.copy()
    out[n_boundary:] = avg[n_boundary:]
    return out


def triangulate(
    K: ConvexPolygon,
    h_mesh: float,
    seed: int = 0,
    jitter: float = 0.1,
    smoothing: int = 2,
) -> TriMesh:
    """Triangulate ``K`` with target edge length ``h_mesh``.

    Raises :class:`MeshTooCoarse` when ``h_mesh`` exceeds the inradius or the
    mesh would have fewer than 50 interior nodes.
    """
    inr = geo.inradius(K)
    if not h_mesh > 0 or h_mesh > inr:
        raise MeshTooCoarse(f"h_mesh={h_mesh:g} must be positive and at most the inradius {inr:g}")
    bnd = _boundary_nodes(K, h_mesh)
    inner = _lattice_nodes(K, h_mesh, seed, jitter)
    if len(inner) < 50:
        raise MeshTooCoarse(f"only {len(inner)} interior nodes at h_mesh={h_mesh:g}")
    pts = np.vstack([bnd, inner])
    tri = _delaunay(pts, h_mesh)
    for _ in range(smoothing):
        pts = _smooth(pts, tri, len(bnd))
        tri = _delaunay(pts, h_mesh)
    flags = np.zeros(len(pts), dtype=bool)
    flags[: len(bnd)] = True
    mesh = TriMesh(pts, tri, flags, float(h_mesh))
    total = mesh.areas().sum()
    if abs(total - geo.area(K)) > 1e-8 * geo.area(K):
        raise SolveFailed(f"mesh covers area {total!r}, polygon has {geo.area(K)!r}")
    return mesh


_MESH_CACHE: "OrderedDict[tuple, TriMesh]" = OrderedDict()
_MESH_CACHE_SIZE = 64


def default_h(K: ConvexPolygon) -> float:
    return geo.inradius(K) / MESH_DIVISOR


def mesh_for(K: ConvexPolygon, h_mesh: Optional[float] = None, seed: int = 0) -> TriMesh:
    """Memoized :func:`triangulate`; ``h_mesh`` defaults to ``inradius / 20``."""
    if h_mesh is None:
        h_mesh = default_h(K)
    key = (K.vertices.tobytes(), float(h_mesh), int(seed))
    mesh = _MESH_CACHE.get(key)
    if mesh is None:
        mesh = triangulate(K, h_mesh, seed=seed)
        _MESH_CACHE[key] = mesh
        if len(_MESH_CACHE) > _MESH_CACHE_SIZE:
            _MESH_CACHE.popitem(last=False)
    else:
        _MESH_CACHE.move_to_end(key)
    return mesh


def morph_mesh(mesh: TriMesh, source: ConvexPolygon, target: ConvexPolygon, center) -> TriMesh:
    """Move the nodes of a mesh of ``source`` radially onto ``target``.

    Each node keeps its direction from ``center`` and has its distance
    rescaled by the ratio of the two radial functions, so boundary nodes land
    on the boundary of ``target`` and the connectivity is unchanged.
    """
    c = np.asarray(center, dtype=float)
    d = mesh.nodes - c
    r = np.hypot(d[:, 0], d[:, 1])
    theta = np.arctan2(d[:, 1], d[:, 0])
    ratio = geo.radial_values(target, c, theta) / geo.radial_values(source, c, theta)
    moved = np.where(r[:, None] > 0, c + d * ratio[:, None], mesh.nodes)
    return mesh.with_nodes(moved)


# ---------------------------------------------------------------------------
# assembly


def assemble(mesh: TriMesh) -> FemSystem:
    """Exact P1 stiffness, consistent mass and unit-load vector."""
    t = mesh.triangles
    p = mesh.nodes[t]
    x, y = p[..., 0], p[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area = 0.5 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    if area.min() <= 0:
        raise SolveFailed("mesh has inverted or degenerate triangles")
    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * area)[:, None, None]
    me = (np.ones((3, 3)) + np.eye(3))[None] * (area / 12.0)[:, None, None]
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.n_nodes
    A = sp.csr_matrix((ke.ravel(), (rows, cols)), shape=(n, n))
    M = sp.csr_matrix((me.ravel(), (rows, cols)), shape=(n, n))
    f = np.bincount(t.ravel(), weights=np.repeat(area / 3.0, 3), minlength=n)
    grads = np.stack([b, c], axis=-1) / (2.0 * area)[:, None, None]
    return FemSystem(A, M, f, grads)


# ---------------------------------------------------------------------------
# solvers


def torsion_on_mesh(mesh: TriMesh) -> TorsionSolution:
    sys = mesh.system
    idx = mesh.interior
    A = sys.stiffness[idx][:, idx].tocsc()
    try:
        ui = spla.spsolve(A, sys.load[idx])
    except RuntimeError as exc:  # pragma: no cover - singular factorization
        raise SolveFailed(str(exc)) from exc
    if not np.all(np.isfinite(ui)):
        raise SolveFailed("torsion solve produced non-finite values")
    u = np.zeros(mesh.n_nodes)
    u[idx] = ui
    return TorsionSolution(float(sys.load @ u), u, mesh)


def _generalized_eigs(A: sp.spmatrix, M: sp.spmatrix, n: int, shift: float):
    size = A.shape[0]
    if n > size:
        raise SolveFailed(f"requested {n} eigenpairs from a system of size {size}")
    try:
        if size <= DENSE_MAX:
            vals, vecs = scipy.linalg.eigh(A.toarray(), M.toarray(), subset_by_index=[0, n - 1])
        else:
            v0 = np.ones(size) / math.sqrt(size)
            vals, vecs = spla.eigsh(A.tocsc(), k=n, M=M.tocsc(), sigma=shift, which="LM", v0=v0, tol=0.0)
    except (np.linalg.LinAlgError, spla.ArpackError, RuntimeError) as exc:
        raise SolveFailed(f"eigen solve failed: {exc}") from exc
    # Rayleigh-Ritz on the computed subspace: mass-orthonormal, sorted
    Ar = vecs.T @ (A @ vecs)
    Mr = vecs.T @ (M @ vecs)
    Ar = 0.5 * (Ar + Ar.T)
    Mr = 0.5 * (Mr + Mr.T)
    vals, rot = scipy.linalg.eigh(Ar, Mr)
    vecs = vecs @ rot
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def dirichlet_eigs_on_mesh(mesh: TriMesh, n: int) -> EigResult:
    sys = mesh.system
    idx = mesh.interior
    A = sys.stiffness[idx][:, idx]
    M = sys.mass[idx][:, idx]
    vals, vi = _generalized_eigs(A, M, n, 0.0)
    vecs = np.zeros((mesh.n_nodes, n))
    vecs[idx] = vi
    return EigResult(vals, vecs, mesh)


def neumann_eigs_on_mesh(mesh: TriMesh, n: int) -> EigResult:
    sys = mesh.system
    shift = -1.0 / float(sys.load.sum())
    vals, vecs = _generalized_eigs(sys.stiffness, sys.mass, n, shift)
    return EigResult(vals, vecs, mesh)


def _check_n(n: int) -> None:
    if not 1 <= n <= 20:
        raise ValidationError("number of eigenpairs must be between 1 and 20")


def torsion(K: ConvexPolygon, h_mesh: Optional[float] = None, seed: int = 0) -> TorsionSolution:
    """Torsion function and torsional rigidity ``tau = int u``."""
    return torsion_on_mesh(mesh_for(K, h_mesh, seed))


def dirichlet_eigs(K: ConvexPolygon, n: int, h_mesh: Optional[float] = None, seed: int = 0) -> EigResult:
    _check_n(n)
    return dirichlet_eigs_on_mesh(mesh_for(K, h_mesh, seed), n)


def neumann_eigs(K: ConvexPolygon, n: int, h_mesh: Optional[float] = None, seed: int = 0) -> EigResult:
    _check_n(n)
    return neumann_eigs_on_mesh(mesh_for(K, h_mesh, seed), n)
