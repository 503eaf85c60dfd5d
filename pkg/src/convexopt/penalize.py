"""Volume-constraint handling through the Minkowski interpolation family.

For ``K`` inside ``D`` the bodies ``K_t = (1-t)K + tD`` have area

    f(t) = (1-t)^2 |K| + 2t(1-t) V(K, D) + t^2 |D|,

a quadratic in ``t``, so restoring a target volume is a closed-form root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import geometry as geo
from .errors import ValidationError, VolumeOutOfRange
from .functionals import FunctionalSpec, evaluate
from .geometry import ConvexPolygon


@dataclass(frozen=True, eq=False)
class MinkowskiFamily:
    K: ConvexPolygon
    D: ConvexPolygon
    mixed: float = field(init=False)

    def __post_init__(self):
        if not geo.contains(self.D, self.K, 100.0 * self.D.tol):
            raise ValidationError("the family needs K inside D")
        object.__setattr__(self, "mixed", geo.mixed_area(self.K, self.D))

    @property
    def coefficients(self) -> tuple[float, float, float]:
        """``(c0, c1, c2)`` with ``f(t) = c0 + c1 t + c2 t^2``."""
        a, b, v = geo.area(self.K), geo.area(self.D), self.mixed
        return a, 2.0 * (v - a), a - 2.0 * v + b

    def f(self, t):
        c0, c1, c2 = self.coefficients
        return c0 + t * (c1 + t * c2)

    def df0(self) -> float:
        """``f'(0) = 2(V(K, D) - |K|)``."""
        return self.coefficients[1]

    def linear_growth_interval(self) -> float:
        """Largest ``t0 <= 1`` with ``f(t) - f(0) >= (f'(0)/2) t`` on ``[0, t0]``."""
        _, c1, c2 = self.coefficients
        if c2 >= 0.0:
            return 1.0
        return float(min(1.0, 0.5 * c1 / -c2))


def family_at(fam: MinkowskiFamily, t: float) -> ConvexPolygon:
    """``(1-t)K + tD``."""
    if not 0.0 <= t <= 1.0:
        raise ValidationError("family parameter must lie in [0, 1]")
    if t == 0.0:
        return fam.K
    if t == 1.0:
        return fam.D
    return geo.minkowski_sum(fam.K.scaled(1.0 - t), fam.D.scaled(t))


def restore_volume(fam: MinkowskiFamily, V0: float) -> tuple[float, ConvexPolygon]:
    """Smallest ``t`` in ``[0, 1]`` with ``|K_t| = V0`` and the body ``K_t``."""
    c0, c1, c2 = fam.coefficients
    b = geo.area(fam.D)
    slack = 1e-12 * b
    if not c0 - slack <= V0 <= b + slack:
        raise VolumeOutOfRange(f"target volume {V0!r} outside [{c0!r}, {b!r}]")
    gap = max(0.0, V0 - c0)
    if gap == 0.0:
        return 0.0, fam.K
    disc = max(0.0, c1 * c1 + 4.0 * c2 * gap)
    # citardauq form of the smaller nonnegative root, stable as c2 -> 0
    t = 2.0 * gap / (c1 + math.sqrt(disc)) if c1 + math.sqrt(disc) > 0 else 1.0
    t = min(1.0, max(0.0, t))
    Kt = family_at(fam, t)
    # one Newton step on the actual polygon area absorbs rounding in V(K, D)
    err = geo.area(Kt) - V0
    if abs(err) > 1e-12 * V0 and 0.0 < t < 1.0:
        t = min(1.0, max(0.0, t - err / (c1 + 2.0 * c2 * t)))
        Kt = family_at(fam, t)
    return float(t), Kt


def penalized_objective(
    spec: Optional[FunctionalSpec], Lam: float, V0: float
) -> Callable[[ConvexPolygon], float]:
    """``K -> P(K) + R(K) + Lam * ||K| - V0|``; ``spec=None`` means ``R = 0``."""
    if Lam < 0:
        raise ValidationError("penalty weight must be nonnegative")

    def objective(K: ConvexPolygon) -> float:
        value = geo.perimeter(K)
        if spec is not None:
            value += evaluate(spec, K)
        return value + Lam * abs(geo.area(K) - V0)

    return objective


def calibrate_penalty(
    K0: ConvexPolygon,
    D: ConvexPolygon,
    spec: Optional[FunctionalSpec] = None,
    inner: Optional[ConvexPolygon] = None,
    n_pairs: int = 20,
    seed: int = 0,
) -> float:
    """Penalty weight ``(P(D) - P(K0) + L_R) / (f'(0)/2)``.

    ``L_R`` is the largest empirical Lipschitz ratio of ``R`` over
    ``n_pairs`` nested pairs between ``inner`` (default: ``K0`` shrunk by
    half about its incenter) and ``D``.
    """
    from .estimates import generate_nested_pairs, lipschitz_experiment

    fam = MinkowskiFamily(K0, D)
    growth = 0.5 * fam.df0()
    if growth <= 0:
        raise ValidationError("K0 must be strictly smaller than D")
    lip = 0.0
    if spec is not None and n_pairs > 0:
        if inner is None:
            _, _, c = geo.diameter_inradius(K0)
            inner = K0.scaled(0.5, c)
        pairs = generate_nested_pairs(inner, D, n_pairs, seed)
        lip = lipschitz_experiment(spec, pairs).max_ratio
    return float((geo.perimeter(D) - geo.perimeter(K0) + lip) / growth)


def homothety_penalty(K: ConvexPolygon, spec: Optional[FunctionalSpec] = None, R_value: Optional[float] = None) -> float:
    """Cheap penalty weight from scaling about the incenter.

    Along ``t -> tK`` the objective changes at rate ``P + (k/2) R / |K|``
    per unit area, where ``k`` is the scaling degree of ``R``; twice the
    magnitude of that rate dominates the unpenalized slope.
    """
    A, P = geo.area(K), geo.perimeter(K)
    rate = P / (2.0 * A)
    if spec is not None:
        if R_value is None:
            R_value = evaluate(spec, K)
        k = scaling_degree(spec)
        if not math.isfinite(k):
            k = 4.0
        rate += abs(k * R_value) / (2.0 * A)
    return 2.0 * rate + 1.0 / math.sqrt(A)


def scaling_degree(spec: FunctionalSpec) -> float:
    """Exponent ``k`` with ``R(tK) = t^k R(K)`` (``nan`` for mixed composites)."""
    degrees = {
        "volume": 2.0,
        "perimeter": 1.0,
        "torsion": 4.0,
        "dirichlet_eig": -2.0,
        "neumann_eig": -2.0,
        "riesz": 2.0 + spec.alpha,
        "potential": float("nan"),
        "fraenkel": 0.0,
        "iso_deficit": 0.0,
    }
    if spec.kind != "composite":
        return degrees[spec.kind]
    ks = set()
    for a in spec.args:
        ks.add({"volume": 2.0, "tau": 4.0, "perimeter": 1.0}.get(a, -2.0))
    return ks.pop() if len(ks) == 1 else float("nan")


__all__ = [
    "MinkowskiFamily",
    "family_at",
    "restore_volume",
    "penalized_objective",
    "calibrate_penalty",
    "homothety_penalty",
    "scaling_degree",
]
