"""Shape optimization under convexity constraint in the plane.

Modules: :mod:`~convexopt.geometry` (convex polygons and their
parametrizations), :mod:`~convexopt.fem` (P1 torsion and Laplacian
eigenvalues), :mod:`~convexopt.functionals`, :mod:`~convexopt.estimates`
(Lipschitz and eigenvalue-torsion experiments), :mod:`~convexopt.cutprobe`
(boundary regularity probe), :mod:`~convexopt.penalize` (Minkowski volume
penalty), :mod:`~convexopt.optimize` and :mod:`~convexopt.cli`.
"""

__version__ = "0.1.0"

from .errors import ConvexOptError, NumericalError, ValidationError
from .functionals import FunctionalSpec, evaluate
from .geometry import ConvexPolygon, HalfPlane, RadialBody, SupportBody

__all__ = [
    "__version__",
    "ConvexOptError",
    "NumericalError",
    "ValidationError",
    "FunctionalSpec",
    "evaluate",
    "ConvexPolygon",
    "HalfPlane",
    "RadialBody",
    "SupportBody",
]
