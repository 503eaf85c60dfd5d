"""JSON input and output: bodies, problems and reports.

Reports are written canonically (sorted keys, floats with 17 significant
digits, non-finite numbers as ``null``) and atomically, so identical runs
give byte-identical files.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from . import geometry as geo
from .errors import ValidationError
from .functionals import FunctionalSpec
from .geometry import ConvexPolygon, RadialBody, SupportBody

PathLike = Union[str, os.PathLike]


# ---------------------------------------------------------------------------
# canonical JSON


def _encode(obj: Any, out: list) -> None:
    if obj is None or obj is True or obj is False:
        out.append(json.dumps(obj))
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        out.append("%.17g" % x if math.isfinite(x) else "null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for k, key in enumerate(sorted(obj, key=str)):
            if k:
                out.append(",")
            out.append(json.dumps(str(key), ensure_ascii=False))
            out.append(":")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        out.append("[")
        for k, item in enumerate(seq):
            if k:
                out.append(",")
            _encode(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Canonical JSON text with a trailing newline."""
    out: list = []
    _encode(obj, out)
    return "".join(out) + "\n"


def write_text_atomic(path: PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: PathLike, obj: Any) -> None:
    write_text_atomic(path, dumps(obj))


def read_json(path: PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ValidationError(f"no such file: {path}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc


# ---------------------------------------------------------------------------
# bodies


def _float_array(value, name: str, shape_tail: tuple = ()) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} must be numeric") from exc
    if arr.ndim != 1 + len(shape_tail) or arr.shape[1:] != shape_tail:
        raise ValidationError(f"{name} has shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def body_from_dict(d: dict) -> tuple[ConvexPolygon, Union[ConvexPolygon, SupportBody, RadialBody]]:
    """Parse a body object; returns the polygon and the original representation.

    Polygon vertices must already be convex (either orientation); they are
    not silently hulled.
    """
    if not isinstance(d, dict):
        raise ValidationError("body must be a JSON object")
    kind = d.get("kind")
    if kind == "polygon":
        v = _float_array(d.get("vertices"), "vertices", (2,))
        if len(v) >= 3:
            signed = 0.5 * float(np.dot(v[:, 0], np.roll(v[:, 1], -1)) - np.dot(np.roll(v[:, 0], -1), v[:, 1]))
            if signed < 0:
                v = v[::-1]
        geo.check_convex(v)
        K = ConvexPolygon(v)
        return K, K
    if kind == "support":
        h = _float_array(d.get("h"), "h")
        if "m" in d and int(d["m"]) != len(h):
            raise ValidationError(f"m={d['m']} but {len(h)} support values")
        S = SupportBody(h)
        if not S.is_convex():
            raise ValidationError("support values violate discrete convexity")
        return geo.from_support(S), S
    if kind == "radial":
        rho = _float_array(d.get("rho"), "rho")
        if "m" in d and int(d["m"]) != len(rho):
            raise ValidationError(f"m={d['m']} but {len(rho)} radial values")
        origin = _float_array(d.get("origin"), "origin")
        if origin.shape != (2,):
            raise ValidationError("origin must be a point")
        R = RadialBody(tuple(origin), rho)
        pts = np.asarray(origin) + rho[:, None] * np.column_stack([np.cos(R.angles()), np.sin(R.angles())])
        geo.check_convex(pts)
        return geo.from_radial(R), R
    raise ValidationError(f"unknown body kind {kind!r}")


def body_to_dict(body: Union[ConvexPolygon, SupportBody, RadialBody]) -> dict:
    if isinstance(body, ConvexPolygon):
        return {"kind": "polygon", "vertices": body.vertices.tolist()}
    if isinstance(body, SupportBody):
        return {"kind": "support", "m": body.m, "h": body.h.tolist()}
    if isinstance(body, RadialBody):
        return {"kind": "radial", "origin": list(body.origin), "m": body.m, "rho": body.rho.tolist()}
    raise TypeError(f"not a body: {type(body).__name__}")


def load_body(path: PathLike):
    return body_from_dict(read_json(path))


def save_body(path: PathLike, body) -> None:
    write_json(path, body_to_dict(body))


# ---------------------------------------------------------------------------
# problems


SOLVER_KEYS = ("m", "budget", "max_iter", "rel_tol", "fd_step", "h_mesh", "seed", "probe_points", "probe_m")


def problem_from_dict(d: dict):
    """``(Problem, SolverOptions, init SupportBody or None)`` from a problem object.

    Keys: ``name``, ``R`` (functional spec or null), ``volume``,
    ``perimeter``, ``box`` (body), ``penalty``, ``init`` (support body) and
    ``solver`` (overrides of :class:`~convexopt.optimize.SolverOptions`).
    """
    from .optimize import Problem, SolverOptions

    if not isinstance(d, dict):
        raise ValidationError("problem must be a JSON object")
    unknown = set(d) - {"name", "R", "volume", "perimeter", "box", "penalty", "init", "solver", "notes"}
    if unknown:
        raise ValidationError(f"unknown problem keys {sorted(unknown)}")
    R = FunctionalSpec.from_dict(d["R"]) if d.get("R") is not None else None
    box = body_from_dict(d["box"])[0] if d.get("box") is not None else None

    def number(key):
        v = d.get(key)
        if v is None:
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"{key} must be a number")
        return float(v)

    problem = Problem(
        R=R,
        box=box,
        volume=number("volume"),
        perimeter=number("perimeter"),
        penalty=number("penalty"),
        name=str(d.get("name", "problem")),
    )
    solver = d.get("solver", {}) or {}
    if not isinstance(solver, dict) or set(solver) - set(SOLVER_KEYS):
        raise ValidationError(f"solver options must be an object with keys from {SOLVER_KEYS}")
    opts = SolverOptions(**solver)
    init = None
    if d.get("init") is not None:
        _, rep = body_from_dict(d["init"])
        if not isinstance(rep, SupportBody):
            raise ValidationError("init must be a support body")
        init = rep
    return problem, opts, init


def problem_to_dict(problem, opts=None, init: Optional[SupportBody] = None) -> dict:
    d = {
        "name": problem.name,
        "R": problem.R.to_dict() if problem.R is not None else None,
        "volume": problem.volume,
        "perimeter": problem.perimeter,
        "box": body_to_dict(problem.box) if problem.box is not None else None,
        "penalty": problem.penalty,
    }
    if opts is not None:
        d["solver"] = {k: getattr(opts, k) for k in SOLVER_KEYS}
    if init is not None:
        d["init"] = body_to_dict(init)
    return d
