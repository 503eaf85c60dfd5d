"""Command-line runner: ``convexopt <command> [options]``.

Every command computes its full result in memory, renders any figure, and
only then writes the report JSON (config embedded, no timestamps) and SVG
atomically into ``--out``. Exit status is 0 on success, 2 on invalid input
and 3 on numerical failure; failures print one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from . import geometry as geo
from .errors import NumericalError, ValidationError
from .formats import body_to_dict, dumps, load_body, problem_from_dict, problem_to_dict, read_json, write_text_atomic
from .functionals import FunctionalSpec

log = logging.getLogger("convexopt")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

UINT64_MAX = 2**64 - 1


class _Parser(argparse.ArgumentParser):
    """Argument errors become :class:`ValidationError` so they share the JSON error path."""

    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _seed(text: str) -> int:
    try:
        v = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= v <= UINT64_MAX:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _emit(out_dir: Path, stem: str, report: dict, svg_text: Optional[str]) -> None:
    text = dumps(report)
    write_text_atomic(out_dir / f"{stem}.json", text)
    if svg_text is not None:
        write_text_atomic(out_dir / f"{stem}.svg", svg_text)
    print(str(out_dir / f"{stem}.json"))


def _wrap(command: str, config: dict, result: dict) -> dict:
    return {"command": command, "version": __version__, "config": config, "result": result}


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    from .optimize import perimeter_constrained_eig, solve
    from .svg import render_report

    raw = read_json(args.problem)
    if args.seed is not None or args.budget is not None or args.m is not None or args.h_mesh is not None:
        raw = dict(raw)
        solver = dict(raw.get("solver") or {})
        for key, value in (("seed", args.seed), ("budget", args.budget), ("m", args.m), ("h_mesh", args.h_mesh)):
            if value is not None:
                solver[key] = value
        raw["solver"] = solver
    eig_n = raw.pop("perimeter_eig", None) if isinstance(raw, dict) else None
    problem, opts, init = problem_from_dict(raw)
    if eig_n is not None:
        if problem.perimeter is None or problem.R is not None or problem.box is not None:
            raise ValidationError("perimeter_eig needs a perimeter and no R or box")
        res = perimeter_constrained_eig(int(eig_n), problem.perimeter, budget=opts.budget, options=opts)
    else:
        res = solve(problem, init=init, options=opts)
    config = problem_to_dict(problem, opts, init)
    if eig_n is not None:
        config["perimeter_eig"] = int(eig_n)
    report = _wrap("solve", config, res.to_dict())
    _emit(Path(args.out), problem.name, report, render_report(report))
    return EXIT_OK


def cmd_probe(args) -> int:
    from .cutprobe import probe
    from .svg import probe_svg

    K, _ = load_body(args.body)
    r_grid = None
    if args.r_min is not None or args.r_max is not None:
        if args.r_min is None or args.r_max is None or not args.r_min < args.r_max:
            raise ValidationError("give both --r-min < --r-max")
        r_grid = np.geomspace(args.r_min, args.r_max, args.r_count)
    rep = probe(K, args.s, r_grid)
    config = {"body": body_to_dict(K), "s": args.s, "r_grid": None if r_grid is None else r_grid.tolist()}
    report = _wrap("probe", config, rep.to_dict())
    _emit(Path(args.out), "probe", report, probe_svg(rep.to_dict(), K.vertices))
    return EXIT_OK


def _pair_config(args) -> dict:
    return {
        "pairs": args.pairs,
        "seed": args.seed,
        "inner_radius": args.inner_radius,
        "outer_radius": args.outer_radius,
        "polygon_m": args.polygon_m,
    }


def _pairs(args):
    from .estimates import generate_nested_pairs

    if not args.inner_radius < args.outer_radius:
        raise ValidationError("inner radius must be smaller than outer radius")
    d_in = geo.disk(args.inner_radius, args.polygon_m)
    d_out = geo.disk(args.outer_radius, args.polygon_m)
    return generate_nested_pairs(d_in, d_out, args.pairs, seed=args.seed)


def _functional(text: str, alpha: float, h_mesh: Optional[float]) -> FunctionalSpec:
    names = {"volume": ("volume", 1), "tau": ("torsion", 1), "torsion": ("torsion", 1), "riesz": ("riesz", 1)}
    if text in names:
        kind, n = names[text]
    elif text.startswith("lambda") and text[6:].isdigit():
        kind, n = "dirichlet_eig", int(text[6:])
    elif text.startswith("mu") and text[2:].isdigit():
        kind, n = "neumann_eig", int(text[2:])
    else:
        raise ValidationError(f"unknown functional {text!r}; use volume, tau, riesz, lambda<n> or mu<n>")
    return FunctionalSpec(kind, n=n, alpha=alpha, h_mesh=h_mesh)


def cmd_verify_lipschitz(args) -> int:
    from .estimates import lipschitz_experiment
    from .svg import render_report

    spec = _functional(args.functional, args.alpha, args.h_mesh)
    pairs = _pairs(args)
    rep = lipschitz_experiment(spec, pairs, workers=args.workers)
    config = {**_pair_config(args), "functional": spec.to_dict()}
    report = _wrap("verify-lipschitz", config, rep.to_dict())
    _emit(Path(args.out), f"lipschitz_{args.functional}", report, render_report(report))
    return EXIT_OK


def cmd_eig_torsion_check(args) -> int:
    from .estimates import eig_torsion_bound_check
    from .svg import render_report

    pairs = _pairs(args)
    rep = eig_torsion_bound_check(pairs, args.n, h_mesh=args.h_mesh, tolerance=args.tolerance, workers=args.workers)
    config = {**_pair_config(args), "n": args.n, "h_mesh": args.h_mesh, "tolerance": args.tolerance}
    report = _wrap("eig-torsion-check", config, rep.to_dict())
    _emit(Path(args.out), f"eig_torsion_n{args.n}", report, render_report(report))
    return EXIT_OK


def cmd_stadium_constant(args) -> int:
    from .optimize import stadium_constant
    from .svg import render_report

    res = stadium_constant(budget=args.budget, lo=args.lo, hi=args.hi, m=args.m, tol=args.tol)
    config = {"budget": args.budget, "lo": args.lo, "hi": args.hi, "m": args.m, "tol": args.tol}
    report = _wrap("stadium-constant", config, res.to_dict())
    _emit(Path(args.out), "stadium_constant", report, render_report(report))
    return EXIT_OK


def cmd_render(args) -> int:
    from .svg import render_report

    obj = read_json(args.input)
    if not isinstance(obj, dict):
        raise ValidationError("input must be a JSON object")
    body_vertices = None
    if obj.get("kind") in ("polygon", "support", "radial"):
        from .formats import body_from_dict

        K, _ = body_from_dict(obj)
        obj = body_to_dict(K)
    elif obj.get("command") == "probe":
        from .formats import body_from_dict

        body_vertices = body_from_dict(obj["config"]["body"])[0].vertices
    try:
        text = render_report(obj, body_vertices)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"cannot render {args.input}: {exc}") from exc
    out = Path(args.output) if args.output else Path(args.input).with_suffix(".svg")
    write_text_atomic(out, text)
    print(str(out))
    return EXIT_OK


# ---------------------------------------------------------------------------
# self test


def _self_checks() -> list[tuple[str, Callable[[], tuple[bool, str]]]]:
    from . import fem
    from .cutprobe import probe
    from .optimize import Problem, SolverOptions, disk_distance, solve, stadium_ratio
    from .penalize import MinkowskiFamily, restore_volume

    def stadium():
        r = stadium_ratio(3.75, 1024)[0]
        return abs(r - 0.405585) < 2e-3, f"D/alpha^2 at s=3.75: {r:.6f}"

    def fem_square():
        lam = fem.dirichlet_eigs(geo.unit_square(), 1, 0.03).values[0]
        return abs(lam / (2 * math.pi**2) - 1) < 0.01, f"lambda1(square) = {lam:.5f}"

    def mixed():
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(20):
            A = geo.random_convex_polygon(rng, 10)
            B = geo.random_convex_polygon(rng, 10)
            S = geo.minkowski_sum(A, B)
            worst = max(worst, abs(geo.perimeter(S) - geo.perimeter(A) - geo.perimeter(B)))
            worst = max(worst, abs(geo.area(S) - geo.area(A) - 2 * geo.mixed_area(A, B) - geo.area(B)))
        return worst < 1e-9, f"worst Minkowski identity error {worst:.2e}"

    def penalty():
        fam = MinkowskiFamily(geo.unit_square(), geo.rectangle(-0.5, -0.5, 1.5, 1.5))
        t, _ = restore_volume(fam, 2.25)
        return abs(t - 0.5) < 1e-12 and abs(fam.f(0.3) - 1.69) < 1e-12, f"t = {t:.15f}"

    def cut():
        d = probe(geo.disk(1.0, 2**16), 0.0, np.geomspace(0.02, 0.2, 8))
        c = probe(geo.unit_square(), 0.0)
        ok = abs(d.slope - 2) < 0.05 and abs(c.slope - 1) < 0.05 and c.classification == "corner_like"
        return ok, f"disk slope {d.slope:.4f}, corner slope {c.slope:.4f}"

    def isoperimetric():
        res = solve(Problem(volume=math.pi, name="iso"), options=SolverOptions(m=48, max_iter=60))
        p = geo.perimeter(res.body)
        return p <= 2 * math.pi * (1 + 5e-3), f"P = {p:.6f}, d_H to disk {disk_distance(res.body):.2e}"

    def determinism():
        from .estimates import generate_nested_pairs, lipschitz_experiment

        spec = FunctionalSpec("volume")
        texts = []
        for _ in range(2):
            pairs = generate_nested_pairs(geo.disk(0.3, 32), geo.disk(2.0, 32), 10, seed=11)
            texts.append(dumps(lipschitz_experiment(spec, pairs).to_dict()))
        return texts[0] == texts[1], f"{len(texts[0])} bytes"

    return [
        ("stadium ratio", stadium),
        ("FEM lambda1 of the unit square", fem_square),
        ("Minkowski identities", mixed),
        ("volume restoration", penalty),
        ("cut probe disk and corner", cut),
        ("isoperimetric solve", isoperimetric),
        ("byte-identical reports", determinism),
    ]


def self_test() -> int:
    t0 = time.perf_counter()
    failed = 0
    for name, check in _self_checks():
        t = time.perf_counter()
        try:
            ok, detail = check()
        except Exception as exc:  # a self-test reports every failure, whatever its type
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail} ({time.perf_counter() - t:.1f} s)")
    print(f"{'all checks passed' if not failed else f'{failed} checks failed'} in {time.perf_counter() - t0:.1f} s")
    return EXIT_OK if not failed else EXIT_NUMERICAL


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="convexopt", description="Shape optimization under convexity constraint in the plane.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--self-test", action="store_true", help="run the fast acceptance subset and exit")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def pair_options(sp, pairs):
        sp.add_argument("--pairs", type=_positive_int, default=pairs, help=f"number of nested pairs (default {pairs})")
        sp.add_argument("--seed", type=_seed, default=0, help="uint64 sampler seed (default 0)")
        sp.add_argument("--inner-radius", type=_positive_float, default=0.3, help="radius of D' (default 0.3)")
        sp.add_argument("--outer-radius", type=_positive_float, default=2.0, help="radius of D (default 2)")
        sp.add_argument("--polygon-m", type=_positive_int, default=64, help="sides of the bounding disks (default 64)")
        sp.add_argument("--h-mesh", type=_positive_float, default=None, help="FEM mesh size (default inradius/20)")
        sp.add_argument("--workers", type=_positive_int, default=None, help="threads (default CONVEXOPT_THREADS or 1)")
        sp.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("solve", help="run an optimization problem file")
    s.add_argument("--problem", required=True, help="problem JSON")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--seed", type=_seed, default=None, help="override the solver seed")
    s.add_argument("--budget", type=_positive_int, default=None, help="override the FEM-solve budget")
    s.add_argument("--m", type=_positive_int, default=None, help="override the support grid size")
    s.add_argument("--h-mesh", type=_positive_float, default=None, help="override the FEM mesh size")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("probe", help="cut-probe a body at a boundary point")
    s.add_argument("--body", required=True, help="body JSON")
    s.add_argument("--s", type=float, default=0.0, help="boundary parameter in [0, 1) (default 0)")
    s.add_argument("--r-min", type=_positive_float, default=None, help="smallest cut radius")
    s.add_argument("--r-max", type=_positive_float, default=None, help="largest cut radius")
    s.add_argument("--r-count", type=_positive_int, default=12, help="number of radii (default 12)")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_probe)

    s = sub.add_parser("verify-lipschitz", help="Lipschitz ratios of a functional over random nested pairs")
    s.add_argument("--functional", default="tau", help="volume, tau, riesz, lambda<n> or mu<n> (default tau)")
    s.add_argument("--alpha", type=float, default=1.0, help="Riesz exponent (default 1)")
    pair_options(s, 200)
    s.set_defaults(func=cmd_verify_lipschitz)

    s = sub.add_parser("eig-torsion-check", help="eigenvalue-torsion bound over random nested pairs")
    s.add_argument("--n", type=_positive_int, default=1, help="eigenvalue index (default 1)")
    s.add_argument("--tolerance", type=float, default=0.05, help="relative slack (default 0.05)")
    pair_options(s, 100)
    s.set_defaults(func=cmd_eig_torsion_check)

    s = sub.add_parser("stadium-constant", help="minimize D/alpha^2 over stadiums")
    s.add_argument("--budget", type=_positive_int, default=40, help="max evaluations (default 40)")
    s.add_argument("--lo", type=_positive_float, default=0.01, help="smallest centre distance (default 0.01)")
    s.add_argument("--hi", type=_positive_float, default=8.0, help="largest centre distance (default 8)")
    s.add_argument("--m", type=_positive_int, default=4096, help="polygon sides (default 4096)")
    s.add_argument("--tol", type=_positive_float, default=1e-3, help="bracket width to stop at (default 1e-3)")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_stadium_constant)

    s = sub.add_parser("render", help="SVG for a body or report JSON")
    s.add_argument("input", help="body or report JSON")
    s.add_argument("-o", "--output", default=None, help="SVG path (default: input with .svg suffix)")
    s.set_defaults(func=cmd_render)
    return p


def _fail(exc: BaseException, code: int) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ValidationError as exc:
        return _fail(exc, EXIT_INVALID)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr, format="%(name)s: %(message)s")
    if args.self_test:
        return self_test()
    if args.command is None:
        return _fail(ValidationError("no command given; see --help"), EXIT_INVALID)
    try:
        return args.func(args)
    except ValidationError as exc:
        return _fail(exc, EXIT_INVALID)
    except NumericalError as exc:
        return _fail(exc, EXIT_NUMERICAL)
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        return _fail(exc, EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())
