"""Command-line entry point: ``python3 -m metdisc <subcommand> ...``.

Every subcommand writes one JSON report (to ``--out`` or nowhere) and a
short human summary on stdout.  Exit status: 0 when all checks pass, 1 when
a check fails, 2 on unusable input.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .disc_mesh import (
    MeshGeometryError,
    MeshTopologyError,
    SampledLoop,
    boundary_loop,
    chord_arc_constant,
    isoperimetric_lower_bound,
    mesh_area,
    vertex_metric,
)
from .gh_distance import (
    Correspondence,
    distortion,
    gh_exact_small,
    gh_lower_bounds,
    min_epsilon_net,
)
from .intrinsic_disc import (
    PreconditionError,
    factorization_check,
    has_no_bubbles,
    is_monotone,
    verify_intrinsic_isometry,
)
from .io import InputError, dump_json, is_mesh_file, read_distance, read_loop, read_map, read_mesh
from .jacobian_area import functional_report
from .mapping_cylinder import HypothesisError, ResolutionError, build_cylinder, verify_cylinder
from .metric_core import FiniteMetricSpace, MetricValidationError

TWO_PI = 2 * math.pi


@dataclass
class RunConfig:
    subcommand: str
    inputs: dict = field(default_factory=dict)
    budget: int = 0
    seed: int = 0
    tolerance: float = 1e-9
    grid: tuple | None = None
    out: str | None = None
    threads: int | None = None
    options: dict = field(default_factory=dict)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("threads")  # never affects results
        return d


class _Checks:
    def __init__(self):
        self.items = {}

    def add(self, name, passed, value=None, bound=None, **extra):
        self.items[name] = {"passed": bool(passed), "value": value, "bound": bound, **extra}

    def fail(self, name, error):
        self.items[name] = {"passed": False, "error": str(error)}

    @property
    def passed(self):
        return all(c["passed"] for c in self.items.values())


# ---------------------------------------------------------------------- subcommands


def _analyze(cfg: RunConfig, checks: _Checks) -> dict:
    m = read_mesh(cfg.inputs["mesh"])
    space = vertex_metric(m, subdivide=bool(cfg.options.get("subdivide", 0)))
    loop = boundary_loop(m)
    ca = chord_arc_constant(loop, space)
    C, wit = isoperimetric_lower_bound(m, cfg.budget, cfg.seed)
    checks.add("disc_topology", True, value=m.euler_characteristic, bound=1)
    return {
        "n_vertices": m.n_vertices,
        "n_triangles": m.n_triangles,
        "area": mesh_area(m),
        "boundary_length": loop.total_length,
        "boundary_cycle": list(m.boundary_cycle),
        "chord_arc": {"value": ca.value, "infinite": ca.infinite, "witness": ca.witness,
                      "sampling_error": ca.sampling_error},
        "isoperimetric": {"lower_bound": C, "witness_triangles": list(wit.triangles),
                          "witness_area": wit.area, "witness_boundary_length": wit.boundary_length,
                          "budget": cfg.budget},
        "diameter": space.diameter,
    }


def _cylinder(cfg: RunConfig, checks: _Checks) -> dict:
    o = cfg.options
    a, h = cfg.grid or (None, 4)
    src = cfg.inputs.get("base")
    loop_src = cfg.inputs.get("loop", "boundary")
    if src:
        if is_mesh_file(src):
            m = read_mesh(src)
            base = vertex_metric(m)
        else:
            m = None
            base = read_distance(src)
        if loop_src == "boundary":
            if m is None:
                raise InputError(src, "'--loop boundary' needs a mesh base")
            loop = boundary_loop(m)
        else:
            loop = read_loop(loop_src, base)
            m = None  # an arbitrary loop is not the mesh boundary: no collar mesh
        L = o.get("L") or loop.total_length
    else:
        m = None
        if not o.get("L"):
            raise InputError("--L", "a point base needs an explicit loop length")
        L = o["L"]
        base = FiniteMetricSpace.point()
        k = a or 64
        loop = SampledLoop(TWO_PI * np.arange(k) / k, np.zeros(k, dtype=int), L)
    R = o.get("R") or L
    try:
        c = build_cylinder(base, loop, L, R, (a, h), base_mesh=m, validate=o.get("validate", False))
    except (HypothesisError, ResolutionError) as e:
        checks.fail("hypotheses", e)
        return {"L": L, "R": R}
    rep = verify_cylinder(c, cfg.budget, cfg.seed)
    tol = cfg.tolerance
    checks.add("embedding", rep.embedding_error <= tol, rep.embedding_error, tol)
    checks.add("net_radius", rep.net_radius <= rep.net_radius_bound, rep.net_radius, rep.net_radius_bound)
    bound = 1 + TWO_PI / c.grid[0]
    checks.add("gammaR_chord_arc", rep.gammaR_chord_arc <= bound, rep.gammaR_chord_arc, bound)
    if rep.total_area is not None:
        gap = abs(rep.total_area - rep.base_area - c.L * c.R)
        checks.add("collar_area", gap <= tol * max(1.0, c.L * c.R), gap, tol)
    if rep.C_cyl is not None:
        slack = o.get("iso_slack", 0.05)
        checks.add("isoperimetric_transfer", rep.C_cyl <= rep.C_transfer_bound + slack,
                   rep.C_cyl, rep.C_transfer_bound, slack=slack)
    out = rep.as_dict()
    out.update({"L": c.L, "R": c.R, "grid": list(c.grid), "n_points": len(c.space)})
    return out


def _intrinsic(cfg: RunConfig, checks: _Checks) -> dict:
    u = read_map(cfg.inputs["map"])
    mode, cap = cfg.options.get("mode", "exact"), cfg.options.get("cap", 20)
    res = factorization_check(u, mode, cap, cfg.tolerance)
    for name, v in res.violations.items():
        checks.add(f"chain: {name}", v <= res.tolerance, v, res.tolerance)
    mono, mw = is_monotone(u)
    bub, bw = has_no_bubbles(u)
    out = {
        "mode": mode,
        "d_u": res.d_u.dist,
        "pullback": res.pullback,
        "quotient_size": len(res.quotient),
        "projection": res.projection,
        "monotone": {"value": mono, "witness": mw},
        "no_bubbles": {"value": bub, "witness": bw},
    }
    if mode == "exact":
        out["abs_d_u"] = res.abs_d_u.dist
        out["path_abs"] = res.path_abs.dist
    else:
        out["abs_d_u_lower"] = res.abs_d_u.lower
        out["abs_d_u_upper"] = res.abs_d_u.upper
    try:
        iso = verify_intrinsic_isometry(u, cfg.tolerance)
        out["isometry"] = iso.as_dict()
        if cfg.options.get("require_isometry"):
            checks.add("isometry", iso.passed, iso.defect, iso.tolerance)
    except PreconditionError as e:
        out["isometry"] = {"skipped": str(e)}
        if cfg.options.get("require_isometry"):
            checks.fail("isometry", e)
    return out


def _functionals(cfg: RunConfig, checks: _Checks) -> dict:
    u = read_map(cfg.inputs["map"])
    if not u.euclidean:
        raise InputError(cfg.inputs["map"], "functionals need a Euclidean target")
    rep = functional_report(u, cfg.options.get("samples", 100_000), cfg.seed)
    checks.add("area_le_energy", rep.worst_triangle_gap >= 0, rep.worst_triangle_gap, 0.0)
    if rep.multiplicity_area is not None:
        gap = abs(rep.multiplicity_area - rep.area)
        checks.add("area_formula", gap <= 3 * rep.multiplicity_stderr + cfg.tolerance, gap,
                   3 * rep.multiplicity_stderr)
    return rep.as_dict()


def _gh(cfg: RunConfig, checks: _Checks) -> dict:
    X = read_distance(cfg.inputs["x"])
    Y = read_distance(cfg.inputs["y"])
    lower = gh_lower_bounds(X, Y)
    out = {"lower": lower, "sizes": [len(X), len(Y)]}
    if cfg.options.get("mode", "exact") == "exact":
        d, w = gh_exact_small(X, Y, cfg.options.get("cap", 7))
        out.update({"d_gh": d, "witness": [list(p) for p in w.pairs]})
        checks.add("lower_le_exact", lower <= d, lower, d)
    else:
        # any full relation gives an upper bound; use the product relation
        prod = Correspondence(tuple((i, j) for i in range(len(X)) for j in range(len(Y))), len(X), len(Y))
        upper = distortion(prod, X, Y) / 2
        out["upper"] = upper
        checks.add("lower_le_upper", lower <= upper, lower, upper)
    return out


def _net(cfg: RunConfig, checks: _Checks) -> dict:
    X = read_distance(cfg.inputs["x"])
    eps = cfg.options["epsilon"]
    cert = min_epsilon_net(X, eps, cfg.options.get("mode", "greedy"), cfg.options.get("cap", 25))
    checks.add("covering", cert.verify(X), cert.radius, eps)
    return {"epsilon": eps, "size": len(cert.net), "net": list(cert.net), "assignment": list(cert.assignment),
            "radius": cert.radius}


COMMANDS = {
    "analyze": _analyze,
    "cylinder": _cylinder,
    "intrinsic": _intrinsic,
    "functionals": _functionals,
    "gh": _gh,
    "net": _net,
}


def run(cfg: RunConfig) -> dict:
    """Execute one configuration and return the report dictionary."""
    checks = _Checks()
    results = COMMANDS[cfg.subcommand](cfg, checks)
    return {
        "tool": "metdisc",
        "version": __version__,
        "config": cfg.echo(),
        "checks": checks.items,
        "passed": checks.passed,
        "results": results,
    }


# ---------------------------------------------------------------------- argument parsing


def _grid(text: str):
    try:
        a, h = (int(t) for t in text.replace(" ", "").split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like A,H (got {text!r})") from None
    return a, h


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed for randomized steps")
    common.add_argument("--tolerance", type=float, default=1e-9, help="slack for exact checks")
    common.add_argument("--out", help="write the JSON report here")
    common.add_argument("--threads", type=int, help="thread cap for compiled kernels; results do not depend on it")

    p = argparse.ArgumentParser(prog="metdisc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"metdisc {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)

    s = sub.add_parser("analyze", parents=[common], help="area, boundary, chord-arc and isoperimetric bound of a mesh")
    s.add_argument("--mesh", required=True)
    s.add_argument("--budget", type=int, default=0, help="random region-growing runs")
    s.add_argument("--subdivide", type=int, choices=[0, 1], nargs="?", const=1, default=0,
                   help="measure distances after midpoint subdivision")

    s = sub.add_parser("cylinder", parents=[common], help="glue a collar to a mesh or a point and verify it")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--base", "--mesh", dest="base", help="mesh file or distance file")
    g.add_argument("--point", action="store_true", help="use a one-point base")
    s.add_argument("--loop", default="boundary", help="loop JSON file, or 'boundary' for the mesh boundary")
    s.add_argument("--L", type=float, help="loop length parameter (default: boundary length)")
    s.add_argument("--R", type=float, help="collar height (default: L)")
    s.add_argument("--grid", type=_grid, metavar="A,H", help="angular and height samples, e.g. 128,16")
    s.add_argument("--budget", type=int, default=0)
    s.add_argument("--verify", action="store_true", help="also run the O(n^3) metric validation")
    s.add_argument("--iso-slack", type=float, default=0.05)

    s = sub.add_parser("intrinsic", parents=[common], help="pulled-back semimetrics of a PL map")
    s.add_argument("--map", required=True)
    s.add_argument("--mode", choices=["exact", "bounds"], default="exact")
    s.add_argument("--cap", type=int, default=20)
    s.add_argument("--require-isometry", action="store_true")

    s = sub.add_parser("functionals", parents=[common], help="area, energy and multiplicity area of a PL map")
    s.add_argument("--map", required=True)
    s.add_argument("--samples", type=int, default=100_000)

    s = sub.add_parser("gh", parents=[common], help="Gromov-Hausdorff distance of two distance files")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--mode", choices=["exact", "bounds"], default="exact")
    s.add_argument("--cap", type=int, default=7)

    s = sub.add_parser("net", parents=[common], help="epsilon-net of a distance file")
    s.add_argument("--x", required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--mode", choices=["greedy", "exact"], default="greedy")
    s.add_argument("--cap", type=int, default=25)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    v = vars(ns)
    inputs = {k: v[k] for k in ("mesh", "base", "loop", "map", "x", "y") if v.get(k) is not None}
    opts = {}
    for k in ("subdivide", "point", "L", "R", "iso_slack", "mode", "cap", "require_isometry", "samples", "epsilon"):
        if v.get(k) is not None:
            opts[k] = v[k]
    if v.get("verify"):
        opts["validate"] = True
    return RunConfig(
        subcommand=ns.subcommand,
        inputs=inputs,
        budget=v.get("budget") or 0,
        seed=ns.seed,
        tolerance=ns.tolerance,
        grid=v.get("grid"),
        out=ns.out,
        threads=ns.threads,
        options=opts,
    )


def _summary(report: dict) -> str:
    lines = [f"metdisc {report['config']['subcommand']}: {'PASS' if report['passed'] else 'FAIL'}"]
    for name, c in report["checks"].items():
        status = "pass" if c["passed"] else "FAIL"
        detail = c.get("error") or f"value={c.get('value')!r} bound={c.get('bound')!r}"
        lines.append(f"  [{status}] {name}: {detail}")
    return "\n".join(lines)


INPUT_ERRORS = (InputError, MeshTopologyError, MeshGeometryError, MetricValidationError)


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    cfg = config_from_args(ns)
    if cfg.threads:
        import numba

        numba.set_num_threads(max(1, min(cfg.threads, numba.config.NUMBA_NUM_THREADS)))
    try:
        report = run(cfg)
    except INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:  # size caps, bad parameters
        print(f"error: {e}", file=sys.stderr)
        return 2
    text = dump_json(report)
    if cfg.out:
        Path(cfg.out).write_text(text)
    print(_summary(report))
    return 0 if report["passed"] else 1
