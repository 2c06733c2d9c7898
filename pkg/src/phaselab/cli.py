"""Command-line front end: ``phaselab {beam,tie,tpe-char,tpe-visc,hybrid,report}``.

Exit codes: 0 success, 2 invalid configuration, 3 solver failure
(non-convergence, rejected step, blow-up), 4 I/O error. Every command writes
``manifest.json`` into ``--out``, also on failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import math
import re
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .beams import (
    GaussianBeamParams,
    PlaneWaveParams,
    beam_axial_derivatives,
    beam_fields,
    beam_stack,
    make_beam,
)
from .characteristics import (
    AnalyticIHat,
    InitialSurfaceData,
    ZeroIHat,
    characteristic_fan,
    constant_intensity_solution,
    seed_grid,
    seed_ring,
    write_trajectories_csv,
)
from .errors import (
    BlowUp,
    NotConverged,
    PhaseLabError,
    StepRejected,
)
from .fieldio import read_field, write_field, write_stack
from .grid import FieldStack, Grid2D, ScalarField2D, compute_i_hat, field_error_norms
from .tie import DirichletBC, TieProblem, parse_bc, solve_tie, solve_tie_teague
from .viscosity import (
    ViscosityProblem,
    hybrid_pipeline,
    viscosity_error_report,
    viscosity_march,
    write_error_report,
)

log = logging.getLogger("phaselab")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4


class InvalidConfig(PhaseLabError, ValueError):
    """Bad command-line or config-file value; ``key`` names the offender."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


_PI_RE = re.compile(r"^([+-]?[\d.]*)\s*\*?\s*pi(?:\s*/\s*([\d.]+))?$")


def parse_number(text, key="value") -> float:
    """Float, or a multiple of pi such as ``3pi/2`` or ``-pi``."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower()
    m = _PI_RE.match(s)
    if m:
        num = m.group(1)
        coef = float(num) if num not in ("", "+", "-") else (-1.0 if num == "-" else 1.0)
        den = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / den
    try:
        return float(s)
    except ValueError:
        raise InvalidConfig(key, f"cannot parse {text!r} as a number") from None


def parse_floats(text, n=None, key="value") -> list[float]:
    try:
        vals = [parse_number(t, key) for t in str(text).split(",") if t.strip()]
    except InvalidConfig as exc:
        raise InvalidConfig(key, f"cannot parse {text!r}") from exc
    if n is not None and len(vals) != n:
        raise InvalidConfig(key, f"expected {n} comma-separated numbers, got {text!r}")
    return vals


# --- argument parsing -------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key = value file; flags override it")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--grid", type=int, default=129, help="nodes per axis")
    p.add_argument("--domain", default="0,1,0,1", help="xmin,xmax,ymin,ymax")
    p.add_argument("--tol", type=float, default=1e-10, help="CG relative tolerance")
    p.add_argument("--truth", action="store_true", help="compare against the analytic beam")
    p.add_argument("-v", "--verbose", action="store_true")


def _beam_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=["plane-wave", "gaussian"], default="gaussian")
    p.add_argument("--xi", default="1,1", help="plane-wave spatial frequency")
    p.add_argument("--k", type=float, default=1.0, help="wavenumber")
    p.add_argument("--zr", type=float, default=1.0, help="Gaussian Rayleigh range")
    p.add_argument("--i0", type=float, default=1.0, help="Gaussian amplitude")


def _march_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, default=0.05, help="viscosity")
    p.add_argument("--dz", type=float, default=0.01, help="z step")
    p.add_argument("--zend", type=float, default=1.0, help="final z")
    p.add_argument("--h", default=None, help="lateral boundary: const:C | truth")
    p.add_argument("--ihat", choices=["analytic", "fd", "zero"], default="analytic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phaselab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("beam", help="sample an analytic beam to .fld files")
    _common(p)
    _beam_flags(p)
    p.add_argument("--z", type=float, default=0.0)
    p.add_argument("--zlist", default=None, help="comma-separated uniform z values for stacks")

    p = sub.add_parser("tie", help="solve the TIE on one plane")
    _common(p)
    _beam_flags(p)
    p.add_argument("--z", type=float, default=0.0)
    p.add_argument("--bc", default="ground-truth", help="zero | constant:C | floor10x | sin10 | sin:A[,F] | gaussian | ground-truth | file:PATH")
    p.add_argument("--teague", action="store_true", help="also run the two-Poisson route")
    p.add_argument("--intensity", type=Path, help="intensity .fld (instead of the beam)")
    p.add_argument("--iz", type=Path, help="I_z .fld accompanying --intensity")

    p = sub.add_parser("tpe-char", help="trace TPE characteristics")
    _common(p)
    _beam_flags(p)
    p.add_argument("--g", default=None, help="initial phase: affine:A,B,C | const:C | truth")
    p.add_argument("--ihat", choices=["analytic", "zero"], default="analytic")
    p.add_argument("--seeds", type=int, default=5, help="n x n seed lattice on the domain")
    p.add_argument("--ring", default=None, help="RADIUS,COUNT seeds on a centred ring instead")
    p.add_argument("--dtau", type=float, default=1e-3)
    p.add_argument("--zend", type=float, default=1.0)
    p.add_argument("--no-clip", action="store_true", help="do not stop at the domain box")

    p = sub.add_parser("tpe-visc", help="viscosity march from a given initial phase")
    _common(p)
    _beam_flags(p)
    _march_flags(p)
    p.add_argument("--g", default=None, help="initial phase: const:C | truth | file:PATH")

    p = sub.add_parser("hybrid", help="TIE on z=0 then viscosity march")
    _common(p)
    _beam_flags(p)
    _march_flags(p)
    p.add_argument("--bc", default="ground-truth")

    p = sub.add_parser("report", help="plot-ready CSV and norms for .fld files")
    _common(p)
    p.add_argument("--field", type=Path, help="field to export")
    p.add_argument("--reference", type=Path, help="reference field for error norms")
    p.add_argument("--sweep", choices=["ihat", "dz", "tie"], default=None, help="convergence table")
    return parser


def _read_config(path: Path) -> dict:
    cp = configparser.ConfigParser()
    cp.read_string("[run]\n" + path.read_text())
    out = {}
    for key, val in cp["run"].items():
        out[key.replace("-", "_")] = val.strip().strip('"').strip("'")
    return out


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        file_values = _read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, val in file_values.items():
            if key not in known:
                raise InvalidConfig(key, "unknown configuration key")
            action = known[key]
            if action.type is not None and val is not None:
                val = action.type(val)
            elif isinstance(action, argparse._StoreTrueAction):
                val = val.lower() in ("1", "true", "yes", "on")
            defaults[key] = val
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


# --- helpers ----------------------------------------------------------------


def _grid(args) -> Grid2D:
    bounds = parse_floats(args.domain, 4, "domain")
    if args.grid < 3:
        raise InvalidConfig("grid", "need at least 3 nodes per axis")
    try:
        return Grid2D(args.grid, args.grid, *bounds)
    except PhaseLabError as exc:
        raise InvalidConfig("domain", str(exc)) from exc


def _beam(args):
    try:
        if args.model == "plane-wave":
            return make_beam("plane-wave", xi=tuple(parse_floats(args.xi, 2, "xi")), k=args.k)
        return make_beam("gaussian", z_R=args.zr, k=args.k, I0=args.i0)
    except PhaseLabError as exc:
        raise InvalidConfig("model", str(exc)) from exc


def _beam_desc(beam) -> dict:
    if isinstance(beam, PlaneWaveParams):
        return {"model": "plane-wave", "xi": list(beam.xi), "k": beam.k}
    return {"model": "gaussian", "z_R": beam.z_R, "k": beam.k, "I0": beam.I0}


def _norms(e) -> dict:
    return {k: (bool(v) if k == "absolute" else float(v)) for k, v in e._asdict().items()}


def _z_steps(zend, dz, key="zend"):
    n = int(round(zend / dz))
    if n < 1 or abs(n * dz - zend) > 1e-12 * max(1.0, zend):
        raise InvalidConfig(key, f"{zend} is not a positive multiple of dz={dz}")
    return n


def _phase_spec(text, beam, grid, key):
    """``const:C`` | ``truth`` | ``file:PATH`` -> callable ``(x, y, z)`` or field."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind in ("const", "constant"):
        return parse_number(arg, key)
    if kind in ("truth", "ground-truth"):
        return beam.phase
    if kind == "file":
        return read_field(Path(arg))
    raise InvalidConfig(key, f"unknown phase specification {text!r}")


def _default_phase(beam) -> str:
    return "const:3pi/2" if isinstance(beam, GaussianBeamParams) else "truth"


def _ihat_for(args, beam, grid):
    if args.ihat == "zero":
        return ZeroIHat()
    if args.ihat == "analytic":
        return AnalyticIHat(beam)
    # finite differences of the sampled intensity at each march level
    n = _z_steps(args.zend, args.dz)
    zs = [i * args.dz for i in range(n + 1)]
    I_stack, _ = beam_stack(beam, grid, zs)
    return FieldStack(tuple(compute_i_hat(f) for f in I_stack))


def _truth_stack(beam, stack: FieldStack) -> FieldStack:
    return FieldStack(tuple(beam_fields(beam, stack.grid, f.z)[1] for f in stack))


def _write_long_csv(path: Path, f: ScalarField2D) -> Path:
    X, Y = f.grid.mesh()
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "value"])
        for x, y, v in zip(X.ravel(), Y.ravel(), f.values.ravel()):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(v))])
    return path


# --- commands -----------------------------------------------------------------


def cmd_beam(args, m: dict) -> None:
    grid = _grid(args)
    beam = _beam(args)
    m["beam"] = _beam_desc(beam)
    I, phi = beam_fields(beam, grid, args.z)
    m["files"] += [str(write_field(args.out / "I.fld", I)), str(write_field(args.out / "phi.fld", phi))]
    if args.zlist:
        zs = parse_floats(args.zlist, key="zlist")
        try:
            Is, phis = beam_stack(beam, grid, zs)
        except PhaseLabError as exc:
            raise InvalidConfig("zlist", str(exc)) from exc
        m["files"] += [str(p) for p in write_stack(args.out / "I_stack", Is, "I")]
        m["files"] += [str(p) for p in write_stack(args.out / "phi_stack", phis, "phi")]


def cmd_tie(args, m: dict) -> None:
    grid = _grid(args)
    truth = None
    if args.intensity is not None:
        I = read_field(args.intensity)
        if args.iz is None:
            raise InvalidConfig("iz", "--intensity needs a matching --iz field")
        Iz = read_field(args.iz)
        k = args.k
        m["inputs"] = {"intensity": str(args.intensity), "iz": str(args.iz)}
    else:
        beam = _beam(args)
        m["beam"] = _beam_desc(beam)
        I, truth = beam_fields(beam, grid, args.z)
        Iz = beam_axial_derivatives(beam, grid, args.z)["I_z"]
        k = beam.k
    try:
        bc = parse_bc(args.bc, truth)
    except PhaseLabError as exc:
        raise InvalidConfig("bc", str(exc)) from exc
    m["bc"] = bc.describe()
    problem = TieProblem(I, Iz, k, bc)
    phi, rep = solve_tie(problem, tol=args.tol, full_output=True)
    m["stages"]["tie"] = {"iterations": rep.iterations, "residual_rel": rep.final_residual_rel}
    m["files"].append(str(write_field(args.out / "phi.fld", phi)))
    if args.teague:
        phi_t, (r1, r2) = solve_tie_teague(problem, tol=args.tol, full_output=True)
        m["stages"]["teague"] = {"iterations": [r1.iterations, r2.iterations]}
        m["files"].append(str(write_field(args.out / "phi_teague.fld", phi_t)))
        m["norms"]["teague_vs_direct_linf"] = float(np.max(np.abs(phi_t.values - phi.values)))
    if args.truth and truth is not None:
        err = phi.with_values(phi.values - truth.values)
        m["files"].append(str(write_field(args.out / "error.fld", err)))
        m["norms"]["direct"] = _norms(field_error_norms(phi, truth))
        if args.teague:
            m["norms"]["teague"] = _norms(field_error_norms(phi_t, truth))


def cmd_tpe_char(args, m: dict) -> None:
    grid = _grid(args)
    beam = _beam(args)
    m["beam"] = _beam_desc(beam)
    ihat = ZeroIHat() if args.ihat == "zero" else AnalyticIHat(beam)
    if args.g:
        gspec = args.g
    elif isinstance(beam, PlaneWaveParams):
        gspec = "affine:{},{},0".format(*beam.xi)
    else:
        gspec = "const:3pi/2"
    kind, _, arg = gspec.partition(":")
    affine = None
    if kind == "affine":
        affine = parse_floats(arg, 3, "g")
        data = InitialSurfaceData.affine(*affine, k=beam.k)
    elif kind in ("const", "constant"):
        affine = [0.0, 0.0, parse_number(arg, "g")]
        data = InitialSurfaceData.constant(affine[2], k=beam.k)
    elif kind == "truth":
        phase0 = beam_fields(beam, grid, 0.0)[1]
        data = InitialSurfaceData.from_field(phase0, k=beam.k)
    else:
        raise InvalidConfig("g", f"unknown initial phase {gspec!r}")
    if args.ring:
        r, count = parse_floats(args.ring, 2, "ring")
        cx = 0.5 * (grid.x_min + grid.x_max)
        cy = 0.5 * (grid.y_min + grid.y_max)
        seeds = seed_ring(r, int(count), (cx, cy))
    else:
        if args.seeds < 1:
            raise InvalidConfig("seeds", "empty seed list")
        seeds = seed_grid(grid.bounds, args.seeds)
    if len(seeds) == 0:
        raise InvalidConfig("seeds", "empty seed list")
    box = None if args.no_clip else (*grid.bounds, 0.0, args.zend)
    tau_end = args.zend / (2.0 * beam.k)
    fan = characteristic_fan(seeds, data, ihat, tau_end, args.dtau, box)
    m["config_resolved"] = {"g": gspec, "ihat": args.ihat, "tau_end": tau_end, "n_seeds": len(seeds)}
    m["stages"]["fan"] = {
        "statuses": [t.status for t in fan.trajectories],
        "n_failed": fan.n_failed,
    }
    m["files"].append(str(write_trajectories_csv(args.out / "trajectories.csv", fan)))
    samples = fan.samples()
    path = args.out / "samples.csv"
    np.savetxt(path, samples, delimiter=",", header="x,y,z,phi", comments="", fmt="%.17g")
    m["files"].append(str(path))
    if affine is not None and args.ihat == "zero":
        ref = constant_intensity_solution(affine, beam.k, samples[:, 0], samples[:, 1], samples[:, 2])
        m["norms"]["closed_form_max_abs"] = float(np.max(np.abs(samples[:, 3] - ref)))
    if args.truth:
        ref = beam.phase(samples[:, 0], samples[:, 1], samples[:, 2])
        m["norms"]["truth_max_abs"] = float(np.max(np.abs(samples[:, 3] - ref)))
    if fan.n_failed == len(fan.trajectories):
        raise BlowUp("every characteristic failed")


def _run_march(args, m, beam, grid, g_field):
    ihat = _ihat_for(args, beam, grid)
    hspec = args.h or _default_phase(beam)
    h = _phase_spec(hspec, beam, grid, "h")
    if isinstance(h, ScalarField2D):
        raise InvalidConfig("h", "file boundary data is not supported for marches")
    problem = ViscosityProblem(g=g_field, ihat=ihat, k=beam.k, epsilon=args.eps, dz=args.dz, h=h)
    _z_steps(args.zend, args.dz)
    m["viscosity"] = {**problem.describe(), "h": hspec, "ihat": args.ihat, "zend": args.zend}
    return problem


def _finish_march(args, m, beam, stack, info):
    m["stages"]["march"] = {
        "steps": info.steps,
        "gauge": info.gauge,
        "cg_iterations_total": int(sum(info.cg_iterations)),
    }
    m["files"] += [str(p) for p in write_stack(args.out / "phi_stack", stack, "phi")]
    rows = viscosity_error_report(stack, _truth_stack(beam, stack))
    write_error_report(rows, args.out / "errors.csv", args.out / "errors.json")
    m["files"] += [str(args.out / "errors.csv"), str(args.out / "errors.json")]
    m["norms"]["per_slice"] = rows


def cmd_tpe_visc(args, m: dict) -> None:
    grid = _grid(args)
    beam = _beam(args)
    m["beam"] = _beam_desc(beam)
    gspec = args.g or _default_phase(beam)
    g = _phase_spec(gspec, beam, grid, "g")
    if isinstance(g, ScalarField2D):
        g_field = g
    elif callable(g):
        g_field = beam_fields(beam, grid, 0.0)[1]
    else:
        g_field = ScalarField2D.constant(grid, g)
    problem = _run_march(args, m, beam, grid, g_field)
    m["viscosity"]["g"] = gspec
    stack, info = viscosity_march(problem, args.zend, tol=args.tol, full_output=True)
    _finish_march(args, m, beam, stack, info)


def cmd_hybrid(args, m: dict) -> None:
    grid = _grid(args)
    beam = _beam(args)
    m["beam"] = _beam_desc(beam)
    I, truth = beam_fields(beam, grid, 0.0)
    Iz = beam_axial_derivatives(beam, grid, 0.0)["I_z"]
    try:
        bc = parse_bc(args.bc, truth)
    except PhaseLabError as exc:
        raise InvalidConfig("bc", str(exc)) from exc
    m["bc"] = bc.describe()
    tie_problem = TieProblem(I, Iz, beam.k, bc)
    problem = _run_march(args, m, beam, grid, truth)
    stack, stages = hybrid_pipeline(
        tie_problem,
        problem.ihat,
        args.zend,
        epsilon=args.eps,
        dz=args.dz,
        h=problem.h,
        tol=args.tol,
        full_output=True,
    )
    m["stages"]["tie"] = {
        "iterations": stages["tie"].iterations,
        "residual_rel": stages["tie"].final_residual_rel,
    }
    _finish_march(args, m, beam, stack, stages["march"])


def _sweep_ihat(ns=(33, 65, 129)):
    beam = GaussianBeamParams()
    rows = []
    for n in ns:
        grid = Grid2D.square(n)
        I, _ = beam_fields(beam, grid, 0.0)
        X, Y = grid.mesh()
        exact = beam.i_hat(X, Y, 0.0).value
        err = np.abs(compute_i_hat(I).values - exact)[1:-1, 1:-1].max()
        rows.append({"n": n, "linf": float(err)})
    for a, b in zip(rows, rows[1:]):
        b["ratio"] = a["linf"] / b["linf"]
    return rows


def _sweep_dz(n=33, dzs=(0.04, 0.02, 0.01), ref_dz=0.001, zend=0.2):
    beam = GaussianBeamParams()
    grid = Grid2D.square(n)
    g0 = ScalarField2D.constant(grid, 1.5 * math.pi)

    def run(dz):
        return viscosity_march(ViscosityProblem(g0, beam.i_hat, 1.0, 0.05, dz), zend)[-1]

    ref = run(ref_dz)
    rows = [{"dz": dz, "linf": float(np.max(np.abs(run(dz).values - ref.values)))} for dz in dzs]
    for a, b in zip(rows, rows[1:]):
        b["ratio"] = a["linf"] / b["linf"]
    return rows


def _sweep_tie(ns=(33, 65, 129), z=0.5):
    beam = GaussianBeamParams()
    rows = []
    for n in ns:
        grid = Grid2D.square(n)
        I, phi = beam_fields(beam, grid, z)
        Iz = beam_axial_derivatives(beam, grid, z)["I_z"]
        sol = solve_tie(TieProblem(I, Iz, beam.k, DirichletBC.ground_truth(phi)))
        rows.append({"n": n, "linf": float(np.max(np.abs(sol.values - phi.values)))})
    for a, b in zip(rows, rows[1:]):
        b["ratio"] = a["linf"] / b["linf"]
    return rows


def cmd_report(args, m: dict) -> None:
    if args.field is None and args.sweep is None:
        raise InvalidConfig("field", "nothing to report: give --field and/or --sweep")
    summary = {}
    if args.field is not None:
        f = read_field(args.field)
        m["files"].append(str(_write_long_csv(args.out / "field.csv", f)))
        if args.reference is not None:
            ref = read_field(args.reference)
            e = field_error_norms(f, ref)
            summary["norms"] = _norms(e)
            err = f.with_values(f.values - ref.values)
            m["files"].append(str(_write_long_csv(args.out / "error.csv", err)))
    if args.sweep is not None:
        rows = {"ihat": _sweep_ihat, "dz": _sweep_dz, "tie": _sweep_tie}[args.sweep]()
        path = args.out / f"convergence_{args.sweep}.csv"
        with path.open("w", newline="") as fh:
            cols = list(rows[-1].keys())
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            for r in rows:
                w.writerow(r)
        m["files"].append(str(path))
        summary["convergence"] = rows
    (args.out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    m["files"].append(str(args.out / "summary.json"))
    m["norms"].update(summary)


COMMANDS = {
    "beam": cmd_beam,
    "tie": cmd_tie,
    "tpe-char": cmd_tpe_char,
    "tpe-visc": cmd_tpe_visc,
    "hybrid": cmd_hybrid,
    "report": cmd_report,
}


def _jsonable(v):
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not serialisable: {type(v)}")


def write_manifest(out: Path, manifest: dict) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (NotConverged, StepRejected, BlowUp)):
        return EXIT_SOLVER
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, (PhaseLabError, ValueError)):
        return EXIT_CONFIG
    return 1


def run(args: argparse.Namespace) -> int:
    config = {k: v for k, v in vars(args).items() if k not in ("verbose",)}
    manifest = {
        "command": args.command,
        "config": config,
        "versions": {
            "phaselab": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
            "kernel_backend": kernels.BACKEND,
        },
        "stages": {},
        "norms": {},
        "files": [],
        "status": "ok",
        "error": None,
    }
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](args, manifest)
    except Exception as exc:  # recorded in the manifest, mapped to an exit code
        code = _exit_code(exc)
        if code == 1:
            raise
        manifest["status"] = "failed"
        manifest["error"] = {"type": type(exc).__name__, "message": str(exc), "exit_code": code}
        if isinstance(exc, InvalidConfig):
            manifest["error"]["key"] = exc.key
        print(f"phaselab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        if isinstance(exc, StepRejected):
            print("hint: retry with a smaller --dz", file=sys.stderr)
    manifest["timing"] = {"started": started, "wall_clock_s": time.perf_counter() - t0}
    manifest["files"] = sorted(set(manifest["files"]))
    try:
        write_manifest(args.out, manifest)
    except OSError as exc:
        print(f"phaselab: cannot write manifest: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except InvalidConfig as exc:
        print(f"phaselab: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"phaselab: {exc}", file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
