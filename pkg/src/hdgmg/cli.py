"""Command-line harness: ``bench``, ``check``, ``solve`` and ``mesh-info``.

Levels on the command line follow the published 1-based convention: mesh
level k is internal level k - 1, so level 1 is the 8-cell initial mesh.

Exit codes: 0 success, 2 divergence, 3 failed diagnostics, 4 bad
configuration.
"""
import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import tables
from .diagnostics import (exact_gradient, exact_solution, manufactured_load, run_suite,
                          solve_manufactured)
from .hdg import METHODS, SolverKind, assemble, l2_errors, reconstruct
from .io import write_trace_csv, write_vtk
from .mesh import MeshHierarchy, dump, validate
from .multigrid import (LevelStack, Smoother, build_levels, solve_stationary, with_injection)
from .skeleton import SkeletonSpace, project_boundary, skeleton_norm
from .transfer import INJECTION_KINDS, build_injection, dump_coo

EXIT_OK, EXIT_DIVERGED, EXIT_CHECK_FAILED, EXIT_CONFIG = 0, 2, 3, 4
BENCH_HEADER = ("injection", "p", "tau", "paper_level", "dofs", "m", "iterations", "rho", "wall_ms")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- parsing

def _split(value):
    if isinstance(value, (list, tuple)):
        return [str(v).strip() for v in value]
    return [v.strip() for v in str(value).split(",") if v.strip()]


def parse_levels(value):
    """``7`` -> 2..7, ``3-5`` -> 3..5, ``2,4`` -> [2, 4] (published numbering)."""
    try:
        if isinstance(value, int):
            return list(range(2, value + 1))
        if isinstance(value, (list, tuple)):
            return sorted({int(v) for v in value})
        text = str(value).strip()
        if "-" in text:
            lo, hi = (int(v) for v in text.split("-", 1))
            return list(range(lo, hi + 1))
        if "," in text:
            return sorted({int(v) for v in text.split(",")})
        return list(range(2, int(text) + 1))
    except ValueError:
        raise ConfigError(f"cannot read levels {value!r}") from None


def parse_ints(value, name):
    try:
        return [int(v) for v in _split(value)]
    except ValueError:
        raise ConfigError(f"{name} must be integers, got {value!r}") from None


def parse_taus(value):
    out = []
    for t in _split(value):
        if t != "1/h":
            try:
                float(t)
            except ValueError:
                raise ConfigError(f"tau must be '1/h' or a number, got {t!r}") from None
        out.append(t)
    return out


def solver_kind(method, p, tau):
    try:
        if method == "LDG-H":
            return SolverKind.ldg(p, tau)
        if method == "RT-H":
            return SolverKind.rt(p)
        return SolverKind.bdm(p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass
class Settings:
    injections: list
    ps: list
    taus: list
    ms: list
    levels: list
    smoother: Smoother
    tol: float
    seed: int
    out_dir: str
    jobs: int
    method: str
    timing: bool


DEFAULTS = {
    "bench": {"injection": "I0,I1,I2,I3", "p": "1,2,3", "tau": "1/h,1", "m": "1,2", "levels": "7"},
    "check": {"injection": "I0,I1,I2,I3", "p": "1", "tau": "1/h", "m": "1", "levels": "5"},
    "solve": {"injection": "I1", "p": "1", "tau": "1/h", "m": "1", "levels": "4"},
    "mesh-info": {"injection": "I1", "p": "1", "tau": "1/h", "m": "1", "levels": "5"},
}
CONFIG_KEYS = {"injection", "p", "tau", "m", "levels", "smoother", "tol", "seed", "out_dir",
               "jobs", "method", "no_timing"}


def load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return cfg


def resolve(args):
    """Merge defaults, the JSON config and command-line flags (flags win)."""
    merged = dict(DEFAULTS[args.command])
    merged.update({"smoother": "sgs", "tol": 1e-6, "seed": 0, "out_dir": ".", "jobs": 1,
                   "method": "LDG-H", "no_timing": False})
    merged.update(load_config(args.config))
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            merged[key] = val
    injections = _split(merged["injection"])
    allowed = set(INJECTION_KINDS) | ({"broken"} if args.command == "check" else set())
    bad = [i for i in injections if i not in allowed]
    if bad:
        raise ConfigError(f"unknown injection(s): {', '.join(bad)}")
    if merged["method"] not in METHODS:
        raise ConfigError(f"unknown method {merged['method']!r}")
    try:
        smoother = Smoother.parse(merged["smoother"])
        tol = float(merged["tol"])
        seed = int(merged["seed"])
        jobs = int(merged["jobs"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if tol <= 0:
        raise ConfigError("tol must be positive")
    ps = parse_ints(merged["p"], "p")
    ms = parse_ints(merged["m"], "m")
    if args.command == "solve" and str(merged["levels"]).strip().isdigit():
        levels = [int(merged["levels"])]          # solve takes one level
    else:
        levels = parse_levels(merged["levels"])
    if any(p < 1 for p in ps) or any(m < 1 for m in ms):
        raise ConfigError("p and m must be at least 1")
    if not levels or min(levels) < 1:
        raise ConfigError("levels must be at least 1")
    if args.command == "bench" and min(levels) < 2:
        raise ConfigError("benchmarks start at level 2 (level 1 is the coarsest grid)")
    return Settings(injections, ps, parse_taus(merged["tau"]), ms, levels, smoother, tol, seed,
                    str(merged["out_dir"]), max(1, jobs), merged["method"],
                    not bool(merged["no_timing"]))


def _pool_map(fn, tasks, jobs):
    """Ordered map, in a process pool when ``jobs > 1``."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


# ---------------------------------------------------------------- bench

def _bench_group(task):
    """All injections, levels and m for one (method, p, tau)."""
    method, p, tau, injections, levels, ms, smoother, tol, timing = task
    kind = solver_kind(method, p, tau)
    top = max(levels) - 1
    hierarchy = MeshHierarchy(top + 1)
    base = build_levels(hierarchy, kind, top)
    out = {}
    for inj in injections:
        stack_levels = with_injection(base, inj)
        for lv in levels:
            sub = stack_levels[:lv]
            for m in ms:
                stack = LevelStack(sub, kind, inj, smoother, m)
                t0 = time.perf_counter()
                res = solve_stationary(stack, tol=tol)
                wall = (time.perf_counter() - t0) * 1e3 if timing else 0.0
                out[(inj, lv, m)] = {
                    "injection": inj, "p": p, "tau": kind.tau_label, "paper_level": lv,
                    "dofs": sub[-1].space.n_dofs, "m": m,
                    "iterations": res.iterations if res.converged else None,
                    "rho": res.rho, "wall_ms": wall,
                }
    return out


def run_bench(settings):
    """Rows ordered by injection, p, tau, level, m."""
    groups = [(settings.method, p, tau, settings.injections, settings.levels, settings.ms,
               settings.smoother, settings.tol, settings.timing)
              for p in settings.ps for tau in settings.taus]
    results = dict(zip([(g[1], g[2]) for g in groups], _pool_map(_bench_group, groups, settings.jobs)))
    rows = []
    for inj in settings.injections:
        for p in settings.ps:
            for tau in settings.taus:
                for lv in settings.levels:
                    for m in settings.ms:
                        rows.append(results[(p, tau)][(inj, lv, m)])
    return rows


def bench_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_HEADER)
    for r in rows:
        it = "DIVERGED" if r["iterations"] is None else r["iterations"]
        w.writerow([r["injection"], r["p"], r["tau"], r["paper_level"], r["dofs"], r["m"], it,
                    f"{r['rho']:.6f}", f"{r['wall_ms']:.1f}"])
    return buf.getvalue()


def read_bench_csv(text):
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        rows.append({"injection": r["injection"], "p": int(r["p"]), "tau": r["tau"],
                     "paper_level": int(r["paper_level"]), "dofs": int(r["dofs"]), "m": int(r["m"]),
                     "iterations": None if r["iterations"] == "DIVERGED" else int(r["iterations"]),
                     "rho": float(r["rho"]), "wall_ms": float(r["wall_ms"])})
    return rows


def cmd_bench(settings):
    rows = run_bench(settings)
    os.makedirs(settings.out_dir, exist_ok=True)
    with open(os.path.join(settings.out_dir, "bench.csv"), "w") as fh:
        fh.write(bench_csv(rows))
    md = tables.render_markdown(rows)
    with open(os.path.join(settings.out_dir, "bench.md"), "w") as fh:
        fh.write(md)
    print(md)
    diverged = [r for r in rows if r["iterations"] is None]
    for r in diverged:
        print(f"DIVERGED: {r['injection']} p={r['p']} tau={r['tau']} level {r['paper_level']} "
              f"m={r['m']}", file=sys.stderr)
    return EXIT_DIVERGED if diverged else EXIT_OK


# ---------------------------------------------------------------- check

def _check_task(task):
    method, p, tau, injections, max_level, seed = task
    kind = solver_kind(method, p, tau)
    real = [i for i in injections if i != "broken"]
    return run_suite(kind, max_level=max_level, injections=real, seed=seed,
                     include_broken="broken" in injections)


def cmd_check(settings):
    max_level = max(settings.levels) - 1
    if max_level < 2:
        raise ConfigError("check needs at least level 3 (two level pairs)")
    taus = settings.taus if settings.method == "LDG-H" else ["0"]
    tasks = [(settings.method, p, tau, settings.injections, max_level, settings.seed)
             for p in settings.ps for tau in taus]
    reports = _pool_map(_check_task, tasks, settings.jobs)
    report = reports[0]
    for r in reports[1:]:
        report.extend(r)
    os.makedirs(settings.out_dir, exist_ok=True)
    with open(os.path.join(settings.out_dir, "diagnostics.csv"), "w") as fh:
        fh.write(report.to_csv())
    failed = [r for r in report if not r.passed]
    print(f"{len(report) - len(failed)}/{len(report)} diagnostics passed")
    for r in failed:
        print(f"FAIL {r.assumption} level {r.level} {r.kind} p={r.p} tau={r.tau} "
              f"{r.injection} constant={r.constant:.3e} growth={r.growth:.3f}")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------- solve

LOADS = {"one": 1.0, "zero": None, "sine": manufactured_load}


def cmd_solve(settings, load="one", solver="direct"):
    if len(settings.levels) != 1 or len(settings.ps) != 1 or len(settings.taus) != 1:
        raise ConfigError("solve takes a single level, p and tau")
    if load not in LOADS:
        raise ConfigError(f"unknown load {load!r}")
    level = settings.levels[0]
    kind = solver_kind(settings.method, settings.ps[0], settings.taus[0])
    f = LOADS[load]
    hierarchy = MeshHierarchy(level)
    space = SkeletonSpace(hierarchy[level - 1], kind.p)
    status = EXIT_OK
    if solver == "direct" or load == "zero" or level == 1:
        system = assemble(space, kind, f)
        lam = np.zeros(space.n_dofs) if load == "zero" else _direct(system)
        ops = system.ops
    else:
        base = with_injection(build_levels(hierarchy, kind, level - 1, f), settings.injections[0])
        stack = LevelStack(base, kind, settings.injections[0], settings.smoother, settings.ms[0])
        res = solve_stationary(stack, tol=settings.tol)
        lam, ops = res.x, base[-1].ops
        print(f"multigrid: {res.iterations} iterations, rho {res.rho:.4f}")
        if not res.converged:
            status = EXIT_DIVERGED
    field_ = reconstruct(space, ops, lam, f)
    os.makedirs(settings.out_dir, exist_ok=True)
    write_trace_csv(os.path.join(settings.out_dir, "lambda.csv"), space, lam)
    write_vtk(os.path.join(settings.out_dir, "solution.vtk"), field_,
              f"{kind.method} p={kind.p} tau={kind.tau_label} level {level}")
    print(f"level {level}: {hierarchy[level - 1].n_cells} cells, {space.n_dofs} skeleton dofs")
    if load == "sine":
        # errors of the direct solve, computed exactly as in the convergence study
        lam_d, field_d = solve_manufactured(space, kind)
        et = skeleton_norm(space, project_boundary(space, exact_solution) - lam_d)
        eu, eq = l2_errors(space, field_d, exact_solution, exact_gradient)
        print(f"errors: trace {et:.12e} u {eu:.12e} q {eq:.12e}")
    return status


def _direct(system):
    import scipy.sparse.linalg as spla
    return spla.spsolve(system.A.tocsc(), system.b)


# ---------------------------------------------------------------- mesh-info

def cmd_mesh_info(settings, dump_mesh=False, dump_transfer=False):
    top = max(settings.levels)
    hierarchy = MeshHierarchy(top)
    p = settings.ps[0]
    print(f"{'level':>5} {'vertices':>9} {'edges':>7} {'interior':>8} {'cells':>7} "
          f"{'h':>10} {'dofs(p=' + str(p) + ')':>10}")
    status = EXIT_OK
    for lv in range(1, top + 1):
        mesh = hierarchy[lv - 1]
        space = SkeletonSpace(mesh, p)
        print(f"{lv:>5} {mesh.n_vertices:>9} {mesh.n_edges:>7} {len(mesh.interior_edges):>8} "
              f"{mesh.n_cells:>7} {mesh.h:>10.6f} {space.n_dofs:>10}")
        problems = validate(mesh)
        for msg in problems:
            print(f"  level {lv}: {msg}", file=sys.stderr)
        if problems:
            status = EXIT_CHECK_FAILED
        if dump_mesh:
            os.makedirs(settings.out_dir, exist_ok=True)
            with open(os.path.join(settings.out_dir, f"mesh_L{lv}.txt"), "w") as fh:
                fh.write(dump(mesh))
    if dump_transfer:
        from .hdg import build_local
        kind = solver_kind(settings.method, p, settings.taus[0])
        os.makedirs(settings.out_dir, exist_ok=True)
        for lv in range(2, top + 1):
            coarse, fine = hierarchy[lv - 2], hierarchy[lv - 1]
            ops = build_local(coarse, kind)
            for inj in settings.injections:
                T = build_injection(inj, SkeletonSpace(coarse, p), SkeletonSpace(fine, p), ops)
                with open(os.path.join(settings.out_dir, f"transfer_{inj}_L{lv}.txt"), "w") as fh:
                    fh.write(dump_coo(T))
    return status


# ---------------------------------------------------------------- main

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default settings")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--seed", type=int)
    common.add_argument("--levels", help="max level (2..N), a range a-b or a list")
    common.add_argument("--p", help="polynomial degree(s), comma separated")
    common.add_argument("--tau", help="stabilization rule(s): 1/h or a constant")
    common.add_argument("--injection", help="I0, I1, I2, I3 (comma separated)")
    common.add_argument("--smoother", help="sgs (default), gs, bgs, jacobi[:omega]")
    common.add_argument("--m", help="smoothing step count(s)")
    common.add_argument("--tol", type=float)
    common.add_argument("--method", help="LDG-H (default), RT-H or BDM-H")
    common.add_argument("--jobs", type=int, help="worker processes")
    common.add_argument("--no-timing", dest="no_timing", action="store_true",
                        help="write wall_ms = 0 so outputs are byte-reproducible")

    parser = argparse.ArgumentParser(prog="hdgmg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bench", parents=[common], help="iteration-count tables")
    sub.add_parser("check", parents=[common], help="assumption diagnostics")
    solve = sub.add_parser("solve", parents=[common], help="solve one problem and export fields")
    solve.add_argument("--f", dest="load", default="one", choices=sorted(LOADS))
    solve.add_argument("--solver", default="direct", choices=["direct", "mg"])
    info = sub.add_parser("mesh-info", parents=[common], help="mesh statistics and dumps")
    info.add_argument("--dump", action="store_true", help="write mesh_L<k>.txt files")
    info.add_argument("--dump-transfer", action="store_true",
                      help="write injection matrices in coordinate format")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        settings = resolve(args)
        if args.command == "bench":
            return cmd_bench(settings)
        if args.command == "check":
            return cmd_check(settings)
        if args.command == "solve":
            return cmd_solve(settings, args.load, args.solver)
        return cmd_mesh_info(settings, args.dump, args.dump_transfer)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
