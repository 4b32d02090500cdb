"""``nsk1d run|check|map|converge|sweep``.

Exit codes: 0 success, 1 a ``check`` found a failing identity,
2 invalid input, 3 the solver stopped early.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .coefficients import CoefficientLaw
from .config import parse_config
from .errors import ConfigurationError, PositivityError, StabilityError, UnsupportedError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_TERMINATED = 3

log = logging.getLogger("nsk1d")


def _load(args):
    if args.config is None:
        raise ConfigurationError("--config is required for this command")
    cfg = parse_config(Path(args.config).read_text())
    if args.seed is not None:
        cfg = cfg.with_(seed=args.seed)
    return cfg


def _out(args, cfg=None):
    if args.out is not None:
        return Path(args.out)
    return Path(cfg.output.directory) if cfg is not None else Path("out")


def cmd_run(args) -> int:
    from .harness import write_trajectory
    from .solver import run

    cfg = _load(args)
    traj = run(cfg)
    path = write_trajectory(traj, _out(args, cfg), cfg)
    last = traj.records[-1]
    print(f"{traj.termination}: t={last.t:.6g} steps={traj.steps} samples={len(traj.records)} -> {path}")
    if not traj.completed:
        print(f"  {traj.message}", file=sys.stderr)
        return EXIT_TERMINATED
    return EXIT_OK


def check_report(rho, law: CoefficientLaw, grid):
    """Identity checks on one density: ``[(name, value, tolerance, passed)]``."""
    from . import functionals as fn

    params = law.params
    rows = []

    def add(name, value, tol, ok=None):
        rows.append((name, float(value), tol, bool(value <= tol) if ok is None else ok))

    jd = fn.j_direct(rho, law, grid)
    jg = fn.j_general_form(rho, law, grid)
    scale = max(abs(jd), 1e-12)
    add("j_direct_vs_j_general", abs(jd - jg) / scale, 1e-7)
    if params.power_law:
        jt = fn.j_theta_form(rho, params, grid)
        add("j_direct_vs_j_theta", abs(jd - jt) / max(abs(jt), 1e-12), 1e-7)
    if params.theta != 0:
        lhs, rhs = fn.bernis_pair(rho, params.theta, grid)
        add("bernis_lhs_over_rhs", lhs / rhs if rhs else 0.0, 1.0 + 1e-10)
        quartic, _, mixed = fn._theta_integrals(rho**params.theta, grid)
        add("integration_by_parts", abs(mixed - quartic / 3.0) / max(abs(quartic), 1e-300), 1e-8)
    if law.delta != 1:
        glhs, grhs = fn.generalized_bernis_pair(rho, law, grid, law.delta)
        add("generalized_bernis_lhs_over_rhs", glhs / grhs if grhs else 0.0, 1.0 + 1e-10)
    if params.power_law:
        try:
            bar, th = fn.korteweg_decompositions(rho, params, grid)
            force = fn.korteweg_force(rho, params, grid)
            norm = max(float(np.linalg.norm(force)), 1e-300)
            add("korteweg_kbar_residual", float(np.linalg.norm(force - bar)) / norm, 1e-8)
            add("korteweg_kappa_residual", float(np.linalg.norm(force - th)) / norm, 1e-8)
        except UnsupportedError:
            pass
    rows.append(("j_value", float(jd), math.nan, True))
    return rows


def cmd_check(args) -> int:
    from .harness import write_csv, write_sidecars

    cfg = _load(args)
    grid, law = cfg.grid, cfg.law
    rho, _ = cfg.initial.realize(grid)
    rows = check_report(rho, law, grid)
    width = max(len(r[0]) for r in rows)
    for name, value, tol, ok in rows:
        bound = "" if math.isnan(tol) else f"  (<= {tol:g})"
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {value: .6e}{bound}")
    out = _out(args, cfg)
    write_csv(out / "check.csv", "nsk1d.check/1", ["check", "value", "tolerance", "passed"], rows,
              cfg.output.precision)
    write_sidecars(out, cfg, {"command": "check"})
    return EXIT_OK if all(r[3] for r in rows) else EXIT_CHECK_FAILED


def _pair(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}") from None
    return lo, hi


def cmd_map(args) -> int:
    from .coercivity import MapSettings, admissibility_map
    from .harness import MAP_COLUMNS, MAP_SCHEMA, map_rows, write_csv

    settings = MapSettings(samples_per_cell=args.samples, search=not args.no_search,
                           search_distance=args.search_distance, budget=args.budget, seed=args.seed or 0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        verdicts = admissibility_map(args.alpha_range, args.beta_range, args.resolution, settings, args.jobs)
    path = write_csv(_out(args) / "map.csv", MAP_SCHEMA, MAP_COLUMNS, map_rows(verdicts))
    counts = {}
    for v in verdicts:
        counts[v.analytic] = counts.get(v.analytic, 0) + 1
    searched = [v for v in verdicts if v.searched]
    found = sum(v.counterexample_found for v in searched)
    print(f"{len(verdicts)} cells {counts}; counterexamples {found}/{len(searched)} searched -> {path}")
    return EXIT_OK


def cmd_converge(args) -> int:
    from .harness import CONVERGE_SCHEMA, space_convergence, time_convergence, write_csv, write_sidecars

    cfg = _load(args)
    rows = time_convergence(cfg, levels=3) + space_convergence(cfg)
    out = _out(args, cfg)
    write_csv(out / "converge.csv", CONVERGE_SCHEMA, ["kind", "level", "parameter", "error", "order"],
              [(r.kind, r.level, r.parameter, r.error, r.order) for r in rows], cfg.output.precision)
    write_sidecars(out, cfg, {"command": "converge"})
    for r in rows:
        print(f"{r.kind:<6} {r.level}  {r.parameter:.6g}  error={r.error:.3e}  order/drop={r.order:.3g}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .harness import run_sweep

    if args.config is None:
        raise ConfigurationError("--config is required for this command")
    text = Path(args.config).read_text()
    out = args.out or parse_config(text).output.directory
    columns, rows = run_sweep(text, out, jobs=args.jobs, seed=args.seed)
    failed = [r for r in rows if r[columns.index("termination")] != "completed"]
    print(f"{len(rows)} runs, {len(failed)} stopped early -> {Path(out) / 'sweep.csv'}")
    return EXIT_TERMINATED if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nsk1d", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file ([section] key = value)")
    common.add_argument("--out", help="output directory (default: output.directory from the config)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for map and sweep")
    common.add_argument("-v", "--verbose", action="store_true")
    for name, func, text in [
        ("run", cmd_run, "integrate one configuration and write diagnostics.csv"),
        ("check", cmd_check, "cross-check the J forms and inequalities on the configured initial density"),
        ("map", cmd_map, "admissibility raster over (alpha, beta), written to map.csv"),
        ("converge", cmd_converge, "time and space refinement studies, written to converge.csv"),
        ("sweep", cmd_sweep, "run every combination listed in the [sweep] section"),
    ]:
        sp = sub.add_parser(name, parents=[common], help=text, description=text)
        sp.set_defaults(func=func)
        if name == "map":
            sp.add_argument("--alpha-range", type=_pair, default=(0.6, 3.0))
            sp.add_argument("--beta-range", type=_pair, default=(-3.0, 5.0))
            sp.add_argument("--resolution", type=int, default=25)
            sp.add_argument("--samples", type=int, default=200, help="random profiles per cell")
            sp.add_argument("--budget", type=int, default=5000, help="J evaluations per counterexample search")
            sp.add_argument("--search-distance", type=float, default=0.5,
                            help="search only cells at least this far from the admissible strip")
            sp.add_argument("--no-search", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, UnsupportedError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PositivityError, StabilityError) as exc:
        print(f"solver stopped: {exc}", file=sys.stderr)
        return EXIT_TERMINATED
