"""CSV emission, run sidecars and the study drivers behind the command line."""

from __future__ import annotations

import csv
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, parse_config, parse_sweep, to_text
from .diagnostics import DiagnosticsRecord, identity_residuals
from .solver import State, integrate_fixed, rhs, run, stable_dt

DIAGNOSTICS_SCHEMA = "nsk1d.diagnostics/1"
MAP_SCHEMA = "nsk1d.map/1"
CONVERGE_SCHEMA = "nsk1d.converge/1"
SWEEP_SCHEMA = "nsk1d.sweep/1"
MAP_COLUMNS = ["alpha", "beta", "analytic", "coefficient", "sampled_min_J", "counterexample_found", "seed",
               "distance", "searched", "counterexample_n", "counterexample_J"]


def _fmt(value, precision):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), f".{precision}g")
    return str(value)


def write_csv(path, schema: str, columns, rows, precision: int = 17) -> Path:
    """Schema line, header, then one line per row; floats at ``precision`` significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# schema: {schema}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row has {len(row)} fields, header has {len(columns)}")
            w.writerow([_fmt(v, precision) for v in row])
    return path


def _parse_cell(text):
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path):
    """Inverse of ``write_csv``: returns ``(schema, columns, rows)`` with numbers parsed."""
    with Path(path).open(newline="") as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith("# schema: "):
            raise ValueError(f"{path}: missing schema line")
        reader = csv.reader(fh)
        columns = next(reader)
        rows = []
        for line in reader:
            if len(line) != len(columns):
                raise ValueError(f"{path}: ragged row {reader.line_num}")
            rows.append([_parse_cell(c) for c in line])
    return first[len("# schema: "):], columns, rows


def write_sidecars(directory, cfg: RunConfig, extra: dict | None = None):
    """Resolved config (re-parseable) and a JSON record of seed, schema and outcome."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "config.resolved.ini").write_text(to_text(cfg))
    meta = {"seed": cfg.seed, "schema": DIAGNOSTICS_SCHEMA, "version": __version__,
            "written_at": time.strftime("%Y-%m-%dT%H:%M:%S")}
    meta.update(extra or {})
    (directory / "run.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def write_trajectory(traj, directory, cfg: RunConfig) -> Path:
    rows = [r.as_row() for r in traj.records]
    path = write_csv(Path(directory) / "diagnostics.csv", DIAGNOSTICS_SCHEMA, DiagnosticsRecord.columns(), rows,
                     cfg.output.precision)
    write_sidecars(directory, cfg, {"termination": traj.termination, "message": traj.message, "steps": traj.steps,
                                    "samples": len(traj.records)})
    return path


def map_rows(verdicts):
    rows = []
    for v in verdicts:
        cx = v.counterexample
        rows.append([v.point[0], v.point[1], v.analytic, v.coefficient_value, v.sampled_min_J,
                     v.counterexample_found, v.seed, v.distance, v.searched,
                     cx.n if cx else 0, cx.j_confirm if cx else math.nan])
    return rows


# --------------------------------------------------------------------------
# convergence studies


@dataclass(frozen=True)
class ConvergenceRow:
    kind: str
    level: int
    parameter: float
    error: float
    order: float


def time_convergence(cfg: RunConfig, levels: int = 3, t_end: float | None = None, cfl: float | None = None):
    """Self-convergence of fixed-step RK4: runs at ``dt, dt/2, ..., dt/2**levels``.

    ``error[i]`` is the max-norm velocity difference between levels ``i`` and
    ``i+1``; ``order`` is ``log2`` of successive error ratios.
    """
    grid, law = cfg.grid, cfg.law
    rho0, u0 = cfg.initial.realize(grid)
    s0 = State(0.0, rho0, u0)
    t_end = cfg.integrator.t_end if t_end is None else t_end
    dt0 = stable_dt(s0, law, grid, cfg.integrator.cfl if cfl is None else cfl)
    finals = [integrate_fixed(s0, law, grid, dt0 / 2**i, t_end) for i in range(levels + 1)]
    errors = [float(np.max(np.abs(finals[i].u - finals[i + 1].u))) for i in range(levels)]
    out = []
    for i, e in enumerate(errors):
        order = math.log2(errors[i - 1] / e) if i > 0 and e > 0 else math.nan
        out.append(ConvergenceRow("time", i, dt0 / 2**i, e, order))
    return out


def space_convergence(cfg: RunConfig, sizes=None):
    """Relative max-norm error of ``rhs`` at each grid size against a grid twice the largest."""
    sizes = sizes or (cfg.n // 4, cfg.n // 2, cfg.n)
    ref_n = 2 * max(sizes)

    def evaluate(n):
        c = cfg.with_(n=n)
        rho, u = c.initial.realize(c.grid)
        return rhs(State(0.0, rho, u), c.law, c.grid)

    ref = evaluate(ref_n)
    out = []
    prev = None
    for i, n in enumerate(sizes):
        d = evaluate(n)
        stride = ref_n // n
        e = max(float(np.max(np.abs(d[j] - ref[j][::stride])) / np.max(np.abs(ref[j]))) for j in (0, 1))
        drop = prev / e if prev and e > 0 else math.nan
        out.append(ConvergenceRow("space", i, float(n), e, drop))
        prev = e
    return out


def quadrature_convergence(traj, strides=(1, 2, 4, 8)):
    """Energy-identity residual as the sampling interval grows; order from successive ratios."""
    e0 = traj.records[0].E
    out, prev = [], None
    for i, s in enumerate(strides):
        e = abs(identity_residuals(traj, stride=s)[0]) / e0
        order = math.log2(e / prev) if prev and prev > 0 else math.nan
        out.append(ConvergenceRow("sampling", i, float(s), e, order))
        prev = e
    return out


# --------------------------------------------------------------------------
# sweeps


def sweep_configs(base: RunConfig, grid: dict):
    """Cartesian product of ``{dotted key: values}`` applied to ``base``, in key order."""
    keys = list(grid)
    out = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        out.append((dict(zip(keys, combo)), base.with_(**dict(zip(keys, combo)))))
    return out


def _sweep_one(args):
    index, changes, cfg, out_dir = args
    traj = run(cfg)
    directory = Path(out_dir) / f"run_{index:03d}"
    write_trajectory(traj, directory, cfg)
    first, last = traj.records[0], traj.records[-1]
    return [index, *changes.values(), traj.termination, first.E, last.E,
            last.energy_residual / first.E, last.bd_residual / first.F, last.min_rho]


def run_sweep(text: str, out_dir, jobs: int = 1, seed: int | None = None):
    """Run every combination of the ``[sweep]`` section; one worker per config, never within a run."""
    base = parse_config(text)
    if seed is not None:
        base = base.with_(seed=seed)
    grid = parse_sweep(text)
    combos = sweep_configs(base, grid) if grid else [({}, base)]
    tasks = [(i, changes, cfg, str(out_dir)) for i, (changes, cfg) in enumerate(combos)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(t) for t in tasks]
    columns = ["index", *grid.keys(), "termination", "E0", "E_end", "energy_residual", "bd_residual", "min_rho"]
    write_csv(Path(out_dir) / "sweep.csv", SWEEP_SCHEMA, columns, rows, base.output.precision)
    return columns, rows

