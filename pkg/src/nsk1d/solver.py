"""Explicit pseudo-spectral RK4 integration of the regularized NSK system.

Mass is advanced in conservative form, velocity in non-conservative form::

    rho_t = -(rho u)_x
    u_t   = -u u_x + ((mu u_x)_x - (rho^gamma)_x) / rho + G_x

with the capillary potential
``G = (rho^d mu' mu_xx + d/2 rho^(d-1) mu_x^2) / alpha^2``.  All derivatives
of nonlinear quantities are 2/3-filtered and both tendencies are dealiased.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientLaw, _pow, check_positive
from .config import RunConfig, validate
from .errors import PositivityError, StabilityError
from .grid import Grid

log = logging.getLogger(__name__)

COMPLETED = "completed"
POSITIVITY_FAILURE = "positivity_failure"
STABILITY_FAILURE = "stability_failure"
DT_FLOOR = 1e-12


@dataclass(frozen=True)
class State:
    t: float
    rho: np.ndarray
    u: np.ndarray


@dataclass
class Trajectory:
    grid: Grid
    law: CoefficientLaw
    times: list = field(default_factory=list)
    rho: list = field(default_factory=list)
    u: list = field(default_factory=list)
    records: list = field(default_factory=list)
    termination: str = COMPLETED
    message: str = ""
    steps: int = 0

    def append(self, state: State, record):
        if self.times and not state.t > self.times[-1]:
            raise ValueError("sample times must be strictly increasing")
        self.times.append(state.t)
        self.rho.append(state.rho)
        self.u.append(state.u)
        self.records.append(record)

    def states(self):
        for t, r, v in zip(self.times, self.rho, self.u):
            yield State(t, r, v)

    @property
    def completed(self) -> bool:
        return self.termination == COMPLETED

    def subsample(self, stride: int) -> "Trajectory":
        """Every ``stride``-th sample, always keeping the last one."""
        idx = list(range(0, len(self.times), stride))
        if idx[-1] != len(self.times) - 1:
            idx.append(len(self.times) - 1)
        out = Trajectory(self.grid, self.law, termination=self.termination, message=self.message, steps=self.steps)
        out.times = [self.times[i] for i in idx]
        out.rho = [self.rho[i] for i in idx]
        out.u = [self.u[i] for i in idx]
        out.records = [self.records[i] for i in idx]
        return out


class _Spectral:
    """Precomputed filtered multipliers for one grid."""

    def __init__(self, grid: Grid):
        self.n = grid.n
        self.d1 = grid.multiplier(1, dealias=True)
        self.d2 = grid.multiplier(2, dealias=True)
        self.mask = grid.dealias_mask

    def fwd(self, f):
        return np.fft.rfft(f)

    def inv(self, fh):
        return np.fft.irfft(fh, n=self.n)

    def dx(self, f):
        return self.inv(self.fwd(f) * self.d1)

    def filt(self, f):
        return self.inv(self.fwd(f) * self.mask)


_CACHE = {}


def _spectral(grid: Grid) -> _Spectral:
    key = (grid.n, grid.length)
    if key not in _CACHE:
        _CACHE[key] = _Spectral(grid)
    return _CACHE[key]


def capillary_potential(rho, law: CoefficientLaw, grid: Grid):
    """``G`` in the two-term delta form; the momentum forcing is ``rho * G_x``."""
    sp = _spectral(grid)
    mh = sp.fwd(law.mu(rho))
    m1 = sp.inv(mh * sp.d1)
    m2 = sp.inv(mh * sp.d2)
    d = law.delta
    return (_pow(rho, d) * law.mu_prime(rho) * m2 + 0.5 * d * _pow(rho, d - 1.0) * m1**2) / law.alpha**2


def rhs(state: State, law: CoefficientLaw, grid: Grid):
    rho = check_positive(state.rho)
    u = state.u
    sp = _spectral(grid)
    gamma = law.params.gamma
    d_rho = -sp.dx(rho * u)
    uh = sp.fwd(u)
    ux = sp.inv(uh * sp.d1)
    stress = law.mu(rho) * ux - _pow(rho, gamma)
    g = capillary_potential(rho, law, grid)
    d_u = -u * ux + sp.dx(stress) / rho + sp.dx(g)
    return d_rho, sp.filt(d_u)


def stable_dt(state: State, law: CoefficientLaw, grid: Grid, cfl: float = 0.25) -> float:
    """Largest step allowed by the advective, viscous and capillary restrictions."""
    rho = check_positive(state.rho)
    h = grid.spacing
    gamma = law.params.gamma
    sound = np.sqrt(gamma * _pow(rho, gamma - 1.0))
    speed = float(np.max(np.abs(state.u) + sound))
    visc = float(np.max(law.mu(rho) / rho))
    cap = float(np.max(np.sqrt(rho * law.k(rho))))
    bounds = [h / speed if speed > 0 else np.inf, h**2 / visc if visc > 0 else np.inf,
              h**2 / cap if cap > 0 else np.inf]
    dt = cfl * min(bounds)
    if not np.isfinite(dt) or dt < DT_FLOOR:
        return DT_FLOOR
    return float(dt)


def dt_bounds(state: State, law: CoefficientLaw, grid: Grid) -> dict:
    """The three candidate bounds (before the CFL factor), for inspection."""
    rho = check_positive(state.rho)
    h = grid.spacing
    gamma = law.params.gamma
    speed = float(np.max(np.abs(state.u) + np.sqrt(gamma * _pow(rho, gamma - 1.0))))
    return {
        "advective": h / speed,
        "viscous": h**2 / float(np.max(law.mu(rho) / rho)),
        "capillary": h**2 / float(np.max(np.sqrt(rho * law.k(rho)))),
    }


def _check_stage(rho, u, stage):
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(u))):
        raise StabilityError(f"non-finite field at RK stage {stage}")
    m = float(np.min(rho))
    if not m > 0.0:
        raise PositivityError(m, stage)


def step(state: State, dt: float, law: CoefficientLaw, grid: Grid) -> State:
    """One classical RK4 step with dealiasing and positivity checks at every stage."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    sp = _spectral(grid)
    r0, u0 = state.rho, state.u
    k1r, k1u = rhs(state, law, grid)
    r, u = sp.filt(r0 + 0.5 * dt * k1r), sp.filt(u0 + 0.5 * dt * k1u)
    _check_stage(r, u, 1)
    k2r, k2u = rhs(State(state.t + 0.5 * dt, r, u), law, grid)
    r, u = sp.filt(r0 + 0.5 * dt * k2r), sp.filt(u0 + 0.5 * dt * k2u)
    _check_stage(r, u, 2)
    k3r, k3u = rhs(State(state.t + 0.5 * dt, r, u), law, grid)
    r, u = sp.filt(r0 + dt * k3r), sp.filt(u0 + dt * k3u)
    _check_stage(r, u, 3)
    k4r, k4u = rhs(State(state.t + dt, r, u), law, grid)
    r = sp.filt(r0 + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r))
    u = sp.filt(u0 + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u))
    _check_stage(r, u, 4)
    return State(state.t + dt, r, u)


def integrate_fixed(state: State, law: CoefficientLaw, grid: Grid, dt: float, t_end: float) -> State:
    """March with a constant step (last step shortened to land on ``t_end``)."""
    nsteps = int(np.ceil((t_end - state.t) / dt - 1e-9))
    h = (t_end - state.t) / nsteps
    for _ in range(nsteps):
        state = step(state, h, law, grid)
    return state


def run(config: RunConfig, monitor=None) -> Trajectory:
    """Integrate to ``t_end``, sampling diagnostics every ``sample_every`` steps.

    Positivity or stability loss ends the run early; the trajectory keeps the
    samples gathered so far and records the reason.
    """
    from . import diagnostics

    validate(config)
    grid, law = config.grid, config.law
    it = config.integrator
    rho0, u0 = config.initial.realize(grid)
    state = State(0.0, rho0, u0)
    traj = Trajectory(grid, law)
    monitor = monitor or diagnostics.Monitor(law, grid)
    traj.append(state, monitor.sample(state, dt=0.0))

    nstep = 0
    while state.t < it.t_end * (1.0 - 1e-14) and nstep < it.max_steps:
        dt_cap = stable_dt(state, law, grid, it.cfl)
        dt = it.dt if it.dt is not None else dt_cap
        last = state.t + dt >= it.t_end
        if last:
            dt = it.t_end - state.t
        try:
            new = step(state, dt, law, grid)
        except (PositivityError, StabilityError) as exc:
            beyond = dt > stable_dt(state, law, grid, 1.0)
            if isinstance(exc, StabilityError) or beyond or dt_cap <= DT_FLOOR:
                traj.termination = STABILITY_FAILURE
            else:
                traj.termination = POSITIVITY_FAILURE
            traj.message = str(exc)
            log.info("run stopped at t=%.6g: %s", state.t, exc)
            break
        nstep += 1
        state = new
        if nstep % it.sample_every == 0 or last:
            traj.append(state, monitor.sample(state, dt=dt))
    else:
        if nstep >= it.max_steps and state.t < it.t_end * (1.0 - 1e-14):
            traj.termination = STABILITY_FAILURE
            traj.message = f"max_steps={it.max_steps} reached at t={state.t:.6g}"
    traj.steps = nstep
    return traj
