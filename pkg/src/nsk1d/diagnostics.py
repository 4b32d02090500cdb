"""Per-sample monitoring of a trajectory.

The monitor assembles every sampled quantity from one set of transforms of
``rho`` and ``u``; it deliberately does not call into ``functionals`` so the
two can be checked against each other.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .coefficients import CoefficientLaw, _pow, check_positive
from .errors import ConfigurationError, SamplingError, UnsupportedError
from .functionals import korteweg_weak_constants


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    dt: float
    mass: float
    E: float
    F: float
    J: float
    visc_dissipation: float
    pressure_dissipation: float
    viscous_mismatch: float
    min_rho: float
    max_rho: float
    vacuum_bound: float
    energy_residual: float
    bd_residual: float
    bd_residual_bare: float
    visc_integral: float
    pressure_integral: float
    j_integral: float
    mismatch_integral: float
    blowup_inv_rho: float
    blowup_dA: float
    blowup_du: float
    blowup_d2u: float
    bernis_ratio: float

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def as_row(self):
        return [getattr(self, c) for c in self.columns()]

    def as_dict(self):
        return asdict(self)


class Monitor:
    """Builds one record per sample and accumulates dissipation integrals (trapezoid in time)."""

    def __init__(self, law: CoefficientLaw, grid):
        self.law = law
        self.grid = grid
        self._prev = None
        self._e0 = None
        self._f0 = None
        k = grid.wavenumbers
        self._ik = 1j * k
        self._ik[-1] = 0.0
        self._k2 = -(k**2)
        self._k3 = -1j * k**3
        self._k3[-1] = 0.0

    def _d(self, f, *orders):
        fh = np.fft.rfft(f)
        mult = {1: self._ik, 2: self._k2, 3: self._k3}
        return [np.fft.irfft(fh * mult[o], n=self.grid.n) for o in orders]

    def rates(self, rho, u):
        """Instantaneous functionals and dissipation rates."""
        law = self.law
        rho = check_positive(rho)
        h = self.grid.spacing
        gamma = law.params.gamma
        alpha = law.alpha
        d = law.delta

        rx, rxx = self._d(rho, 1, 2)
        ux, uxx = self._d(u, 1, 2)
        mu = law.mu(rho)
        mp = law.mu_prime(rho)
        k = _pow(rho, d) * mp**2 / alpha**2
        m1, m2 = self._d(mu, 1, 2)
        w = u + mp / rho * rx
        (wx,) = self._d(w, 1)

        pressure = _pow(rho, gamma) / (gamma - 1.0)
        capillary = 0.5 * k * rx**2
        g = (_pow(rho, d) * mp * m2 + 0.5 * d * _pow(rho, d - 1.0) * m1**2) / alpha**2
        a = np.sqrt(k / rho) * rx
        (ax,) = self._d(a, 1)

        theta = law.params.theta
        if theta != 0.0:
            f = _pow(rho, theta)
            f1, f2 = self._d(f, 1, 2)
            lhs = h * np.sum(f1**4 / f**2) / 9.0
            rhs = h * np.sum(f2**2)
            ratio = lhs / rhs if rhs > 0 else 0.0
        else:
            ratio = float("nan")

        rmin, rmax = float(rho.min()), float(rho.max())
        return dict(
            mass=h * np.sum(rho),
            E=h * np.sum(0.5 * rho * u**2 + pressure + capillary),
            F=h * np.sum(0.5 * rho * w**2 + pressure + capillary),
            J=h * np.sum(m2 * g),
            visc_dissipation=h * np.sum(mu * ux**2),
            pressure_dissipation=gamma * h * np.sum(mp * _pow(rho, gamma - 2.0) * rx**2),
            viscous_mismatch=h * np.sum((mu - rho * mp) * ux * wx),
            min_rho=rmin,
            max_rho=rmax,
            vacuum_bound=law.epsilon * rmin ** (-0.25) + rmax,
            blowup_inv_rho=1.0 / rmin,
            blowup_dA=float(np.max(np.abs(ax))),
            blowup_du=float(np.max(np.abs(ux))),
            blowup_d2u=float(np.max(np.abs(uxx))),
            bernis_ratio=float(ratio),
        )

    def sample(self, state, dt: float = 0.0) -> DiagnosticsRecord:
        r = self.rates(state.rho, state.u)
        prev = self._prev
        if prev is None:
            self._e0, self._f0 = r["E"], r["F"]
            acc = dict(visc_integral=0.0, pressure_integral=0.0, j_integral=0.0, mismatch_integral=0.0)
        else:
            tau = state.t - prev.t
            acc = dict(
                visc_integral=prev.visc_integral + 0.5 * tau * (prev.visc_dissipation + r["visc_dissipation"]),
                pressure_integral=prev.pressure_integral
                + 0.5 * tau * (prev.pressure_dissipation + r["pressure_dissipation"]),
                j_integral=prev.j_integral + 0.5 * tau * (prev.J + r["J"]),
                mismatch_integral=prev.mismatch_integral + 0.5 * tau * (prev.viscous_mismatch + r["viscous_mismatch"]),
            )
        bare = r["F"] + acc["pressure_integral"] + acc["j_integral"] - self._f0
        rec = DiagnosticsRecord(
            t=float(state.t),
            dt=float(dt),
            energy_residual=0.0 if prev is None else r["E"] + acc["visc_integral"] - self._e0,
            bd_residual=0.0 if prev is None else bare + acc["mismatch_integral"],
            bd_residual_bare=0.0 if prev is None else bare,
            **{k: float(v) for k, v in r.items()},
            **acc,
        )
        self._prev = rec
        return rec


def sample(state, law: CoefficientLaw, grid, history=None) -> DiagnosticsRecord:
    """One record for ``state``; ``history`` is the list of earlier records of the same run."""
    mon = Monitor(law, grid)
    if history:
        first = history[0]
        mon._e0, mon._f0 = first.E, first.F
        mon._prev = history[-1]
    return mon.sample(state, dt=0.0 if not history else state.t - history[-1].t)


def _trapz(values, times):
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    if len(times) < 2:
        return 0.0
    return float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(times)))


def identity_residuals(trajectory, stride: int = 1, pressure_offset: float = 2.0):
    """Energy and BD identity residuals at the final sample, recomputed from sampled rates.

    ``stride`` thins the samples (to study the time-quadrature order);
    ``pressure_offset`` selects the exponent ``gamma - offset`` in the
    pressure dissipation.  Returns ``(energy_residual, bd_residual, bd_residual_bare)``.
    """
    traj = trajectory.subsample(stride) if stride > 1 else trajectory
    recs = traj.records
    t = [r.t for r in recs]
    e_res = recs[-1].E - recs[0].E + _trapz([r.visc_dissipation for r in recs], t)
    if pressure_offset == 2.0:
        pres = [r.pressure_dissipation for r in recs]
    else:
        from .functionals import pressure_dissipation

        pres = [pressure_dissipation(rho, traj.law, traj.grid, offset=pressure_offset) for rho in traj.rho]
    bare = recs[-1].F - recs[0].F + _trapz(pres, t) + _trapz([r.J for r in recs], t)
    full = bare + _trapz([r.viscous_mismatch for r in recs], t)
    return e_res, full, bare


def _bump(t, t0, t1):
    """Smooth bump supported on (t0, t1) and its time derivative."""
    s = 2.0 * (np.asarray(t, dtype=float) - t0) / (t1 - t0) - 1.0
    out = np.zeros_like(s)
    dout = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    b = np.exp(-1.0 / (1.0 - si**2))
    out[inside] = b
    dout[inside] = b * (-2.0 * si / (1.0 - si**2) ** 2) * 2.0 / (t1 - t0)
    return out, dout


MIN_WEAK_SAMPLES = 16


def weak_residual_momentum(trajectory, mode_count: int = 8, windows=((0.0, 1.0), (0.0, 0.5), (0.5, 1.0)),
                           korteweg_form: str = "auto"):
    """Largest normalized weak-form momentum defect over the test functions.

    Test functions are ``b(t) * e(x)`` with ``b`` a smooth bump over a time
    window (fractions of the trajectory span) and ``e`` one of
    ``1, cos(2 pi m x/L), sin(2 pi m x/L)``, ``m <= mode_count``.  Each
    defect is divided by the largest space-time L1 norm of its individual
    terms.  The Korteweg contribution uses the ``theta`` divergence form
    when the law is a pure power (``korteweg_form="kappa"``), otherwise the
    stress form valid for any ``k`` (``"stress"``).
    """
    times = np.asarray(trajectory.times, dtype=float)
    if len(times) < MIN_WEAK_SAMPLES:
        raise SamplingError(f"need at least {MIN_WEAK_SAMPLES} samples, got {len(times)}")
    law, grid = trajectory.law, trajectory.grid
    params = law.params
    if params.theta == 0.0:
        raise UnsupportedError("weak momentum residual needs theta != 0")
    if korteweg_form == "auto":
        korteweg_form = "kappa" if params.power_law else "stress"
    consts = korteweg_weak_constants(params)

    n = grid.n
    x = grid.x
    kk = grid.wavenumbers
    ik = 1j * kk
    ik[-1] = 0.0

    def dx(f):
        return np.fft.irfft(np.fft.rfft(f) * ik, n=n)

    gamma = params.gamma
    theta = params.theta
    # per-sample spatial fields multiplying psi_t, psi_x and psi_xx
    c_t, c_x, c_xx = [], [], []
    for rho, u in zip(trajectory.rho, trajectory.u):
        rho = check_positive(rho)
        m = rho * u
        visc = law.mu(rho) * dx(u)
        terms_x = [m * u, -visc, _pow(rho, gamma)]
        terms_xx = []
        if korteweg_form == "kappa":
            weight = _pow(rho, params.beta + 2.0 - theta)
            terms_xx.append(consts.k1 * weight * dx(_pow(rho, theta)))
            terms_x.append(-consts.k2 * weight * dx(_pow(rho, theta / 2.0)) ** 2)
        else:
            rx = dx(rho)
            k = law.k(rho)
            terms_xx.append(rho * k * rx)
            terms_x.append((1.5 * k + 0.5 * rho * law.k_prime(rho)) * rx**2)
        c_t.append([m])
        c_x.append(terms_x)
        c_xx.append(terms_xx)
    c_t = np.array(c_t)  # (samples, 1, n)
    c_x = np.array(c_x)
    c_xx = np.array(c_xx)

    span = times[-1] - times[0]
    worst = 0.0
    h = grid.spacing
    for lo, hi in windows:
        t0, t1 = times[0] + lo * span, times[0] + hi * span
        b, db = _bump(times, t0, t1)
        for mode in range(mode_count + 1):
            kinds = ("cos",) if mode == 0 else ("cos", "sin")
            for kind in kinds:
                arg = 2.0 * np.pi * mode * x / grid.length
                q = 2.0 * np.pi * mode / grid.length
                if kind == "cos":
                    e, ex, exx = np.cos(arg), -q * np.sin(arg), -(q**2) * np.cos(arg)
                else:
                    e, ex, exx = np.sin(arg), q * np.cos(arg), -(q**2) * np.sin(arg)
                parts = [c_t[:, i, :] * e * db[:, None] for i in range(c_t.shape[1])]
                parts += [c_x[:, i, :] * ex * b[:, None] for i in range(c_x.shape[1])]
                parts += [c_xx[:, i, :] * exx * b[:, None] for i in range(c_xx.shape[1])]
                integrals = [_trapz(h * p.sum(axis=1), times) for p in parts]
                sizes = [_trapz(h * np.abs(p).sum(axis=1), times) for p in parts]
                scale = max(sizes)
                if scale == 0.0:
                    continue
                worst = max(worst, abs(sum(integrals)) / scale)
    return worst


@dataclass(frozen=True)
class UniformBoundsRow:
    epsilon: float
    sup_sqrt_rho_u: float
    sup_grad_rho_alpha_half: float
    l2_rho_alpha_half_ux: float
    l2_grad_rho_pressure: float
    l2_hess_rho_theta: float
    l4_grad_rho_theta_half: float
    sup_rho: float
    eps_inv_rho_quarter: float

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class UniformBoundsReport:
    rows: tuple
    column_max: dict
    flags: tuple

    def ratios_to_first(self):
        first = self.rows[0]
        out = {}
        for c in UniformBoundsRow.columns()[1:]:
            ref = getattr(first, c)
            out[c] = [getattr(r, c) / ref if ref else float("nan") for r in self.rows]
        return out


def _bounds_row(traj) -> UniformBoundsRow:
    law, grid = traj.law, traj.grid
    p = law.params
    h = grid.spacing
    ik = 1j * grid.wavenumbers
    ik[-1] = 0.0
    k2 = -(grid.wavenumbers**2)

    def d(f, mult):
        return np.fft.irfft(np.fft.rfft(f) * mult, n=grid.n)

    sup_ke, sup_grad, st_visc, st_pres, st_hess, st_l4, sup_rho, sup_eps = ([] for _ in range(8))
    for rho, u in zip(traj.rho, traj.u):
        sup_ke.append(np.sqrt(h * np.sum(rho * u**2)))
        sup_grad.append(np.sqrt(h * np.sum(d(_pow(rho, p.alpha - 0.5), ik) ** 2)))
        st_visc.append(h * np.sum(_pow(rho, p.alpha) * d(u, ik) ** 2))
        st_pres.append(h * np.sum(d(_pow(rho, (p.gamma + p.alpha - 1.0) / 2.0), ik) ** 2))
        st_hess.append(h * np.sum(d(_pow(rho, p.theta), k2) ** 2))
        st_l4.append(h * np.sum(d(_pow(rho, p.theta / 2.0), ik) ** 4))
        sup_rho.append(rho.max())
        sup_eps.append(p.epsilon * rho.min() ** (-0.25))
    t = traj.times
    return UniformBoundsRow(
        epsilon=p.epsilon,
        sup_sqrt_rho_u=float(max(sup_ke)),
        sup_grad_rho_alpha_half=float(max(sup_grad)),
        l2_rho_alpha_half_ux=float(np.sqrt(_trapz(st_visc, t))),
        l2_grad_rho_pressure=float(np.sqrt(_trapz(st_pres, t))),
        l2_hess_rho_theta=float(np.sqrt(_trapz(st_hess, t))),
        l4_grad_rho_theta_half=float(_trapz(st_l4, t) ** 0.25),
        sup_rho=float(max(sup_rho)),
        eps_inv_rho_quarter=float(max(sup_eps)),
    )


def uniform_bounds_report(configs_over_epsilon, runner=None, trajectories=None) -> UniformBoundsReport:
    """Tabulate the epsilon-uniform norms over a decreasing epsilon sequence.

    ``configs_over_epsilon`` must share grid, exponents (besides epsilon),
    initial data and integrator settings.  Precomputed ``trajectories`` may
    be passed in the same order to skip the runs.
    """
    configs = list(configs_over_epsilon)
    if not configs:
        raise ConfigurationError("need at least one config")
    base = configs[0]
    eps = [c.exponents.epsilon for c in configs]
    for c in configs[1:]:
        same = (
            c.n == base.n and c.length == base.length and c.initial == base.initial
            and c.integrator == base.integrator
            and (c.exponents.alpha, c.exponents.beta, c.exponents.gamma)
            == (base.exponents.alpha, base.exponents.beta, base.exponents.gamma)
        )
        if not same:
            raise ConfigurationError("epsilon study configs must differ only in epsilon")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigurationError(f"epsilon sequence must be strictly decreasing, got {eps}")
    if trajectories is None:
        if runner is None:
            from .solver import run as runner
        trajectories = [runner(c) for c in configs]
    rows = tuple(_bounds_row(t) for t in trajectories)
    cols = UniformBoundsRow.columns()[1:]
    column_max = {c: max(getattr(r, c) for r in rows) for c in cols}
    flags = []
    for c in cols:
        vals = [getattr(r, c) for r in rows]
        growing = all(b > a for a, b in zip(vals, vals[1:]))
        if len(vals) > 1 and growing and vals[-1] > 2.0 * vals[0]:
            flags.append(c)
    return UniformBoundsReport(rows, column_max, tuple(flags))
