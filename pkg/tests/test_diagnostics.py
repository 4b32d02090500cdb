import numpy as np
import pytest

from nsk1d.coefficients import make_law
from nsk1d.config import FieldSpec, InitialDataSpec, RunConfig
from nsk1d.diagnostics import (
    DiagnosticsRecord,
    Monitor,
    identity_residuals,
    sample,
    uniform_bounds_report,
    weak_residual_momentum,
)
from nsk1d.errors import ConfigurationError, SamplingError, UnsupportedError
from nsk1d.functionals import bd_entropy, energy, j_direct, pressure_dissipation, visc_dissipation
from nsk1d.grid import make_grid
from nsk1d.solver import State, Trajectory, run

EQUILIBRIUM = InitialDataSpec(FieldSpec(1.0), FieldSpec(0.0))


def test_equilibrium_sample():
    g = make_grid(32)
    law = make_law(1, -1, 2, 0.01)
    rec = sample(State(0.0, np.ones(32), np.zeros(32)), law, g)
    assert rec.J == 0.0 and rec.energy_residual == 0.0 and rec.bd_residual == 0.0
    assert rec.blowup_inv_rho == 1.0 and rec.blowup_dA == 0.0 and rec.blowup_du == 0.0
    assert all(np.isfinite(v) for v in rec.as_row())


def test_sample_is_independent_recomputation():
    g = make_grid(128)
    law = make_law(1.5, 0.5, 2, 0.05)
    rho = 2 + 0.7 * np.sin(2 * np.pi * g.x)
    u = np.cos(2 * np.pi * g.x)
    rec = sample(State(0.0, rho, u), law, g)
    assert rec.E == pytest.approx(energy(rho, u, law, g).total, rel=1e-14)
    assert rec.F == pytest.approx(bd_entropy(rho, u, law, g).total, rel=1e-13)
    assert rec.J == pytest.approx(j_direct(rho, law, g), rel=1e-10)
    assert rec.visc_dissipation == pytest.approx(visc_dissipation(rho, u, law, g), rel=1e-13)
    assert rec.pressure_dissipation == pytest.approx(pressure_dissipation(rho, law, g), rel=1e-13)


def test_sampling_does_not_mutate_and_repeats():
    g = make_grid(64)
    law = make_law(1, -1, 2, 0.01)
    rho = 2 + np.sin(2 * np.pi * g.x)
    u = np.sin(4 * np.pi * g.x)
    before = (rho.copy(), u.copy())
    a = sample(State(0.0, rho, u), law, g)
    b = sample(State(0.0, rho, u), law, g)
    assert a == b
    assert np.array_equal(rho, before[0]) and np.array_equal(u, before[1])


def test_history_accumulates_trapezoid():
    g = make_grid(64)
    law = make_law(1, -1, 2, 0.01)
    mon = Monitor(law, g)
    rho = 2 + np.sin(2 * np.pi * g.x)
    r0 = mon.sample(State(0.0, rho, np.sin(2 * np.pi * g.x)))
    r1 = mon.sample(State(0.1, rho, 0.5 * np.sin(2 * np.pi * g.x)))
    assert r1.visc_integral == pytest.approx(0.05 * (r0.visc_dissipation + r1.visc_dissipation))
    again = sample(State(0.1, rho, 0.5 * np.sin(2 * np.pi * g.x)), law, g, history=[r0])
    assert again.energy_residual == pytest.approx(r1.energy_residual)


def test_record_columns():
    cols = DiagnosticsRecord.columns()
    assert cols[:6] == ["t", "dt", "mass", "E", "F", "J"]
    assert {"energy_residual", "bd_residual", "vacuum_bound", "bernis_ratio", "blowup_dA"} <= set(cols)


def test_reference_run_records(reference_trajectory):
    traj = reference_trajectory
    assert traj.completed
    recs = traj.records
    assert recs[0].energy_residual == 0.0
    assert len(recs) == len(traj.times)
    for r in recs:
        assert all(np.isfinite(v) for v in r.as_row())
        assert 0.0 <= r.bernis_ratio <= 1.0 + 1e-10
    e0, f0 = recs[0].E, recs[0].F
    assert abs(recs[-1].energy_residual) / e0 <= 1e-5
    assert abs(recs[-1].bd_residual) / f0 <= 1e-4
    e, f = np.array([r.E for r in recs]), np.array([r.F for r in recs])
    assert np.all(np.diff(e) <= 1e-9 * e0)
    assert np.all(np.diff(f) <= 1e-9 * e0)


def test_residuals_recomputed_from_samples_match_running_sums(reference_trajectory):
    e, b, bare = identity_residuals(reference_trajectory)
    last = reference_trajectory.records[-1]
    assert e == pytest.approx(last.energy_residual, rel=1e-6, abs=1e-15)
    assert b == pytest.approx(last.bd_residual, rel=1e-6, abs=1e-15)
    assert bare == pytest.approx(last.bd_residual_bare, rel=1e-9)


def test_weak_residual_equilibrium():
    cfg = RunConfig(n=32, initial=EQUILIBRIUM).with_(**{"integrator.t_end": 0.01, "integrator.sample_every": 1})
    assert weak_residual_momentum(run(cfg), 8) <= 1e-12


def test_weak_residual_reference_and_sensitivity(reference_trajectory):
    traj = reference_trajectory
    r1 = weak_residual_momentum(traj, 8)
    r2 = weak_residual_momentum(traj.subsample(2), 8)
    assert r1 <= 1e-4 and r1 < r2
    bad = Trajectory(traj.grid, traj.law, list(traj.times), list(traj.rho), [1.01 * u for u in traj.u],
                     list(traj.records))
    assert weak_residual_momentum(bad, 8) >= 10 * r1


def test_weak_residual_kappa_form_on_power_law():
    cfg = RunConfig(n=64, exponents=make_law(1, -1, 2, 0).params).with_(
        **{"integrator.t_end": 0.01, "integrator.sample_every": 1})
    traj = run(cfg)
    kappa = weak_residual_momentum(traj, 4, korteweg_form="kappa")
    stress = weak_residual_momentum(traj, 4, korteweg_form="stress")
    assert kappa <= 1e-4
    assert stress == pytest.approx(kappa, rel=1e-8)


def test_weak_residual_needs_samples():
    cfg = RunConfig(n=32).with_(**{"integrator.t_end": 1e-4})
    with pytest.raises(SamplingError):
        weak_residual_momentum(run(cfg), 4)


def test_weak_residual_needs_theta():
    cfg = RunConfig(n=32, exponents=make_law(1, -2, 2, 0).params).with_(
        **{"integrator.t_end": 0.01, "integrator.sample_every": 1})
    with pytest.raises(UnsupportedError):
        weak_residual_momentum(run(cfg), 4)


def _short(eps, **init):
    return RunConfig(n=64, exponents=make_law(1, -1, 2, eps).params, **init).with_(**{"integrator.t_end": 0.002})


def test_uniform_bounds_single_epsilon():
    rep = uniform_bounds_report([_short(0.1)])
    assert len(rep.rows) == 1 and rep.flags == ()


def test_uniform_bounds_reject_mismatch():
    other = InitialDataSpec(FieldSpec(2.0, (("sin", 1, 0.4),)), FieldSpec(0.0))
    with pytest.raises(ConfigurationError):
        uniform_bounds_report([_short(0.1), _short(0.05, initial=other)], runner=lambda c: None)
    with pytest.raises(ConfigurationError):
        uniform_bounds_report([_short(0.05), _short(0.1)], runner=lambda c: None)
