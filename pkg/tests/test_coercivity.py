import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nsk1d.coefficients import ExponentParams, derive_exponents
from nsk1d.coercivity import (
    ADMISSIBLE,
    BOUNDARY,
    INADMISSIBLE,
    MapSettings,
    VacuumProfile,
    admissibility_map,
    admissible_delta,
    admissible_power,
    bernis_ratio_of,
    boundary_distance,
    coefficient_1d,
    counterexample_search,
    delta_counterexample_search,
    random_profile,
    required_ratio,
    sample_min_j,
    sc_coefficient,
    theorem_main_range,
)
from nsk1d.errors import MisuseError, UnsupportedError
from nsk1d.functionals import is_resolved
from nsk1d.grid import make_grid

alphas = st.floats(0.51, 5.0, allow_nan=False)


def test_coefficient_examples():
    assert coefficient_1d(1, -1) == pytest.approx(4 / 9, abs=1e-15)
    assert coefficient_1d(2, 0) == pytest.approx(0.0, abs=1e-15)
    assert coefficient_1d(2, 4) == pytest.approx(-8 / 441, abs=1e-15)


def test_coefficient_rejects_theta_zero():
    with pytest.raises(UnsupportedError, match="admissible_power"):
        coefficient_1d(1.5, -2.5)


@given(alphas)
def test_both_boundaries_annihilate_the_coefficient(alpha):
    for beta in (2 * alpha - 1, 2 * alpha - 4):
        if abs(alpha + beta + 1) > 1e-3:
            assert abs(coefficient_1d(alpha, beta)) <= 1e-12


@given(alphas, st.floats(-6.0, 12.0, allow_nan=False))
def test_coefficient_sign_matches_verdict(alpha, beta):
    s = alpha + beta + 1
    v = admissible_power(alpha, beta)
    if abs(s) < 1e-3 or v.distance < 1e-6:
        return
    c = coefficient_1d(alpha, beta)
    assert (c > 0) == (v.analytic == ADMISSIBLE)
    assert v.coefficient_value == c


def test_power_verdict_examples():
    assert admissible_power(1, -1).analytic == ADMISSIBLE
    assert admissible_power(2, 4).analytic == INADMISSIBLE
    assert admissible_power(1, 1).analytic == BOUNDARY
    assert admissible_power(2, 0).analytic == BOUNDARY


def test_theta_zero_line_uses_log_branch():
    inside = admissible_power(0.75, -1.75)
    outside = admissible_power(1.5, -2.5)
    assert inside.analytic == ADMISSIBLE and inside.coefficient_value > 0
    assert outside.analytic == INADMISSIBLE and outside.coefficient_value < 0
    assert admissible_power(1.0, -2.0).analytic == BOUNDARY


def test_delta_examples():
    assert admissible_delta(-1).analytic == ADMISSIBLE
    assert admissible_delta(1).analytic == BOUNDARY
    assert admissible_delta(-2).analytic == BOUNDARY
    v = admissible_delta(1.5)
    assert v.analytic == INADMISSIBLE
    assert v.coefficient_value == pytest.approx(1 / 36 - 1 / 8, abs=1e-15)


@given(st.floats(-6.0, 6.0, allow_nan=False))
def test_sc_coefficient_sign(delta):
    if min(abs(delta + 2), abs(delta - 1)) < 1e-6:
        return
    assert (sc_coefficient(delta) > 0) == (admissible_delta(delta).analytic == ADMISSIBLE)


@given(alphas, st.floats(-6.0, 12.0, allow_nan=False))
def test_delta_and_power_verdicts_agree(alpha, beta):
    delta = beta - 2 * alpha + 2
    assert admissible_delta(delta).analytic == admissible_power(alpha, beta).analytic


def test_main_range_examples():
    assert theorem_main_range(1, -1)
    assert not theorem_main_range(0.7, -1.9)
    assert theorem_main_range(3, 3.5)
    assert not theorem_main_range(1, 1)
    assert not theorem_main_range(0.5, -1.5)


def test_boundary_distance():
    assert boundary_distance(1, -1) == 0.0
    assert boundary_distance(2, 4) == pytest.approx(1 / math.sqrt(5))
    assert boundary_distance(0.6, -3.5) == pytest.approx(0.7 / math.sqrt(5))


def test_required_ratio():
    assert required_ratio(2, 4) == pytest.approx(1 / (1 / 9 + 8 / 441))
    assert required_ratio(1, -1) == math.inf


def test_random_profiles_are_positive():
    rng = np.random.default_rng(3)
    for _ in range(50):
        rho = random_profile(rng)
        assert 0.2 - 1e-12 <= rho.min() <= 0.95 + 1e-12


def test_sampling_corroborates_admissible_points():
    for a, b in [(1, -1), (1.5, 0.5), (2, 1), (0.8, -2)]:
        assert sample_min_j(derive_exponents(a, b), 100, seed=1) >= -1e-10


def test_sampling_is_seeded():
    p = derive_exponents(2, 4)
    assert sample_min_j(p, 20, seed=5) == sample_min_j(p, 20, seed=5)


def test_vacuum_profile_family():
    prof = VacuumProfile(0.5, 1.5, -2.0, math.log10(4 / 4096))
    rho = prof.realize(4096)
    assert rho.mean() == pytest.approx(2.0)
    assert rho.min() > 0 and rho.min() < 1e-4
    assert is_resolved(rho, make_grid(4096))
    # the Bernis ratio never exceeds the sharp constant 9
    assert 0 < bernis_ratio_of(prof, 4096) < 9


def test_search_refuses_admissible_points():
    with pytest.raises(MisuseError):
        counterexample_search(1, -1)
    with pytest.raises(MisuseError):
        counterexample_search(1, 1)
    with pytest.raises(MisuseError):
        delta_counterexample_search(-1)


def test_map_needs_two_cells_per_axis():
    with pytest.raises(MisuseError):
        admissibility_map(resolution=1)


def test_small_map_flips_at_the_upper_line():
    # alpha in {1, 1.5, 2}, beta in {0, 2, 4}: the upper line passes through (1.5, 2), the lower one through (2, 0)
    verdicts = admissibility_map((1.0, 2.0), (0.0, 4.0), 3, MapSettings(samples_per_cell=10, search=False))
    got = {v.point: v.analytic for v in verdicts}
    for (a, b), label in got.items():
        expected = BOUNDARY if b in (2 * a - 1, 2 * a - 4) else (ADMISSIBLE if b < 2 * a - 1 else INADMISSIBLE)
        assert label == expected
    assert got[(1.5, 2.0)] == BOUNDARY
    for v in verdicts:
        if v.analytic == ADMISSIBLE:
            assert v.sampled_min_J >= -1e-10


def test_map_is_independent_of_worker_count():
    s = MapSettings(samples_per_cell=5, search=False, seed=7)
    one = admissibility_map((1.0, 2.0), (0.0, 4.0), 2, s, jobs=1)
    two = admissibility_map((1.0, 2.0), (0.0, 4.0), 2, s, jobs=2)
    assert one == two
