"""Which exponent pairs keep the coercivity functional J nonnegative.

For pure powers ``mu = rho**alpha``, ``k = rho**beta`` with
``theta = (alpha + beta + 1)/2 != 0`` and ``f = rho**theta``, integrating the
mixed term by parts gives::

    (theta**2/alpha) J = int f_xx**2 - (1/9 - c) int f_x**4/f**2

with ``c = coefficient_1d(alpha, beta)``.  Bernis' inequality (constant 1/9,
sharp) then makes ``c >= 0`` sufficient, and because the ratio
``int f_x**4/f**2 / int f_xx**2`` can be pushed arbitrarily close to 9 it is
also necessary: J < 0 as soon as that ratio exceeds ``1/(1/9 - c)``.

The ratio approaches 9 only logarithmically in the width of the near-vacuum
core, so the counterexample search climbs a ladder of grid sizes.  Each rung
starts from a tuned near-extremal profile (``EXTREMAL_TABLE``) and refines it
with Powell's derivative-free method over the core shape and the Fourier
coefficients of ``log rho``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .coefficients import CoefficientLaw, ExponentParams
from .errors import MisuseError, ResolutionWarning, UnsupportedError
from .functionals import (
    _theta_integrals,
    is_resolved,
    j_direct,
    j_general_form,
    j_general_terms,
    j_theta_form,
    j_theta_terms,
)
from .grid import make_grid

BOUNDARY_TOL = 1e-12
DEFAULT_BUDGET = 5000
MEAN_DENSITY = 2.0
CORE_CELLS = 4.0
N_MODES = 8
SAMPLE_GRID = 256
# a table rung is used without refinement when its ratio beats the target by this factor
RATIO_MARGIN = 1.002
ADMISSIBLE = "admissible"
BOUNDARY = "boundary"
INADMISSIBLE = "inadmissible"
# smooth first stage of the search: amplitudes of log rho = A cos(2 pi x), tried in
# order, and the ratio below which they are worth trying (f = exp(B cos) tops out near 1)
SMOOTH_AMPLITUDES = (0.5, 1.0, 2.0, 4.0, 8.0, 12.0)
SMOOTH_REACH = 0.9
SMOOTH_GRID = 1024
# alpha values tried when a delta-line counterexample needs a concrete power law
DELTA_ALPHAS = (0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0)

# Tuned near-extremal profiles, one per grid size:
# n -> (shape, log10_eta, cosine coefficients of log f, Bernis ratio reached).
# Regenerate with ``tune_extremal`` (notebooks/extremal_table.py); the ratio column is
# what each rung can certify.
EXTREMAL_TABLE = {
    512: (1.000001, -0.842369,
        (0.266632, 0.082693, 0.030534, 0.010686, 0.002881, 9.2e-05, -0.000562, -0.000395), 4.138322),
    1024: (1.0, -1.239028,
        (0.11918, 0.038981, 0.020069, 0.011288, 0.006296, 0.003315, 0.001539, 0.000527), 4.854624),
    2048: (1.0, -1.533524,
        (0.036843, -0.002936, -0.003125, -0.001615, -0.000592, -0.0001, 3.8e-05, 4.7e-05), 5.461129),
    4096: (1.159566, -1.794117,
        (0.103962, 0.012695, 0.001196, -0.000761, -0.000866, -0.000609, -0.000339, -0.000135), 5.967723),
    8192: (1.287766, -2.068782,
        (0.188309, 0.041723, 0.014383, 0.005816, 0.002488, 0.001054, 0.000408, 0.00012), 6.388031),
    16384: (1.331252, -2.314718,
        (0.22666, 0.056986, 0.022149, 0.010106, 0.004904, 0.002377, 0.001068, 0.000372), 6.735513),
    32768: (1.351303, -2.548852,
        (0.24937, 0.067003, 0.027633, 0.013331, 0.006829, 0.003491, 0.001655, 0.000611), 7.021018),
    65536: (1.363526, -2.779879,
        (0.265545, 0.074533, 0.031926, 0.015938, 0.008429, 0.004452, 0.002179, 0.000829), 7.254988),
    131072: (1.372796, -3.012473,
        (0.278335, 0.080596, 0.035436, 0.018112, 0.009788, 0.005272, 0.00263, 0.001021), 7.447104),
    262144: (1.380656, -3.248876,
        (0.289831, 0.085772, 0.038348, 0.019784, 0.010797, 0.005873, 0.002965, 0.001167), 7.605801),
    524288: (1.388118, -3.49089,
        (0.299218, 0.090238, 0.040882, 0.021401, 0.011832, 0.006508, 0.003318, 0.001318), 7.738077),
    1048576: (1.394977, -3.738044,
        (0.306928, 0.093806, 0.042959, 0.022703, 0.012627, 0.006986, 0.003584, 0.001434), 7.849441),
    2097152: (1.400255, -3.987286,
        (0.311264, 0.095507, 0.043852, 0.023237, 0.012976, 0.007205, 0.003675, 0.001476), 7.944113),
}


# --------------------------------------------------------------------------
# closed-form tests


def coefficient_1d(alpha, beta) -> float:
    s = alpha + beta + 1.0
    if s == 0.0:
        raise UnsupportedError("theta = 0: use admissible_power, whose log branch needs 0 < alpha <= 1")
    return (alpha - beta - 1.0) * (1.0 - alpha) / s**2 - beta / (3.0 * s) + 1.0 / 9.0


def required_ratio(alpha, beta) -> float:
    """Bernis ratio a profile must exceed for J < 0 (``inf`` when none can)."""
    c = coefficient_1d(alpha, beta)
    return math.inf if c >= 1.0 / 9.0 else 1.0 / (1.0 / 9.0 - c)


def boundary_distance(alpha, beta) -> float:
    """Euclidean distance to the strip ``2a-4 <= b <= 2a-1``; zero inside it."""
    above = beta - (2.0 * alpha - 1.0)
    below = (2.0 * alpha - 4.0) - beta
    return max(above, below, 0.0) / math.sqrt(5.0)


@dataclass(frozen=True)
class VacuumProfile:
    """A positive periodic density on the unit torus, built from ``f = rho**theta``.

    ``log f = log q + sum_j c_j cos(2 pi j x)``, where ``q`` behaves like
    ``|x|**shape`` between the core width ``zeta`` and ``eta``, bottoms out
    smoothly at the origin and is even about it.  ``theta = 0`` means
    ``log rho`` is the cosine series itself (no core).  The density is
    scaled to mean ``MEAN_DENSITY``.
    """

    theta: float
    shape: float = 1.5
    log10_eta: float = -2.0
    log10_zeta: float = -3.0
    coefficients: tuple = ()

    def log_f(self, n: int) -> np.ndarray:
        x = np.arange(n) / n
        series = np.zeros(n)
        for j, c in enumerate(self.coefficients, start=1):
            series += c * np.cos(2.0 * np.pi * j * x)
        if self.theta == 0.0:
            return series
        a = self.shape
        eta, zeta = 10.0**self.log10_eta, 10.0**self.log10_zeta
        s2 = (np.sin(np.pi * x) / np.pi) ** 2
        tau = min(1.0, 0.5 * a * zeta**2 / eta**2)
        # eta**a * ((1 + s2/eta**2)**(a/2) - 1 + tau), without cancellation
        q = np.expm1(0.5 * a * np.log1p(s2 / eta**2)) + tau
        return a * math.log(eta) + np.log(q) + series

    def realize(self, n: int) -> np.ndarray:
        lf = self.log_f(n)
        log_rho = lf if self.theta == 0.0 else lf / self.theta
        log_rho = log_rho - log_rho.max()
        rho = np.exp(log_rho)
        return rho * (MEAN_DENSITY / rho.mean())

    def vector(self):
        return np.array([self.shape, self.log10_eta, *self.coefficients], dtype=float)

    def with_vector(self, v) -> "VacuumProfile":
        if self.theta == 0.0:
            return VacuumProfile(0.0, coefficients=tuple(float(c) for c in v[2:]))
        return VacuumProfile(self.theta, float(v[0]), float(v[1]), self.log10_zeta, tuple(float(c) for c in v[2:]))


def bernis_ratio_of(profile: VacuumProfile, n: int) -> float:
    """``int f_x**4/f**2 / int f_xx**2`` for the profile's ``f`` on an ``n`` grid."""
    grid = make_grid(n)
    lf = profile.log_f(n)
    f = np.exp(lf - lf.max())
    quartic, hessian, _ = _theta_integrals(f, grid)
    return quartic / hessian


def tune_extremal(n: int, start: VacuumProfile | None = None, budget: int = 3000):
    """Maximize the Bernis ratio over the profile family at grid size ``n``.

    The core width is pinned at ``CORE_CELLS`` grid spacings so that the
    density stays spectrally resolved.  Returns ``(profile, ratio)`` with a
    ``theta = 1`` profile (the ratio does not depend on theta).
    """
    zeta = math.log10(CORE_CELLS / n)
    if start is None:
        start = VacuumProfile(1.0, 1.5, zeta + math.log10(20.0), zeta, (0.0,) * N_MODES)
    start = VacuumProfile(1.0, start.shape, max(start.log10_eta, zeta + 0.5), zeta, start.coefficients)

    def objective(v):
        if not (1.0 < v[0] < 3.0 and zeta < v[1] < -0.3):
            return 0.0
        r = bernis_ratio_of(start.with_vector(v), n)
        return -r if np.isfinite(r) else 0.0

    res = minimize(objective, start.vector(), method="Powell",
                   options=dict(maxfev=budget, xtol=1e-5, ftol=1e-11))
    best = start.with_vector(res.x)
    return best, bernis_ratio_of(best, n)


# --------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Counterexample:
    """A profile with J < 0, confirmed by ``j_direct`` on a grid twice as fine."""

    profile: VacuumProfile
    n: int
    j_value: float
    j_normalized: float
    j_confirm: float
    evaluations: int
    seed: int

    def density(self, n: int | None = None):
        return self.profile.realize(n or self.n)


@dataclass(frozen=True)
class AdmissibilityVerdict:
    """Analytic classification of one point, plus optional sampled and adversarial evidence.

    ``sampled_min_J`` is the smallest ``J / scale`` seen over random positive
    profiles, ``scale`` being the sum of the absolute values of the terms of
    the closed form that J was evaluated with.
    """

    point: tuple
    analytic: str
    coefficient_value: float
    sampled_min_J: float = float("nan")
    counterexample: Counterexample | None = None
    searched: bool = False
    seed: int | None = None
    distance: float = 0.0

    @property
    def counterexample_found(self) -> bool:
        return self.counterexample is not None


def _classify(value, lower, upper):
    if abs(value - lower) <= BOUNDARY_TOL or abs(value - upper) <= BOUNDARY_TOL:
        return BOUNDARY
    return ADMISSIBLE if lower < value < upper else INADMISSIBLE


def admissible_power(alpha, beta) -> AdmissibilityVerdict:
    """Classify ``(alpha, beta)`` against ``2 alpha - 4 <= beta <= 2 alpha - 1``.

    On the line ``theta = 0`` the log form applies instead; it is nonnegative
    exactly when ``0 < alpha <= 1``, which is where that line meets the strip.
    """
    verdict = _classify(beta, 2.0 * alpha - 4.0, 2.0 * alpha - 1.0)
    if alpha + beta + 1.0 == 0.0:
        coef = 0.5 * alpha * (1.0 - alpha)
    else:
        coef = coefficient_1d(alpha, beta)
    return AdmissibilityVerdict((float(alpha), float(beta)), verdict, coef,
                                distance=boundary_distance(alpha, beta))


def sc_coefficient(delta) -> float:
    """``(delta-1)**2/9 - delta (delta-1)/6``, nonnegative exactly on ``[-2, 1]``."""
    return (delta - 1.0) ** 2 / 9.0 - delta * (delta - 1.0) / 6.0


def admissible_delta(delta) -> AdmissibilityVerdict:
    verdict = _classify(delta, -2.0, 1.0)
    dist = max(delta - 1.0, -2.0 - delta, 0.0)
    return AdmissibilityVerdict((float(delta),), verdict, sc_coefficient(delta), distance=dist)


def theorem_main_range(alpha, beta) -> bool:
    """``2a - 3 <= b < 2a - 1`` with ``a > 1/2`` and ``b > -2``."""
    return alpha > 0.5 and beta > -2.0 and 2.0 * alpha - 3.0 <= beta < 2.0 * alpha - 1.0


# --------------------------------------------------------------------------
# random sampling


def random_profile(rng: np.random.Generator, n: int = SAMPLE_GRID, floor: float = 0.2) -> np.ndarray:
    """``1 + sum`` of 3-6 random cosine modes (wavenumbers 1-6), rescaled so ``min rho`` lies in ``[floor, 0.95]``."""
    x = np.arange(n) / n
    count = int(rng.integers(3, 7))
    modes = rng.choice(np.arange(1, 7), size=count, replace=False)
    p = np.zeros(n)
    for k in modes:
        p += rng.normal() * np.cos(2.0 * np.pi * k * x + rng.uniform(0.0, 2.0 * np.pi))
    target = rng.uniform(floor, 0.95)
    return 1.0 + p * (1.0 - target) / max(-p.min(), 1e-300)


def _normalized(terms) -> float:
    scale = sum(abs(t) for t in terms)
    return sum(terms) / scale if scale > 0 else 0.0


def sample_min_j(params: ExponentParams, samples: int = 200, seed=0, n: int = SAMPLE_GRID) -> float:
    """Smallest normalized theta-form J over ``samples`` random positive profiles."""
    rng = np.random.default_rng(seed)
    grid = make_grid(n)
    worst = math.inf
    for _ in range(samples):
        worst = min(worst, _normalized(j_theta_terms(random_profile(rng, n), params, grid)))
    return worst


def sample_min_j_general(law: CoefficientLaw, delta, samples: int = 500, seed=0, n: int = SAMPLE_GRID) -> float:
    """Smallest normalized two-term J (arbitrary ``mu``, capillarity exponent ``delta``)."""
    rng = np.random.default_rng(seed)
    grid = make_grid(n)
    c = delta * (delta - 1.0) / 6.0
    worst = math.inf
    for _ in range(samples):
        hess, quart = j_general_terms(random_profile(rng, n), law, grid, delta)
        worst = min(worst, _normalized((hess, -c * quart)))
    return worst


# --------------------------------------------------------------------------
# adversarial search


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    @property
    def left(self):
        return self.limit - self.used


class _Exhausted(Exception):
    pass


def _theta_evaluator(params):
    def terms(rho, grid):
        return j_theta_terms(rho, params, grid)

    def confirm(rho, grid):
        law = CoefficientLaw(params)
        return max(j_direct(rho, law, grid), j_theta_form(rho, params, grid))

    return terms, confirm


def _general_evaluator(params, delta):
    law = CoefficientLaw(params)
    c = delta * (delta - 1.0) / 6.0

    def terms(rho, grid):
        hess, quart = j_general_terms(rho, law, grid, delta)
        return hess, -c * quart

    def confirm(rho, grid):
        return max(j_direct(rho, law, grid), j_general_form(rho, law, grid, delta))

    return terms, confirm


def _ladder(need: float):
    """Table rungs able to reach ``need``.

    Rungs whose tuned ratio already clears ``need`` come first (smallest grid
    first), since their starting profile is negative without refinement;
    rungs within 1.5% of it follow, to be closed by refinement.
    """
    rungs = sorted(EXTREMAL_TABLE)
    clear = [n for n in rungs if EXTREMAL_TABLE[n][3] >= RATIO_MARGIN * need]
    near = [n for n in rungs if 0.985 * need <= EXTREMAL_TABLE[n][3] < RATIO_MARGIN * need]
    return clear + near or rungs[-1:]


def _refine(profile, n, evaluate, budget, rng, max_evals):
    """Powell refinement at one rung; returns (best profile, best normalized J)."""
    grid = make_grid(n)
    zeta = profile.log10_zeta
    best = [profile, math.inf]

    def objective(v):
        if budget.left <= 0:
            raise _Exhausted
        if profile.theta != 0.0 and not (0.5 < v[0] < 3.0 and zeta < v[1] < -0.3):
            return 1.0
        cand = profile.with_vector(v)
        rho = cand.realize(n)
        budget.used += 1
        if not np.all(np.isfinite(rho)) or rho.min() <= 0.0:
            return 1.0
        with np.errstate(all="ignore"):
            val = _normalized(evaluate(rho, grid))
        if not np.isfinite(val):
            return 1.0
        if val < best[1]:
            best[0], best[1] = cand, val
        if val < 0.0 and is_resolved(rho, grid):
            raise _Exhausted
        return val

    v0 = profile.vector()
    try:
        objective(v0)
        if best[1] >= 0.0:
            jitter = rng.normal(scale=1e-3, size=v0.size)
            jitter[:2] = 0.0
            minimize(objective, v0 + jitter, method="Powell",
                     options=dict(maxfev=min(max_evals, budget.left), xtol=1e-5, ftol=1e-12))
    except _Exhausted:
        pass
    return best[0], best[1]


def _confirmed(profile, n, evaluate, confirm, budget, seed):
    grid = make_grid(n)
    rho = profile.realize(n)
    if not is_resolved(rho, grid):
        return None
    fine = make_grid(2 * n)
    with warnings.catch_warnings(), np.errstate(all="ignore"):
        warnings.simplefilter("ignore", ResolutionWarning)
        terms = evaluate(rho, grid)
        value = float(sum(terms))
        check = confirm(profile.realize(2 * n), fine)
    if value < 0.0 and check < 0.0:
        return Counterexample(profile, n, value, _normalized(terms), float(check), budget.used, seed)
    return None


def _search(params, evaluate, confirm, need, budget, seed):
    rng = np.random.default_rng(seed)
    spent = _Budget(budget)
    theta = params.theta
    if theta == 0.0:
        # log branch: J/alpha = a(1-a)/2 int g_x^4 + int g_xx^2 with g = log rho;
        # a single cosine of amplitude A turns negative once A^2 > 8/(3a(a-1))
        a = params.alpha
        amp = 1.2 * math.sqrt(8.0 / (3.0 * a * (a - 1.0)))
        for n in (256, 1024, 4096, 16384):
            start = VacuumProfile(0.0, coefficients=(amp,) + (0.0,) * (N_MODES - 1))
            prof, val = _refine(start, n, evaluate, spent, rng, max(spent.left // 4, 50))
            if val < 0.0:
                found = _confirmed(prof, n, evaluate, confirm, spent, seed)
                if found is not None:
                    return found
            if spent.left <= 0:
                break
        return None
    if need < SMOOTH_REACH:
        # small targets: rho = exp(A cos) is resolved for any theta, unlike the cored
        # profiles, whose rho = f**(1/theta) steepens without bound as theta -> 0
        for amp in SMOOTH_AMPLITUDES:
            prof = VacuumProfile(0.0, coefficients=(amp,))
            if spent.left <= 0:
                break
            spent.used += 1
            with np.errstate(all="ignore"):
                val = _normalized(evaluate(prof.realize(SMOOTH_GRID), make_grid(SMOOTH_GRID)))
            if val < 0.0:
                found = _confirmed(prof, SMOOTH_GRID, evaluate, confirm, spent, seed)
                if found is not None:
                    return found
    for n in _ladder(need):
        shape, log_eta, coeffs, _ = EXTREMAL_TABLE[n]
        start = VacuumProfile(theta, shape, log_eta, math.log10(CORE_CELLS / n), tuple(coeffs))
        prof, val = _refine(start, n, evaluate, spent, rng, max(spent.left // 3, 50))
        if val < 0.0:
            found = _confirmed(prof, n, evaluate, confirm, spent, seed)
            if found is not None:
                return found
        if spent.left <= 0:
            break
    return None


def counterexample_search(alpha, beta, budget: int = DEFAULT_BUDGET, seed: int = 0) -> Counterexample | None:
    """Look for a positive density with J < 0 at an inadmissible pure-power pair.

    ``budget`` caps the number of J evaluations.  Returns ``None`` when the
    budget runs out first, which near the boundary lines is expected rather
    than evidence of admissibility.
    """
    verdict = admissible_power(alpha, beta)
    if verdict.analytic != INADMISSIBLE:
        raise MisuseError(f"({alpha}, {beta}) is {verdict.analytic}; a counterexample cannot exist there")
    params = ExponentParams(float(alpha), float(beta), 2.0)
    need = math.inf if params.theta == 0.0 else required_ratio(alpha, beta)
    terms, confirm = _theta_evaluator(params)
    return _search(params, terms, confirm, need, budget, seed)


def delta_counterexample_search(delta, budget: int = DEFAULT_BUDGET, seed: int = 0, alpha=None):
    """Counterexample on the delta line, realized with ``mu = rho**alpha``.

    When ``alpha`` is not given, the candidate in ``DELTA_ALPHAS`` with the
    smallest required Bernis ratio among those with ``theta > 0`` is used
    (for ``theta < 0`` the vacuum core of ``f`` becomes a spike in ``rho``).
    Returns ``(alpha, Counterexample | None)``.
    """
    if admissible_delta(delta).analytic != INADMISSIBLE:
        raise MisuseError(f"delta = {delta} is not outside [-2, 1]")

    def need(a):
        b = delta + 2.0 * a - 2.0
        return math.inf if a + b + 1.0 <= 0.0 else required_ratio(a, b)

    if alpha is None:
        alpha = min(DELTA_ALPHAS, key=need)
    beta = delta + 2.0 * alpha - 2.0
    params = ExponentParams(float(alpha), float(beta), 2.0)
    terms, confirm = _general_evaluator(params, delta)
    return alpha, _search(params, terms, confirm, need(alpha), budget, seed)


# --------------------------------------------------------------------------
# raster


@dataclass(frozen=True)
class MapSettings:
    samples_per_cell: int = 200
    search: bool = True
    search_distance: float = 0.5
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    sample_grid: int = SAMPLE_GRID


def _cell(args):
    i, j, alpha, beta, s = args
    verdict = admissible_power(alpha, beta)
    cell_seed = int(np.random.SeedSequence([s.seed, i, j]).generate_state(1)[0])
    params = ExponentParams(float(alpha), float(beta), 2.0)
    sampled = sample_min_j(params, s.samples_per_cell, cell_seed, s.sample_grid) if s.samples_per_cell else math.nan
    cx, searched = None, False
    if s.search and verdict.analytic == INADMISSIBLE and verdict.distance >= s.search_distance:
        searched = True
        cx = counterexample_search(alpha, beta, s.budget, cell_seed)
    return AdmissibilityVerdict(verdict.point, verdict.analytic, verdict.coefficient_value, sampled, cx,
                                searched, s.seed, verdict.distance)


def admissibility_map(alpha_range=(0.6, 3.0), beta_range=(-3.0, 5.0), resolution=25,
                      settings: MapSettings | None = None, jobs: int = 1):
    """Verdicts on a ``resolution x resolution`` raster, rows ordered by alpha then beta.

    Cells are independent and seeded by ``(settings.seed, i, j)``, so the
    raster is the same whatever ``jobs`` is.
    """
    if resolution < 2:
        raise MisuseError("resolution must be at least 2")
    s = settings or MapSettings()
    alphas = np.linspace(*alpha_range, resolution)
    betas = np.linspace(*beta_range, resolution)
    tasks = [(i, j, float(a), float(b), s) for i, a in enumerate(alphas) for j, b in enumerate(betas)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_cell, tasks, chunksize=4))
    return [_cell(t) for t in tasks]
