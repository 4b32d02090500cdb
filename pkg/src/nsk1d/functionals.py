"""Integral functionals on the torus: energy, BD entropy, the coercivity functional J.

J is evaluated three independent ways:

* ``j_direct``: straight from its definition, ``int d2(mu) * G`` with
  ``G = d(k rho_x) - k'/2 rho_x**2``;
* ``j_theta_form``: the closed quadratic form in ``f = rho**theta`` (pure powers);
* ``j_general_form``: the two-term form in ``mu`` valid for any increasing ``mu``.

All three use the ``d2(mu)`` sign convention, under which J is the BD dissipation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientLaw, ExponentParams, _pow, check_positive
from .errors import ResolutionWarning, UnsupportedError
from .grid import Grid, dealias, deriv, derivs, integrate, tail_fraction

TAIL_TOLERANCE = 1e-8


@dataclass(frozen=True)
class EnergyTerms:
    kinetic: float
    pressure: float
    capillary: float

    @property
    def total(self) -> float:
        return self.kinetic + self.pressure + self.capillary


@dataclass(frozen=True)
class FunctionalReport:
    mass: float
    energy: float
    bd_entropy: float
    j_direct: float
    j_theta: float
    j_general: float
    visc_dissipation: float
    pressure_dissipation: float
    bernis_lhs: float
    bernis_rhs: float
    resolved: bool

    def cross_form_errors(self):
        ref = max(abs(self.j_theta), 1e-12)
        return abs(self.j_direct - self.j_theta) / ref, abs(self.j_direct - self.j_general) / ref


@dataclass(frozen=True)
class KortewegConstants:
    kbar1: float
    kbar2: float
    k1: float
    k2: float


def is_resolved(f, grid: Grid, tol=TAIL_TOLERANCE) -> bool:
    return tail_fraction(f, grid) < tol


def _resolution_guard(rho, grid):
    if not is_resolved(rho, grid):
        warnings.warn(
            f"density spectrum tail {tail_fraction(rho, grid):.2e} exceeds {TAIL_TOLERANCE:g}; "
            "quartic functionals may be aliased",
            ResolutionWarning,
            stacklevel=3,
        )
        return False
    return True


def mass(rho, grid: Grid) -> float:
    return integrate(rho, grid)


def energy(rho, u, law: CoefficientLaw, grid: Grid) -> EnergyTerms:
    """Kinetic, pressure and capillary parts of the energy.

    The capillary density is ``k(rho) |rho_x|**2 / 2``; that is the
    quantity the momentum equation actually conserves.
    """
    rho = check_positive(rho)
    gamma = law.params.gamma
    rx = deriv(rho, grid, 1)
    return EnergyTerms(
        kinetic=integrate(0.5 * rho * u**2, grid),
        pressure=integrate(_pow(rho, gamma), grid) / (gamma - 1.0),
        capillary=integrate(0.5 * law.k(rho) * rx**2, grid),
    )


def effective_velocity(rho, u, law: CoefficientLaw, grid: Grid):
    """``w = u + d/dx phi(rho)`` with ``rho phi' = mu'``."""
    rho = check_positive(rho)
    return u + law.mu_prime(rho) / rho * deriv(rho, grid, 1)


def bd_entropy(rho, u, law: CoefficientLaw, grid: Grid) -> EnergyTerms:
    """BD entropy: the energy with ``u`` replaced by the effective velocity ``w``."""
    rho = check_positive(rho)
    w = effective_velocity(rho, u, law, grid)
    e = energy(rho, w, law, grid)
    return e


def visc_dissipation(rho, u, law: CoefficientLaw, grid: Grid) -> float:
    return integrate(law.mu(rho) * deriv(u, grid, 1) ** 2, grid)


def pressure_dissipation(rho, law: CoefficientLaw, grid: Grid, offset: float = 2.0) -> float:
    """``gamma * int mu'(rho) rho**(gamma - offset) |rho_x|**2``.

    ``offset = 2`` is the exponent the BD balance produces; other values are
    accepted only so the balance can be shown to fail with them.
    """
    rho = check_positive(rho)
    gamma = law.params.gamma
    rx = deriv(rho, grid, 1)
    return gamma * integrate(law.mu_prime(rho) * _pow(rho, gamma - offset) * rx**2, grid)


def viscous_mismatch(rho, u, law: CoefficientLaw, grid: Grid) -> float:
    """``int (mu - rho mu') u_x w_x``: the part of the viscous flux the BD velocity does not absorb.

    Vanishes identically when ``rho mu' = mu`` (alpha = 1, eps = 0).
    """
    rho = check_positive(rho)
    w = effective_velocity(rho, u, law, grid)
    return integrate((law.mu(rho) - rho * law.mu_prime(rho)) * deriv(u, grid, 1) * deriv(w, grid, 1), grid)


def korteweg_potential_direct(rho, law: CoefficientLaw, grid: Grid):
    """``G = d/dx(k rho_x) - k'(rho)/2 |rho_x|**2`` from ``k`` and ``k'`` directly."""
    rx = deriv(rho, grid, 1)
    return deriv(law.k(rho) * rx, grid, 1) - 0.5 * law.k_prime(rho) * rx**2


def j_direct(rho, law: CoefficientLaw, grid: Grid) -> float:
    rho = check_positive(rho)
    _resolution_guard(rho, grid)
    m = law.mu(rho)
    return integrate(deriv(m, grid, 2) * korteweg_potential_direct(rho, law, grid), grid)


def _theta_integrals(f, grid):
    f1, f2 = derivs(f, grid, (1, 2))
    quartic = integrate(f1**4 / f**2, grid)
    hessian = integrate(f2**2, grid)
    mixed = integrate(f2 / f * f1**2, grid)
    return quartic, hessian, mixed


def j_theta_terms(rho, params: ExponentParams, grid: Grid):
    """The weighted integrals whose sum is the theta form of J (pure powers only)."""
    if not params.power_law:
        raise UnsupportedError("the theta form holds for pure power laws only (epsilon = 0)")
    rho = check_positive(rho)
    a, b = params.alpha, params.beta
    s = a + b + 1.0
    if s == 0.0:
        g1, g2 = derivs(np.log(rho), grid, (1, 2))
        return (a * 0.5 * a * (1.0 - a) * integrate(g1**4, grid), a * integrate(g2**2, grid))
    theta = s / 2.0
    quartic, hessian, mixed = _theta_integrals(_pow(rho, theta), grid)
    c_quartic = (a - b - 1.0) * (1.0 - a) / s**2
    w = a / theta**2
    return (w * c_quartic * quartic, w * hessian, -w * b / s * mixed)


def j_theta_form(rho, params: ExponentParams, grid: Grid) -> float:
    """J for pure powers via ``f = rho**theta`` (log branch when theta = 0)."""
    return float(sum(j_theta_terms(rho, params, grid)))


def j_general_terms(rho, law: CoefficientLaw, grid: Grid, delta=None):
    """The two integrals ``int rho^d mu' |mu_xx|^2`` and ``int rho^(d-2) |mu_x|^4 / mu'``."""
    rho = check_positive(rho)
    d = law.delta if delta is None else delta
    m1, m2 = derivs(law.mu(rho), grid, (1, 2))
    mp = law.mu_prime(rho)
    hess = integrate(_pow(rho, d) * mp * m2**2, grid)
    quart = integrate(_pow(rho, d - 2.0) * m1**4 / mp, grid)
    return hess, quart


def j_general_form(rho, law: CoefficientLaw, grid: Grid, delta=None, normalized=True) -> float:
    """Two-term J for ``k = rho**delta * mu'**2`` (divided by alpha**2 when ``normalized``).

    The normalized value is J for the model capillarity ``k_eps`` and so
    matches ``j_direct``.
    """
    d = law.delta if delta is None else delta
    hess, quart = j_general_terms(rho, law, grid, d)
    j = hess - d * (d - 1.0) / 6.0 * quart
    return j / law.alpha**2 if normalized else j


def bernis_pair(rho, theta, grid: Grid):
    """``(1/9 int |f_x|^4/f^2, int |f_xx|^2)`` for ``f = rho**theta``."""
    if theta == 0:
        raise UnsupportedError("no Bernis estimate for theta = 0")
    rho = check_positive(rho)
    f = _pow(rho, theta)
    f1, f2 = derivs(f, grid, (1, 2))
    return integrate(f1**4 / f**2, grid) / 9.0, integrate(f2**2, grid)


def generalized_bernis_pair(rho, law: CoefficientLaw, grid: Grid, delta):
    """``((delta-1)^2/9 int rho^(d-2)|mu_x|^4/mu', int rho^d mu' |mu_xx|^2)``."""
    if delta == 1:
        raise UnsupportedError("the generalized Bernis bound needs delta != 1")
    hess, quart = j_general_terms(rho, law, grid, delta)
    return (delta - 1.0) ** 2 / 9.0 * quart, hess


def gbd_bound_pair(rho, law: CoefficientLaw, grid: Grid, delta=None):
    """``(int rho^d mu'^3 (|rho_xx|^2 + |rho_x|^4/rho^2), J)`` with J unnormalized, -2 < delta < 1."""
    d = law.delta if delta is None else delta
    if not -2.0 < d < 1.0:
        raise UnsupportedError(f"dissipation bound needs -2 < delta < 1, got {d}")
    rho = check_positive(rho)
    r1, r2 = derivs(rho, grid, (1, 2))
    lhs = integrate(_pow(rho, d) * law.mu_prime(rho) ** 3 * (r2**2 + r1**4 / rho**2), grid)
    return lhs, j_general_form(rho, law, grid, d, normalized=False)


def korteweg_force(rho, params: ExponentParams, grid: Grid):
    """``rho d/dx(d/dx(rho^b rho_x) - b rho^(b-1)/2 |rho_x|^2)`` for ``k = rho**beta``, dealiased."""
    rho = check_positive(rho)
    b = params.beta
    rx = deriv(rho, grid, 1)
    g = deriv(_pow(rho, b) * rx, grid, 1) - 0.5 * b * _pow(rho, b - 1.0) * rx**2
    return dealias(rho * deriv(g, grid, 1), grid)


def korteweg_weak_constants(params: ExponentParams) -> KortewegConstants:
    """Constants of the two divergence-form rewritings of the Korteweg force.

    With ``b = beta/2 + 1``::

        force = kbar1 d2(rho^b d(rho^b)) + kbar2 d(|d rho^b|^2)
              = k1 d2(rho^(beta+2-theta) d(rho^theta)) + k2 d(rho^(beta+2-theta) |d rho^(theta/2)|^2)

    with ``kbar1 = 1/b``, ``kbar2 = -(beta+3)/(2 b^2)``, ``k1 = 1/theta``,
    ``k2 = -2(beta+3)/theta^2``.
    """
    b = params.beta / 2.0 + 1.0
    theta = params.theta
    if b == 0.0:
        raise UnsupportedError("beta = -2 has no square-root-power form")
    if theta == 0.0:
        raise UnsupportedError("theta = 0 has no rho**theta form")
    beta = params.beta
    return KortewegConstants(
        kbar1=1.0 / b,
        kbar2=-(beta + 3.0) / (2.0 * b**2),
        k1=1.0 / theta,
        k2=-2.0 * (beta + 3.0) / theta**2,
    )


def korteweg_decompositions(rho, params: ExponentParams, grid: Grid):
    """Both divergence-form reconstructions of the Korteweg force."""
    rho = check_positive(rho)
    c = korteweg_weak_constants(params)
    b = params.beta / 2.0 + 1.0
    theta = params.theta
    pb = _pow(rho, b)
    pb_x = deriv(pb, grid, 1)
    bar = c.kbar1 * deriv(pb * pb_x, grid, 2) + c.kbar2 * deriv(pb_x**2, grid, 1)
    weight = _pow(rho, params.beta + 2.0 - theta)
    th = c.k1 * deriv(weight * deriv(_pow(rho, theta), grid, 1), grid, 2)
    th = th + c.k2 * deriv(weight * deriv(_pow(rho, theta / 2.0), grid, 1) ** 2, grid, 1)
    return dealias(bar, grid), dealias(th, grid)


def functional_report(rho, u, law: CoefficientLaw, grid: Grid) -> FunctionalReport:
    rho = check_positive(rho)
    params = law.params
    theta = params.theta
    j_t = j_theta_form(rho, params, grid) if params.power_law else float("nan")
    if theta != 0:
        b_lhs, b_rhs = bernis_pair(rho, theta, grid)
    else:
        b_lhs = b_rhs = float("nan")
    return FunctionalReport(
        mass=mass(rho, grid),
        energy=energy(rho, u, law, grid).total,
        bd_entropy=bd_entropy(rho, u, law, grid).total,
        j_direct=j_direct(rho, law, grid),
        j_theta=j_t,
        j_general=j_general_form(rho, law, grid),
        visc_dissipation=visc_dissipation(rho, u, law, grid),
        pressure_dissipation=pressure_dissipation(rho, law, grid),
        bernis_lhs=b_lhs,
        bernis_rhs=b_rhs,
        resolved=is_resolved(rho, grid),
    )
