"""Exponent bookkeeping and the pointwise viscosity/capillarity laws.

The viscosity is ``mu(rho) = rho**alpha + eps * rho**(1/4)`` and the
capillarity is tied to it through ``k(rho) = rho**delta * mu'(rho)**2 / alpha**2``
with ``delta = beta - 2*alpha + 2``; at ``eps = 0`` this is exactly ``rho**beta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, PositivityError
from .grid import Grid, deriv

REG_EXPONENT = 0.25


@dataclass(frozen=True)
class ExponentParams:
    alpha: float
    beta: float
    gamma: float
    epsilon: float = 0.0

    @property
    def delta(self) -> float:
        return self.beta - 2.0 * self.alpha + 2.0

    @property
    def theta(self) -> float:
        return (self.alpha + self.beta + 1.0) / 2.0

    @property
    def power_law(self) -> bool:
        return self.epsilon == 0.0


def derive_exponents(alpha, beta, gamma=2.0, epsilon=0.0) -> ExponentParams:
    """Validate the exponents and return them with ``delta`` and ``theta`` derived."""
    alpha, beta, gamma, epsilon = (float(v) for v in (alpha, beta, gamma, epsilon))
    failed = []
    if not alpha > 0.5:
        failed.append("requires alpha > 1/2 (α>1/2)")
    if not gamma > 1.0:
        failed.append("requires gamma > 1 (γ>1)")
    if not 2.0 * gamma > alpha:
        failed.append("requires 2·gamma > alpha (2γ>α)")
    if not epsilon >= 0.0:
        failed.append("requires epsilon >= 0 (ε≥0)")
    if not np.isfinite(beta):
        failed.append("requires finite beta")
    if failed:
        raise ConfigurationError("; ".join(failed))
    return ExponentParams(alpha, beta, gamma, epsilon)


def _pow(rho, p):
    # integer powers stay exact; the rest go through log space
    if float(p).is_integer() and abs(p) <= 8:
        return rho ** int(p)
    return np.exp(p * np.log(rho))


def check_positive(rho):
    rho = np.asarray(rho, dtype=float)
    m = float(np.min(rho))
    if not m > 0.0:
        raise PositivityError(m)
    return rho


@dataclass(frozen=True)
class CoefficientLaw:
    """Pointwise ``mu_eps``, ``k_eps`` and their derivatives for fixed exponents.

    ``alpha`` and ``epsilon`` fix the viscosity; ``delta`` (taken from the
    params unless overridden) fixes the capillarity relative to it.
    """

    params: ExponentParams
    delta_override: float | None = None

    @property
    def alpha(self):
        return self.params.alpha

    @property
    def epsilon(self):
        return self.params.epsilon

    @property
    def delta(self):
        return self.params.delta if self.delta_override is None else self.delta_override

    @property
    def mode(self):
        return "power-law" if self.epsilon == 0.0 else "regularized"

    def mu(self, rho):
        rho = check_positive(rho)
        out = _pow(rho, self.alpha)
        if self.epsilon:
            out = out + self.epsilon * _pow(rho, REG_EXPONENT)
        return out

    def mu_prime(self, rho):
        rho = check_positive(rho)
        a = self.alpha
        out = a * _pow(rho, a - 1.0)
        if self.epsilon:
            out = out + self.epsilon * REG_EXPONENT * _pow(rho, REG_EXPONENT - 1.0)
        return out

    def mu_double_prime(self, rho):
        rho = check_positive(rho)
        a = self.alpha
        out = a * (a - 1.0) * _pow(rho, a - 2.0)
        if self.epsilon:
            q = REG_EXPONENT
            out = out + self.epsilon * q * (q - 1.0) * _pow(rho, q - 2.0)
        return out

    def k(self, rho):
        rho = check_positive(rho)
        return _pow(rho, self.delta) * self.mu_prime(rho) ** 2 / self.alpha**2

    def k_prime(self, rho):
        rho = check_positive(rho)
        d = self.delta
        mp = self.mu_prime(rho)
        return (d * _pow(rho, d - 1.0) * mp**2 + 2.0 * _pow(rho, d) * mp * self.mu_double_prime(rho)) / self.alpha**2

    def curvature_constant(self) -> float:
        """``C`` with ``rho*|mu''| <= C*mu'`` for every positive rho."""
        c = abs(self.alpha - 1.0)
        if self.epsilon:
            c = max(c, 1.0 - REG_EXPONENT)
        return c


def make_law(alpha, beta, gamma=2.0, epsilon=0.0) -> CoefficientLaw:
    return CoefficientLaw(derive_exponents(alpha, beta, gamma, epsilon))


def mu(rho, law: CoefficientLaw):
    return law.mu(rho)


def mu_prime(rho, law: CoefficientLaw):
    return law.mu_prime(rho)


def mu_double_prime(rho, law: CoefficientLaw):
    return law.mu_double_prime(rho)


def k_eps(rho, law: CoefficientLaw):
    return law.k(rho)


def phi_prime(rho, law: CoefficientLaw):
    """``phi'`` defined by ``rho * phi'(rho) = mu'(rho)``."""
    rho = check_positive(rho)
    return law.mu_prime(rho) / rho


def grad_phi(rho, law: CoefficientLaw, grid: Grid):
    """``d/dx phi(rho)`` by the chain rule; ``phi`` itself is never formed."""
    return phi_prime(rho, law) * deriv(rho, grid, 1)


def a_field(rho, law: CoefficientLaw, grid: Grid):
    """``A = sqrt(k(rho)/rho) * d/dx rho``."""
    rho = check_positive(rho)
    return np.sqrt(law.k(rho) / rho) * deriv(rho, grid, 1)


def diffusivities(rho, law: CoefficientLaw):
    """Viscous ``mu/rho`` and capillary ``sqrt(rho*k)`` coefficient fields."""
    rho = check_positive(rho)
    return law.mu(rho) / rho, np.sqrt(rho * law.k(rho))

