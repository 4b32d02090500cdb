"""Uniform periodic grid with Fourier-spectral calculus.

Fields are plain float64 arrays of length ``grid.n``; the grid carries the
wavenumbers and the 2/3 dealiasing mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, UnsupportedError


@dataclass(frozen=True)
class Grid:
    """Equispaced nodes ``x_j = j * length / n`` on the torus of circumference ``length``."""

    n: int
    length: float = 1.0
    _k: np.ndarray = field(init=False, repr=False, compare=False)
    _mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise ConfigurationError(f"grid size must be a power of two >= 8, got {n!r}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ConfigurationError(f"torus length must be positive, got {self.length!r}")
        modes = np.arange(n // 2 + 1)
        object.__setattr__(self, "_k", 2.0 * np.pi * modes / self.length)
        object.__setattr__(self, "_mask", (modes <= n / 3.0).astype(float))

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers of the rfft modes, ``2*pi*m/length``."""
        return self._k

    @property
    def dealias_mask(self) -> np.ndarray:
        return self._mask

    def multiplier(self, order: int, dealias: bool = False) -> np.ndarray:
        if order not in (1, 2, 3):
            raise UnsupportedError(f"derivative order must be 1, 2 or 3, got {order!r}")
        m = (1j * self._k) ** order
        if order % 2:
            # odd derivatives of the Nyquist mode are not real
            m[-1] = 0.0
        if dealias:
            m = m * self._mask
        return m


def make_grid(n: int, length: float = 1.0) -> Grid:
    return Grid(n, float(length))


def deriv(f, grid: Grid, order: int = 1, dealias: bool = False) -> np.ndarray:
    """Spectral derivative of order 1-3; optionally filtered by the 2/3 rule."""
    m = grid.multiplier(order, dealias)
    return np.fft.irfft(np.fft.rfft(f) * m, n=grid.n)


def derivs(f, grid: Grid, orders=(1, 2), dealias: bool = False):
    """Several derivatives of ``f`` sharing one forward transform."""
    fh = np.fft.rfft(f)
    return tuple(np.fft.irfft(fh * grid.multiplier(o, dealias), n=grid.n) for o in orders)


def integrate(f, grid: Grid) -> float:
    return float(grid.spacing * np.sum(f))


def dealias(f, grid: Grid) -> np.ndarray:
    """Zero every mode with ``|k| > n/3``."""
    return np.fft.irfft(np.fft.rfft(f) * grid.dealias_mask, n=grid.n)


def modal_norm_sq(f, grid: Grid) -> float:
    """``length * sum |c_k|^2`` over all Fourier coefficients (Parseval partner of integrate(f**2))."""
    c = np.fft.fft(f) / grid.n
    return float(grid.length * np.sum(np.abs(c) ** 2))


def tail_fraction(f, grid: Grid, fraction: float = 0.1) -> float:
    """Share of spectral mass carried by the top ``fraction`` of modes, mean excluded."""
    p = np.abs(np.fft.rfft(f)) ** 2
    p[0] = 0.0
    total = p.sum()
    if total == 0.0:
        return 0.0
    cut = int(np.ceil(len(p) * (1.0 - fraction)))
    return float(p[cut:].sum() / total)
