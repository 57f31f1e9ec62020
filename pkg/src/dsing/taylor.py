"""Trapezoidal-rule estimates of Taylor coefficients and the adaptive node count."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class PointSet:
    m: int
    nodes: np.ndarray = field(repr=False)

    @classmethod
    def roots_of_unity(cls, m: int) -> "PointSet":
        if m < 1:
            raise ValueError("need at least one node")
        return cls(m, np.exp(2j * np.pi * np.arange(1, m + 1) / m))


def taylor_coeff(f: Callable, j: int, N: int) -> complex:
    """Trapezoidal estimate (1/N) sum_k z_k^{-j} f(z_k), z_k = exp(2 pi i k / N)."""
    if N < 1:
        raise ValueError("N must be positive")
    k = np.arange(1, N + 1)
    z = np.exp(2j * np.pi * k / N)
    vals = np.asarray(f(z), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise ValueError("function is not finite at a quadrature node")
    # z_k^{-j} computed from the reduced angle to avoid large-power roundoff
    zj = np.exp(-2j * np.pi * ((j * k) % N) / N)
    return complex(np.mean(zj * vals))


class TaylorProbe:
    """Trapezoidal coefficient estimates of one scalar function, with node caching.

    Function values are cached by the exact node angle (a reduced fraction of a
    full turn), so estimates that share nodes never re-evaluate ``f``.
    """

    def __init__(self, f: Callable):
        self.f = f
        self._cache: dict[Fraction, complex] = {}
        self.evaluations = 0

    def values(self, N: int) -> np.ndarray:
        keys = [Fraction(k % N, N) for k in range(1, N + 1)]
        missing = [q for q in dict.fromkeys(keys) if q not in self._cache]
        if missing:
            z = np.exp(2j * np.pi * np.array([float(q) for q in missing]))
            vals = np.asarray(self.f(z), dtype=complex).ravel()
            if not np.all(np.isfinite(vals)):
                raise ValueError("function is not finite at a quadrature node")
            self.evaluations += len(missing)
            self._cache.update(zip(missing, vals))
        return np.array([self._cache[q] for q in keys])

    def coeff(self, j: int, N: int | None = None) -> complex:
        """Estimate a_j; by default with N = 2j + 1 nodes so that a_j does not alias a_0."""
        if N is None:
            N = 2 * j + 1
        k = np.arange(1, N + 1)
        zj = np.exp(-2j * np.pi * ((j * k) % N) / N)
        return complex(np.mean(zj * self.values(N)))


@dataclass
class ProbeResult:
    m: int
    converged: bool
    coeffs: dict[int, float]  # j -> |a_j| estimate


def choose_num_points(
    f: Callable,
    m_min: int = 4,
    m_max: int = 512,
    tol: float = 1e-12,
    lookahead: int = 2,
    probe: TaylorProbe | None = None,
) -> ProbeResult:
    """Smallest m in [m_min, m_max] with |a_j| <= tol for j = m, ..., m + lookahead.

    The window guards against isolated vanishing coefficients (f(z) = z^2 has
    a_1 = 0 but needs m = 3). Returns ``m_max`` with ``converged=False`` when
    no candidate qualifies.
    """
    if m_min < 1 or m_max < m_min or tol <= 0:
        raise ValueError("need 1 <= m_min <= m_max and tol > 0")
    probe = probe or TaylorProbe(f)
    mags: dict[int, float] = {}

    def mag(j):
        if j not in mags:
            mags[j] = abs(probe.coeff(j))
        return mags[j]

    m = m_min
    while m <= m_max:
        bad = next((j for j in range(m, m + lookahead + 1) if mag(j) > tol), None)
        if bad is None:
            return ProbeResult(m, True, dict(sorted(mags.items())))
        m = bad + 1
    return ProbeResult(m_max, False, dict(sorted(mags.items())))
