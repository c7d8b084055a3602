"""Closed forms for the 1D nearest-neighbor chain (odd length, center sink).

The chain spectrum is known analytically, the weak-dephasing bound reduces
to a rational function of the rates, and the Zeno bound reduces to ratios
of tridiagonal determinants expressible through Chebyshev polynomials of
the second kind.  These serve as independent oracles for the generic
matrix pipeline in :mod:`enaqt.bounds`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .superop import RateSet


class UnsupportedConfigurationError(ValueError):
    """The closed forms require an odd chain length with a central sink."""


@dataclass(frozen=True)
class ChainSpectrum:
    """Energies E_k = 2J cos(pi k / (L+1)) and sine-wave eigenvector
    overlaps <k|alpha> = sqrt(2/(L+1)) sin(pi alpha k / (L+1))."""

    energies: np.ndarray = field(repr=False)
    overlaps: np.ndarray = field(repr=False)  # overlaps[k-1, alpha-1]


def chain_spectrum(L: int, J: float = 1.0) -> ChainSpectrum:
    k = np.arange(1, L + 1)
    energies = 2.0 * J * np.cos(np.pi * k / (L + 1))
    kk, aa = np.meshgrid(k, k, indexing="ij")
    overlaps = np.sqrt(2.0 / (L + 1)) * np.sin(np.pi * aa * kk / (L + 1))
    return ChainSpectrum(energies=energies, overlaps=overlaps)


def chebyshev_u(n: int, x: float) -> float:
    """Chebyshev polynomial of the second kind by the three-term recurrence
    (stable for |x| > 1, where the trigonometric form needs hyperbolic
    continuation)."""
    if n < 0:
        return 0.0
    u_prev, u = 1.0, 2.0 * x
    if n == 0:
        return u_prev
    for _ in range(n - 1):
        u_prev, u = u, 2.0 * x * u - u_prev
    return u


def det_s(n: int, q: float) -> float:
    """Determinant of the n x n tridiagonal matrix with unit diagonal and
    off-diagonal -q/2: det S_n(q) = (q/2)^n U_n(1/q)."""
    if n == 0:
        return 1.0
    return (q / 2.0) ** n * chebyshev_u(n, 1.0 / q)


def _require_odd(L: int):
    if L < 1 or L % 2 == 0:
        raise UnsupportedConfigurationError(
            f"closed forms require odd L >= 1, got {L}"
        )


def eta_coh_1d(L: int, rates: RateSet) -> float:
    """Weak-dephasing bound for the odd chain with central sink:

        (Gamma_s / L) (L gamma + (L+1) mu)
        / (2 mu (Gamma_s + (L+1) mu / 2) + gamma (Gamma_s + L mu)).
    """
    _require_odd(L)
    mu, gs, g = rates.mu, rates.gamma_s, rates.gamma
    num = gs * (L * g + (L + 1) * mu)
    den = 2 * mu * (gs + (L + 1) * mu / 2.0) + g * (gs + L * mu)
    return num / (L * den)


def sink_resolvent_1d(L: int, rates: RateSet) -> float:
    """Exact <s|(mu + K)^{-1}|s> for the chain via Chebyshev determinants.

    Evaluated in extended precision: as mu -> 0 the parameter q approaches 1
    and the determinant ratios cancel to O(mu), which costs several digits
    in plain doubles.
    """
    _require_odd(L)
    one = np.longdouble(1.0)
    mu = np.longdouble(rates.mu)
    g = np.longdouble(rates.gamma)
    J = np.longdouble(rates.J)
    c = 2.0 * J * J / (mu + g)
    a = mu + 2.0 * c
    q = 2.0 * c / a
    if not q < 1.0:
        raise AssertionError(f"q = {q} must be < 1 for mu > 0")
    n = (L - 1) // 2
    d_n, d_nm1 = _det_s_ld(n, q), _det_s_ld(n - 1, q)
    d_L, d_Lm1 = _det_s_ld(L, q), _det_s_ld(L - 1, q)
    s11_half = d_nm1 / d_n if n > 0 else np.longdouble(0.0)
    s11_full = d_Lm1 / d_L
    s1L_full = (q / 2.0) ** (L - 1) / d_L
    num = d_n * d_n * (one - (q / 2.0) * s11_half) ** 2
    den = d_L * ((one - (q / 2.0) * s11_full) ** 2 - (q * q / 4.0) * s1L_full**2)
    return float(num / (a * den))


def _det_s_ld(n: int, q: np.longdouble) -> np.longdouble:
    """det S_n(q) by the three-term recurrence in extended precision."""
    if n <= 0:
        return np.longdouble(1.0)
    half_q = q / 2.0
    d_prev, d = np.longdouble(1.0), np.longdouble(1.0)  # D_0, D_1
    for _ in range(n - 1):
        d_prev, d = d, d - half_q * half_q * d_prev
    return d


def sink_resolvent_1d_smallmu(L: int, rates: RateSet) -> float:
    """Small-mu expansion 1/(mu L) + (L^2 - 1) / (6 L (mu + 4J^2/(mu+gamma)))."""
    _require_odd(L)
    mu, g, J = rates.mu, rates.gamma, rates.J
    return 1.0 / (mu * L) + (L * L - 1.0) / (
        6.0 * L * (mu + 4.0 * J * J / (mu + g))
    )


def eta_incoh_1d(L: int, rates: RateSet, approx: bool = False) -> float:
    """Zeno bound for the odd chain with central sink.

    The exact route goes through the determinant reduction; with
    ``approx=True`` the small-mu expansion of the sink resolvent is used
    instead.
    """
    _require_odd(L)
    if rates.mu <= 0:
        raise ValueError("eta_incoh_1d requires mu > 0")
    s = (
        sink_resolvent_1d_smallmu(L, rates)
        if approx
        else sink_resolvent_1d(L, rates)
    )
    return rates.gamma_s / (rates.mu * L) / (1.0 + rates.gamma_s * s)


def gamma0_asymptote(L: int, mu: float, J: float = 1.0) -> float:
    """Large-L, small-mu asymptote of the crossing point: 5J/L - mu."""
    return 5.0 * J / L - mu


def gamma0_equation(
    L: int, mu: float, gamma_s: float, J: float = 1.0, gamma_max: float = 1e3
) -> float | None:
    """Positive root of eta_coh_1d(gamma) = eta_incoh_1d(gamma; small-mu)
    for the chain, or None when the curves do not cross at gamma > 0."""
    _require_odd(L)

    def f(gamma: float) -> float:
        r = RateSet(J=J, mu=mu, gamma_s=gamma_s, gamma=gamma)
        return eta_coh_1d(L, r) - eta_incoh_1d(L, r, approx=True)

    grid = np.logspace(np.log10(1e-8 * J), np.log10(gamma_max * J), 200)
    vals = np.array([f(g) for g in grid])
    changes = np.flatnonzero(np.diff(np.sign(vals)) != 0)
    if len(changes) == 0:
        return None
    i = changes[0]
    return float(brentq(f, grid[i], grid[i + 1], xtol=1e-10 * J))
