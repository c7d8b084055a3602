"""Analytic upper bounds on the transfer efficiency.

Four estimates for arbitrary lattices:

* ``eta_abs``     -- background-absorption bound Gamma_s / (N mu + Gamma_s),
  with the associated transfer-time lower bound and size limit.
* ``eta_coh``     -- weak-dephasing bound from the decoherence matrix Omega
  in the hopping eigenbasis.
* ``eta_incoh``   -- strong-dephasing (Zeno) bound from the classical
  hopping generator K, via Sherman-Morrison.
* ``min_estimate``-- the pointwise minimum of the last two, with the
  crossing point gamma0 locating the optimum dephasing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from .lattice import LatticeSpec, build_hopping
from .superop import RateSet


def _refined_spd_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """SPD solve with extended-precision iterative refinement.

    The bound matrices have entries spanning 1/mu decades, so a plain
    double solve carries a cond * eps forward error that can exceed the
    accuracy the closed-form equivalence checks need; computing the
    residual in long double recovers full double precision as long as
    the matrix is not singular to working precision."""
    cho = sla.cho_factor(a, check_finite=False)
    x = sla.cho_solve(cho, b, check_finite=False)
    a_ld = a.astype(np.longdouble)
    b_ld = b.astype(np.longdouble)
    for _ in range(3):
        r = np.asarray(b_ld - a_ld @ x.astype(np.longdouble), dtype=float)
        x = x + sla.cho_solve(cho, r, check_finite=False)
    return x


class SingularBoundError(RuntimeError):
    """Omega (or mu + K) is numerically singular; the bound is undefined."""


class Gamma0BracketError(RuntimeError):
    """The coherent/incoherent crossing could not be bracketed cleanly."""


@dataclass(frozen=True)
class OmegaMatrix:
    """Decoherence matrix over the hopping eigenbasis.

    Omega = diag(mu + Gamma_s |<alpha|s>|^2) + gamma (1 - W) where
    W_ab = sum_k |<alpha|k>|^2 |<beta|k>|^2 is doubly stochastic.
    """

    omega: np.ndarray = field(repr=False)
    eigenbasis: np.ndarray = field(repr=False)
    overlaps: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class KMatrix:
    """Incoherent (random-walk) generator of the Zeno regime.

    K_mn = 2/(mu+gamma) (delta_mn <m|J^2|n> - <m|J|n>^2); positive
    semidefinite with the uniform vector in its null space.
    """

    k: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class BoundReport:
    eta_abs: float
    eta_coh: float
    eta_incoh: float
    eta_min_estimate: float
    gamma0: float | None
    tau_lower: float


def build_omega(j_mat: np.ndarray, sink: int, rates: RateSet) -> OmegaMatrix:
    j_mat = np.asarray(j_mat, dtype=float)
    n = j_mat.shape[0]
    _, vecs = np.linalg.eigh(j_mat)
    overlaps = vecs[sink, :] ** 2
    a = vecs**2  # a[k, alpha] = |<alpha|k>|^2
    w = a.T @ a
    omega = np.diag(rates.mu + rates.gamma_s * overlaps) + rates.gamma * (
        np.eye(n) - w
    )
    return OmegaMatrix(omega=omega, eigenbasis=vecs, overlaps=overlaps, w=w)


def build_k(j_mat: np.ndarray, rates: RateSet) -> KMatrix:
    j_mat = np.asarray(j_mat, dtype=float)
    j_sq = j_mat @ j_mat
    k = (2.0 / (rates.mu + rates.gamma)) * (np.diag(np.diag(j_sq)) - j_mat**2)
    return KMatrix(k=k)


def eta_abs(rates: RateSet, n_sites: int) -> float:
    """Upper bound from background losses alone: Gamma_s / (N mu + Gamma_s)."""
    if rates.mu == 0:
        warnings.warn("eta_abs is degenerate at mu = 0; returning 1", stacklevel=2)
        return 1.0
    return rates.gamma_s / (n_sites * rates.mu + rates.gamma_s)


def tau_lower(rates: RateSet, n_sites: int) -> float:
    """Lower bound on the transfer time, N / (N mu + Gamma_s)."""
    return n_sites / (n_sites * rates.mu + rates.gamma_s)


def size_limit(rates: RateSet) -> float:
    """Linear size sqrt(Gamma_s / mu) beyond which extraction is inefficient."""
    return np.sqrt(rates.gamma_s / rates.mu) if rates.mu > 0 else np.inf


def eta_coh_from_hopping(j_mat: np.ndarray, sink: int, rates: RateSet) -> float:
    """Weak-dephasing bound 1 - (mu/N) <1|Omega^{-1}|1> (one SPD solve)."""
    n = np.asarray(j_mat).shape[0]
    om = build_omega(j_mat, sink, rates)
    try:
        x = _refined_spd_solve(om.omega, np.ones(n))
    except (sla.LinAlgError, ValueError) as exc:
        raise SingularBoundError("Omega is singular (mu = gamma = 0?)") from exc
    return float(1.0 - rates.mu / n * x.sum())


def eta_incoh_from_hopping(j_mat: np.ndarray, sink: int, rates: RateSet) -> float:
    """Zeno bound (Gamma_s / mu N) / (1 + Gamma_s <s|(mu+K)^{-1}|s>).

    The uniform vector spans the null space of K, so the resolvent splits
    into an analytic 1/(mu N) piece plus a solve restricted to the
    orthogonal complement, where the smallest eigenvalue is the spectral
    gap of K rather than mu.  Handling the null mode explicitly matters
    numerically: K scales as 1/mu, and adding mu to its huge diagonal
    would round most of mu away before the solver ever sees it.
    """
    if rates.mu <= 0:
        raise ValueError("eta_incoh requires mu > 0")
    j_mat = np.asarray(j_mat, dtype=float)
    n = j_mat.shape[0]
    k = build_k(j_mat, rates).k
    k[np.diag_indices_from(k)] += rates.mu
    w = np.full(n, -1.0 / n)
    w[sink] += 1.0
    try:
        y = _refined_spd_solve(k, w)
    except (sla.LinAlgError, ValueError) as exc:
        raise SingularBoundError("mu + K is singular") from exc
    y -= y.mean()
    mu_n = rates.mu * n
    return float(
        rates.gamma_s / (mu_n + rates.gamma_s * (1.0 + mu_n * y[sink]))
    )


def eta_incoh_via_d(j_mat: np.ndarray, sink: int, rates: RateSet) -> float:
    """Same bound through the dense D = Gamma_s |s><s| + mu + K route,
    without the Sherman-Morrison reduction.  Equality with
    :func:`eta_incoh_from_hopping` is asserted in the test suite."""
    j_mat = np.asarray(j_mat, dtype=float)
    n = j_mat.shape[0]
    d = build_k(j_mat, rates).k
    d[np.diag_indices_from(d)] += rates.mu
    d[sink, sink] += rates.gamma_s
    d_inv_ss = sla.inv(d)[sink, sink]
    return float(
        rates.gamma_s / (rates.mu * n) * (1.0 - rates.gamma_s * d_inv_ss)
    )


def eta_coh(spec: LatticeSpec, rates: RateSet) -> float:
    hop = build_hopping(spec, J=rates.J)
    return eta_coh_from_hopping(hop.j_mat, spec.sink, rates)


def eta_incoh(spec: LatticeSpec, rates: RateSet) -> float:
    hop = build_hopping(spec, J=rates.J)
    return eta_incoh_from_hopping(hop.j_mat, spec.sink, rates)


def find_gamma0(
    spec: LatticeSpec,
    rates: RateSet,
    gamma_max: float | None = None,
    xtol: float | None = None,
) -> float | None:
    """Crossing point of eta_coh (increasing in gamma) and eta_incoh
    (decreasing): root of their difference on (0, 1e3 J].

    Returns None when there is no positive crossing (no dephasing-assisted
    regime).  ``rates.gamma`` is ignored.
    """
    hop = build_hopping(spec, J=rates.J)
    j_mat, sink = hop.j_mat, spec.sink
    if gamma_max is None:
        gamma_max = 1e3 * rates.J
    if xtol is None:
        xtol = 1e-6 * rates.J

    def f(gamma: float) -> float:
        r = rates.replace(gamma=gamma)
        return eta_coh_from_hopping(j_mat, sink, r) - eta_incoh_from_hopping(
            j_mat, sink, r
        )

    grid = np.logspace(np.log10(1e-8 * rates.J), np.log10(gamma_max), 200)
    vals = np.array([f(g) for g in grid])
    signs = np.sign(vals)
    changes = np.flatnonzero(np.diff(signs) != 0)
    if len(changes) == 0:
        return None
    if len(changes) > 1:
        raise Gamma0BracketError(
            f"multiple sign changes of eta_coh - eta_incoh at gamma = "
            f"{grid[changes]}; cannot bracket a unique crossing"
        )
    i = changes[0]
    return float(brentq(f, grid[i], grid[i + 1], xtol=xtol))


def min_estimate(spec: LatticeSpec, rates: RateSet) -> BoundReport:
    """Assemble all bounds and the min-estimate for one configuration."""
    n = spec.n_sites
    e_abs = eta_abs(rates, n)
    e_coh = eta_coh(spec, rates)
    e_incoh = eta_incoh(spec, rates)
    return BoundReport(
        eta_abs=e_abs,
        eta_coh=e_coh,
        eta_incoh=e_incoh,
        eta_min_estimate=min(e_coh, e_incoh),
        gamma0=find_gamma0(spec, rates),
        tau_lower=tau_lower(rates, n),
    )


def eta_coh_basis_spread(
    spec: LatticeSpec, rates: RateSet, n_remix: int = 8, seed: int = 0
) -> float:
    """Spread of eta_coh under random orthogonal remixing within degenerate
    eigenspaces of the hopping matrix.

    The bound is constructed from an eigenbasis; degeneracies make that
    basis non-unique, and the resulting value can depend on the choice.
    This diagnostic quantifies the dependence instead of hiding it.
    """
    hop = build_hopping(spec, J=rates.J)
    j_mat, sink = hop.j_mat, spec.sink
    n = j_mat.shape[0]
    ev, vecs = np.linalg.eigh(j_mat)
    scale = max(np.abs(ev).max(), 1.0)
    rng = np.random.default_rng(seed)

    def value(v: np.ndarray) -> float:
        overlaps = v[sink, :] ** 2
        a = v**2
        w = a.T @ a
        omega = np.diag(rates.mu + rates.gamma_s * overlaps) + rates.gamma * (
            np.eye(n) - w
        )
        return float(1.0 - rates.mu / n * sla.solve(omega, np.ones(n)).sum())

    vals = [value(vecs)]
    for _ in range(n_remix):
        v2 = vecs.copy()
        start = 0
        for i in range(1, n + 1):
            if i == n or ev[i] - ev[i - 1] > 1e-8 * scale:
                if i - start > 1:
                    q, _ = np.linalg.qr(rng.normal(size=(i - start, i - start)))
                    v2[:, start:i] = v2[:, start:i] @ q
                start = i
        vals.append(value(v2))
    return float(max(vals) - min(vals))
