"""Green's-function solver: transfer efficiency and time by linear solves.

No time stepping: the time-integrated sink population is obtained from the
resolvent of the doubled-space generator,

    eta = -i Gamma_s <pi_s| (H0 - iG)^{-1} |rho0>,

and the transfer time from a second solve against the same factorization.
For mu > 0 the solve is carried out on the equivalent real
symmetric-positive-definite form M = G + H0 G^{-1} H0; for mu = 0 a
complex LU factorization is used.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .lattice import LatticeSpec
from .superop import RateSet, Superoperator, build_generator

#: default relative residual accepted from the dense reference solves
RESIDUAL_TOL = 1e-10


class Method(enum.Enum):
    GF = "gf"
    MCWF = "mcwf"


class NonDecayingSubspaceError(RuntimeError):
    """The generator is singular: a non-decaying (dark) subspace traps
    population and the time-integrated efficiency is ill-defined."""


@dataclass(frozen=True)
class TransportResult:
    eta: float
    tau: float
    lost_fraction: float
    method: Method
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SpectrumCensus:
    """Eigenvalues of H_nh = J - i Gamma_s |s><s| with a dark-state count."""

    eigenvalues: np.ndarray = field(repr=False)
    dark_count: int = 0
    dark_threshold: float = 0.0

    @property
    def n_states(self) -> int:
        return self.eigenvalues.size

    @property
    def dark_fraction(self) -> float:
        return self.dark_count / self.n_states


def _resolvent_apply_real(sop: Superoperator, cho, v: np.ndarray) -> np.ndarray:
    """(G + iH0)^{-1} v via the real SPD factorization of
    M = G + H0 G^{-1} H0, valid because (G - iH0) G^{-1} (G + iH0) = M.

    A few steps of iterative refinement recover full accuracy when G spans
    many orders of magnitude (small mu with gamma = 0)."""

    def solve(rhs_vec):
        w = rhs_vec / sop.g_diag
        rhs = sop.g_diag * w - 1j * (sop.h0 @ w)
        return sla.cho_solve(cho, rhs.real) + 1j * sla.cho_solve(cho, rhs.imag)

    out = solve(v)
    scale = np.linalg.norm(v)
    for _ in range(4):
        residual = v - (sop.g_diag * out + 1j * (sop.h0 @ out))
        if np.linalg.norm(residual) < 1e-12 * scale:
            break
        out = out + solve(residual)
    return out


def efficiency_gf(sop: Superoperator) -> TransportResult:
    """Transfer efficiency, transfer time and lost fraction from resolvents.

    Raises :class:`NonDecayingSubspaceError` when the generator is singular
    (mu = gamma = 0 with dark states present).
    """
    rates = sop.rates
    n = sop.n_sites
    gs = rates.gamma_s
    vec_one = sop.pi_diag  # vectorized identity

    if rates.mu > 0:
        m = sop.h0 * (1.0 / sop.g_diag)[None, :]
        m = m @ sop.h0
        m[np.diag_indices_from(m)] += sop.g_diag
        try:
            cho = sla.cho_factor(m, overwrite_a=True, check_finite=False)
        except sla.LinAlgError as exc:
            raise NonDecayingSubspaceError(
                "real form G + H0 G^-1 H0 is not positive definite"
            ) from exc
        y = _resolvent_apply_real(sop, cho, sop.rho0_vec)
        z = _resolvent_apply_real(sop, cho, y)
        solver = "cholesky-real-form"
    else:
        a = 1j * sop.h0
        a[np.diag_indices_from(a)] += sop.g_diag
        try:
            # exact singularity shows up as a zero-pivot warning plus NaNs
            # in the solve; both are converted to the explicit error below
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu = sla.lu_factor(a, check_finite=False)
        except sla.LinAlgError as exc:
            raise NonDecayingSubspaceError("generator is singular") from exc
        y = sla.lu_solve(lu, sop.rho0_vec.astype(complex))
        if not np.all(np.isfinite(y)):
            raise NonDecayingSubspaceError(
                "generator is singular (exact zero pivot in LU)"
            )
        z = sla.lu_solve(lu, y)
        solver = "lu-complex"

    residual = np.linalg.norm(
        sop.g_diag * y + 1j * (sop.h0 @ y) - sop.rho0_vec
    ) / np.linalg.norm(sop.rho0_vec)
    if not np.isfinite(residual) or residual > 1e-6:
        raise NonDecayingSubspaceError(
            f"near-singular generator: solve residual {residual:.3e}"
        )

    eta = float(gs * np.real(sop.pi_s_vec @ y))
    tau = float(gs / eta * np.real(sop.pi_s_vec @ z)) if eta != 0 else np.inf
    lost = float(rates.mu * np.real(vec_one @ y))
    return TransportResult(
        eta=eta,
        tau=tau,
        lost_fraction=lost,
        method=Method.GF,
        metadata={
            "solver": solver,
            "residual": float(residual),
            "n_sites": n,
            "rates": rates,
        },
    )


def transport_gf(spec: LatticeSpec, rates: RateSet) -> TransportResult:
    """Convenience wrapper: build the generator and solve."""
    return efficiency_gf(build_generator(spec, rates))


def tau_via_mu_derivative(
    spec: LatticeSpec, rates: RateSet, rel_step: float = 1e-4
) -> float:
    """Transfer time from tau = -(d/d mu) ln eta by central differences."""
    if rates.mu <= 0:
        raise ValueError("mu must be positive for the derivative identity")
    h = rel_step * rates.mu
    if rates.mu + h == rates.mu:
        raise FloatingPointError("finite-difference step underflowed")
    eta_plus = transport_gf(spec, rates.replace(mu=rates.mu + h)).eta
    eta_minus = transport_gf(spec, rates.replace(mu=rates.mu - h)).eta
    return -(np.log(eta_plus) - np.log(eta_minus)) / (2 * h)


def dark_census(
    spec: LatticeSpec, gamma_s: float, threshold: float | None = None
) -> SpectrumCensus:
    """Eigenvalue census of H_nh = J - i gamma_s |s><s| (no loss, no noise).

    States with |Im lambda| below the threshold do not drain to the sink.
    The default threshold is 1e-10 * gamma_s; the census is
    threshold-sensitive because the spectrum has no damping gap.
    """
    from .lattice import build_hopping

    hop = build_hopping(spec)
    h_nh = hop.j_mat.astype(complex)
    h_nh[spec.sink, spec.sink] -= 1j * gamma_s
    try:
        w = sla.eigvals(h_nh, check_finite=False)
    except sla.LinAlgError as exc:
        raise RuntimeError("non-Hermitian eigensolver failed") from exc
    if threshold is None:
        threshold = 1e-10 * gamma_s if gamma_s > 0 else 1e-12
    order = np.argsort(-np.abs(w.imag))
    w = w[order]
    dark = int(np.sum(np.abs(w.imag) < threshold))
    return SpectrumCensus(eigenvalues=w, dark_count=dark, dark_threshold=threshold)


def dark_count_from_hopping(
    j_mat: np.ndarray, sink: int, tol: float = 1e-8
) -> int:
    """Number of hopping eigenstates with vanishing overlap on the sink.

    Degenerate eigenvalues are grouped (gap tolerance ``tol`` on the
    spectrum): within each group at most one orthonormal direction can
    overlap the sink, so the group contributes (multiplicity - 1) dark
    states when the sink projects into it and (multiplicity) otherwise.
    This makes the count independent of the eigenbasis the solver returns.
    """
    j_mat = np.asarray(j_mat, dtype=float)
    ev, vecs = np.linalg.eigh(j_mat)
    n = ev.size
    scale = max(np.abs(ev).max(), 1.0)
    dark = 0
    start = 0
    for i in range(1, n + 1):
        if i == n or ev[i] - ev[i - 1] > tol * scale:
            block = vecs[:, start:i]
            proj = float(np.linalg.norm(block[sink, :]) ** 2)
            dark += (i - start) - (1 if proj > tol**2 else 0)
            start = i
    return dark
