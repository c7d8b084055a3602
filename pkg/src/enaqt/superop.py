"""Vectorized single-particle generator in the doubled (N^2) space.

The single-particle density matrix p evolves under

    dp/dt = -i[J, p] - gamma (1 - delta_nm) p_nm
            - (Gamma_s / 2) (|s><s| p + p |s><s|)_nm - mu p_nm

Column-stacking ("vec") turns this into d|p>/dt = -i (H0 - iG) |p>, with
H0 = 1 (x) J - J (x) 1 purely coherent and G diagonal in the site-pair
basis.  The dephasing convention is normative here: coherences decay at
exactly ``gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import HoppingMatrix, LatticeSpec, build_hopping


@dataclass(frozen=True)
class RateSet:
    """The four rates of the model: hopping J, background loss mu,
    sink extraction gamma_s and dephasing gamma."""

    J: float = 1.0
    mu: float = 0.0
    gamma_s: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.J <= 0:
            raise ValueError(f"J must be positive, got {self.J}")
        for name in ("mu", "gamma_s", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def l_abs(self) -> float:
        """Coherent absorption length J / mu."""
        return self.J / self.mu if self.mu > 0 else np.inf

    @property
    def l_abs_incoh(self) -> float:
        """Absorption length in the strong-dephasing (incoherent) regime."""
        if self.mu == 0:
            return np.inf
        return self.J**2 / ((self.gamma + self.mu) * self.mu)

    def replace(self, **kwargs) -> "RateSet":
        from dataclasses import replace

        return replace(self, **kwargs)


def vectorize(m: np.ndarray) -> np.ndarray:
    """Column-stack a matrix: (m11, ..., mN1, m12, ...)."""
    return np.asarray(m).reshape(-1, order="F")


def devectorize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    n = round(np.sqrt(v.size))
    if n * n != v.size:
        raise ValueError(f"length {v.size} is not a perfect square")
    return v.reshape((n, n), order="F")


@dataclass(frozen=True)
class Superoperator:
    """Dense building blocks of the non-Hermitian generator H = H0 - iG.

    ``g_diag`` stores the (diagonal) decoherence matrix G; ``pi_diag`` is
    the 0/1 diagonal of the population projector Pi.  Slot ordering follows
    ``vectorize``: the (n, m) density-matrix entry lives at index m*N + n.
    """

    n_sites: int
    sink: int
    rates: RateSet
    j_mat: np.ndarray = field(repr=False)
    h0: np.ndarray = field(repr=False)
    g_diag: np.ndarray = field(repr=False)
    pi_diag: np.ndarray = field(repr=False)
    pi_s_vec: np.ndarray = field(repr=False)
    rho0_vec: np.ndarray = field(repr=False)

    @property
    def g(self) -> np.ndarray:
        return np.diag(self.g_diag)

    @property
    def pi_projector(self) -> np.ndarray:
        return np.diag(self.pi_diag)

    def apply(self, p_vec: np.ndarray) -> np.ndarray:
        """Action of -i(H0 - iG) on a vectorized density matrix."""
        return -1j * (self.h0 @ p_vec) - self.g_diag * p_vec


def generator_from_hopping(
    j_mat: np.ndarray, sink: int, rates: RateSet
) -> Superoperator:
    """Assemble the doubled-space generator from an explicit hopping matrix."""
    j_mat = np.asarray(j_mat, dtype=float)
    n = j_mat.shape[0]
    if not 0 <= sink < n:
        raise ValueError(f"sink index {sink} out of range for {n} sites")
    eye = np.eye(n)
    h0 = np.kron(eye, j_mat) - np.kron(j_mat, eye)

    rows = np.tile(np.arange(n), n)       # n of the (n, m) slot
    cols = np.repeat(np.arange(n), n)     # m of the (n, m) slot
    pi_diag = (rows == cols).astype(float)
    g_diag = (
        rates.gamma * (1.0 - pi_diag)
        + rates.mu
        + 0.5 * rates.gamma_s * ((rows == sink).astype(float) + (cols == sink).astype(float))
    )
    pi_s = np.zeros(n * n)
    pi_s[sink * n + sink] = 1.0
    rho0 = pi_diag / n
    return Superoperator(
        n_sites=n,
        sink=sink,
        rates=rates,
        j_mat=j_mat,
        h0=h0,
        g_diag=g_diag,
        pi_diag=pi_diag,
        pi_s_vec=pi_s,
        rho0_vec=rho0,
    )


def build_generator(spec: LatticeSpec, rates: RateSet) -> Superoperator:
    """Generator for a lattice spec, with hopping built from ``rates.J``."""
    hop = build_hopping(spec, J=rates.J)
    return generator_from_hopping(hop.j_mat, spec.sink, rates)


def initial_state(spec: LatticeSpec) -> np.ndarray:
    """Vectorized maximally mixed single-excitation state (1/N) sum_k |k><k|."""
    n = spec.n_sites
    return vectorize(np.eye(n) / n)


def master_equation_rhs(
    j_mat: np.ndarray, sink: int, rates: RateSet, p: np.ndarray
) -> np.ndarray:
    """Direct entrywise evaluation of the single-particle master equation.

    Independent of the Kronecker construction; used as an oracle against
    ``Superoperator.apply``.
    """
    p = np.asarray(p)
    n = p.shape[0]
    comm = -1j * (j_mat @ p - p @ j_mat)
    deph = -rates.gamma * (p - np.diag(np.diag(p)))
    sink_term = np.zeros_like(p)
    sink_term[sink, :] -= 0.5 * rates.gamma_s * p[sink, :]
    sink_term[:, sink] -= 0.5 * rates.gamma_s * p[:, sink]
    return comm + deph + sink_term - rates.mu * p
