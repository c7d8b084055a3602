"""Monte-Carlo wavefunction solver in the single-excitation sector.

Two interchangeable trajectory engines:

* ``euler`` -- the textbook two-step loop: first-order non-Hermitian
  propagation followed by a jump test each time step.  Dephasing uses
  sigma_z jump operators scaled to sqrt(gamma/4) per site, so the induced
  single-particle coherence decay is exactly gamma (matching the
  Green's-function generator); a sigma_z jump flips the sign of the
  amplitude on one site and the trajectory continues.  Decay and sink
  jumps empty the single-excitation sector and terminate the trajectory.

* ``waiting`` -- exact waiting-time sampling for dephasing-dominated
  regimes where the Euler step collapses.  Dephasing is unraveled with
  the equivalent site-projector channels (same master equation, coherence
  decay gamma): after every dephasing jump the state is a lattice basis
  vector, so each inter-jump segment starts localized and its waiting-time
  and jump-channel distributions can be precomputed once from the
  eigendecomposition of the effective Hamiltonian.  Sampling then reduces
  to table inversion (fine time grid for waiting times, interpolated
  per-site kernels for jump targets), vectorized over all live
  trajectories.

Both engines draw from counter-based per-trajectory streams
(:mod:`enaqt.rng`), so outcomes depend only on (seed, trajectory index).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import rng
from .gf import Method, TransportResult
from .lattice import LatticeSpec, build_hopping
from .superop import RateSet


class StepSizeError(RuntimeError):
    """The per-step jump probability exceeded 0.1; the configuration's
    time step is invalid."""


@dataclass(frozen=True)
class TrajectoryConfig:
    n_traj: int = 1000
    seed: int = 0
    mode: str = "waiting"  # "euler" or "waiting"
    dt: float | None = None  # euler step; None -> from max_step_prob
    t_final: float | None = None  # None -> 5/mu
    max_step_prob: float = 0.05
    time_grid_points: int = 4096
    kernel_grid_points: int = 256

    def horizon(self, rates: RateSet) -> float:
        if self.t_final is not None:
            return self.t_final
        if rates.mu <= 0:
            raise ValueError("t_final must be given explicitly when mu = 0")
        return 5.0 / rates.mu


@dataclass(frozen=True)
class TrajectoryOutcome:
    absorbed_at_sink: bool
    absorption_time: float | None
    decay_site: int | None
    censored: bool = False


# --------------------------------------------------------------------------
# channel algebra (shared by both engines and by the calibration tests)


def effective_hamiltonian(
    j_mat: np.ndarray, sink: int, rates: RateSet, channel: str
) -> np.ndarray:
    """H - (i/2) sum L^dag L restricted to the single-excitation sector."""
    n = j_mat.shape[0]
    h = j_mat.astype(complex)
    damp = np.full(n, rates.mu)
    damp[sink] += rates.gamma_s
    if channel == "sigma_z":
        # sum_j (gamma/4) (sigma_z_j)^2 = N gamma / 4 on the whole sector
        damp += n * rates.gamma / 4.0
    elif channel == "projector":
        damp += rates.gamma  # sum_j gamma P_j = gamma * identity
    else:
        raise ValueError(f"unknown dephasing channel {channel!r}")
    h[np.diag_indices_from(h)] -= 0.5j * damp
    return h


def unraveling_rhs(
    j_mat: np.ndarray, sink: int, rates: RateSet, channel: str, p: np.ndarray
) -> np.ndarray:
    """Master-equation right-hand side implied by a channel set.

    Used to verify that both dephasing unravelings reproduce the normative
    single-particle master equation exactly.  Decay and sink channels leave
    the sector, so only their anticommutator part appears here.
    """
    n = j_mat.shape[0]
    h = effective_hamiltonian(j_mat, sink, rates, channel)
    out = -1j * (h @ p - p @ h.conj().T)
    if channel == "sigma_z":
        for j in range(n):
            z = -np.ones(n)
            z[j] = 1.0
            out += (rates.gamma / 4.0) * (z[:, None] * p * z[None, :])
    else:
        out += rates.gamma * np.diag(np.diag(p))
    return out


# --------------------------------------------------------------------------
# Euler engine


class _EulerContext:
    def __init__(self, j_mat: np.ndarray, sink: int, rates: RateSet,
                 config: TrajectoryConfig):
        self.n = j_mat.shape[0]
        self.sink = sink
        self.rates = rates
        self.config = config
        self.h_nh = effective_hamiltonian(j_mat, sink, rates, "sigma_z")
        self.gamma_site = rates.gamma / 4.0
        self.t_final = config.horizon(rates)
        if config.dt is not None:
            self.dt = config.dt
        else:
            # jump budget plus coherent-accuracy budget on one step
            rate_scale = (
                rates.mu
                + rates.gamma_s
                + self.n * self.gamma_site
                + 4.0 * np.abs(j_mat).max()
            )
            self.dt = config.max_step_prob / rate_scale

    def run(self, trajectory_index: int) -> TrajectoryOutcome:
        stream = rng.CounterStream(self.config.seed, trajectory_index)
        n, dt, rates = self.n, self.dt, self.rates
        psi = np.zeros(n, dtype=complex)
        psi[int(stream.next() * n)] = 1.0
        t = 0.0
        p_deph_tot = dt * n * self.gamma_site
        while t < self.t_final:
            psi_t = psi - 1j * dt * (self.h_nh @ psi)
            pops = np.abs(psi) ** 2
            p_decay = dt * rates.mu  # sum over sites of mu |psi_j|^2, norm 1
            p_sink = dt * rates.gamma_s * pops[self.sink]
            p = p_decay + p_sink + p_deph_tot
            if p > 0.1:
                raise StepSizeError(
                    f"jump probability {p:.3f} > 0.1 at dt = {dt:g}"
                )
            t += dt
            if stream.next() < p:
                r = stream.next() * p
                if r < p_decay:
                    site = int(
                        np.searchsorted(np.cumsum(pops), stream.next())
                    )
                    return TrajectoryOutcome(False, None, min(site, n - 1))
                if r < p_decay + p_sink:
                    return TrajectoryOutcome(True, t, None)
                # sigma_z jump on site j: amplitude sign flip at j
                # (up to a global phase)
                j = int((r - p_decay - p_sink) / (dt * self.gamma_site))
                j = min(j, n - 1)
                psi_t[j] = -psi_t[j]
                psi = psi_t / np.linalg.norm(psi_t)
            else:
                psi = psi_t / np.linalg.norm(psi_t)
        return TrajectoryOutcome(False, None, None, censored=True)


def _hopping_for(spec: LatticeSpec, rates: RateSet) -> np.ndarray:
    if spec.n_sites == 1:
        return np.zeros((1, 1))  # a lone sink site has no hopping
    return build_hopping(spec, J=rates.J).j_mat


def run_trajectory(
    spec: LatticeSpec,
    rates: RateSet,
    config: TrajectoryConfig,
    trajectory_index: int,
) -> TrajectoryOutcome:
    """One Euler-mode quantum trajectory (reference implementation)."""
    ctx = _EulerContext(_hopping_for(spec, rates), spec.sink, rates, config)
    return ctx.run(trajectory_index)


# --------------------------------------------------------------------------
# waiting-time engine


class _WaitingEngine:
    """Exact jump-time sampling with projector dephasing.

    Precomputes, on a log time grid, the survival log-rate
    g_j(t) = (mu + gamma) t - ln ||exp(-i H' t) e_j||^2 with
    H' = J - (i/2) Gamma_s |s><s|, the sink population fraction, and
    coarse-grid cumulative jump-target kernels per starting site.
    """

    def __init__(self, j_mat: np.ndarray, sink: int, rates: RateSet,
                 config: TrajectoryConfig):
        self.n = n = j_mat.shape[0]
        self.sink = sink
        self.rates = rates
        self.config = config
        self.t_final = config.horizon(rates)

        hp = j_mat.astype(complex)
        hp[sink, sink] -= 0.5j * rates.gamma_s
        w, v = sla.eig(hp, check_finite=False)
        v_inv = sla.inv(v, check_finite=False)

        rate_scale = rates.J + rates.gamma_s + rates.mu + rates.gamma
        t_min = min(1e-4 / rate_scale, 1e-6 * self.t_final)
        t1 = config.time_grid_points
        self.t_grid = np.concatenate(
            [[0.0], np.geomspace(t_min, self.t_final, t1 - 1)]
        )

        norm2 = np.empty((t1, n))
        sinkp = np.empty((t1, n))
        k_idx = np.unique(
            np.linspace(0, t1 - 1, config.kernel_grid_points).astype(int)
        )
        self.kernel_times = self.t_grid[k_idx]
        kernel_cdf = np.empty((len(k_idx), n, n))
        k_pos = {int(i): r for r, i in enumerate(k_idx)}
        for ti, t in enumerate(self.t_grid):
            prop = (v * np.exp(-1j * w * t)) @ v_inv  # exp(-i H' t)
            pops = np.abs(prop) ** 2  # pops[k, j] from start site j
            norm2[ti] = pops.sum(axis=0)
            sinkp[ti] = pops[sink]
            if ti in k_pos:
                cdf = np.cumsum(pops.T, axis=1)  # [start j, target k]
                kernel_cdf[k_pos[ti]] = cdf / cdf[:, -1:][:, :]
        norm2 = np.clip(norm2, 1e-300, None)
        # g[j, ti]: monotone survival log-rate per starting site
        self.g_grid = (
            (rates.mu + rates.gamma) * self.t_grid[None, :]
            - np.log(norm2.T)
        )
        self.norm2 = norm2.T  # [j, ti]
        self.sinkp = sinkp.T
        self.kernel_cdf = kernel_cdf  # [slice, start, target]

    def _invert_waiting(self, sites, targets):
        """Vectorized inverse of g_site(t) = target on the time grid.

        Returns (dt, grid position, interpolation fraction, censored)."""
        g = self.g_grid
        t1 = g.shape[1]
        lo = np.zeros(len(sites), dtype=np.int64)
        hi = np.full(len(sites), t1 - 1, dtype=np.int64)
        censored = targets > g[sites, -1]
        for _ in range(int(np.ceil(np.log2(t1))) + 1):
            mid = (lo + hi) // 2
            go_right = g[sites, mid] < targets
            lo = np.where(go_right & (mid > lo), mid, lo)
            hi = np.where(~go_right, mid, hi)
        g_lo = g[sites, lo]
        g_hi = g[sites, hi]
        frac = np.where(g_hi > g_lo, (targets - g_lo) / (g_hi - g_lo), 0.0)
        frac = np.clip(frac, 0.0, 1.0)
        dt = self.t_grid[lo] + frac * (self.t_grid[hi] - self.t_grid[lo])
        return dt, lo, hi, frac, censored

    def _interp(self, table, sites, lo, hi, frac):
        return table[sites, lo] * (1.0 - frac) + table[sites, hi] * frac

    def _sample_targets(self, sites, dts, u):
        """Jump-target sites from the interpolated per-site kernels."""
        pos = np.clip(
            np.searchsorted(self.kernel_times, dts), 1, len(self.kernel_times) - 1
        )
        t_lo = self.kernel_times[pos - 1]
        t_hi = self.kernel_times[pos]
        w = np.where(t_hi > t_lo, (dts - t_lo) / (t_hi - t_lo), 0.0)
        rows = (
            self.kernel_cdf[pos - 1, sites] * (1.0 - w)[:, None]
            + self.kernel_cdf[pos, sites] * w[:, None]
        )
        rows /= rows[:, -1:]
        return np.minimum((rows < u[:, None]).sum(axis=1), self.n - 1)

    def run(self, indices: np.ndarray):
        """Simulate the given trajectory indices; returns outcome arrays
        (absorbed mask, absorption times, decayed mask, decay sites,
        censored mask)."""
        rates = self.rates
        m = len(indices)
        keys = rng.stream_key(self.config.seed, indices)
        counters = np.zeros(m, dtype=np.uint64)

        sites = (rng.uniform(keys, counters) * self.n).astype(np.int64)
        sites = np.minimum(sites, self.n - 1)
        counters += np.uint64(1)
        t_now = np.zeros(m)

        absorbed = np.zeros(m, dtype=bool)
        absorption_time = np.full(m, np.nan)
        decayed = np.zeros(m, dtype=bool)
        decay_site = np.full(m, -1, dtype=np.int64)
        censored = np.zeros(m, dtype=bool)
        alive = np.ones(m, dtype=bool)

        while alive.any():
            idx = np.flatnonzero(alive)
            k = keys[idx]
            c = counters[idx]
            u1 = rng.uniform(k, c)
            u2 = rng.uniform(k, c + np.uint64(1))
            u3 = rng.uniform(k, c + np.uint64(2))
            counters[idx] += np.uint64(3)

            s = sites[idx]
            dt, lo, hi, frac, over = self._invert_waiting(s, -np.log(u1))
            t_new = t_now[idx] + dt
            over |= t_new > self.t_final

            n2 = self._interp(self.norm2, s, lo, hi, frac)
            sp = self._interp(self.sinkp, s, lo, hi, frac)
            rate_deph = rates.gamma * n2
            rate_decay = rates.mu * n2
            rate_sink = rates.gamma_s * sp
            total = rate_deph + rate_decay + rate_sink
            f_sink = rate_sink / total
            f_decay = rate_decay / total

            is_sink = ~over & (u2 < f_sink)
            is_decay = ~over & ~is_sink & (u2 < f_sink + f_decay)
            is_deph = ~over & ~is_sink & ~is_decay

            targets = self._sample_targets(s, dt, u3)

            gi = idx[is_sink]
            absorbed[gi] = True
            absorption_time[gi] = t_new[is_sink]
            alive[gi] = False

            gi = idx[is_decay]
            decayed[gi] = True
            decay_site[gi] = targets[is_decay]
            alive[gi] = False

            gi = idx[over]
            censored[gi] = True
            alive[gi] = False

            gi = idx[is_deph]
            sites[gi] = targets[is_deph]
            t_now[gi] = t_new[is_deph]

        return absorbed, absorption_time, decayed, decay_site, censored


# --------------------------------------------------------------------------
# ensemble estimates


def estimate_transport(
    spec: LatticeSpec, rates: RateSet, config: TrajectoryConfig
) -> TransportResult:
    """Transfer efficiency and time from an ensemble of trajectories.

    eta is the sink-absorption fraction (censored trajectories count as
    not absorbed), tau the mean absorption time among absorbed
    trajectories.  The binomial standard error of eta is attached to the
    result metadata as ``eta_stderr``.
    """
    j_mat = _hopping_for(spec, rates)
    n_traj = config.n_traj
    indices = np.arange(n_traj)
    if config.mode == "waiting":
        engine = _WaitingEngine(j_mat, spec.sink, rates, config)
        absorbed, times, decayed, _, censored = engine.run(indices)
        n_abs = int(absorbed.sum())
        n_dec = int(decayed.sum())
        n_cen = int(censored.sum())
        abs_times = times[absorbed]
    elif config.mode == "euler":
        ctx = _EulerContext(j_mat, spec.sink, rates, config)
        outcomes = [ctx.run(int(i)) for i in indices]
        n_abs = sum(o.absorbed_at_sink for o in outcomes)
        n_dec = sum(o.decay_site is not None for o in outcomes)
        n_cen = sum(o.censored for o in outcomes)
        abs_times = np.array(
            [o.absorption_time for o in outcomes if o.absorbed_at_sink]
        )
    else:
        raise ValueError(f"unknown mode {config.mode!r}")

    assert n_abs + n_dec + n_cen == n_traj
    eta = n_abs / n_traj
    stderr = float(np.sqrt(eta * (1.0 - eta) / n_traj))
    tau = float(abs_times.mean()) if n_abs > 0 else np.nan
    return TransportResult(
        eta=eta,
        tau=tau,
        lost_fraction=n_dec / n_traj,
        method=Method.MCWF,
        metadata={
            "eta_stderr": stderr,
            "n_traj": n_traj,
            "n_absorbed": n_abs,
            "n_decayed": n_dec,
            "n_censored": n_cen,
            "tau_defined": n_abs > 0,
            "mode": config.mode,
            "seed": config.seed,
        },
    )
