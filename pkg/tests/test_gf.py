import numpy as np
import pytest

from enaqt.gf import (
    NonDecayingSubspaceError,
    dark_census,
    dark_count_from_hopping,
    efficiency_gf,
    tau_via_mu_derivative,
    transport_gf,
)
from enaqt.lattice import HoppingModel, LatticeSpec, build_hopping
from enaqt.superop import RateSet, generator_from_hopping


def single_site_sop(rates: RateSet):
    return generator_from_hopping(np.zeros((1, 1)), 0, rates)


class TestEfficiencyGf:
    def test_single_site_branching(self):
        rates = RateSet(J=1.0, mu=0.3, gamma_s=0.7)
        res = efficiency_gf(single_site_sop(rates))
        assert res.eta == pytest.approx(0.7 / (0.7 + 0.3), abs=1e-12)
        assert res.tau == pytest.approx(1.0 / (0.7 + 0.3), abs=1e-12)
        assert res.lost_fraction == pytest.approx(0.3 / (0.7 + 0.3), abs=1e-12)

    def test_conservation_random_draws(self):
        rng = np.random.default_rng(7)
        spec = LatticeSpec.square(3)
        for _ in range(20):
            rates = RateSet(
                J=1.0,
                mu=float(10 ** rng.uniform(-3, 0)),
                gamma_s=float(10 ** rng.uniform(-1, 1)),
                gamma=float(10 ** rng.uniform(-3, 1)),
            )
            res = transport_gf(spec, rates)
            assert abs(res.eta + res.lost_fraction - 1.0) < 1e-8
            assert -1e-9 <= res.eta <= 1.0 + 1e-9
            assert res.tau > 0.0
            assert res.metadata["residual"] < 1e-10

    def test_efficiency_non_monotonic_in_dephasing(self):
        spec = LatticeSpec.square(7)
        base = RateSet(J=1.0, mu=0.01, gamma_s=1.0)
        etas = [
            transport_gf(spec, base.replace(gamma=g)).eta
            for g in (1e-3, 1.0, 1e2)
        ]
        assert etas[1] > etas[0]
        assert etas[1] > etas[2]

    def test_eta_decreasing_in_mu(self):
        spec = LatticeSpec.chain(5)
        etas = [
            transport_gf(spec, RateSet(J=1.0, mu=mu, gamma_s=1.0, gamma=0.5)).eta
            for mu in (0.01, 0.05, 0.2, 1.0)
        ]
        assert all(a > b for a, b in zip(etas, etas[1:]))

    def test_dark_trapping_is_an_error(self):
        # mu = gamma = 0 on a chain with a dark state at the center sink
        spec = LatticeSpec.chain(
            3, hopping_model=HoppingModel.NEAREST_NEIGHBOR
        )
        with pytest.raises(NonDecayingSubspaceError):
            transport_gf(spec, RateSet(J=1.0, gamma_s=1.0))

    def test_mu_zero_with_dephasing_gives_full_transfer(self):
        spec = LatticeSpec.chain(5)
        res = transport_gf(spec, RateSet(J=1.0, gamma_s=1.0, gamma=0.5))
        assert res.eta == pytest.approx(1.0, abs=1e-8)
        assert res.metadata["solver"] == "lu-complex"


class TestTauViaMuDerivative:
    def test_matches_gf_tau(self):
        spec = LatticeSpec.square(5)
        rates = RateSet(J=1.0, mu=0.01, gamma_s=0.1, gamma=0.1)
        tau_fd = tau_via_mu_derivative(spec, rates)
        tau_gf = transport_gf(spec, rates).tau
        assert abs(tau_fd - tau_gf) / tau_gf < 1e-3

    def test_single_site_analytic(self):
        rates = RateSet(J=1.0, mu=0.2, gamma_s=0.8)
        res = efficiency_gf(single_site_sop(rates))
        # eta = gs/(gs+mu) -> -d ln eta / d mu = 1/(gs+mu) = tau
        assert res.tau == pytest.approx(1.0, abs=1e-12)

    def test_small_mu_expansion_error_is_quadratic(self):
        # |eta - (1 - tau mu)| should shrink ~4x when mu halves twice
        spec = LatticeSpec.chain(5)

        def gap(mu):
            rates = RateSet(J=1.0, mu=mu, gamma_s=1.0, gamma=0.5)
            res = transport_gf(spec, rates)
            return abs(res.eta - (1.0 - res.tau * mu))

        g1, g2 = gap(1e-3), gap(5e-4)
        assert g2 < g1 / 3.0

    def test_requires_positive_mu(self):
        with pytest.raises(ValueError):
            tau_via_mu_derivative(LatticeSpec.chain(3), RateSet(J=1.0, gamma=1.0))


class TestDarkCensus:
    def test_two_site_chain_no_dark_states(self):
        spec = LatticeSpec.chain(
            2, hopping_model=HoppingModel.NEAREST_NEIGHBOR, sink_index=0
        )
        census = dark_census(spec, gamma_s=1.0)
        assert census.dark_count == 0
        assert census.n_states == 2

    def test_hermitian_limit_real_spectrum(self):
        census = dark_census(LatticeSpec.square(3), gamma_s=0.0)
        assert np.abs(census.eigenvalues.imag).max() < 1e-10

    def test_sorted_by_decay_rate(self):
        census = dark_census(LatticeSpec.square(3), gamma_s=1.0)
        mags = np.abs(census.eigenvalues.imag)
        assert np.all(np.diff(mags) <= 1e-12)

    def test_chain3_center_sink_one_dark_state(self):
        # eigenvector (1, 0, -1)/sqrt(2) has a node at the center
        spec = LatticeSpec.chain(3, hopping_model=HoppingModel.NEAREST_NEIGHBOR)
        hop = build_hopping(spec)
        assert dark_count_from_hopping(hop.j_mat, spec.sink) == 1
        assert dark_census(spec, gamma_s=1.0).dark_count == 1

    def test_odd_chain_center_sink_count(self):
        # sine modes with even index vanish at the center: (L-1)/2 of them
        for L in (5, 7, 9):
            spec = LatticeSpec.chain(L, hopping_model=HoppingModel.NEAREST_NEIGHBOR)
            hop = build_hopping(spec)
            assert dark_count_from_hopping(hop.j_mat, spec.sink) == (L - 1) // 2

    def test_census_and_hopping_count_agree(self):
        spec = LatticeSpec.square(5, hopping_model=HoppingModel.NEAREST_NEIGHBOR)
        hop = build_hopping(spec)
        census = dark_census(spec, gamma_s=1.0)
        assert census.dark_count == dark_count_from_hopping(hop.j_mat, spec.sink)

    def test_mu_to_zero_efficiency_matches_bright_fraction(self):
        spec = LatticeSpec.chain(5, hopping_model=HoppingModel.NEAREST_NEIGHBOR)
        hop = build_hopping(spec)
        n_dark = dark_count_from_hopping(hop.j_mat, spec.sink)
        res = transport_gf(spec, RateSet(J=1.0, mu=1e-6, gamma_s=1.0))
        assert abs(res.eta - (1.0 - n_dark / spec.n_sites)) < 1e-3
