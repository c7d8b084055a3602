import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enaqt.bounds import eta_coh, eta_incoh, find_gamma0
from enaqt.lattice import HoppingModel, LatticeSpec, build_hopping
from enaqt.oned import (
    UnsupportedConfigurationError,
    chain_spectrum,
    chebyshev_u,
    det_s,
    eta_coh_1d,
    eta_incoh_1d,
    gamma0_asymptote,
    gamma0_equation,
    sink_resolvent_1d,
    sink_resolvent_1d_smallmu,
)
from enaqt.superop import RateSet


def nn_chain(L):
    return LatticeSpec.chain(L, hopping_model=HoppingModel.NEAREST_NEIGHBOR)


class TestChainSpectrum:
    def test_matches_dense_eigensolve(self):
        L = 9
        spec = chain_spectrum(L, J=1.0)
        j = build_hopping(nn_chain(L)).j_mat
        ev, vecs = np.linalg.eigh(j)
        np.testing.assert_allclose(np.sort(spec.energies), ev, atol=1e-10)
        # compare |overlap|^2 per energy, eigenvector sign-agnostic
        order = np.argsort(spec.energies)
        np.testing.assert_allclose(
            (spec.overlaps[order, :] ** 2), (vecs.T**2), atol=1e-10
        )

    def test_columns_orthonormal(self):
        spec = chain_spectrum(7)
        gram = spec.overlaps @ spec.overlaps.T
        np.testing.assert_allclose(gram, np.eye(7), atol=1e-12)


class TestChebyshevDeterminant:
    @given(
        n=st.integers(min_value=0, max_value=12),
        q=st.floats(min_value=0.05, max_value=0.95),
    )
    @settings(max_examples=50, deadline=None)
    def test_det_identity_against_dense_determinant(self, n, q):
        # n x n tridiagonal with unit diagonal, off-diagonal -q/2
        m = np.eye(n) - (q / 2.0) * (np.eye(n, k=1) + np.eye(n, k=-1))
        assert det_s(n, q) == pytest.approx(np.linalg.det(m), abs=1e-12)

    def test_chebyshev_recurrence_base_cases(self):
        assert chebyshev_u(0, 1.7) == 1.0
        assert chebyshev_u(1, 1.7) == pytest.approx(3.4)
        assert chebyshev_u(-1, 1.7) == 0.0


class TestEtaCoh1d:
    def test_even_length_rejected(self):
        with pytest.raises(UnsupportedConfigurationError):
            eta_coh_1d(4, RateSet(J=1.0, mu=0.1))

    def test_single_site_reduces_to_branching(self):
        rates = RateSet(J=1.0, mu=0.3, gamma_s=0.7, gamma=1.3)
        assert eta_coh_1d(1, rates) == pytest.approx(0.7 / (0.7 + 0.3), abs=1e-12)

    def test_strong_dephasing_limit(self):
        L, mu, gs = 7, 0.05, 0.8
        val = eta_coh_1d(L, RateSet(J=1.0, mu=mu, gamma_s=gs, gamma=1e6))
        assert val == pytest.approx(gs / (gs + L * mu), rel=1e-4)

    def test_matches_generic_omega_pipeline(self):
        rates = RateSet(J=1.0, mu=0.01, gamma_s=0.1, gamma=0.0)
        for L in (5, 7):
            assert abs(eta_coh_1d(L, rates) - eta_coh(nn_chain(L), rates)) < 1e-10


class TestEtaIncoh1d:
    def test_exact_route_matches_generic_solve(self):
        rates = RateSet(J=1.0, mu=0.01, gamma_s=0.1, gamma=10.0)
        for L in (5, 7, 9):
            assert abs(eta_incoh_1d(L, rates) - eta_incoh(nn_chain(L), rates)) < 1e-10

    def test_small_mu_approximation_converges(self):
        L, g = 7, 1.0
        errs = []
        for mu in (1e-2, 1e-4):
            rates = RateSet(J=1.0, mu=mu, gamma_s=0.1, gamma=g)
            exact = sink_resolvent_1d(L, rates)
            approx = sink_resolvent_1d_smallmu(L, rates)
            errs.append(abs(approx - exact) / exact)
        assert errs[1] < errs[0]

    def test_requires_positive_mu(self):
        with pytest.raises(ValueError):
            eta_incoh_1d(5, RateSet(J=1.0, gamma=1.0))

    def test_values_in_unit_interval(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            rates = RateSet(
                J=1.0,
                mu=float(10 ** rng.uniform(-4, 0)),
                gamma_s=float(10 ** rng.uniform(-1, 1)),
                gamma=float(10 ** rng.uniform(-2, 2)),
            )
            L = int(rng.choice([1, 3, 5, 7, 9, 11]))
            assert 0.0 <= eta_incoh_1d(L, rates) <= 1.0
            assert 0.0 <= eta_coh_1d(L, rates) <= 1.0


class TestGamma0:
    def test_asymptote_value(self):
        assert gamma0_asymptote(50, 0.001) == pytest.approx(0.099)

    def test_root_near_asymptote_for_long_chain(self):
        g0 = gamma0_equation(51, 0.001, 0.1)
        ref = gamma0_asymptote(51, 0.001)
        assert g0 is not None
        assert abs(g0 - ref) / ref < 0.15

    def test_agrees_with_generic_crossing_at_small_mu(self):
        # the closed form uses the small-mu resolvent expansion, so the
        # agreement with the exact generic crossing tightens as mu shrinks
        L, mu = 21, 0.001
        g_generic = find_gamma0(nn_chain(L), RateSet(J=1.0, mu=mu, gamma_s=0.1))
        g_closed = gamma0_equation(L, mu, 0.1)
        assert abs(g_closed - g_generic) / g_generic < 0.01

    def test_moderate_mu_agreement_degrades_gracefully(self):
        # at mu = 0.1 the expansion error is a few percent, not 1e-2
        L, mu = 11, 0.1
        g_generic = find_gamma0(nn_chain(L), RateSet(J=1.0, mu=mu, gamma_s=0.1))
        g_closed = gamma0_equation(L, mu, 0.1)
        assert abs(g_closed - g_generic) / g_generic < 0.05

    def test_sign_change_at_finite_size_for_lossy_chain(self):
        vals = [gamma0_equation(L, 0.1, 0.1) for L in (5, 11, 21, 51)]
        finite = [v for v in vals if v is not None]
        assert vals[-1] is None  # crossing disappears
        assert all(a > b for a, b in zip(finite, finite[1:]))
