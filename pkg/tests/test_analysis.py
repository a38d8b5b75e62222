import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fourext import (DomainError, ExtensionConfig, PrecisionContext, build_system, fe_constant,
                     get_function, svd)
from fourext import _mp
from fourext.analysis import (breakpoints, condition_bound, divergence_rate, growth_rates, potential,
                              plateau_onset, potential_profile, rate_fit, runge_region, slepian_tail, spectrum_report,
                              stability_constants, tsvd_bound_slack)
from fourext.errors import BudgetError

E2 = 5.82842712474619009760337744842


class TestSpectrum:
    def test_counts_sum(self):
        rep = spectrum_report(build_system(ExtensionConfig(T=2.0, N=40)))
        assert rep.nearOne + rep.nearZero + rep.transitionWidth == 81
        assert rep.predictedTransitionIndex == pytest.approx(81 / 2)
        assert np.all(np.diff(rep.values) <= 0)

    @pytest.mark.parametrize("T", [2.0, 4.0])
    def test_transition_width(self, T):
        rep = spectrum_report(build_system(ExtensionConfig(T=T, N=200)), 0.1)
        assert rep.transitionWidth <= 6 * math.log(401)
        assert abs(rep.nearOne - rep.predictedTransitionIndex) <= 6 * math.log(401)

    def test_symmetry_double(self):
        rep = spectrum_report(build_system(ExtensionConfig(T=2.0, N=20)))
        assert rep.symmetryResidual < 1e-12
        assert spectrum_report(build_system(ExtensionConfig(T=3.0, N=20))).symmetryResidual is None

    def test_symmetry_extended(self):
        rep = spectrum_report(build_system(ExtensionConfig(T=2.0, N=20), PrecisionContext.extended(40)))
        assert rep.symmetryResidual <= 1e-8

    def test_discrete(self):
        rep = spectrum_report(build_system(ExtensionConfig(T=2.0, N=20, grid="discrete")))
        assert rep.symmetryResidual is None and len(rep.values) == 42

    def test_slepian_tail(self):
        P = PrecisionContext.extended(60)
        fact = svd(build_system(ExtensionConfig(T=2.0, N=30), P))
        ratio = (1 - fact.S[0]) / slepian_tail(0, 30, 2.0, fact.ctx)
        assert 0.5 <= float(ratio) <= 2.0

    def test_slepian_tail_decay(self):
        # the tail decays like beta^(-N') with beta = E(T)
        r = slepian_tail(0, 21, 2.0) / slepian_tail(0, 20, 2.0)
        assert r == pytest.approx(E2 ** -2 * (43 / 41) ** 0.5, rel=1e-12)


class TestBreakpoints:
    @pytest.mark.parametrize("eps,N0", [(1e-6, 4), (1e-12, 8), (1e-18, 12), (1e-24, 16)])
    def test_N0(self, eps, N0):
        rep = breakpoints(2.0, eps, Nmax=None)
        assert round(rep.N0) == N0
        assert rep.N1 == 2 * rep.N0

    def test_N2(self):
        rep = breakpoints(2.0, 1e-6, 2.0, Nmax=30, digits=40)
        assert rep.N2 == 8
        assert rep.sigma_min[rep.N2] > 1e-6 >= rep.sigma_min[rep.N2 + 1]
        assert rep.dHat > 1 and rep.N2predicted == pytest.approx(rep.N2, abs=2)

    def test_N2_extended_scan(self):
        # sigma_min drops below 1e-12 before N2 here, exercising the extended path
        rep = breakpoints(2.0, 1e-16, 2.0, Nmax=40, digits=60)
        assert rep.sigma_min[rep.N2 + 1] <= 1e-16 < rep.sigma_min[rep.N2]

    def test_budget(self):
        with pytest.raises(BudgetError):
            breakpoints(2.0, 1e-12, 2.0, Nmax=5)

    @pytest.mark.parametrize("eps", [0.0, 1.0, -1e-3])
    def test_domain(self, eps):
        with pytest.raises(DomainError):
            breakpoints(2.0, eps)


class TestConditionBounds:
    def test_discrete(self):
        assert 4 <= condition_bound("discrete", 40, 2.0) <= 16

    def test_continuous(self):
        assert 1e6 <= condition_bound("continuous", 40, 2.0, epsilon=2.5e-13) <= 1e7

    def test_equispaced(self):
        assert 10 <= condition_bound("equispaced", 40, 2.0, 2.0) <= 45
        with pytest.raises(DomainError):
            condition_bound("equispaced", 40, 2.0)

    def test_discrete_tsvd_stable(self):
        # ||H(b)||_W <= ||b|| with equality on kept directions; in double the
        # identity At V_k = U_k S_k only holds to u / eps, so eps stays moderate
        c = ExtensionConfig(T=2.0, N=20, grid="discrete")
        s = build_system(c)
        fact = svd(s)
        keep = fact.S > 1e-6
        X = (fact.V[:, keep] / fact.S[keep]) @ fact.U[:, keep].conj().T
        rng = np.random.default_rng(8)
        b = rng.standard_normal((42, 200))
        b /= np.linalg.norm(b, axis=0)
        ratios = np.linalg.norm(s.matrix @ X @ b, axis=0)
        assert ratios.max() <= 1 + 1e-8
        assert np.linalg.norm(s.matrix @ X @ fact.U[:, 0]) >= 1 - 1e-6

    def test_discrete_tsvd_stable_extended(self):
        P = PrecisionContext.extended(40)
        s = build_system(ExtensionConfig(T=2.0, N=12, grid="discrete"), P)
        fact = svd(s)
        ctx = s.ctx
        keep = np.array([v > ctx.mpf("1e-14") for v in fact.S])
        Vk, Sk = fact.V[:, keep], fact.S[keep]
        # H(b) = Vk Sk^-2 Vk^T At^T b in the normal-equation form
        X = Vk.dot(np.diag(1 / (Sk * Sk))).dot(Vk.T).dot(s.matrix.T)
        AX = _mp.to_float(s.matrix.dot(X))
        rng = np.random.default_rng(9)
        b = rng.standard_normal((26, 200))
        b /= np.linalg.norm(b, axis=0)
        ratios = np.linalg.norm(AX @ b, axis=0)
        assert ratios.max() <= 1 + 1e-8
        assert np.linalg.norm(AX, 2) >= 1 - 1e-6

    def test_continuous_tsvd_condition(self):
        P = PrecisionContext.extended(40)
        for N in (4, 8, 12):
            s = build_system(ExtensionConfig(T=2.0, N=N), P)
            ctx = s.ctx
            fact = svd(s)
            eps = ctx.mpf("1e-8")
            keep = np.array([v > eps for v in fact.S])
            Vk, Sk = fact.V[:, keep], fact.S[keep]
            # b -> a = Vk Sk^-1 Vk^* b; ||sum a_n phi_n||^2 = a^* A a
            X = Vk.dot(np.diag(1 / Sk)).dot(np.conj(Vk).T)
            G = np.conj(X).T.dot(s.matrix).dot(X)
            kappa = ctx.sqrt(_mp.max_eigenvalue(G, ctx))
            assert abs(kappa * ctx.sqrt(Sk[-1]) - 1) < 1e-8

    def test_exact_condition(self):
        P = PrecisionContext.extended(40)
        s = build_system(ExtensionConfig(T=2.0, N=8), P)
        ctx = s.ctx
        Ainv = _mp.from_matrix(ctx.inverse(_mp.to_matrix(s.matrix, ctx)))
        kappa = ctx.sqrt(_mp.max_eigenvalue(Ainv.dot(s.matrix).dot(Ainv), ctx))
        lam_min = min(_mp.eigh_symmetric(s.matrix, ctx, eigvals_only=True))
        assert float(kappa * ctx.sqrt(lam_min)) == pytest.approx(1.0, rel=1e-2)


class TestStabilityConstants:
    @pytest.fixture(scope="class")
    @staticmethod
    def sweep():
        return {N: stability_constants(N, 2 * N, 2.0, 1e-6, digits=50) for N in range(1, 13)}

    def test_c1_equals_d_before_N2(self, sweep):
        for N in range(1, 9):
            assert sweep[N].C1 == pytest.approx(sweep[N].D, rel=1e-6)
            assert sweep[N].C2 == 0.0

    def test_c1_below_d(self, sweep):
        for rep in sweep.values():
            assert rep.C1 <= rep.D * (1 + 1e-10)
            assert rep.D >= 1 - 1e-10

    def test_b_identity(self, sweep):
        P = PrecisionContext.extended(50)
        for N in (2, 6, 10):
            smin = svd(build_system(ExtensionConfig(T=2.0, N=N, grid="equispaced", M=2 * N), P)).S[-1]
            assert sweep[N].B * float(smin) == pytest.approx(1.0, rel=1e-8)

    def test_D_limit(self):
        assert stability_constants(4, 4096, 2.0, 1e-14, 40).D <= 1.05

    def test_growth(self):
        c1, d1, a1 = growth_rates(1.0, 2.0, range(6, 13), 1e-30, 80)
        c2, d2, a2 = growth_rates(2.0, 2.0, range(6, 13), 1e-30, 80)
        assert c1 <= d1 * 1.05 and c2 <= d2 * 1.05
        assert 0 <= a2 < a1 <= 1.05

    def test_growth_window(self):
        with pytest.raises(DomainError):
            growth_rates(2.0, 2.0, [6, 7, 8])


class TestRateFit:
    def test_exact(self):
        pts = [(N, 3.0 * E2 ** -N) for N in range(4, 20)]
        assert rate_fit(pts) == pytest.approx(E2, abs=1e-6)

    def test_constant(self):
        assert rate_fit([(N, 0.1) for N in range(5)]) == pytest.approx(1.0)

    def test_window(self):
        pts = [(N, 2.0 ** -N) for N in range(10)] + [(N, 1e-3) for N in range(10, 20)]
        assert rate_fit(pts, (0, 9)) == pytest.approx(2.0)

    @pytest.mark.parametrize("pts", [
        [(1, 1.0), (2, 0.5), (3, 0.1)],
        [(1, 1.0), (2, 0.0), (3, 0.1), (4, 0.1)],
        [(3, 1.0), (3, 0.5), (3, 0.1), (3, 0.1)],
    ])
    def test_errors(self, pts):
        with pytest.raises(DomainError):
            rate_fit(pts)

    @settings(max_examples=30)
    @given(st.floats(1.01, 50.0), st.floats(1e-3, 1e3), st.integers(4, 30))
    def test_recovers(self, rho, c, n):
        pts = [(N, c * rho ** -N) for N in range(1, n + 1)]
        assert rate_fit(pts) == pytest.approx(rho, rel=1e-8)


class TestPotential:
    def test_zero_is_finite(self):
        prof = potential_profile(2.0, [0.0, 0.5, 1.0])
        assert np.all(np.isfinite(prof.values))
        assert prof.indicator[2] == pytest.approx(0.0, abs=1e-12)

    def test_even_and_conjugate(self):
        assert potential(0.3 + 0.2j, 2.0) == pytest.approx(potential(-0.3 - 0.2j, 2.0), abs=1e-12)
        assert potential(0.3 + 0.2j, 2.0) == pytest.approx(potential(0.3 - 0.2j, 2.0), abs=1e-12)

    def test_against_direct_quadrature(self):
        import mpmath
        mpmath.mp.dps = 20
        T = 2.0

        def m(x):
            c = mpmath.cos(mpmath.pi / T)
            return 2 * (mpmath.cos(mpmath.pi * x / T) - c) / (1 - c) - 1

        x = mpmath.mpc(0.2, 0.3)
        ref = -mpmath.quad(lambda s: mpmath.log(abs(m(x) - m(s))), [0, 1])
        assert potential(complex(x), T) == pytest.approx(float(ref), abs=1e-9)

    def test_region_shrinks(self):
        areas = [runge_region(T, shape=(31, 21)).area for T in (1.05, 1.2, 2.0)]
        assert areas[0] < areas[1] < areas[2]

    def test_runge100_inside(self):
        reg = runge_region(2.0, shape=(61, 41))
        i = np.argmin(np.abs(reg.re - 0.0))
        j = np.argmin(np.abs(reg.im - 0.1))
        assert reg.mask[j, i]
        assert reg.indicator.shape == (41, 61)

    def test_divergence_rate(self):
        assert divergence_rate(0.1j, 2.0) > 1
        assert divergence_rate(1.5j, 2.0) < 1


class TestTsvdBounds:
    @pytest.mark.parametrize("eps", [1e-6, 1e-12])
    @pytest.mark.parametrize("N", [6, 14])
    def test_runge25(self, N, eps):
        r = tsvd_bound_slack(get_function("runge25"), N, 2.0, eps, digits=50)
        assert r["errorSlack"] >= -1e-10 and r["coeffSlack"] >= -1e-10

    def test_zero_phi(self):
        r = tsvd_bound_slack(get_function("expx"), 8, 2.0, 1e-6, digits=40, phi=np.zeros(17))
        assert r["errorSlack"] >= -1e-10 and r["coeffSlack"] >= -1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            tsvd_bound_slack(get_function("expx"), 4, 2.0, 0.0)


class TestPlateauOnset:
    def test_geometric_then_flat(self):
        pts = [(N, 10.0 ** -N) for N in range(1, 8)] + [(8, 1e-6), (9, 1e-7), (10, 2e-6)]
        assert plateau_onset(pts) == 7

    def test_unsorted_input(self):
        assert plateau_onset([(3, 1.0), (1, 3.0), (2, 2.0), (4, 1.5)]) == 3

    def test_monotone(self):
        assert plateau_onset([(N, 2.0 ** -N) for N in range(10)]) is None
