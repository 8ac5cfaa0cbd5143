import numpy as np
import pytest
from scipy import stats

from kbqd.core import RandomSource
from kbqd.gof import ResamplingPlan, twosample_test
from kbqd.pkbd import (PkbdParams, SamplerConvergenceError,
                       UnsupportedSamplerError, dpkb, expected_cosine, rpkb,
                       rpkb_rejacg, rpkb_rejvmf, surface_area)

MU3 = np.array([0.0, 0.0, 1.0])


class TestDensity:
    def test_small_rho_is_uniform(self):
        x = np.array([0.3, -0.5, np.sqrt(1 - 0.34)])
        assert dpkb(x, MU3, 1e-12) == pytest.approx(1.0 / (4 * np.pi), rel=1e-9)

    def test_at_mode(self):
        assert dpkb(MU3, MU3, 0.5) == pytest.approx(6.0 / (4 * np.pi), rel=1e-12)

    def test_normalizes_on_circle(self):
        theta = np.linspace(-np.pi, np.pi, 40001)
        pts = np.column_stack([np.cos(theta), np.sin(theta)])
        vals = dpkb(pts, np.array([1.0, 0.0]), 0.6)
        assert np.trapezoid(vals, theta) == pytest.approx(1.0, abs=1e-5)

    def test_normalizes_on_sphere(self):
        from numpy.polynomial.legendre import leggauss
        nodes, weights = leggauss(100)
        phi = np.linspace(0.0, 2 * np.pi, 201)[:-1]
        total = 0.0
        for t, w in zip(nodes, weights):
            s = np.sqrt(1 - t * t)
            pts = np.column_stack([s * np.cos(phi), s * np.sin(phi),
                                   np.full_like(phi, t)])
            total += w * dpkb(pts, MU3, 0.8).mean() * 2 * np.pi
        assert total == pytest.approx(1.0, abs=1e-5)

    def test_rejects_bad_rho(self):
        with pytest.raises(ValueError):
            PkbdParams(MU3, 1.0)
        with pytest.raises(ValueError):
            PkbdParams(MU3, 0.0)


class TestExpectedCosine:
    def test_small_rho_is_zero(self):
        assert expected_cosine(3, 1e-10) == pytest.approx(0.0, abs=1e-8)

    @pytest.mark.parametrize("rho", [0.3, 0.7])
    def test_d2_wrapped_cauchy_identity(self, rho):
        assert expected_cosine(2, rho) == pytest.approx(rho, abs=1e-10)

    def test_d3_quadrature_vs_monte_carlo(self):
        rho = 0.85
        quad_value = expected_cosine(3, rho)
        rep = rpkb_rejacg(200_000, MU3, rho, RandomSource(0))
        mc = float(np.mean(rep.samples @ MU3))
        assert quad_value == pytest.approx(mc, abs=1e-3)


class TestSamplers:
    @pytest.mark.parametrize("sampler", [rpkb_rejvmf, rpkb_rejacg])
    def test_unit_norm_and_report_consistency(self, sampler):
        rep = sampler(2000, MU3, 0.6, RandomSource(1))
        assert rep.samples.shape == (2000, 3)
        assert np.allclose(np.linalg.norm(rep.samples, axis=1), 1.0, atol=1e-10)
        assert rep.acceptance_rate == pytest.approx(2000 / rep.proposals_used)

    @pytest.mark.parametrize("sampler", [rpkb_rejvmf, rpkb_rejacg])
    @pytest.mark.parametrize("rho", [0.3, 0.85])
    def test_mean_cosine_matches_quadrature(self, sampler, rho):
        n = 50_000
        rep = sampler(n, MU3, rho, RandomSource(2))
        t = rep.samples @ MU3
        se = t.std(ddof=1) / np.sqrt(n)
        assert abs(t.mean() - expected_cosine(3, rho)) < 3 * se

    def test_reproducibility(self):
        a = rpkb_rejvmf(400, MU3, 0.7, RandomSource(3))
        b = rpkb_rejvmf(400, MU3, 0.7, RandomSource(3))
        assert np.array_equal(a.samples, b.samples)
        assert a.proposals_used == b.proposals_used

    def test_vmf_acceptance_decays_with_rho(self):
        rates = [rpkb_rejvmf(5000, MU3, rho, RandomSource(4)).acceptance_rate
                 for rho in (0.5, 0.9, 0.95)]
        assert rates[0] > rates[1] > rates[2]

    def test_acg_acceptance_stays_high(self):
        # the optimum of the ACG envelope family sits just below 0.5 for
        # mid-to-high concentration in d=3
        for rho in (0.1, 0.3, 0.5, 0.7, 0.9, 0.95):
            rate = rpkb_rejacg(5000, MU3, rho, RandomSource(5)).acceptance_rate
            assert rate >= 0.45, f"rho={rho}: rate {rate}"

    def test_rotation_equivariance(self):
        mu2 = np.array([1.0, 0.0, 0.0])
        t1 = rpkb_rejacg(20_000, MU3, 0.6, RandomSource(6)).samples @ MU3
        t2 = rpkb_rejacg(20_000, mu2, 0.6, RandomSource(7)).samples @ mu2
        assert stats.ks_2samp(t1, t2).pvalue > 1e-4

    def test_small_rho_passes_uniformity(self):
        from kbqd.uniformity import pk_test
        passes = 0
        for rep in range(15):
            draw = rpkb_rejvmf(200, MU3, 1e-4, RandomSource(100 + rep))
            out = pk_test(draw.samples, 0.7, B=100, rng=RandomSource(200 + rep))
            passes += not out.reject_u
        assert passes >= 13

    def test_cross_sampler_agreement(self):
        # projections from the two samplers must be indistinguishable
        non_rejections = 0
        for rep in range(12):
            a = rpkb_rejvmf(1500, MU3, 0.85, RandomSource(300 + rep))
            b = rpkb_rejacg(1500, MU3, 0.85, RandomSource(400 + rep))
            out = twosample_test((a.samples @ MU3)[:, None],
                                 (b.samples @ MU3)[:, None], 0.1,
                                 ResamplingPlan(method="subsampling", B=100),
                                 RandomSource(500 + rep))
            non_rejections += not out.h0_rejected
        assert non_rejections >= 10

    def test_circle_histogram_matches_density(self):
        rho, n = 0.5, 100_000
        mu = np.array([1.0, 0.0])
        rep = rpkb_rejacg(n, mu, rho, RandomSource(8))
        angles = np.arctan2(rep.samples[:, 1], rep.samples[:, 0])
        bins = np.linspace(-np.pi, np.pi, 21)
        observed, _ = np.histogram(angles, bins)
        grid = np.linspace(-np.pi, np.pi, 20 * 400 + 1)
        dens = dpkb(np.column_stack([np.cos(grid), np.sin(grid)]), mu, rho)
        cdf = np.concatenate([[0.0], np.cumsum(
            (dens[1:] + dens[:-1]) / 2 * np.diff(grid))])
        cdf /= cdf[-1]
        expected = np.diff(cdf[::400]) * n
        assert stats.chisquare(observed, expected).pvalue > 1e-4

    def test_rejpsaw_reserved(self):
        with pytest.raises(UnsupportedSamplerError):
            rpkb(10, MU3, 0.5, method="rejpsaw")

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            rpkb(10, MU3, 0.5, method="nope")

    def test_proposal_budget_enforced(self):
        with pytest.raises(SamplerConvergenceError):
            rpkb_rejvmf(1, MU3, 1.0 - 1e-9, RandomSource(9))


class TestSurfaceArea:
    def test_known_values(self):
        assert surface_area(2) == pytest.approx(2 * np.pi)
        assert surface_area(3) == pytest.approx(4 * np.pi)
        assert surface_area(4) == pytest.approx(2 * np.pi ** 2)
