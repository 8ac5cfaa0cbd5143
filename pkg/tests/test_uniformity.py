import numpy as np
import pytest
from scipy import stats

from kbqd.core import RandomSource, chi_square_quantile
from kbqd.kernels import NonUnitVectorError, poisson_kernel
from kbqd.uniformity import (dof_and_c, pk_test, sample_uniform_sphere,
                             variance_un)


class TestVarianceUn:
    def test_reference_design_value(self):
        v = variance_un(200, 3, 0.7)
        assert v == pytest.approx(2.0 / 39800 * (1.49 / 0.2601 - 1.0), rel=1e-12)
        assert v == pytest.approx(2.3761e-4, rel=1e-4)

    def test_small_rho_vanishes(self):
        assert variance_un(50, 3, 1e-12) == pytest.approx(0.0, abs=1e-9)

    def test_two_points_d2(self):
        assert variance_un(2, 2, 0.5) == pytest.approx(2.0 / 3.0, rel=1e-12)


class TestDofAndC:
    def test_reference_design(self):
        dof, c = dof_and_c(3, 0.7)
        assert dof == pytest.approx(67.68, abs=0.01)
        assert c == pytest.approx(0.26433, abs=1e-5)

    def test_cutoff_chain(self):
        dof, c = dof_and_c(3, 0.7)
        assert c * chi_square_quantile(0.95, dof) == pytest.approx(23.22949,
                                                                   abs=1e-3)

    @pytest.mark.parametrize("d", [2, 3, 5, 8])
    def test_small_rho_limit_is_dimension(self, d):
        dof_num, _ = dof_and_c(d, 1e-6)
        assert dof_num == pytest.approx(d, rel=1e-3)

    def test_closed_forms_match_trace_ratios(self):
        # spherical quadrature oracle for trace(K_cen) and trace(K_cen^2):
        # both are expectations of powers of the centered kernel under
        # uniform pairs, available by 1-D quadrature over the cosine
        from scipy.integrate import quad
        d, rho = 3, 0.55

        def centered(t):
            return (1 - rho**2) / (1 + rho**2 - 2 * rho * t) ** (d / 2.0) - 1.0

        # weight of t = u.v for uniform pairs on S^2 is 1/2 on [-1, 1]
        trace_k = centered(1.0)  # K_cen(x, x)
        trace_k2, _ = quad(lambda t: centered(t) ** 2 * 0.5, -1.0, 1.0)
        dof, c = dof_and_c(d, rho)
        assert c == pytest.approx(trace_k2 / trace_k, rel=1e-8)
        assert dof == pytest.approx(trace_k ** 2 / trace_k2, rel=1e-8)


class TestSampleUniformSphere:
    def test_unit_norm(self):
        x = sample_uniform_sphere(500, 4, RandomSource(0))
        assert np.allclose(np.linalg.norm(x, axis=1), 1.0, atol=1e-12)

    def test_mean_vector_shrinks(self):
        x = sample_uniform_sphere(40_000, 3, RandomSource(1))
        assert np.linalg.norm(x.mean(axis=0)) < 4.0 / np.sqrt(40_000)

    def test_first_coordinate_marginal(self):
        # (t+1)/2 ~ Beta((d-1)/2, (d-1)/2); check by Kolmogorov-Smirnov
        d = 3
        x = sample_uniform_sphere(100_000, d, RandomSource(2))
        u = (x[:, 0] + 1.0) / 2.0
        ks = stats.kstest(u, stats.beta((d - 1) / 2, (d - 1) / 2).cdf)
        assert ks.pvalue > 1e-4


class TestPkTest:
    def test_uniform_data_accepts(self):
        x = sample_uniform_sphere(200, 3, RandomSource(3))
        out = pk_test(x, 0.7, rng=RandomSource(4))
        assert not out.reject_u
        assert not out.reject_v
        assert out.vn_cutoff == pytest.approx(23.22949, abs=1e-3)
        assert out.b_used == 300

    def test_concentrated_data_rejects(self):
        point = np.array([0.0, 0.0, 1.0])
        x = np.tile(point, (50, 1))
        out = pk_test(x, 0.7, B=100, rng=RandomSource(5))
        assert out.reject_u and out.reject_v
        max_sn = 50 * ((1 + 0.7) / (1 - 0.7) ** 2 - 1.0)
        assert out.vn == pytest.approx(max_sn, rel=1e-10)

    def test_two_antipodal_points(self):
        x = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
        out = pk_test(x, 0.5, B=10, rng=RandomSource(6))
        k_same = poisson_kernel(x[0], x[0], 0.5) - 1.0
        k_anti = poisson_kernel(x[0], x[1], 0.5) - 1.0
        # U_n: the two cross terms; S_n: cross terms plus both diagonals, /n
        assert out.un == pytest.approx(k_anti, rel=1e-12)
        assert out.vn == pytest.approx((2 * k_same + 2 * k_anti) / 2.0, rel=1e-12)

    def test_normalized_statistic_definition(self):
        x = sample_uniform_sphere(80, 3, RandomSource(7))
        out = pk_test(x, 0.6, B=20, rng=RandomSource(8))
        assert out.tn_normalized == pytest.approx(
            out.un / np.sqrt(variance_un(80, 3, 0.6)), rel=1e-12)

    def test_rotation_invariance(self):
        x = sample_uniform_sphere(60, 3, RandomSource(9))
        rot = stats.special_ortho_group.rvs(3, random_state=11)
        out1 = pk_test(x, 0.7, B=5, rng=RandomSource(10))
        out2 = pk_test(x @ rot.T, 0.7, B=5, rng=RandomSource(10))
        assert out1.un == pytest.approx(out2.un, abs=1e-10)
        assert out1.vn == pytest.approx(out2.vn, abs=1e-10)

    def test_sn_lower_bound(self):
        x = sample_uniform_sphere(30, 4, RandomSource(12))
        out = pk_test(x, 0.8, B=5, rng=RandomSource(13))
        assert out.vn >= -30.0

    def test_non_spherical_rejected(self):
        with pytest.raises(NonUnitVectorError):
            pk_test(np.ones((10, 3)), 0.5, B=5)

    def test_power_against_vmf(self):
        # qualitative power target: concentrated alternatives are caught
        from kbqd.pkbd import _sample_vmf
        rejections = 0
        for rep in range(10):
            gen = RandomSource(100 + rep).generator()
            x = _sample_vmf(np.array([0.0, 0.0, 1.0]), 1.0, 200, gen)
            out = pk_test(x, 0.7, B=100, rng=RandomSource(200 + rep))
            rejections += out.reject_u
        assert rejections >= 9
