import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from kbqd.core import (DomainError, NoSignChangeError, RandomSource,
                       chi_square_quantile, descriptive_stats,
                       find_root_bracketed, normalize_group_labels,
                       sample_mean_cov, validate_data_matrix)


def bisect_chi2_quantile(p, dof):
    """Independent oracle: bisection on the incomplete-gamma CDF."""
    lo, hi = 0.0, 1.0
    while special.gammainc(dof / 2.0, hi / 2.0) < p:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if special.gammainc(dof / 2.0, mid / 2.0) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestChiSquareQuantile:
    def test_median_of_two_dof(self):
        # chi2 with 2 dof is Exp(1/2); median is 2 ln 2
        assert chi_square_quantile(0.5, 2) == pytest.approx(2 * np.log(2), rel=1e-12)

    def test_95th_one_dof(self):
        expected = bisect_chi2_quantile(0.95, 1.0)
        assert chi_square_quantile(0.95, 1) == pytest.approx(expected, rel=1e-10)
        assert chi_square_quantile(0.95, 1) == pytest.approx(3.841459, abs=1e-6)

    def test_fractional_dof_cutoff_chain(self):
        q = chi_square_quantile(0.95, 67.676405489)
        assert q == pytest.approx(87.88, abs=0.01)
        assert 0.26433 * q == pytest.approx(23.22949, abs=1e-3)

    @pytest.mark.parametrize("p", [0.01, 0.25, 0.5, 0.75, 0.99])
    @pytest.mark.parametrize("dof", [1, 2.5, 10, 67.68])
    def test_inverse_of_cdf(self, p, dof):
        q = chi_square_quantile(p, dof)
        assert special.gammainc(dof / 2.0, q / 2.0) == pytest.approx(p, abs=1e-9)

    @pytest.mark.parametrize("p,dof", [(0.0, 2), (1.0, 2), (-0.1, 2), (0.5, 0.0),
                                       (0.5, -1.0)])
    def test_domain_errors(self, p, dof):
        with pytest.raises(DomainError):
            chi_square_quantile(p, dof)


class TestFindRootBracketed:
    def test_linear(self):
        assert find_root_bracketed(lambda y: y - 0.3, 0, 1, 1e-12) == pytest.approx(
            0.3, abs=1e-11)

    def test_sqrt_two(self):
        r = find_root_bracketed(lambda y: y * y - 2.0, 0, 2, 1e-12)
        assert r == pytest.approx(np.sqrt(2.0), abs=1e-11)

    def test_no_sign_change(self):
        with pytest.raises(NoSignChangeError):
            find_root_bracketed(lambda y: y + 1.0, 0, 1, 1e-10)

    def test_endpoint_root(self):
        assert find_root_bracketed(lambda y: y, 0.0, 1.0, 1e-12) == 0.0

    @given(st.floats(min_value=0.01, max_value=0.99))
    @settings(max_examples=30, deadline=None)
    def test_bracket_width(self, target):
        r = find_root_bracketed(lambda y: y - target, 0.0, 1.0, 1e-10)
        assert abs(r - target) <= 1e-10


class TestRandomSource:
    def test_same_seed_same_stream(self):
        a = RandomSource(123).generator().standard_normal(10)
        b = RandomSource(123).generator().standard_normal(10)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RandomSource(123, 0).generator().standard_normal(10)
        b = RandomSource(123, 1).generator().standard_normal(10)
        assert not np.array_equal(a, b)

    def test_children_reproducible_and_distinct(self):
        src = RandomSource(5)
        a = src.child(3).generator().uniform(size=4)
        b = src.child(3).generator().uniform(size=4)
        c = src.child(4).generator().uniform(size=4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestDescriptiveStats:
    def test_constant_column(self):
        table = descriptive_stats(np.full((5, 1), 3.25))
        row = table.table(0)
        assert row["mean"]["Overall"] == 3.25
        assert row["sd"]["Overall"] == 0.0
        assert row["iqr"]["Overall"] == 0.0
        assert row["min"]["Overall"] == row["max"]["Overall"] == 3.25

    def test_simple_column(self):
        table = descriptive_stats(np.array([1.0, 2.0, 3.0, 4.0]))
        row = table.table(0)
        assert row["mean"]["Overall"] == pytest.approx(2.5)
        assert row["median"]["Overall"] == pytest.approx(2.5)
        assert row["iqr"]["Overall"] == pytest.approx(1.5)  # type-7 quartiles

    def test_groups(self):
        x = np.array([[1.0], [2.0], [10.0], [20.0]])
        labels = [1, 1, 2, 2]
        table = descriptive_stats(x, labels)
        row = table.table(0)
        assert row["mean"]["Group 1"] == pytest.approx(1.5)
        assert row["mean"]["Group 2"] == pytest.approx(15.0)
        assert row["mean"]["Overall"] == pytest.approx(8.25)

    def test_order_invariance(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(40, 3))
        perm = rng.permutation(40)
        t1 = descriptive_stats(x)
        t2 = descriptive_stats(x[perm])
        assert np.allclose(t1.values, t2.values)

    def test_invariants_hold(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(30, 2))
        table = descriptive_stats(x, labels=rng.integers(1, 4, size=30))
        for v in range(2):
            row = table.table(v)
            for g in table.group_names:
                assert row["min"][g] <= row["median"][g] <= row["max"][g]
                assert row["iqr"][g] >= 0.0
                assert row["sd"][g] >= 0.0


class TestSampleMeanCov:
    def test_two_points(self):
        mean, cov = sample_mean_cov(np.array([[0.0, 0.0], [2.0, 0.0]]))
        assert np.allclose(mean, [1.0, 0.0])
        assert np.allclose(cov, [[2.0, 0.0], [0.0, 0.0]])

    def test_identical_rows(self):
        mean, cov = sample_mean_cov(np.tile([1.0, -2.0], (6, 1)))
        assert np.allclose(cov, 0.0)

    def test_matches_two_pass_oracle(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(5, 2))
        mean, cov = sample_mean_cov(x)
        mu = x.sum(axis=0) / 5
        resid = x - mu
        expected = np.zeros((2, 2))
        for row in resid:
            expected += np.outer(row, row)
        expected /= 4
        assert np.allclose(mean, mu, atol=1e-14)
        assert np.allclose(cov, expected, atol=1e-14)

    def test_single_row_rejected(self):
        with pytest.raises(ValueError):
            sample_mean_cov(np.array([[1.0, 2.0]]))


class TestValidation:
    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            validate_data_matrix(np.array([[1.0, np.inf]]))

    def test_labels_normalized(self):
        codes, k, levels = normalize_group_labels(["b", "a", "b"])
        assert k == 2
        assert list(codes) == [2, 1, 2]

    def test_label_length_checked(self):
        with pytest.raises(ValueError):
            normalize_group_labels([1, 2], n=3)
