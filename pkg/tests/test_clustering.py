import itertools

import numpy as np
import pytest

import kbqd.clustering as clustering_mod
from kbqd.clustering import (ClusterConfig, EmptyClusterError,
                             adjusted_rand_index, in_group_proportion,
                             log_likelihood, macro_precision_recall, pkbc_fit,
                             sphere_display_coordinates, summary_stat,
                             validate, wcss)
from kbqd.core import RandomSource
from kbqd.pkbd import dpkb, rpkb_rejacg

MU3 = np.array([0.0, 0.0, 1.0])


def two_bundles(n_each=60, rho=0.95, seed=0):
    a = rpkb_rejacg(n_each, MU3, rho, RandomSource(seed)).samples
    b = rpkb_rejacg(n_each, -MU3, rho, RandomSource(seed + 1)).samples
    x = np.concatenate([a, b])
    labels = np.concatenate([np.ones(n_each, dtype=int),
                             np.full(n_each, 2)])
    return x, labels


# ---------------------------------------------------------------------------
# likelihood
# ---------------------------------------------------------------------------


class TestLogLikelihood:
    def test_single_flat_component(self):
        x = rpkb_rejacg(40, MU3, 0.3, RandomSource(2)).samples
        ll = log_likelihood(x, [1.0], MU3[None, :], [1e-12])
        assert ll == pytest.approx(40 * np.log(1.0 / (4 * np.pi)), rel=1e-9)

    def test_three_point_toy_matches_direct_sum(self):
        x = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        alpha = np.array([0.3, 0.7])
        mu = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
        rho = np.array([0.4, 0.6])
        expected = sum(
            np.log(alpha[0] * dpkb(xi, mu[0], rho[0])
                   + alpha[1] * dpkb(xi, mu[1], rho[1]))
            for xi in x)
        assert log_likelihood(x, alpha, mu, rho) == pytest.approx(expected,
                                                                  abs=1e-12)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


class TestPkbcFit:
    def test_single_component(self):
        x = rpkb_rejacg(80, MU3, 0.8, RandomSource(3)).samples
        fit = pkbc_fit(x, 1, RandomSource(4))[1]
        assert fit.alpha == pytest.approx([1.0])
        assert np.allclose(fit.post_probs, 1.0)
        assert np.linalg.norm(fit.mu[0]) == pytest.approx(1.0, abs=1e-10)
        assert fit.mu[0] @ MU3 > 0.99

    def test_antipodal_bundles_recovered(self):
        x, labels = two_bundles()
        fit = pkbc_fit(x, 2, RandomSource(5))[2]
        assert adjusted_rand_index(labels, fit.final_memberships) == 1.0

    def test_mixture_invariants(self):
        x, _ = two_bundles(seed=10)
        fit = pkbc_fit(x, ClusterConfig(n_clust=2, num_init=4),
                       RandomSource(6))[2]
        assert fit.alpha.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(fit.alpha >= 0)
        assert np.allclose(fit.post_probs.sum(axis=1), 1.0, atol=1e-12)
        assert np.allclose(np.linalg.norm(fit.mu, axis=1), 1.0, atol=1e-10)
        assert np.all((fit.rho > 0) & (fit.rho < 1))
        assert np.array_equal(fit.final_memberships,
                              np.argmax(fit.post_probs, axis=1) + 1)

    def test_loglik_monotone_in_every_run(self):
        x, _ = two_bundles(seed=20)
        fit = pkbc_fit(x, ClusterConfig(n_clust=(2, 3), num_init=5),
                       RandomSource(7))
        for k, f in fit.items():
            for trail in f.run_info["loglik_trails"]:
                diffs = np.diff(trail)
                assert np.all(diffs >= -1e-9), f"k={k}: {diffs.min()}"

    def test_best_of_inits_selected(self):
        x, _ = two_bundles(seed=30)
        fit = pkbc_fit(x, ClusterConfig(n_clust=2, num_init=6),
                       RandomSource(8))[2]
        assert fit.log_lik == pytest.approx(max(fit.run_info["log_liks"]))

    def test_partition_stable_under_row_permutation(self):
        x, _ = two_bundles(seed=40)
        perm = RandomSource(9).generator().permutation(x.shape[0])
        m1 = pkbc_fit(x, 2, RandomSource(10))[2].final_memberships
        m2 = pkbc_fit(x[perm], 2, RandomSource(11))[2].final_memberships
        assert adjusted_rand_index(m1[perm], m2) == 1.0

    def test_membership_stopping_rule(self):
        x, _ = two_bundles(seed=50)
        fit = pkbc_fit(x, ClusterConfig(n_clust=2, num_init=2,
                                        stopping_rule="membership"),
                       RandomSource(12))[2]
        assert fit.log_lik > -np.inf

    def test_max_iter_stopping_rule(self):
        x, _ = two_bundles(seed=60)
        fit = pkbc_fit(x, ClusterConfig(n_clust=2, num_init=1, max_iter=7,
                                        stopping_rule="max"),
                       RandomSource(13))[2]
        assert fit.run_info["iterations"] == [7]

    def test_more_clusters_than_points_rejected(self):
        with pytest.raises(ValueError):
            pkbc_fit(np.eye(3), 5, RandomSource(14))

    def test_reseed_then_fail_on_persistent_collapse(self, monkeypatch):
        x, _ = two_bundles(seed=70)
        original = clustering_mod._posteriors

        def starved(data, alpha, mu, rho):
            post, ll = original(data, alpha, mu, rho)
            post = post.copy()
            post[:, 0] = 0.0
            return post, ll

        monkeypatch.setattr(clustering_mod, "_posteriors", starved)
        with pytest.raises(EmptyClusterError):
            pkbc_fit(x, ClusterConfig(n_clust=2, num_init=1), RandomSource(15))

    def test_reseed_recovers_from_transient_collapse(self, monkeypatch):
        x, _ = two_bundles(seed=80)
        original = clustering_mod._posteriors
        calls = {"n": 0}

        def flaky(data, alpha, mu, rho):
            post, ll = original(data, alpha, mu, rho)
            calls["n"] += 1
            if calls["n"] <= 2:
                post = post.copy()
                post[:, 0] = 0.0
            return post, ll

        monkeypatch.setattr(clustering_mod, "_posteriors", flaky)
        fit = pkbc_fit(x, ClusterConfig(n_clust=2, num_init=1),
                       RandomSource(16))[2]
        assert fit.run_info["reseeds"] == [2]


class TestRhoBracket:
    def test_score_brackets_root(self):
        # whenever the resultant is nonzero the score is positive near 0
        # and negative near 1, so the root lives strictly inside (0, 1)
        x, _ = two_bundles(seed=90)
        fit = pkbc_fit(x, 2, RandomSource(17))[2]
        d = x.shape[1]
        t = x @ fit.mu.T
        w = fit.post_probs / (1 + fit.rho**2 - 2 * fit.rho * t)
        for j in range(2):
            p_tot = fit.post_probs[:, j].sum()
            w_tot = w[:, j].sum()
            res = np.linalg.norm(w[:, j] @ x)

            def g(y):
                return (-2 * y * p_tot / (1 - y * y) + d * res - d * y * w_tot)

            eps = 1e-10
            assert g(eps) > 0 > g(1 - eps)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def pair_count_ari(a, b):
    """Brute-force ARI over all observation pairs."""
    n = len(a)
    same_a = same_b = same_both = 0
    pairs = 0
    for i, j in itertools.combinations(range(n), 2):
        pairs += 1
        sa = a[i] == a[j]
        sb = b[i] == b[j]
        same_a += sa
        same_b += sb
        same_both += sa and sb
    expected = same_a * same_b / pairs
    max_index = (same_a + same_b) / 2
    if max_index == expected:
        return 1.0
    return (same_both - expected) / (max_index - expected)


def exhaustive_macro(true, pred):
    """All (precision, recall) pairs over maximal-agreement matchings.

    The optimal matching can be non-unique; any optimum is an acceptable
    answer, so the oracle returns the whole set.
    """
    classes = sorted(set(true))
    clusters = sorted(set(pred))
    small, large = (clusters, classes) if len(clusters) <= len(classes) \
        else (classes, clusters)
    scored = []
    for perm in itertools.permutations(large, len(small)):
        if len(clusters) <= len(classes):
            pairing = list(zip(perm, small))        # (class, cluster)
        else:
            pairing = list(zip(small, perm))
        agree = sum(
            sum(1 for t, p in zip(true, pred) if t == c and p == cl)
            for c, cl in pairing)
        scored.append((agree, pairing))
    best = max(a for a, _ in scored)
    results = set()
    for agree, pairing in scored:
        if agree != best:
            continue
        precision = sum(
            sum(1 for t, p in zip(true, pred) if t == c and p == cl)
            / sum(1 for p in pred if p == cl) for c, cl in pairing)
        recall = sum(
            sum(1 for t, p in zip(true, pred) if t == c and p == cl)
            / sum(1 for t in true if t == c) for c, cl in pairing)
        results.add((round(precision / len(clusters), 12),
                     round(recall / len(classes), 12)))
    return results


class TestAdjustedRandIndex:
    def test_identical(self):
        assert adjusted_rand_index([1, 1, 2, 2], [5, 5, 9, 9]) == 1.0

    def test_one_big_cluster(self):
        assert adjusted_rand_index([1, 1, 1, 1], [1, 1, 2, 2]) == pytest.approx(0.0)

    def test_known_contingency(self):
        a = [1, 1, 1, 2, 2, 2]
        b = [1, 1, 2, 1, 2, 2]
        assert adjusted_rand_index(a, b) == pytest.approx(pair_count_ari(a, b))

    def test_matches_pair_count_oracle_on_small_partitions(self):
        gen = RandomSource(18).generator()
        for _ in range(200):
            n = int(gen.integers(2, 8))
            a = gen.integers(1, 4, size=n)
            b = gen.integers(1, 4, size=n)
            assert adjusted_rand_index(a, b) == pytest.approx(
                pair_count_ari(a, b), abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            adjusted_rand_index([1, 2], [1, 2, 3])


class TestInGroupProportion:
    def test_separated_bundles(self):
        x, labels = two_bundles(seed=100, rho=0.98)
        igp = in_group_proportion(x, labels)
        assert min(igp) >= 0.95

    def test_random_labels_near_half(self):
        gen = RandomSource(19).generator()
        z = gen.standard_normal((600, 3))
        x = z / np.linalg.norm(z, axis=1, keepdims=True)
        labels = gen.integers(1, 3, size=600)
        igp = in_group_proportion(x, labels)
        for share in igp:
            assert 0.4 < share < 0.6

    def test_singleton_is_nan(self):
        x = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
        igp = in_group_proportion(x, [1, 1, 2])
        assert np.isnan(igp[1])


class TestMacroPrecisionRecall:
    def test_perfect(self):
        assert macro_precision_recall([1, 2, 3], [3, 1, 2]) == (1.0, 1.0)

    def test_single_cluster_vs_four_classes(self):
        true = np.repeat([1, 2, 3, 4], 25)
        pred = np.ones(100, dtype=int)
        precision, recall = macro_precision_recall(true, pred)
        assert recall == pytest.approx(0.25)
        assert precision == pytest.approx(0.25)

    def test_matches_exhaustive_matching_oracle(self):
        gen = RandomSource(20).generator()
        for _ in range(100):
            n = int(gen.integers(3, 8))
            true = gen.integers(1, 4, size=n)
            pred = gen.integers(1, 4, size=n)
            got = macro_precision_recall(true, pred)
            want = exhaustive_macro(list(true), list(pred))
            assert (round(got[0], 12), round(got[1], 12)) in want


class TestWcss:
    def test_every_point_its_own_cluster(self):
        x = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert wcss(x, [1, 2], x) == (0.0, 0.0)

    def test_hand_computed(self):
        x = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
        centroids = np.array([[1.0, 0.0], [-1.0, 0.0]])
        memberships = [1, 1, 2, 2]
        euclid, cosine = wcss(x, memberships, centroids)
        assert euclid == pytest.approx(0.0 + 2.0 + 0.0 + 2.0)
        assert cosine == pytest.approx(0.0 + 1.0 + 0.0 + 1.0)


# ---------------------------------------------------------------------------
# validation and summaries
# ---------------------------------------------------------------------------


class TestValidate:
    def test_full_report(self):
        x, labels = two_bundles(n_each=50, rho=0.98, seed=110)
        fits = pkbc_fit(x, ClusterConfig(n_clust=(2, 3), num_init=3),
                        RandomSource(21))
        report = validate(fits, x, true_labels=labels, rng=RandomSource(22))
        assert set(report.per_k) == {2, 3}
        entry = report.per_k[2]
        assert entry["ari"] >= 0.95
        assert entry["reject"]  # separated clusters differ
        assert len(report.elbow) == 2

    def test_elbow_knee_second_difference(self):
        from kbqd.clustering import ValidationReport
        rep = ValidationReport(per_k={}, elbow=[
            (2, 100.0, 50.0), (3, 60.0, 30.0), (4, 20.0, 8.0),
            (5, 18.0, 7.0), (6, 17.0, 6.5)])
        assert rep.elbow_knee("cosine") == 4
        assert rep.elbow_knee("euclidean") == 4


def _wireless_or_none():
    from kbqd.datasets import DatasetNotFoundError, load_wireless
    try:
        return load_wireless()
    except DatasetNotFoundError:
        return None


WIRELESS = _wireless_or_none()


@pytest.mark.skipif(WIRELESS is None,
                    reason="local copy of the wireless dataset not present")
class TestWirelessReferenceValues:
    """Published reference values; see also the acceptance criterion."""

    def test_descriptive_group4_feature5_mean(self):
        from kbqd.core import descriptive_stats
        x, labels = WIRELESS
        table = descriptive_stats(x, labels)
        # variable index 4 (fifth feature), room 4
        mean = table.table(4)["mean"]["Group 4"]
        assert mean == pytest.approx(-0.28257085, abs=0.01)

    def test_k4_igp_and_macro_bands(self):
        x, labels = WIRELESS
        fit = pkbc_fit(x, ClusterConfig(n_clust=4, num_init=10),
                       RandomSource(2468))[4]
        igp = in_group_proportion(x, fit.final_memberships)
        reference = sorted([0.9526627, 0.9733607, 0.9662698, 0.9880240])
        for got, want in zip(sorted(igp), reference):
            assert got == pytest.approx(want, abs=0.05)
        prec, rec = macro_precision_recall(labels, fit.final_memberships)
        assert prec == pytest.approx(0.977, abs=0.03)
        assert rec == pytest.approx(0.977, abs=0.03)


class TestSummaryStat:
    def test_low_dimension_passthrough(self):
        x, labels = two_bundles(n_each=20, rho=0.98, seed=120)
        fit = pkbc_fit(x, 2, RandomSource(23))[2]
        tables, coords, metrics = summary_stat(fit, x, true_labels=labels)
        assert np.array_equal(coords, x)
        assert metrics["ari"] >= 0.9
        assert "Group 1" in tables.group_names

    def test_high_dimension_projected_unit(self):
        gen = RandomSource(24).generator()
        z = gen.standard_normal((100, 7))
        x = z / np.linalg.norm(z, axis=1, keepdims=True)
        coords = sphere_display_coordinates(x)
        assert coords.shape == (100, 3)
        assert np.allclose(np.linalg.norm(coords, axis=1), 1.0, atol=1e-12)

    def test_rank3_data_reproduced_up_to_rotation(self):
        gen = RandomSource(25).generator()
        basis, _ = np.linalg.qr(gen.standard_normal((7, 3)))
        scores = gen.standard_normal((50, 3))
        x = scores @ basis.T  # exactly rank 3, centered in expectation
        x -= x.mean(axis=0)
        coords_raw = (x @ np.linalg.svd(x, full_matrices=False)[2][:3].T)
        coords = sphere_display_coordinates(x + 0.0)
        # normalized projections preserve pairwise angles of the raw scores
        raw_unit = coords_raw / np.linalg.norm(coords_raw, axis=1,
                                               keepdims=True)
        assert np.allclose(np.abs(coords @ coords.T),
                           np.abs(raw_unit @ raw_unit.T), atol=1e-8)
