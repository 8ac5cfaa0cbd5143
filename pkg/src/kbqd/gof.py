"""Quadratic-distance goodness-of-fit tests with a Gaussian kernel.

Provides the one-sample normality test, the nonparametric two-sample
test, the k-sample matrix-distance omnibus test, and the resampling
machinery (subsampling / bootstrap / permutation) that produces their
critical values.

All statistics are U-statistics of a centered kernel. The pooled kernel
matrix is materialized once per test; resampling replicates are reduced
to multiplicity algebra on that matrix, which is exact because the
kernel is deterministic in its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .core import (RandomSource, SummaryTable, as_random_source,
                   descriptive_stats, normalize_group_labels,
                   validate_data_matrix)
from .kernels import (center_kernel_matrix, gaussian_kernel_matrix,
                      parametric_centered_gaussian_matrix)

RESAMPLING_METHODS = ("subsampling", "bootstrap", "permutation")


@dataclass(frozen=True)
class ResamplingPlan:
    """How replicate statistics for the critical value are generated."""

    method: str = "subsampling"
    B: int = 150
    b: float = 0.9
    quantile: float = 0.95

    def __post_init__(self):
        if self.method not in RESAMPLING_METHODS:
            raise ValueError(f"unknown resampling method {self.method!r}")
        if self.B < 1:
            raise ValueError("B must be at least 1")
        if not 0.0 < self.b <= 1.0:
            raise ValueError("subsample fraction b must lie in (0, 1]")
        if not 0.0 < self.quantile < 1.0:
            raise ValueError("quantile must lie in (0, 1)")


@dataclass
class TestOutcome:
    """Result of a quadratic-distance test.

    ``reject[i]`` is true exactly when ``statistics[i]`` exceeds
    ``critical_values[i]``.
    """

    test_type: str
    statistics: tuple
    critical_values: tuple
    reject: tuple
    cv_method: str
    h: float
    quantile: float
    b_used: int
    details: dict = field(default_factory=dict)

    @property
    def h0_rejected(self) -> bool:
        return any(self.reject)


# ---------------------------------------------------------------------------
# statistics from multiplicity algebra
# ---------------------------------------------------------------------------


def _group_multiplicity(index_groups, n: int, k: int) -> np.ndarray:
    """(n, k) matrix whose (z, a) entry counts draws of pooled row z in group a."""
    e = np.empty((n, k))
    for a, idx in enumerate(index_groups):
        e[:, a] = np.bincount(idx, minlength=n)
    return e


def _distance_matrix_from_multiplicity(kmat: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Between/within-group U-statistic matrix of the nonparametrically
    centered kernel, for a replicate described by multiplicities ``e``.

    The replicate sample is the multiset of pooled rows with the given
    multiplicities; centering is against that multiset.
    """
    m_per = e.sum(axis=0)
    m = m_per.sum()
    ke = kmat @ e                       # (n, k)
    s = e.T @ ke                        # all draw-pair block sums
    kdiag = np.diag(kmat)
    d_same = e.T @ kdiag                # same-draw diagonal sums per group
    kr = ke.sum(axis=1)                 # row sums over the replicate
    r_per = e.T @ kr
    total = r_per.sum()
    trace = d_same.sum()
    w = (total - trace) / (m * (m - 1.0))

    s_cen = (s
             - np.outer(r_per, m_per) / m
             - np.outer(m_per, r_per) / m
             + np.outer(m_per, m_per) * w)
    d_cen = d_same - 2.0 * r_per / m + m_per * w

    dist = s_cen / np.outer(m_per, m_per)
    np.fill_diagonal(dist, (np.diag(s_cen) - d_cen) / (m_per * (m_per - 1.0)))
    return dist


def ksample_statistics(dist: np.ndarray, k: int | None = None) -> tuple:
    """Omnibus statistic pair ((K-1) T_n, T_n) from the distance matrix.

    T_n contracts the matrix as trace minus 2/(K-1) times the sum of the
    upper off-diagonal entries.
    """
    dist = np.asarray(dist, dtype=float)
    if k is None:
        k = dist.shape[0]
    if k < 2:
        raise ValueError("need at least two groups")
    off_upper = np.triu(dist, 1).sum()
    tn = float(np.trace(dist) - 2.0 / (k - 1.0) * off_upper)
    return (k - 1.0) * tn, tn


def matrix_distance(x, labels, h: float) -> np.ndarray:
    """K-by-K matrix of within/between-sample U-statistics of the
    Gaussian kernel centered against the pooled sample."""
    arr = validate_data_matrix(x)
    codes, k, _ = normalize_group_labels(labels, arr.shape[0])
    sizes = np.bincount(codes)[1:]
    if np.any(sizes < 2):
        raise ValueError("every group needs at least two observations")
    kmat = gaussian_kernel_matrix(arr, arr, h)
    e = _group_multiplicity([np.flatnonzero(codes == a + 1) for a in range(k)],
                            arr.shape[0], k)
    return _distance_matrix_from_multiplicity(kmat, e)


# ---------------------------------------------------------------------------
# resampling
# ---------------------------------------------------------------------------


def _replicate_index_groups(plan: ResamplingPlan, sizes, n: int,
                            gen: np.random.Generator):
    """Index draws (into the pooled sample) for one replicate."""
    if plan.method == "bootstrap":
        return [gen.integers(0, n, size=int(sz)) for sz in sizes]
    if plan.method == "permutation":
        rep_sizes = [int(sz) for sz in sizes]
    else:  # subsampling
        rep_sizes = [math.ceil(plan.b * int(sz)) for sz in sizes]
        if min(rep_sizes) < 2:
            raise ValueError(
                f"subsample fraction b={plan.b} leaves a group with fewer "
                "than two observations")
    perm = gen.permutation(n)
    groups, pos = [], 0
    for sz in rep_sizes:
        groups.append(perm[pos:pos + sz])
        pos += sz
    return groups


def critical_value(statistic, pooled, group_sizes, plan: ResamplingPlan,
                   rng) -> float:
    """Empirical critical value per the resampling scheme of ``plan``.

    ``statistic`` is called as ``statistic(rows, labels)`` on each
    replicate dataset (rows drawn from ``pooled``; labels are 1..K) and
    the ``plan.quantile`` empirical quantile of the B replicate values is
    returned, with linear interpolation.
    """
    pooled = validate_data_matrix(pooled, "pooled")
    n = pooled.shape[0]
    source = as_random_source(rng)
    values = np.empty(plan.B)
    for i in range(plan.B):
        gen = source.child(i).generator()
        groups = _replicate_index_groups(plan, group_sizes, n, gen)
        rows = np.concatenate([pooled[idx] for idx in groups], axis=0)
        labels = np.concatenate(
            [np.full(len(idx), a + 1, dtype=int) for a, idx in enumerate(groups)])
        values[i] = statistic(rows, labels)
    return float(np.quantile(values, plan.quantile))


def _resampled_tn_quantile(kmat: np.ndarray, sizes, plan: ResamplingPlan,
                           source: RandomSource) -> float:
    """Fast path for Gaussian-kernel tests: replicate T_n values computed
    by multiplicity algebra on the precomputed pooled kernel matrix."""
    n = kmat.shape[0]
    k = len(sizes)
    values = np.empty(plan.B)
    for i in range(plan.B):
        gen = source.child(i).generator()
        groups = _replicate_index_groups(plan, sizes, n, gen)
        e = _group_multiplicity(groups, n, k)
        dist = _distance_matrix_from_multiplicity(kmat, e)
        values[i] = ksample_statistics(dist, k)[1]
    return float(np.quantile(values, plan.quantile))


# ---------------------------------------------------------------------------
# one-sample (normality) test
# ---------------------------------------------------------------------------


def one_sample_statistics(x, h: float, mu_hat=None, sigma_hat=None,
                          centering: str = "nonparam") -> tuple:
    """U- and V-statistic of the centered Gaussian kernel over one sample.

    U excludes the diagonal with 1/(n(n-1)) weights; V is the full double
    sum over all pairs with 1/n^2 weights.
    """
    arr = validate_data_matrix(x)
    n, d = arr.shape
    if n < 2:
        raise ValueError("need at least two observations")
    cen = _centered_matrix_for_normality(arr, h, mu_hat, sigma_hat, centering)
    total = cen.sum()
    trace = np.trace(cen)
    u_n = (total - trace) / (n * (n - 1.0))
    v_n = total / (n * n)
    return float(u_n), float(v_n)


def _centered_matrix_for_normality(arr, h, mu_hat, sigma_hat, centering):
    d = arr.shape[1]
    if mu_hat is None:
        mu_hat = np.zeros(d)
    if sigma_hat is None:
        sigma_hat = np.eye(d)
    if centering == "param":
        return parametric_centered_gaussian_matrix(arr, h, mu_hat, sigma_hat)
    if centering == "nonparam":
        return center_kernel_matrix(gaussian_kernel_matrix(arr, arr, h))
    raise ValueError(f"unknown centering {centering!r}")


def normality_test(x, h: float, mu_hat=None, sigma_hat=None,
                   centering: str = "nonparam", plan: ResamplingPlan | None = None,
                   rng=None) -> TestOutcome:
    """Test whether the sample follows N(mu_hat, sigma_hat).

    The statistic is the U-statistic of the Gaussian kernel centered
    either in closed form against the reference normal ("param") or
    against the sample's own empirical distribution ("nonparam",
    default). The critical value is always empirical: the quantile of B
    statistics recomputed on fresh draws from the reference normal.
    """
    arr = validate_data_matrix(x)
    n, d = arr.shape
    plan = plan or ResamplingPlan()
    source = as_random_source(rng)
    mu = np.zeros(d) if mu_hat is None else np.asarray(mu_hat, dtype=float)
    sigma = np.eye(d) if sigma_hat is None else np.atleast_2d(
        np.asarray(sigma_hat, dtype=float))
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise ValueError("sigma_hat must be symmetric positive definite") from exc

    u_n, v_n = one_sample_statistics(arr, h, mu, sigma, centering)
    values = np.empty(plan.B)
    for i in range(plan.B):
        gen = source.child(i).generator()
        draw = gen.standard_normal((n, d)) @ chol.T + mu
        values[i] = one_sample_statistics(draw, h, mu, sigma, centering)[0]
    cv = float(np.quantile(values, plan.quantile))
    return TestOutcome(
        test_type="normality",
        statistics=(u_n,),
        critical_values=(cv,),
        reject=(u_n > cv,),
        cv_method="empirical",
        h=h,
        quantile=plan.quantile,
        b_used=plan.B,
        details={"u_n": u_n, "v_n": v_n, "centering": centering,
                 "mu_hat": mu.tolist(), "sigma_hat": sigma.tolist()},
    )


# ---------------------------------------------------------------------------
# two- and k-sample tests
# ---------------------------------------------------------------------------


def ksample_test(x, labels, h: float, plan: ResamplingPlan | None = None,
                 rng=None) -> TestOutcome:
    """Omnibus k-sample test from the matrix distance.

    Reports the pair ((K-1) T_n, T_n) against matched critical values
    ((K-1) cv, cv), where cv is the resampled quantile of T_n.
    """
    arr = validate_data_matrix(x)
    codes, k, _ = normalize_group_labels(labels, arr.shape[0])
    if k < 2:
        raise ValueError("k-sample test needs at least two groups")
    sizes = np.bincount(codes)[1:]
    if np.any(sizes < 2):
        raise ValueError("every group needs at least two observations")
    plan = plan or ResamplingPlan()
    source = as_random_source(rng)

    kmat = gaussian_kernel_matrix(arr, arr, h)
    e = _group_multiplicity(
        [np.flatnonzero(codes == a + 1) for a in range(k)], arr.shape[0], k)
    dist = _distance_matrix_from_multiplicity(kmat, e)
    km1_tn, tn = ksample_statistics(dist, k)
    cv = _resampled_tn_quantile(kmat, sizes, plan, source)
    stats = (km1_tn, tn)
    cvs = ((k - 1.0) * cv, cv)
    return TestOutcome(
        test_type="ksample",
        statistics=stats,
        critical_values=cvs,
        reject=tuple(s > c for s, c in zip(stats, cvs)),
        cv_method=plan.method,
        h=h,
        quantile=plan.quantile,
        b_used=plan.B,
        details={"k": k, "group_sizes": sizes.tolist(),
                 "distance_matrix": dist.tolist(),
                 "subsample_fraction": plan.b},
    )


def twosample_test(x, y, h: float, plan: ResamplingPlan | None = None,
                   rng=None) -> TestOutcome:
    """Nonparametric two-sample test; the K=2 case of the matrix distance."""
    x = validate_data_matrix(x)
    y = validate_data_matrix(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ValueError("samples have different dimensions")
    if x.shape[0] < 2 or y.shape[0] < 2:
        raise ValueError("both samples need at least two observations")
    plan = plan or ResamplingPlan()
    source = as_random_source(rng)

    pooled = np.concatenate([x, y], axis=0)
    sizes = np.array([x.shape[0], y.shape[0]])
    kmat = gaussian_kernel_matrix(pooled, pooled, h)
    groups = [np.arange(sizes[0]), sizes[0] + np.arange(sizes[1])]
    e = _group_multiplicity(groups, pooled.shape[0], 2)
    dist = _distance_matrix_from_multiplicity(kmat, e)
    stat = ksample_statistics(dist, 2)[1]
    cv = _resampled_tn_quantile(kmat, sizes, plan, source)
    return TestOutcome(
        test_type="twosample",
        statistics=(stat,),
        critical_values=(cv,),
        reject=(stat > cv,),
        cv_method=plan.method,
        h=h,
        quantile=plan.quantile,
        b_used=plan.B,
        details={"group_sizes": sizes.tolist(),
                 "distance_matrix": dist.tolist(),
                 "subsample_fraction": plan.b},
    )


# ---------------------------------------------------------------------------
# summaries and QQ series
# ---------------------------------------------------------------------------


@dataclass
class TestSummary:
    """Descriptive tables plus plot-ready QQ point series."""

    test_rows: list
    tables: SummaryTable
    qq_series: dict


def _plotting_positions(n: int) -> np.ndarray:
    return (np.arange(1, n + 1) - 0.5) / n


def summarize(outcome, x, y=None, labels=None,
              variable_names=None) -> TestSummary:
    """Summary tables and QQ series for a test outcome.

    Normality: sample quantiles against standard-normal theoretical
    quantiles, per variable. Two-sample: quantiles of sample 1 against
    quantiles of sample 2, per variable. K-sample: tables only (grouped).
    """
    arr = validate_data_matrix(x)
    n, d = arr.shape
    if variable_names is None:
        variable_names = [f"Feature {j}" for j in range(d)]
    qq: dict = {}
    test_type = getattr(outcome, "test_type", "")

    if test_type == "twosample" or (y is not None and labels is None):
        second = validate_data_matrix(y, "y")
        both = np.concatenate([arr, second], axis=0)
        two_labels = np.concatenate(
            [np.ones(arr.shape[0], dtype=int), np.full(second.shape[0], 2)])
        tables = descriptive_stats(both, two_labels, variable_names)
        pos = _plotting_positions(min(arr.shape[0], second.shape[0]))
        for j, name in enumerate(variable_names):
            qq[name] = {
                "x": np.quantile(arr[:, j], pos).tolist(),
                "y": np.quantile(second[:, j], pos).tolist(),
                "x_label": "sample 1 quantiles",
                "y_label": "sample 2 quantiles",
            }
    elif labels is not None:
        tables = descriptive_stats(arr, labels, variable_names)
    else:
        tables = descriptive_stats(arr, None, variable_names)
        pos = _plotting_positions(n)
        if test_type == "uniformity":
            dof_half = (d - 1.0) / 2.0
            theo = 2.0 * special.betaincinv(dof_half, dof_half, pos) - 1.0
            x_label = "uniform-sphere coordinate quantiles"
        else:
            theo = special.ndtri(pos)
            x_label = "normal theoretical quantiles"
        for j, name in enumerate(variable_names):
            qq[name] = {
                "x": theo.tolist(),
                "y": np.sort(arr[:, j]).tolist(),
                "x_label": x_label,
                "y_label": "sample quantiles",
            }

    rows = [
        {"statistic": float(s), "critical_value": float(c), "reject": bool(r)}
        for s, c, r in zip(outcome.statistics, outcome.critical_values,
                           outcome.reject)
    ]
    return TestSummary(test_rows=rows, tables=tables, qq_series=qq)
