"""Kernel-based quadratic distance inference toolkit.

Goodness-of-fit tests (normality, two-sample, k-sample and sphere
uniformity), bandwidth selection by mid-power analysis, Poisson
kernel-based densities with exact rejection samplers, and mixture-model
clustering on the sphere. A command-line interface (``kbqd``) and an
HTTP service (:mod:`kbqd.service`) expose the same operations.
"""

from .clustering import (ClusterConfig, MixtureFit, ValidationReport,
                         adjusted_rand_index, in_group_proportion,
                         log_likelihood, macro_precision_recall, pkbc_fit,
                         sphere_display_coordinates, summary_stat, validate,
                         wcss)
from .core import (RandomSource, SummaryTable, chi_square_quantile,
                   descriptive_stats, find_root_bracketed, sample_mean_cov)
from .gof import (ResamplingPlan, TestOutcome, TestSummary, critical_value,
                  ksample_statistics, ksample_test, matrix_distance,
                  normality_test, one_sample_statistics, summarize,
                  twosample_test)
from .kernels import (center_nonparametric, gaussian_kernel,
                      gaussian_kernel_centered_parametric, poisson_kernel,
                      poisson_kernel_centered)
from .pkbd import (PkbdParams, SamplerReport, dpkb, expected_cosine, rpkb,
                   rpkb_rejacg, rpkb_rejvmf)
from .tuning import (AlternativeSpec, PowerCurve, SelectHResult,
                     SkewNormalParams, estimate_moments, sample_skew_normal,
                     select_h)
from .uniformity import (UniformityOutcome, dof_and_c, pk_test,
                         sample_uniform_sphere, variance_un)

__version__ = "0.1.0"

__all__ = [
    "AlternativeSpec", "ClusterConfig", "MixtureFit", "PkbdParams",
    "PowerCurve", "RandomSource", "ResamplingPlan", "SamplerReport",
    "SelectHResult", "SkewNormalParams", "SummaryTable", "TestOutcome",
    "TestSummary", "UniformityOutcome", "ValidationReport",
    "adjusted_rand_index", "center_nonparametric", "chi_square_quantile",
    "critical_value", "descriptive_stats", "dof_and_c", "dpkb",
    "estimate_moments", "expected_cosine", "find_root_bracketed",
    "gaussian_kernel", "gaussian_kernel_centered_parametric",
    "in_group_proportion", "ksample_statistics", "ksample_test",
    "log_likelihood", "macro_precision_recall", "matrix_distance",
    "normality_test", "one_sample_statistics", "pk_test", "pkbc_fit",
    "poisson_kernel", "poisson_kernel_centered", "rpkb", "rpkb_rejacg",
    "rpkb_rejvmf", "sample_mean_cov", "sample_skew_normal",
    "sample_uniform_sphere", "select_h", "sphere_display_coordinates",
    "summarize", "summary_stat", "twosample_test", "validate",
    "variance_un", "wcss",
]
