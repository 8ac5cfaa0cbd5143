"""Poisson kernel-based test of uniformity on the unit sphere S^{d-1}.

Two statistics are computed from the kernel centered against the uniform
distribution (kernel minus one): the diagonal-excluded U-statistic U_n,
compared against an empirical resampled critical value, and the
normalized full double sum S_n, compared against an analytic scaled
chi-squared cutoff driven by the kernel's degrees of freedom.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_random_source, chi_square_quantile, validate_data_matrix
from .kernels import ensure_unit_rows, poisson_kernel_matrix


@dataclass
class UniformityOutcome:
    """Result of the sphere-uniformity test."""

    test_type: str
    un: float
    tn_normalized: float
    un_critical: float
    reject_u: bool
    vn: float
    vn_cutoff: float
    reject_v: bool
    dof: float
    c_constant: float
    rho: float
    quantile: float
    b_used: int
    var_un: float

    @property
    def statistics(self) -> tuple:
        return (self.un, self.vn)

    @property
    def critical_values(self) -> tuple:
        return (self.un_critical, self.vn_cutoff)

    @property
    def reject(self) -> tuple:
        return (self.reject_u, self.reject_v)

    @property
    def h0_rejected(self) -> bool:
        return self.reject_u or self.reject_v


def variance_un(n: int, d: int, rho: float) -> float:
    """Exact variance of U_n under uniformity."""
    bracket = (1.0 + rho * rho) / (1.0 - rho * rho) ** (d - 1) - 1.0
    return 2.0 / (n * (n - 1.0)) * bracket


def dof_and_c(d: int, rho: float) -> tuple:
    """Degrees of freedom and scale constant of the centered Poisson kernel.

    DOF is trace(K)^2 / trace(K^2) and c is trace(K^2) / trace(K), both in
    closed form; the asymptotic law of the normalized double-sum statistic
    is c times a chi-squared with DOF degrees of freedom.
    """
    omr = (1.0 - rho) ** (d - 1)
    omr2 = (1.0 - rho * rho) ** (d - 1)
    dof = ((1.0 + rho) / (1.0 - rho)) ** (d - 1) * (
        (1.0 + rho - omr) ** 2 / (1.0 + rho * rho - omr2))
    c = ((1.0 + rho * rho) - omr2) / ((1.0 + rho) ** d - omr2)
    return float(dof), float(c)


def sample_uniform_sphere(n: int, d: int, rng=None) -> np.ndarray:
    """n i.i.d. points uniform on S^{d-1}: normalized standard Gaussians."""
    if n < 1 or d < 2:
        raise ValueError("need n >= 1 and d >= 2")
    gen = as_random_source(rng).generator()
    z = gen.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _statistics(x: np.ndarray, rho: float) -> tuple:
    """(U_n, S_n) of the uniform-centered Poisson kernel over one sample."""
    n = x.shape[0]
    cen = poisson_kernel_matrix(x, x, rho) - 1.0
    total = cen.sum()
    trace = np.trace(cen)
    u_n = (total - trace) / (n * (n - 1.0))
    s_n = total / n
    return float(u_n), float(s_n)


def pk_test(x, rho: float, B: int = 300, quantile: float = 0.95,
            rng=None) -> UniformityOutcome:
    """Test uniformity of spherical observations.

    U_n is compared against the empirical ``quantile`` of B replicate
    U_n values computed on uniform-sphere samples of the same size; the
    double-sum statistic S_n is compared against the analytic cutoff
    c * chi2_quantile(quantile, DOF).
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    arr = ensure_unit_rows(validate_data_matrix(x))
    n, d = arr.shape
    if n < 2:
        raise ValueError("need at least two observations")
    source = as_random_source(rng)

    u_n, s_n = _statistics(arr, rho)
    var_u = variance_un(n, d, rho)
    tn_normalized = u_n / np.sqrt(var_u)

    values = np.empty(B)
    for i in range(B):
        draw = sample_uniform_sphere(n, d, source.child(i))
        values[i] = _statistics(draw, rho)[0]
    un_critical = float(np.quantile(values, quantile))

    dof, c = dof_and_c(d, rho)
    vn_cutoff = c * chi_square_quantile(quantile, dof)
    return UniformityOutcome(
        test_type="uniformity",
        un=u_n,
        tn_normalized=float(tn_normalized),
        un_critical=un_critical,
        reject_u=u_n > un_critical,
        vn=s_n,
        vn_cutoff=float(vn_cutoff),
        reject_v=s_n > vn_cutoff,
        dof=dof,
        c_constant=c,
        rho=rho,
        quantile=quantile,
        b_used=B,
        var_un=float(var_u),
    )
