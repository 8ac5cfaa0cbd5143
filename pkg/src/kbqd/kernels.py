"""Kernel evaluations and centering.

Two diffusion kernel families are provided: the Gaussian kernel on R^d
with bandwidth matrix h^2 I_d, and the Poisson kernel on the unit sphere
S^{d-1} with concentration rho in (0, 1). Centering makes a kernel
integrate to zero against a reference distribution in each argument;
it is available in closed form against a Gaussian (parametric), against
the uniform distribution on the sphere, and against the empirical
distribution of a pooled sample (nonparametric).
"""

from __future__ import annotations

import numpy as np
from scipy import linalg

UNIT_NORM_TOL = 1e-8          # deviations below this are accepted as unit
UNIT_NORM_FIX_TOL = 1e-6      # deviations below this are silently renormalized


class NonUnitVectorError(ValueError):
    """Input rows are too far from the unit sphere to renormalize."""


def ensure_unit_rows(x, name: str = "x") -> np.ndarray:
    """Validate that rows lie on the unit sphere.

    Rows within ``UNIT_NORM_FIX_TOL`` of unit length are renormalized;
    larger deviations raise :class:`NonUnitVectorError`.
    """
    arr = np.asarray(x, dtype=float)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[None, :]
    norms = np.linalg.norm(arr, axis=1)
    dev = np.abs(norms - 1.0)
    if np.any(dev > UNIT_NORM_FIX_TOL):
        bad = int(np.argmax(dev))
        raise NonUnitVectorError(
            f"{name} row {bad} has norm {norms[bad]:.8f}; rows must be unit vectors")
    fix = dev > UNIT_NORM_TOL
    if np.any(fix):
        arr = arr.copy()
        arr[fix] /= norms[fix, None]
    return arr[0] if squeeze else arr


# ---------------------------------------------------------------------------
# Gaussian kernel
# ---------------------------------------------------------------------------


def gaussian_kernel(s, t, h: float) -> float:
    """Gaussian density kernel with covariance h^2 I evaluated at (s, t)."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if s.shape != t.shape:
        raise ValueError(f"dimension mismatch: {s.shape} vs {t.shape}")
    if h <= 0:
        raise ValueError("bandwidth h must be positive")
    d = s.size
    sq = float(np.dot(s - t, s - t))
    return (2.0 * np.pi) ** (-d / 2.0) * h ** (-d) * np.exp(-sq / (2.0 * h * h))


def gaussian_kernel_matrix(x, y, h: float) -> np.ndarray:
    """All pairwise Gaussian kernel values between rows of x and rows of y."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.shape[1] != y.shape[1]:
        raise ValueError("dimension mismatch between samples")
    if h <= 0:
        raise ValueError("bandwidth h must be positive")
    d = x.shape[1]
    sq = (
        np.sum(x * x, axis=1)[:, None]
        + np.sum(y * y, axis=1)[None, :]
        - 2.0 * (x @ y.T)
    )
    np.maximum(sq, 0.0, out=sq)
    norm = (2.0 * np.pi) ** (-d / 2.0) * h ** (-d)
    return norm * np.exp(-sq / (2.0 * h * h))


def _gaussian_cov_kernel(diff: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Gaussian density with general covariance, evaluated at displacement(s).

    ``diff`` has shape (..., d); returns shape (...).
    """
    d = cov.shape[0]
    cho = linalg.cho_factor(cov, lower=True)
    logdet = 2.0 * np.sum(np.log(np.diag(cho[0])))
    flat = np.atleast_2d(diff.reshape(-1, d))
    solved = linalg.cho_solve(cho, flat.T).T
    quad = np.sum(flat * solved, axis=1).reshape(diff.shape[:-1])
    return np.exp(-0.5 * quad - 0.5 * logdet - 0.5 * d * np.log(2.0 * np.pi))


def gaussian_kernel_centered_parametric(s, t, h: float, mu_g, sigma_g) -> float:
    """Gaussian kernel centered in closed form against N(mu_g, sigma_g).

    The four terms are Gaussian densities with covariances h^2 I,
    h^2 I + Sigma, h^2 I + Sigma and h^2 I + 2 Sigma respectively.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    mu_g = np.asarray(mu_g, dtype=float)
    sigma_g = np.asarray(sigma_g, dtype=float)
    d = s.size
    hh = h * h * np.eye(d)
    try:
        k_st = _gaussian_cov_kernel(s - t, hh)
        k_mt = _gaussian_cov_kernel(mu_g - t, hh + sigma_g)
        k_sm = _gaussian_cov_kernel(s - mu_g, hh + sigma_g)
        k_mm = _gaussian_cov_kernel(np.zeros(d), hh + 2.0 * sigma_g)
    except linalg.LinAlgError as exc:
        raise ValueError("sigma_g must be symmetric positive definite") from exc
    return float(k_st - k_mt - k_sm + k_mm)


def parametric_centered_gaussian_matrix(x, h: float, mu_g, sigma_g) -> np.ndarray:
    """Matrix of parametrically centered Gaussian kernel values over one sample."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    mu_g = np.asarray(mu_g, dtype=float)
    sigma_g = np.atleast_2d(np.asarray(sigma_g, dtype=float))
    n, d = x.shape
    hh = h * h * np.eye(d)
    k_xx = gaussian_kernel_matrix(x, x, h)
    try:
        a = _gaussian_cov_kernel(x - mu_g, hh + sigma_g)          # K(x_i, mu)
        const = _gaussian_cov_kernel(np.zeros(d), hh + 2.0 * sigma_g)
    except linalg.LinAlgError as exc:
        raise ValueError("sigma_g must be symmetric positive definite") from exc
    return k_xx - a[:, None] - a[None, :] + const


# ---------------------------------------------------------------------------
# Poisson kernel
# ---------------------------------------------------------------------------


def poisson_kernel(u, v, rho: float) -> float:
    """Poisson kernel (1-rho^2) / (1 + rho^2 - 2 rho u.v)^{d/2} on S^{d-1}."""
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    u = ensure_unit_rows(u, "u")
    v = ensure_unit_rows(v, "v")
    if u.shape != v.shape:
        raise ValueError("dimension mismatch")
    d = u.size
    denom = 1.0 + rho * rho - 2.0 * rho * float(np.dot(u, v))
    return (1.0 - rho * rho) / denom ** (d / 2.0)


def poisson_kernel_matrix(x, y, rho: float) -> np.ndarray:
    """All pairwise Poisson kernel values between unit rows of x and y."""
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    x = ensure_unit_rows(np.atleast_2d(np.asarray(x, dtype=float)), "x")
    y = ensure_unit_rows(np.atleast_2d(np.asarray(y, dtype=float)), "y")
    d = x.shape[1]
    denom = 1.0 + rho * rho - 2.0 * rho * (x @ y.T)
    # u.v <= 1 forces denom >= (1-rho)^2 > 0; clip rounding noise
    np.maximum(denom, (1.0 - rho) ** 2, out=denom)
    return (1.0 - rho * rho) / denom ** (d / 2.0)


def poisson_kernel_centered(u, v, rho: float) -> float:
    """Poisson kernel centered against the uniform distribution: K - 1."""
    return poisson_kernel(u, v, rho) - 1.0


# ---------------------------------------------------------------------------
# nonparametric centering
# ---------------------------------------------------------------------------


def center_nonparametric(k_xy: float, k_x_pool, k_pool_y, k_pool) -> float:
    """Center one kernel evaluation against a pooled empirical sample.

    Parameters
    ----------
    k_xy : K(x, y)
    k_x_pool : length-n array of K(x, z_i)
    k_pool_y : length-n array of K(z_i, y)
    k_pool : n-by-n matrix of K(z_i, z_j) over the pooled sample
    """
    k_pool = np.asarray(k_pool, dtype=float)
    n = k_pool.shape[0]
    if n < 2:
        raise ValueError("pooled sample must contain at least two points")
    offdiag = (k_pool.sum() - np.trace(k_pool)) / (n * (n - 1))
    return (k_xy
            - float(np.mean(k_x_pool))
            - float(np.mean(k_pool_y))
            + offdiag)


def center_kernel_matrix(k_pool: np.ndarray) -> np.ndarray:
    """Center a pooled self-kernel matrix against its own empirical sample.

    Entry (i, j) of the result is the nonparametrically centered kernel
    evaluated at (z_i, z_j).
    """
    k = np.asarray(k_pool, dtype=float)
    n = k.shape[0]
    if k.shape != (n, n):
        raise ValueError("pooled kernel matrix must be square")
    if n < 2:
        raise ValueError("pooled sample must contain at least two points")
    row_means = k.mean(axis=1)
    col_means = k.mean(axis=0)
    offdiag = (k.sum() - np.trace(k)) / (n * (n - 1))
    return k - row_means[:, None] - col_means[None, :] + offdiag
