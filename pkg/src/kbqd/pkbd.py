"""Poisson kernel-based distribution on S^{d-1}: density evaluation and
random generation.

Two exact rejection samplers are provided: ``rejvmf`` proposes from a
von Mises-Fisher distribution, ``rejacg`` from an angular central
Gaussian. Both compute their envelope constant as the exact maximum of
the target/proposal density ratio over the cosine t = x.mu in [-1, 1]
(stationary points in closed form plus the endpoints), so the envelopes
dominate everywhere regardless of how the proposal parameters were
chosen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .core import as_random_source
from .kernels import ensure_unit_rows

PROPOSAL_CAP_FACTOR = 10_000


class UnsupportedSamplerError(ValueError):
    """Requested sampler method is reserved but not provided."""


class SamplerConvergenceError(RuntimeError):
    """Rejection sampler exceeded its proposal budget."""


@dataclass(frozen=True)
class PkbdParams:
    """Mean direction on the sphere and concentration in (0, 1)."""

    mu: np.ndarray
    rho: float

    def __post_init__(self):
        mu = ensure_unit_rows(np.asarray(self.mu, dtype=float), "mu")
        object.__setattr__(self, "mu", mu)
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if mu.ndim != 1 or mu.size < 2:
            raise ValueError("mu must be a unit vector of dimension >= 2")


@dataclass
class SamplerReport:
    """Accepted samples plus the cost of producing them."""

    samples: np.ndarray
    proposals_used: int
    acceptance_rate: float
    method: str


def surface_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} in R^d."""
    return 2.0 * np.pi ** (d / 2.0) / special.gamma(d / 2.0)


def dpkb(x, mu, rho: float):
    """Density of the Poisson kernel-based distribution at unit vector(s) x."""
    params = PkbdParams(np.asarray(mu, dtype=float), float(rho))
    arr = ensure_unit_rows(np.asarray(x, dtype=float))
    single = arr.ndim == 1
    pts = np.atleast_2d(arr)
    d = params.mu.size
    if pts.shape[1] != d:
        raise ValueError("dimension mismatch between x and mu")
    # (1-rho)^2 + rho ||x-mu||^2 equals 1 + rho^2 - 2 rho x.mu without the
    # cancellation that form suffers near (rho -> 1, x -> mu)
    sqd = np.sum((pts - params.mu) ** 2, axis=1)
    denom = (1.0 - rho) ** 2 + rho * sqd
    dens = (1.0 - rho * rho) / (surface_area(d) * denom ** (d / 2.0))
    return float(dens[0]) if single else dens


# ---------------------------------------------------------------------------
# envelope constants (log density ratios over t = x.mu)
# ---------------------------------------------------------------------------


def _log_target_shape(t, rho: float, d: int):
    """Log PKBD density without the surface-area constant."""
    return np.log1p(-rho * rho) - (d / 2.0) * np.log(
        1.0 + rho * rho - 2.0 * rho * t)


def _log_vmf_ratio(t, rho: float, d: int, kappa: float):
    # log[f_pkbd / f_vmf]; surface-measure factors cancel
    nu = d / 2.0 - 1.0
    log_bessel = np.log(special.ive(nu, kappa)) + kappa
    log_cvmf = nu * np.log(kappa) - (d / 2.0) * np.log(2.0 * np.pi) - log_bessel
    return (_log_target_shape(t, rho, d) - np.log(surface_area(d))
            - log_cvmf - kappa * t)


def _vmf_envelope_log(rho: float, d: int, kappa: float) -> float:
    # d/dt log-ratio = d*rho/(1+rho^2-2*rho*t) - kappa; single stationary point
    cands = [-1.0, 1.0]
    t_star = (1.0 + rho * rho - d * rho / kappa) / (2.0 * rho)
    if -1.0 < t_star < 1.0:
        cands.append(t_star)
    return float(max(_log_vmf_ratio(np.array(cands), rho, d, kappa)))


def _log_acg_ratio(t, rho: float, d: int, beta: float):
    gamma = 1.0 - 1.0 / beta
    return (_log_target_shape(t, rho, d) + 0.5 * np.log(beta)
            + (d / 2.0) * np.log(1.0 - gamma * t * t))


def _acg_envelope_log(rho: float, d: int, beta: float) -> float:
    # stationary points solve rho*g*t^2 - g*(1+rho^2)*t + rho = 0, g = 1-1/beta
    cands = [-1.0, 1.0]
    gamma = 1.0 - 1.0 / beta
    if abs(gamma) > 1e-14:
        a, b, c = rho * gamma, -gamma * (1.0 + rho * rho), rho
        disc = b * b - 4.0 * a * c
        if disc >= 0.0:
            root = np.sqrt(disc)
            for t_star in ((-b - root) / (2.0 * a), (-b + root) / (2.0 * a)):
                if -1.0 < t_star < 1.0:
                    cands.append(t_star)
    return float(max(_log_acg_ratio(np.array(cands), rho, d, beta)))


def _optimal_acg_beta(rho: float, d: int) -> float:
    res = optimize.minimize_scalar(
        lambda lb: _acg_envelope_log(rho, d, np.exp(lb)),
        bounds=(0.0, np.log(1e8)), method="bounded",
        options={"xatol": 1e-10})
    if not res.success:
        raise RuntimeError("envelope-shape optimization failed to converge")
    return float(np.exp(res.x))


# ---------------------------------------------------------------------------
# proposal generators
# ---------------------------------------------------------------------------


def _tangent_directions(mu: np.ndarray, count: int,
                        gen: np.random.Generator) -> np.ndarray:
    """Uniform unit directions orthogonal to mu."""
    d = mu.size
    v = gen.standard_normal((count, d))
    v -= np.outer(v @ mu, mu)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v


def _sample_vmf(mu: np.ndarray, kappa: float, count: int,
                gen: np.random.Generator) -> np.ndarray:
    """von Mises-Fisher draws by tangent-normal decomposition, with the
    beta mixing-variable rejection step for the cosine component."""
    d = mu.size
    m = d - 1.0
    b = m / (np.sqrt(4.0 * kappa * kappa + m * m) + 2.0 * kappa)
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + m * np.log(1.0 - x0 * x0)

    w = np.empty(count)
    filled = 0
    while filled < count:
        todo = count - filled
        z = gen.beta(m / 2.0, m / 2.0, size=todo)
        cand = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
        u = gen.uniform(size=todo)
        ok = kappa * cand + m * np.log(1.0 - x0 * cand) - c >= np.log(u)
        take = cand[ok]
        w[filled:filled + take.size] = take
        filled += take.size

    v = _tangent_directions(mu, count, gen)
    return w[:, None] * mu[None, :] + np.sqrt(
        np.maximum(1.0 - w * w, 0.0))[:, None] * v


def _sample_acg(mu: np.ndarray, beta: float, count: int,
                gen: np.random.Generator) -> np.ndarray:
    """Angular central Gaussian draws with axis mu and shape beta."""
    d = mu.size
    z = gen.standard_normal((count, d))
    y = z + (np.sqrt(beta) - 1.0) * np.outer(z @ mu, mu)
    return y / np.linalg.norm(y, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# rejection samplers
# ---------------------------------------------------------------------------


def _rejection_loop(n, mu, rho, gen, propose, log_ratio, log_envelope, method):
    d = mu.size
    cap = PROPOSAL_CAP_FACTOR * n
    out = np.empty((n, d))
    used = 0
    filled = 0
    # expected acceptance is exp(-log_envelope); size batches accordingly
    batch0 = int(min(max(n * np.exp(log_envelope) * 1.2, 256), 2_000_000))
    while filled < n:
        todo = n - filled
        batch = int(min(max(batch0, todo * np.exp(log_envelope) * 1.2), cap - used))
        if batch <= 0:
            raise SamplerConvergenceError(
                f"{method}: exceeded proposal budget of {cap} candidates")
        cand = propose(batch, gen)
        t = cand @ mu
        logu = np.log(gen.uniform(size=batch))
        ok = logu <= log_ratio(t) - log_envelope
        hits = np.flatnonzero(ok)
        if hits.size >= todo:
            # count proposals only up to the one that completed the sample
            used += int(hits[todo - 1]) + 1
            take = cand[hits[:todo]]
        else:
            used += batch
            take = cand[hits]
        out[filled:filled + take.shape[0]] = take
        filled += take.shape[0]
        if used >= cap and filled < n:
            raise SamplerConvergenceError(
                f"{method}: exceeded proposal budget of {cap} candidates")
    return SamplerReport(samples=out, proposals_used=used,
                         acceptance_rate=n / used, method=method)


def rpkb_rejvmf(n: int, mu, rho: float, rng=None) -> SamplerReport:
    """PKBD draws via a von Mises-Fisher envelope.

    The proposal concentration kappa = d*rho/(1+rho^2) matches the
    log-density slopes at the equator; the envelope constant is the exact
    ratio maximum, so acceptance is unbiased for any kappa. Acceptance
    degrades as rho -> 1.
    """
    params = PkbdParams(np.asarray(mu, dtype=float), float(rho))
    d = params.mu.size
    kappa = d * rho / (1.0 + rho * rho)
    log_m = _vmf_envelope_log(rho, d, kappa)
    gen = as_random_source(rng).generator()
    return _rejection_loop(
        n, params.mu, rho, gen,
        propose=lambda cnt, g: _sample_vmf(params.mu, kappa, cnt, g),
        log_ratio=lambda t: _log_vmf_ratio(t, rho, d, kappa),
        log_envelope=log_m, method="rejvmf")


def rpkb_rejacg(n: int, mu, rho: float, rng=None) -> SamplerReport:
    """PKBD draws via an angular central Gaussian envelope.

    The scalar shape of the proposal is chosen per call by minimizing the
    envelope constant (1-D bounded optimization); acceptance stays high
    across the whole concentration range.
    """
    params = PkbdParams(np.asarray(mu, dtype=float), float(rho))
    d = params.mu.size
    beta = _optimal_acg_beta(rho, d)
    log_m = _acg_envelope_log(rho, d, beta)
    gen = as_random_source(rng).generator()
    return _rejection_loop(
        n, params.mu, rho, gen,
        propose=lambda cnt, g: _sample_acg(params.mu, beta, cnt, g),
        log_ratio=lambda t: _log_acg_ratio(t, rho, d, beta),
        log_envelope=log_m, method="rejacg")


def rpkb(n: int, mu, rho: float, method: str = "rejacg", rng=None) -> SamplerReport:
    """Generate n PKBD draws with the chosen sampler."""
    if method == "rejvmf":
        return rpkb_rejvmf(n, mu, rho, rng)
    if method == "rejacg":
        return rpkb_rejacg(n, mu, rho, rng)
    if method == "rejpsaw":
        raise UnsupportedSamplerError(
            "method 'rejpsaw' is reserved but not provided by this package; "
            "use 'rejvmf' or 'rejacg'")
    raise ValueError(f"unknown sampler method {method!r}")


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def expected_cosine(d: int, rho: float) -> float:
    """E[x.mu] under the PKBD, by adaptive quadrature of the marginal of
    the cosine (substituting t = cos(theta) removes the edge singularity)."""
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    if d < 2:
        raise ValueError("d must be at least 2")

    def weight(theta):
        s = np.sin(theta)
        return s ** (d - 2) / (
            1.0 + rho * rho - 2.0 * rho * np.cos(theta)) ** (d / 2.0)

    num, num_err = integrate.quad(lambda th: np.cos(th) * weight(th), 0.0,
                                  np.pi, limit=200)
    den, den_err = integrate.quad(weight, 0.0, np.pi, limit=200)
    if den <= 0 or den_err > 1e-8 * den or num_err > 1e-8 * max(abs(num), den):
        raise RuntimeError("cosine-moment quadrature did not converge")
    return num / den
