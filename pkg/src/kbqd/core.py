"""Shared numeric substrate: seeded randomness, special functions,
root-finding and descriptive statistics.

Everything in here is pure given its inputs. Random state is carried
explicitly through :class:`RandomSource` values so that parallel
computations can derive reproducible, statistically independent streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NoSignChangeError(ValueError):
    """Bracketing root finder was called without a sign change."""


# ---------------------------------------------------------------------------
# randomness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RandomSource:
    """Seeded, splittable source of randomness.

    Identical ``(master_seed, stream_id)`` pairs reproduce the exact same
    draw sequence; distinct ``stream_id`` values give statistically
    independent streams (numpy ``SeedSequence`` spawn keys). Use
    :meth:`child` to derive per-task streams for parallel work.
    """

    master_seed: int
    stream_id: tuple[int, ...] = field(default=())

    def __post_init__(self):
        sid = self.stream_id
        if isinstance(sid, (int, np.integer)):
            object.__setattr__(self, "stream_id", (int(sid),))
        else:
            object.__setattr__(self, "stream_id", tuple(int(s) for s in sid))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.stream_id)
        return np.random.default_rng(seq)

    def child(self, index: int) -> "RandomSource":
        return RandomSource(self.master_seed, self.stream_id + (int(index),))


def as_random_source(rng, default_seed: int = 0) -> RandomSource:
    """Coerce ``None`` / int / RandomSource to a RandomSource."""
    if rng is None:
        return RandomSource(default_seed)
    if isinstance(rng, RandomSource):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RandomSource(int(rng))
    raise TypeError(f"cannot interpret {type(rng).__name__} as a RandomSource")


# ---------------------------------------------------------------------------
# data model
# ---------------------------------------------------------------------------


def validate_data_matrix(x, name: str = "x") -> np.ndarray:
    """Return ``x`` as an (n, d) float array of finite values.

    1-D input is treated as a single variable (column vector).
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 1-D or 2-D array, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def normalize_group_labels(labels, n: int | None = None):
    """Canonicalize a label vector to integer codes ``1..K``.

    Distinct label values are mapped to 1..K in sorted order. Returns
    ``(codes, K, levels)`` where ``levels`` lists the original values.
    """
    lab = np.asarray(labels)
    if lab.ndim != 1:
        lab = lab.ravel()
    if n is not None and lab.shape[0] != n:
        raise ValueError(f"labels have length {lab.shape[0]}, expected {n}")
    levels, codes = np.unique(lab, return_inverse=True)
    return codes + 1, len(levels), levels


# ---------------------------------------------------------------------------
# special functions and root finding
# ---------------------------------------------------------------------------


def chi_square_quantile(p: float, dof: float) -> float:
    """Quantile of the chi-squared distribution with (possibly non-integer)
    degrees of freedom.

    Computed through the inverse regularized lower incomplete gamma
    function, so ``P(dof/2, q/2) = p`` holds to machine precision.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if dof <= 0.0:
        raise DomainError(f"dof must be positive, got {dof}")
    return 2.0 * float(special.gammaincinv(dof / 2.0, p))


def find_root_bracketed(f, lo: float, hi: float, tol: float = 1e-10,
                        max_iter: int = 200) -> float:
    """Bisection on ``[lo, hi]``; requires a sign change on the bracket.

    Returns the midpoint of the final bracket, whose width is at most
    ``tol`` (or after ``max_iter`` halvings, whichever comes first).
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise NoSignChangeError(
            f"f({lo})={flo} and f({hi})={fhi} have the same sign")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# descriptive statistics
# ---------------------------------------------------------------------------

STAT_NAMES = ("mean", "sd", "median", "iqr", "min", "max")


@dataclass
class SummaryTable:
    """Per-variable descriptive statistics, per group and overall.

    ``values[v, s, g]`` holds statistic ``stat_names[s]`` of variable
    ``variables[v]`` within ``group_names[g]``; the last group is always
    ``"Overall"``.
    """

    variables: list[str]
    group_names: list[str]
    stat_names: tuple[str, ...]
    values: np.ndarray

    def table(self, variable: int) -> dict:
        """Rows for one variable: {stat: {group: value}}."""
        return {
            stat: {g: float(self.values[variable, s, gi])
                   for gi, g in enumerate(self.group_names)}
            for s, stat in enumerate(self.stat_names)
        }

    def to_records(self) -> list[dict]:
        recs = []
        for v, var in enumerate(self.variables):
            for s, stat in enumerate(self.stat_names):
                for g, grp in enumerate(self.group_names):
                    recs.append({"variable": var, "statistic": stat,
                                 "group": grp,
                                 "value": float(self.values[v, s, g])})
        return recs


def _column_stats(col: np.ndarray) -> np.ndarray:
    q1, med, q3 = np.quantile(col, [0.25, 0.5, 0.75])  # linear interpolation
    sd = col.std(ddof=1) if col.size > 1 else 0.0
    return np.array([col.mean(), sd, med, q3 - q1, col.min(), col.max()])


def descriptive_stats(x, labels=None, variable_names=None) -> SummaryTable:
    """Mean, sd, median, IQR, min and max of every variable, computed
    overall and (when ``labels`` is given) within each group.

    Quantiles use linear interpolation between order statistics, matching
    numpy's default convention.
    """
    arr = validate_data_matrix(x)
    n, d = arr.shape
    if variable_names is None:
        variable_names = [f"Feature {j}" for j in range(d)]
    group_names: list[str] = []
    masks: list[np.ndarray] = []
    if labels is not None:
        codes, k, levels = normalize_group_labels(labels, n)
        for g in range(1, k + 1):
            group_names.append(f"Group {levels[g - 1]}")
            masks.append(codes == g)
    group_names.append("Overall")
    masks.append(np.ones(n, dtype=bool))

    values = np.empty((d, len(STAT_NAMES), len(group_names)))
    for gi, mask in enumerate(masks):
        sub = arr[mask]
        for v in range(d):
            values[v, :, gi] = _column_stats(sub[:, v])
    return SummaryTable(list(variable_names), group_names, STAT_NAMES, values)


def sample_mean_cov(x) -> tuple[np.ndarray, np.ndarray]:
    """Arithmetic mean vector and unbiased (n-1) covariance matrix."""
    arr = validate_data_matrix(x)
    if arr.shape[0] < 2:
        raise ValueError("need at least two observations for a covariance")
    mean = arr.mean(axis=0)
    cov = np.cov(arr, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    return mean, cov
