"""Special functions, goodness-of-fit tests and the TestReport record."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatch, TooFewSamples
from .rng import RngStream

DEFAULT_LEVEL = 0.01
DEFAULT_PERMUTATIONS = 200
DEFAULT_Z = 4.0


@dataclass
class TestReport:
    """Outcome of one statistical check.

    Exactly one of ``p_value`` (pass iff ``p_value >= level``) or
    ``threshold`` (pass iff ``statistic <= threshold``) drives the verdict.
    """

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    n: int | list
    p_value: float | None = None
    threshold: float | None = None
    level: float | None = None
    seed: list | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.p_value is not None:
            return bool(self.p_value >= self.level)
        return bool(self.statistic <= self.threshold)

    def to_dict(self) -> dict:
        out = {"name": self.name, "statistic": _num(self.statistic), "n": self.n, "seed": self.seed}
        if self.p_value is not None:
            out["p_value"] = _num(self.p_value)
            out["level"] = self.level
        else:
            out["threshold"] = _num(self.threshold)
        out["pass"] = self.passed
        if self.details:
            out["details"] = jsonable(self.details)
        return out


def combine(name: str, reports: Sequence[TestReport], n=None, seed=None, **details) -> TestReport:
    """Battery verdict: statistic counts failing components, threshold 0."""
    failed = sum(not r.passed for r in reports)
    details = dict(details)
    details["components"] = [r.to_dict() for r in reports]
    return TestReport(
        name=name,
        statistic=float(failed),
        threshold=0.0,
        n=n if n is not None else [r.n for r in reports],
        seed=seed,
        details=details,
    )


def _num(x):
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


# ---------------------------------------------------------------- special functions


def reg_inc_gamma(shape, x):
    """Regularised lower incomplete gamma P(shape, x)."""
    scalar = np.ndim(x) == 0
    out = kernels.reg_inc_gamma(shape, x).reshape(np.shape(x))
    return float(out) if scalar else out


def reg_inc_beta(a, b, x):
    """Regularised incomplete beta I_x(a, b)."""
    scalar = np.ndim(x) == 0
    out = kernels.reg_inc_beta(a, b, x).reshape(np.shape(x))
    return float(out) if scalar else out


def gamma_cdf(shape):
    return lambda x: reg_inc_gamma(shape, x)


def beta_cdf(a, b):
    return lambda x: reg_inc_beta(a, b, x)


def kolmogorov_sf(x: float) -> float:
    """P(K > x) for the limiting Kolmogorov distribution."""
    if x <= 0:
        return 1.0
    if x < 1.0:
        # Jacobi form converges fast for small x
        s = 0.0
        for k in range(1, 50):
            s += math.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8 * x * x))
        return max(0.0, min(1.0, 1.0 - math.sqrt(2 * math.pi) / x * s))
    s = 0.0
    for k in range(1, 101):
        term = math.exp(-2.0 * k * k * x * x)
        s += term if k % 2 else -term
        if term < 1e-17:
            break
    return max(0.0, min(1.0, 2.0 * s))


def kolmogorov_quantile(level: float) -> float:
    """x with P(K > x) = level, by bisection."""
    lo, hi = 0.1, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if kolmogorov_sf(mid) > level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------- tests


def ks_test(samples, cdf: Callable, level: float = DEFAULT_LEVEL, name: str = "ks", seed=None) -> TestReport:
    """One-sample Kolmogorov-Smirnov test against ``cdf`` (vectorised callable)."""
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = x.size
    if n < 50:
        raise TooFewSamples(f"KS test needs at least 50 samples, got {n}")
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    d_n = max(np.max(i / n - f), np.max(f - (i - 1) / n))
    stat = math.sqrt(n) * d_n
    crit = kolmogorov_quantile(level)
    return TestReport(
        name=name,
        statistic=stat,
        p_value=kolmogorov_sf(stat),
        level=level,
        n=n,
        seed=seed,
        details={"D_n": d_n, "critical_value": crit},
    )


def _pairwise(a, b, block=512):
    out = np.empty((a.shape[0], b.shape[0]))
    for s in range(0, a.shape[0], block):
        diff = a[s : s + block, None, :] - b[None, :, :]
        out[s : s + block] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return out


def _energy_from_sums(s_xx, s_yy, s_xy, n, m):
    return 2.0 * s_xy / (n * m) - s_xx / (n * (n - 1)) - s_yy / (m * (m - 1))


def energy_distance_test(
    xs,
    ys,
    n_permutations: int = DEFAULT_PERMUTATIONS,
    level: float = DEFAULT_LEVEL,
    rng: RngStream | None = None,
    name: str = "energy",
) -> TestReport:
    """Two-sample energy-distance permutation test (Euclidean norm).

    Memory and time are quadratic in the pooled sample size.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(f"dimensions differ: {x.shape[1]} vs {y.shape[1]}")
    n, m = x.shape[0], y.shape[0]
    if n < 100 or m < 100:
        raise TooFewSamples(f"energy test needs at least 100 points per sample, got {n} and {m}")
    if rng is None:
        rng = RngStream(0, 0)
    seed = rng.seed_record()
    pooled = np.vstack([x, y])
    dist = _pairwise(pooled, pooled)
    total = dist.sum()
    s_xx = dist[:n, :n].sum()
    s_yy = dist[n:, n:].sum()
    s_xy = (total - s_xx - s_yy) / 2.0
    stat = _energy_from_sums(s_xx, s_yy, s_xy, n, m)

    # each column of `labels` marks the pseudo-x block of one permutation
    u = rng.uniform_block(n_permutations, n + m)
    order = np.argsort(u, axis=1, kind="stable")
    labels = np.zeros((n + m, n_permutations))
    labels[order[:, :n].T, np.arange(n_permutations)[None, :]] = 1.0
    dz = dist @ labels
    p_xx = np.einsum("ij,ij->j", labels, dz)
    row_tot = dist.sum(axis=1)
    x_rows = labels.T @ row_tot
    p_yy = total - 2.0 * x_rows + p_xx
    p_xy = x_rows - p_xx
    perm_stats = _energy_from_sums(p_xx, p_yy, p_xy, n, m)
    exceed = int(np.sum(perm_stats >= stat - 1e-12 * abs(stat)))
    p = (1 + exceed) / (1 + n_permutations)
    return TestReport(
        name=name,
        statistic=stat,
        p_value=p,
        level=level,
        n=[n, m],
        seed=seed,
        details={"n_permutations": n_permutations},
    )


def multi_indices(d: int, max_order: int):
    """All k in N^d with 1 <= |k| <= max_order, graded then lexicographic."""
    out = []
    for order in range(1, max_order + 1):
        for combo in itertools.combinations_with_replacement(range(d), order):
            k = [0] * d
            for j in combo:
                k[j] += 1
            out.append(tuple(k))
    return out


def moment_battery(
    samples,
    oracle: Callable,
    max_order: int = 2,
    z_threshold: float = DEFAULT_Z,
    name: str = "moments",
    seed=None,
    min_samples: int = 1000,
) -> TestReport:
    """Compare empirical mixed moments with ``oracle(k)`` in standard-error units."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n, d = x.shape
    if n < min_samples:
        raise TooFewSamples(f"moment battery needs at least {min_samples} samples, got {n}")
    rows = []
    z_max = 0.0
    for k in multi_indices(d, max_order):
        vals = np.prod(x ** np.asarray(k), axis=1)
        mean = vals.mean()
        se = vals.std(ddof=1) / math.sqrt(n)
        target = float(oracle(k))
        gap = mean - target
        if se > 0:
            z = gap / se
        else:
            z = 0.0 if abs(gap) <= 1e-12 * max(1.0, abs(target)) else math.inf
        z_max = max(z_max, abs(z))
        rows.append({"k": list(k), "mean": mean, "target": target, "se": se, "z": z})
    return TestReport(
        name=name,
        statistic=z_max,
        threshold=z_threshold,
        n=n,
        seed=seed,
        details={"max_order": max_order, "moments": rows},
    )
