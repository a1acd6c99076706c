"""Monte Carlo checks that an ensemble has a Gamma/Dirichlet fixed point.

"Equal in distribution" is checked by a battery: mixed moments up to order
two (|z| <= 4 against exact moments), marginal KS tests at a Bonferroni
level, and, for the Gamma fixed point, a two-sample energy test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import ParamVector, ProbVector, as_param_vector
from .ensembles import Ensemble
from .errors import DegenerateSample, DimensionMismatch, NotSquare, SumMismatch, ZeroParamWithPositiveOrder
from .rng import RngStream
from .stats import (
    DEFAULT_LEVEL,
    DEFAULT_PERMUTATIONS,
    DEFAULT_Z,
    TestReport,
    beta_cdf,
    combine,
    energy_distance_test,
    gamma_cdf,
    ks_test,
    moment_battery,
)

DEFAULT_ENERGY_N = 1000


def _rising(a: float, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= a + i
    return out


def _check_orders(t, k):
    t = np.asarray(t, dtype=np.float64)
    k = [int(x) for x in k]
    if len(k) != t.size:
        raise DimensionMismatch(f"multi-index has length {len(k)}, parameters {t.size}")
    if any(x < 0 for x in k):
        raise ValueError("orders must be nonnegative")
    for j, (tj, kj) in enumerate(zip(t, k)):
        if kj > 0 and tj <= 0:
            raise ZeroParamWithPositiveOrder(f"t[{j}] = {tj} with order {kj}")
    return t, k


def dirichlet_moment(t, k) -> float:
    """E prod Y_j^k_j for Y ~ D_t."""
    t, k = _check_orders(t, k)
    num = 1.0
    for tj, kj in zip(t, k):
        num *= _rising(tj, kj)
    return num / _rising(t.sum(), sum(k))


def gamma_moment(t, k) -> float:
    """E prod V_j^k_j for independent V_j ~ Gamma(t_j)."""
    t, k = _check_orders(t, k)
    out = 1.0
    for tj, kj in zip(t, k):
        out *= _rising(tj, kj)
    return out


# ---------------------------------------------------------------- batteries


def dirichlet_battery(samples, t, level=DEFAULT_LEVEL, name="dirichlet", seed=None, z_threshold=DEFAULT_Z):
    """Test samples on the simplex against D_t (extended parameters allowed)."""
    x = np.asarray(samples, dtype=np.float64)
    t = as_param_vector(t).values
    if x.shape[1] != t.size:
        raise DimensionMismatch(f"samples have {x.shape[1]} coordinates, parameters {t.size}")
    pos = np.nonzero(t > 0)[0]
    zero = np.nonzero(t == 0)[0]
    reports = []
    if zero.size:
        worst = float(np.max(np.abs(x[:, zero])))
        reports.append(TestReport(f"{name}.zero_support", worst, n=x.shape[0], threshold=0.0, seed=seed))
    tp = t[pos]
    reports.append(
        moment_battery(
            x[:, pos], lambda k: dirichlet_moment(tp, k), 2, z_threshold, name=f"{name}.moments", seed=seed
        )
    )
    total = t.sum()
    marg = [j for j in pos if t[j] < total]
    for j in marg:
        reports.append(
            ks_test(
                x[:, j], beta_cdf(t[j], total - t[j]), level / len(marg), name=f"{name}.ks[{j}]", seed=seed
            )
        )
    return combine(name, reports, n=x.shape[0], seed=seed)


def gamma_battery(samples, t, level=DEFAULT_LEVEL, name="gamma", seed=None, z_threshold=DEFAULT_Z):
    x = np.asarray(samples, dtype=np.float64)
    t = as_param_vector(t).values
    if x.shape[1] != t.size:
        raise DimensionMismatch(f"samples have {x.shape[1]} coordinates, parameters {t.size}")
    pos = np.nonzero(t > 0)[0]
    zero = np.nonzero(t == 0)[0]
    reports = []
    if zero.size:
        worst = float(np.max(np.abs(x[:, zero])))
        reports.append(TestReport(f"{name}.zero_support", worst, n=x.shape[0], threshold=0.0, seed=seed))
    tp = t[pos]
    reports.append(
        moment_battery(x[:, pos], lambda k: gamma_moment(tp, k), 2, z_threshold, name=f"{name}.moments", seed=seed)
    )
    for j in pos:
        reports.append(ks_test(x[:, j], gamma_cdf(t[j]), level / pos.size, name=f"{name}.ks[{j}]", seed=seed))
    return reports


# ---------------------------------------------------------------- draws


def _gammas(t, n, rng):
    out, _ = kernels.gamma_vectors(t, n, *kernels.batch_address(rng, n))
    return out


def _dirichlets(t, n, rng):
    g = _gammas(t, n, rng)
    return g / g.sum(axis=1, keepdims=True)


def _matrices(e, n, rng):
    out, _ = kernels.sample_matrices(e.code(), n, *kernels.batch_address(rng, n))
    return out


def _vecmat(v, x):
    return np.einsum("ni,nij->nj", v, x)


def _square_ensemble(e: Ensemble, t):
    if not e.is_square:
        raise NotSquare(f"ensemble draws {e.r}x{e.c} matrices")
    if e.r != t.size:
        raise DimensionMismatch(f"ensemble dimension {e.r} but {t.size} parameters")


# ---------------------------------------------------------------- checks


@dataclass
class C1Verdict:
    t: ParamVector
    tests: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.tests)

    def to_dict(self):
        return {"t": self.t.tolist(), "pass": self.passed, "tests": [r.to_dict() for r in self.tests]}

    def max_z(self) -> float:
        return max(r.statistic for r in self.tests if r.name.endswith("moments"))


def check_c1(
    e: Ensemble,
    t,
    n_samples: int,
    level: float = DEFAULT_LEVEL,
    rng: RngStream | None = None,
    energy_n: int = DEFAULT_ENERGY_N,
    n_permutations: int = DEFAULT_PERMUTATIONS,
) -> C1Verdict:
    """Is V X equal in law to V for V ~ G_t independent of X?"""
    t = ParamVector(t) if not isinstance(t, ParamVector) else t
    _square_ensemble(e, t.values)
    rng = rng or RngStream(0)
    seed = rng.seed_record()
    v = _gammas(t.values, n_samples, rng)
    x = _matrices(e, n_samples, rng)
    vx = _vecmat(v, x)
    tests = gamma_battery(vx, t, level, name="c1", seed=seed)
    m = min(energy_n, n_samples)
    fresh = _gammas(t.values, m, rng)
    tests.append(energy_distance_test(vx[:m], fresh, n_permutations, level, rng, name="c1.energy"))
    return C1Verdict(t, tests)


def check_dirichlet_fixed_point(
    e: Ensemble, t, n_samples: int, level: float = DEFAULT_LEVEL, rng: RngStream | None = None
) -> TestReport:
    """Is Y X equal in law to Y for Y ~ D_t independent of X?"""
    t = as_param_vector(t)
    _square_ensemble(e, t.values)
    rng = rng or RngStream(0)
    seed = rng.seed_record()
    y = _dirichlets(t.values, n_samples, rng)
    x = _matrices(e, n_samples, rng)
    return dirichlet_battery(_vecmat(y, x), t, level, name="dirichlet_fixed_point", seed=seed)


def check_pushforward(
    e: Ensemble, t, s, n_samples: int, level: float = DEFAULT_LEVEL, rng: RngStream | None = None
):
    """Run both sides of the Dirichlet/Gamma push-forward equivalence.

    Returns ``(dirichlet_side, gamma_side)``: Y X against D_s with
    Y ~ D_t, and V X against G_s with V ~ G_t.  The two sides use
    independent draws.
    """
    t = as_param_vector(t)
    s = as_param_vector(s)
    if abs(t.total - s.total) > 1e-9:
        raise SumMismatch(t.total, s.total)
    if e.r != len(t) or e.c != len(s):
        raise DimensionMismatch(f"ensemble is {e.r}x{e.c}, parameters have lengths {len(t)} and {len(s)}")
    rng = rng or RngStream(0)
    seed = rng.seed_record()
    y = _dirichlets(t.values, n_samples, rng)
    x = _matrices(e, n_samples, rng)
    dir_side = dirichlet_battery(_vecmat(y, x), s, level, name="pushforward.dirichlet", seed=seed)
    v = _gammas(t.values, n_samples, rng)
    x2 = _matrices(e, n_samples, rng)
    gam = gamma_battery(_vecmat(v, x2), s, level, name="pushforward.gamma", seed=seed)
    gam_side = combine("pushforward.gamma", gam, n=n_samples, seed=seed)
    return dir_side, gam_side


PUSHFORWARD_SCENARIOS = (
    # (name, ensemble spec, t, s, both sides expected to pass)
    ("square_correct", {"kind": "dirichlet", "A": [[1, 2], [3, 1]]}, [3, 4], [4, 3], True),
    ("square_misdeclared", {"kind": "dirichlet", "A": [[1, 2], [3, 1]]}, [3, 4], [3, 4], False),
    ("identity", [[1, 0, 0], [0, 1, 0], [0, 0, 1]], [1, 2, 3], [1, 2, 3], True),
    ("rectangular_correct", {"kind": "dirichlet", "A": [[1, 1, 1], [1, 1, 1]]}, [3, 3], [2, 2, 2], True),
    ("rectangular_misdeclared", {"kind": "dirichlet", "A": [[1, 1, 1], [1, 1, 1]]}, [3, 3], [1, 2, 3], False),
    ("cyclic_balanced", {"kind": "dirichlet", "A": [[1, 1, 0], [0, 1, 1], [1, 0, 1]]}, [2, 2, 2], [2, 2, 2], True),
)


def estimate_limit_params(limit_rows) -> ParamVector:
    """Method-of-moments Dirichlet fit.

    Each coordinate gives t_total = m (1 - m) / v - 1; the median over
    coordinates is used and t_j = m_j * t_total.
    """
    x = np.asarray([np.asarray(r, dtype=np.float64) for r in limit_rows])
    if x.ndim != 2 or x.shape[0] < 2:
        raise DegenerateSample("need at least two sample rows")
    m = x.mean(axis=0)
    v = x.var(axis=0, ddof=1)
    live = v > 0
    if not live.any():
        raise DegenerateSample("all coordinates have zero variance")
    totals = m[live] * (1.0 - m[live]) / v[live] - 1.0
    total = float(np.median(totals))
    if not total > 0:
        raise DegenerateSample(f"moment fit gives a non-positive total ({total})")
    est = np.where(live | (m > 0), m * total, 0.0)
    return ParamVector(est, extended=True)


def default_u_grid(d: int):
    """Five frequency vectors; the first is (0.5, -0.3, 0.2, 0, ...)."""
    base = [0.5, -0.3, 0.2]
    g1 = np.zeros(d)
    g1[: min(3, d)] = base[: min(3, d)]
    g2 = np.zeros(d)
    g2[0] = 1.0
    g3 = np.zeros(d)
    g3[-1] = -1.0
    g3[min(1, d - 1)] += 1.0
    g4 = np.full(d, 0.3)
    g5 = np.array([(-0.7 if j % 2 == 0 else 0.4) for j in range(d)])
    return [g1, g2, g3, g4, g5]


def charfn_check(
    e: Ensemble,
    t,
    u_grid=None,
    n_samples: int = 100_000,
    rng: RngStream | None = None,
    z_threshold: float = DEFAULT_Z,
) -> TestReport:
    """Compare E exp(i u . V X) with prod (1 - i u_j)^(-t_j) on a grid."""
    t = ParamVector(t) if not isinstance(t, ParamVector) else t
    _square_ensemble(e, t.values)
    rng = rng or RngStream(0)
    seed = rng.seed_record()
    grid = [np.asarray(u, dtype=np.float64) for u in (u_grid if u_grid is not None else default_u_grid(e.d))]
    v = _gammas(t.values, n_samples, rng)
    x = _matrices(e, n_samples, rng)
    w = _vecmat(v, x)
    rows = []
    worst = 0.0
    for u in grid:
        if u.size != t.values.size:
            raise DimensionMismatch(f"frequency {u.tolist()} has wrong length")
        phase = w @ u
        re, im = np.cos(phase), np.sin(phase)
        est = complex(re.mean(), im.mean())
        se_re = re.std(ddof=1) / math.sqrt(n_samples)
        se_im = im.std(ddof=1) / math.sqrt(n_samples)
        target = complex(np.exp(-np.sum(t.values * np.log(1.0 - 1j * u))))
        z_re = _zscore(est.real - target.real, se_re)
        z_im = _zscore(est.imag - target.imag, se_im)
        z = max(abs(z_re), abs(z_im))
        worst = max(worst, z)
        rows.append(
            {
                "u": u.tolist(),
                "estimate": [est.real, est.imag],
                "target": [target.real, target.imag],
                "se": [se_re, se_im],
                "z": [z_re, z_im],
            }
        )
    return TestReport("charfn", worst, n=n_samples, threshold=z_threshold, seed=seed, details={"grid": rows})


def _zscore(gap, se):
    if se > 0:
        return gap / se
    return 0.0 if abs(gap) <= 1e-12 else math.inf


def limit_battery(rows, t, level=DEFAULT_LEVEL, seed=None, name="limit"):
    """Dirichlet battery on limit rows plus the method-of-moments fit."""
    report = dirichlet_battery(rows, t, level, name=name, seed=seed)
    try:
        fit = estimate_limit_params(rows).values
    except DegenerateSample:
        fit = None
    report.details["t_hat"] = None if fit is None else fit.tolist()
    return report, fit


def probvector_rows(rows):
    return [ProbVector(r, tol=1e-9) for r in rows]
