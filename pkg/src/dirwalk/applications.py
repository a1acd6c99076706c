"""Three processes driven by random stochastic matrices.

* exchange chain: a unit of mass redistributed by ``q <- q X`` each step;
* nested simplices: every vertex of the current simplex is replaced by a
  random convex combination of the current vertices;
* polling walk: nodes are visited cyclically and the visited node's mass is
  redistributed along one row of the cycle's matrix draw.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .characterization import estimate_limit_params, limit_battery
from .core import ParamVector, ProbVector, StochasticMatrix, as_param_matrix, as_param_vector
from .ensembles import Ensemble, polling_cycle
from .errors import DegenerateSample, DimensionMismatch, IndexOutOfRange, NotSquare
from .products import DEFAULT_EPSILON, DEFAULT_MAX_N, positivity_time
from .rng import RngStream
from .sampling import sample_matrix
from .stats import DEFAULT_LEVEL, TestReport

STATE_TOL = 1e-10
DEFAULT_BURN_IN = 1000
DEFAULT_CHAINS = 100


def _square(e: Ensemble) -> None:
    if not e.is_square:
        raise NotSquare(f"ensemble draws {e.r}x{e.c} matrices")


def _uniform_state(d: int) -> np.ndarray:
    return np.full(d, 1.0 / d)


def _split(n_samples: int, n_chains: int) -> tuple[int, int]:
    n_chains = max(1, min(int(n_chains), int(n_samples)))
    return n_chains, math.ceil(n_samples / n_chains)


def _summary(samples: np.ndarray) -> dict:
    return {"mean": samples.mean(axis=0).tolist(), "var": samples.var(axis=0, ddof=1).tolist()}


def trajectory_csv(traj, start: int = 0) -> str:
    """RFC 4180 CSV with columns ``step, x1, ..., xd``."""
    traj = np.asarray(traj)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["step"] + [f"x{j + 1}" for j in range(traj.shape[1])])
    for i, row in enumerate(traj):
        w.writerow([start + i] + [repr(float(v)) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- exchange chain


@dataclass(frozen=True)
class ExchangeChain:
    ensemble: Ensemble
    state: ProbVector
    n: int = 0

    @classmethod
    def start(cls, ensemble: Ensemble, q0=None) -> "ExchangeChain":
        _square(ensemble)
        q = _uniform_state(ensemble.d) if q0 is None else q0
        return cls(ensemble, ProbVector(q, tol=1e-9))


def exchange_step(chain: ExchangeChain, rng: RngStream) -> ExchangeChain:
    x = sample_matrix(chain.ensemble, rng)
    q = chain.state.values @ x.values
    return ExchangeChain(chain.ensemble, ProbVector(q, tol=STATE_TOL), chain.n + 1)


def exchange_trajectory(e: Ensemble, q0, steps: int, rng: RngStream) -> np.ndarray:
    """States q(0), ..., q(steps) of one chain as a ``(steps + 1, d)`` array."""
    _square(e)
    q0 = ProbVector(q0, tol=1e-9).values
    out = kernels.exchange_chains(e.code(), q0, 1, 0, int(steps), 1, *kernels.batch_address(rng, 1))
    return np.vstack([q0[None, :], out[0]])


def exchange_samples(
    e: Ensemble,
    burn_in: int = DEFAULT_BURN_IN,
    n_samples: int = 20_000,
    thin: int | None = None,
    rng: RngStream | None = None,
    n_chains: int = DEFAULT_CHAINS,
    q0=None,
) -> np.ndarray:
    """Thinned post-burn-in states pooled over independent chains."""
    _square(e)
    rng = rng or RngStream(0)
    thin = 20 * e.d if thin is None else int(thin)
    n_chains, per_chain = _split(n_samples, n_chains)
    q0 = _uniform_state(e.d) if q0 is None else ProbVector(q0, tol=1e-9).values
    out = kernels.exchange_chains(
        e.code(), q0, n_chains, burn_in, per_chain, thin, *kernels.batch_address(rng, n_chains)
    )
    return out.reshape(-1, e.d)[:n_samples]


def exchange_stationary_test(
    e: Ensemble,
    t,
    burn_in: int = DEFAULT_BURN_IN,
    n_samples: int = 20_000,
    thin: int | None = None,
    level: float = DEFAULT_LEVEL,
    rng: RngStream | None = None,
    n_chains: int = DEFAULT_CHAINS,
) -> TestReport:
    """Test the exchange chain's thinned states against D_t."""
    t = as_param_vector(t)
    if len(t) != e.d:
        raise DimensionMismatch(f"ensemble dimension {e.d} but {len(t)} parameters")
    rng = rng or RngStream(0)
    seed = rng.seed_record()
    samples = exchange_samples(e, burn_in, n_samples, thin, rng, n_chains)
    report, _ = limit_battery(samples, t, level, seed=seed, name="exchange_stationary")
    report.details.update(_summary(samples))
    report.details.update(
        {"burn_in": burn_in, "thin": 20 * e.d if thin is None else thin, "chains": min(n_chains, n_samples)}
    )
    return report


# ---------------------------------------------------------------- nested simplices


class AffineFrame:
    """Simplex vertices ``p_1..p_d`` in R^(d-1), one per row."""

    def __init__(self, vertices):
        v = np.array(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1] + 1:
            raise DimensionMismatch(f"need d points in R^(d-1), got shape {v.shape}")
        edges = v[1:] - v[0]
        det = float(np.linalg.det(edges)) if edges.size else 1.0
        if abs(det) <= 1e-12:
            raise ValueError(f"vertices are affinely dependent (det = {det})")
        v.setflags(write=False)
        self._v = v
        self._inv = np.linalg.inv(edges) if edges.size else np.zeros((0, 0))

    @classmethod
    def standard(cls, d: int) -> "AffineFrame":
        """Origin followed by the unit vectors."""
        return cls(np.vstack([np.zeros(d - 1), np.eye(d - 1)]))

    @property
    def vertices(self) -> np.ndarray:
        return self._v

    @property
    def d(self) -> int:
        return self._v.shape[0]

    def to_cartesian(self, bary) -> np.ndarray:
        return np.asarray(bary, dtype=np.float64) @ self._v

    def to_barycentric(self, point) -> np.ndarray:
        rel = np.asarray(point, dtype=np.float64) - self._v[0]
        tail = rel @ self._inv
        head = 1.0 - tail.sum(axis=-1, keepdims=True)
        return np.concatenate([head, tail], axis=-1)

    def to_dict(self) -> dict:
        return {"vertices": self._v.tolist()}


@dataclass(frozen=True)
class SimplexCascade:
    frame: AffineFrame
    vertices: np.ndarray
    n: int = 0

    @classmethod
    def start(cls, frame: AffineFrame) -> "SimplexCascade":
        return cls(frame, frame.vertices.copy())

    def diameter(self) -> float:
        v = self.vertices
        diff = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((diff**2).sum(axis=2)).max())


def cascade_step(cascade: SimplexCascade, e: Ensemble, rng: RngStream) -> SimplexCascade:
    """New vertex k = row k of a fresh draw, read as barycentric weights."""
    x = sample_matrix(e, rng).values
    return SimplexCascade(cascade.frame, x @ cascade.vertices, cascade.n + 1)


@dataclass
class SimplexLimit:
    point: np.ndarray
    barycentric: ProbVector
    steps: int
    converged: bool
    diameter_history: list | None = None

    def to_dict(self) -> dict:
        out = {
            "point": self.point.tolist(),
            "barycentric": self.barycentric.tolist(),
            "steps": self.steps,
            "converged": self.converged,
        }
        if self.diameter_history is not None:
            out["diameter_history"] = self.diameter_history
        return out


def _check_frame(frame: AffineFrame, e: Ensemble):
    _square(e)
    if frame.d != e.d:
        raise DimensionMismatch(f"frame has {frame.d} vertices, ensemble dimension {e.d}")


def simplices_run(
    frame: AffineFrame,
    e: Ensemble,
    epsilon: float = DEFAULT_EPSILON,
    max_n: int = DEFAULT_MAX_N,
    rng: RngStream | None = None,
) -> SimplexLimit:
    """Shrink the simplex until its diameter is at most ``epsilon``."""
    _check_frame(frame, e)
    rng = rng or RngStream(0)
    points, bary, steps, conv, hist = kernels.cascades(
        e.code(), frame.vertices, 1, epsilon, max_n, True, *kernels.batch_address(rng, 1)
    )
    h = hist[0]
    h = h[~np.isnan(h)]
    return SimplexLimit(
        point=points[0],
        barycentric=ProbVector(bary[0], tol=STATE_TOL),
        steps=int(steps[0]),
        converged=bool(conv[0]),
        diameter_history=[[i + 1, float(x)] for i, x in enumerate(h)],
    )


@dataclass
class SimplexBatch:
    points: np.ndarray
    barycentric: np.ndarray
    steps: np.ndarray
    converged: np.ndarray


def simplices_batch(
    frame: AffineFrame,
    e: Ensemble,
    runs: int,
    epsilon: float = DEFAULT_EPSILON,
    max_n: int = DEFAULT_MAX_N,
    rng: RngStream | None = None,
) -> SimplexBatch:
    _check_frame(frame, e)
    rng = rng or RngStream(0)
    points, bary, steps, conv, _ = kernels.cascades(
        e.code(), frame.vertices, int(runs), epsilon, max_n, False, *kernels.batch_address(rng, int(runs))
    )
    return SimplexBatch(points, bary, steps, conv)


# ---------------------------------------------------------------- polling walk


def _check_index(r: int, d: int) -> int:
    r = int(r)
    if not 1 <= r <= d:
        raise IndexOutOfRange(f"index {r} outside 1..{d}")
    return r


def t_r(x, r: int) -> StochasticMatrix:
    """Identity with row r (1-based) replaced by row r of ``x``."""
    x = x.values if isinstance(x, StochasticMatrix) else np.asarray(x, dtype=np.float64)
    d = x.shape[0]
    if x.shape != (d, d):
        raise NotSquare(f"expected a square matrix, got shape {x.shape}")
    r = _check_index(r, d)
    out = np.eye(d)
    out[r - 1] = x[r - 1]
    return StochasticMatrix._trusted(out)


def beta_params(A, r: int) -> ParamVector:
    """Dirichlet parameters of the residue-r polling subchain (r is 1-based).

    Column j collects alpha_{i,j} over the rows i = j, j+1, ..., up to r
    when j <= r and up to d + r otherwise, with row indices taken mod d.
    """
    a = as_param_matrix(A).values
    d = a.shape[0]
    if a.shape != (d, d):
        raise NotSquare(f"parameter matrix has shape {a.shape}")
    r = _check_index(r, d)
    out = np.zeros(d)
    for j in range(1, d + 1):
        last = r if j <= r else d + r
        out[j - 1] = sum(a[(i - 1) % d, j - 1] for i in range(j, last + 1))
    return ParamVector(out, extended=True)


@dataclass(frozen=True)
class PollingWalk:
    ensemble: Ensemble
    state: ProbVector
    n: int = 0

    @property
    def d(self) -> int:
        return self.ensemble.d

    @classmethod
    def start(cls, ensemble: Ensemble, b0=None) -> "PollingWalk":
        _square(ensemble)
        b = _uniform_state(ensemble.d) if b0 is None else b0
        return cls(ensemble, ProbVector(b, tol=1e-9))


def polling_step(w: PollingWalk, r: int, x_row) -> PollingWalk:
    """Send the mass at node r (1-based) out along ``x_row``."""
    r = _check_index(r, w.d)
    row = ProbVector(x_row, tol=1e-9).values
    if row.size != w.d:
        raise DimensionMismatch(f"row has length {row.size}, walk dimension {w.d}")
    b = w.state.values.copy()
    mass = b[r - 1]
    b[r - 1] = 0.0
    b += mass * row
    return PollingWalk(w.ensemble, ProbVector(b, tol=STATE_TOL), w.n + 1)


def polling_cycle_step(w: PollingWalk, rng: RngStream) -> PollingWalk:
    """One full cycle: visit nodes 1..d using the rows of a single draw."""
    x = sample_matrix(w.ensemble, rng).values
    for r in range(1, w.d + 1):
        w = polling_step(w, r, x[r - 1])
    return w


def polling_samples(
    e: Ensemble,
    r: int = 1,
    burn_in: int = DEFAULT_BURN_IN,
    n_samples: int = 20_000,
    thin: int = 20,
    rng: RngStream | None = None,
    n_chains: int = DEFAULT_CHAINS,
    fresh_per_step: bool = False,
    b0=None,
) -> np.ndarray:
    """States just after node r is served, thinned by ``thin`` cycles."""
    _square(e)
    r = _check_index(r, e.d)
    rng = rng or RngStream(0)
    n_chains, per_chain = _split(n_samples, n_chains)
    b0 = _uniform_state(e.d) if b0 is None else ProbVector(b0, tol=1e-9).values
    out = kernels.polling_chains(
        e.code(), b0, r - 1, n_chains, burn_in, per_chain, thin, fresh_per_step,
        *kernels.batch_address(rng, n_chains),
    )
    return out.reshape(-1, e.d)[:n_samples]


def _resolve_beta(e: Ensemble, a_or_beta, r: int) -> ParamVector:
    if a_or_beta is None:
        a = e.param_matrix()
        if a is None:
            raise ValueError("ensemble has no parameter matrix; pass A or beta explicitly")
        return beta_params(a, r)
    arr = np.asarray(a_or_beta.values if hasattr(a_or_beta, "values") else a_or_beta, dtype=np.float64)
    if arr.ndim == 2:
        return beta_params(arr, r)
    return as_param_vector(arr)


def polling_stationary_test(
    e: Ensemble,
    a_or_beta=None,
    r: int = 1,
    burn_in: int = DEFAULT_BURN_IN,
    n_samples: int = 20_000,
    thin: int = 20,
    level: float = DEFAULT_LEVEL,
    rng: RngStream | None = None,
    n_chains: int = DEFAULT_CHAINS,
    fresh_per_step: bool = False,
    positivity_trials: int = 1000,
    positivity_max_m: int = 50,
) -> TestReport:
    """Test the residue-r subchain against D_beta.

    ``a_or_beta`` is a parameter matrix (beta is derived from it), an explicit
    beta vector, or None to use the ensemble's own parameter matrix.  If no
    all-positive cycle product is observed the report fails with
    ``applicable = False``.
    """
    _square(e)
    r = _check_index(r, e.d)
    beta = _resolve_beta(e, a_or_beta, r)
    if len(beta) != e.d:
        raise DimensionMismatch(f"beta has length {len(beta)}, ensemble dimension {e.d}")
    rng = rng or RngStream(0)
    seed = rng.seed_record()
    pos = positivity_time(polling_cycle(e), positivity_max_m, positivity_trials, rng)
    if pos.m_star is None:
        return TestReport(
            "polling_stationary",
            math.inf,
            n=0,
            threshold=0.0,
            seed=seed,
            details={
                "applicable": False,
                "reason": f"no all-positive cycle product seen up to m={positivity_max_m}",
                "beta": beta.tolist(),
            },
        )
    samples = polling_samples(e, r, burn_in, n_samples, thin, rng, n_chains, fresh_per_step)
    report, _ = limit_battery(samples, beta, level, seed=seed, name="polling_stationary")
    report.details.update(_summary(samples))
    report.details.update(
        {"applicable": True, "beta": beta.tolist(), "r": r, "m_star": pos.m_star, "fresh_per_step": fresh_per_step}
    )
    return report


def fit_polling_params(samples) -> np.ndarray | None:
    try:
        return estimate_limit_params(samples).values
    except DegenerateSample:
        return None

