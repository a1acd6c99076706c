"""Left products of i.i.d. random stochastic matrices.

The left product ``X(n) ... X(1)`` multiplies each new draw on the left.  Its
rows collapse onto a common random row when the ensemble has an
all-positive product with positive probability.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import StochasticMatrix, row_spread
from .ensembles import Ensemble
from .errors import NotSquare
from .rng import RngStream

DEFAULT_EPSILON = 1e-10
DEFAULT_MAX_N = 10_000
DENSE_HISTORY = 1000
SPARSE_EVERY = 10


def _square(e: Ensemble) -> None:
    if not e.is_square:
        raise NotSquare(f"products need square draws, ensemble is {e.r}x{e.c}")


def _thin_history(spreads) -> list:
    out = []
    for i, s in enumerate(spreads):
        n = i + 1
        if np.isnan(s):
            break
        if n <= DENSE_HISTORY or n % SPARSE_EVERY == 0:
            out.append((n, float(s)))
    return out


@dataclass
class ProductTrace:
    final: StochasticMatrix
    steps: int
    converged: bool
    spread_history: list | None = None

    @property
    def limit_row(self) -> np.ndarray:
        return self.final.values[0].copy()

    def to_dict(self) -> dict:
        out = {
            "final": self.final.tolist(),
            "steps": self.steps,
            "converged": self.converged,
            "spread": row_spread(self.final),
        }
        if self.spread_history is not None:
            out["spread_history"] = [[n, s] for n, s in self.spread_history]
        return out

    def history_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["n", "spread"])
        for n, s in self.spread_history or []:
            w.writerow([n, repr(s)])
        return buf.getvalue()


@dataclass
class PositivityReport:
    trials_per_m: int
    hit_fraction: list = field(default_factory=list)

    @property
    def m_star(self) -> int | None:
        for m, frac in self.hit_fraction:
            if frac > 0:
                return m
        return None

    def fraction_at(self, m: int) -> float:
        return dict(self.hit_fraction)[m]

    def to_dict(self) -> dict:
        return {
            "m_star": self.m_star,
            "trials_per_m": self.trials_per_m,
            "hit_fraction": [[m, f] for m, f in self.hit_fraction],
        }


def left_products(e: Ensemble, n: int, replicates: int, rng: RngStream) -> np.ndarray:
    """``(replicates, d, d)`` stack of independent left products of length n."""
    _square(e)
    if n < 1:
        raise ValueError("product length must be at least 1")
    return kernels.fixed_products(e.code(), int(replicates), n, True, *kernels.batch_address(rng, int(replicates)))


def right_products(e: Ensemble, n: int, replicates: int, rng: RngStream) -> np.ndarray:
    """Same as :func:`left_products` with each new draw multiplied on the right."""
    _square(e)
    if n < 1:
        raise ValueError("product length must be at least 1")
    return kernels.fixed_products(e.code(), int(replicates), n, False, *kernels.batch_address(rng, int(replicates)))


def left_product(e: Ensemble, n: int, rng: RngStream) -> StochasticMatrix:
    return StochasticMatrix._trusted(left_products(e, n, 1, rng)[0])


def iterate_until_converged(
    e: Ensemble, epsilon: float = DEFAULT_EPSILON, max_n: int = DEFAULT_MAX_N, rng: RngStream | None = None
) -> ProductTrace:
    """Multiply draws on the left until the row spread is at most ``epsilon``."""
    _square(e)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    rng = rng or RngStream(0)
    finals, steps, conv, hist = kernels.iterate_products(
        e.code(), 1, epsilon, max_n, True, *kernels.batch_address(rng, 1)
    )
    return ProductTrace(
        final=StochasticMatrix._trusted(finals[0]),
        steps=int(steps[0]),
        converged=bool(conv[0]),
        spread_history=_thin_history(hist[0]),
    )


@dataclass
class LimitSample:
    """Batch of converged products: first rows, step counts, flags."""

    rows: np.ndarray
    steps: np.ndarray
    converged: np.ndarray

    @property
    def n_converged(self) -> int:
        return int(self.converged.sum())

    def converged_rows(self) -> np.ndarray:
        return self.rows[self.converged]


def limit_rows(
    e: Ensemble,
    replicates: int,
    epsilon: float = DEFAULT_EPSILON,
    max_n: int = DEFAULT_MAX_N,
    rng: RngStream | None = None,
) -> LimitSample:
    _square(e)
    rng = rng or RngStream(0)
    finals, steps, conv, _ = kernels.iterate_products(
        e.code(), int(replicates), epsilon, max_n, False, *kernels.batch_address(rng, int(replicates))
    )
    return LimitSample(finals[:, 0, :].copy(), steps, conv)


def positivity_time(e: Ensemble, max_m: int = 50, trials: int = 10_000, rng: RngStream | None = None) -> PositivityReport:
    """Fraction of all-positive products of each length m <= max_m.

    Trial i draws one sequence and inspects every prefix, so the fractions at
    different m share draws; each fraction is still an unbiased estimate.
    """
    _square(e)
    if max_m < 1 or trials < 1:
        raise ValueError("max_m and trials must be at least 1")
    rng = rng or RngStream(0)
    hits = kernels.positivity_hits(e.code(), int(trials), int(max_m), *kernels.batch_address(rng, int(trials)))
    counts = hits.sum(axis=0, dtype=np.int64)
    return PositivityReport(int(trials), [(m + 1, float(counts[m]) / trials) for m in range(max_m)])
