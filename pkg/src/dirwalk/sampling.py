"""Gamma, Dirichlet and random-matrix variates.

Gamma variates use the Marsaglia-Tsang squeeze method (shape >= 1) with the
``U ** (1/shape)`` boost below one.  Without ``size`` a function returns one
draw from the stream's cursor; with ``size`` it returns a stacked batch drawn
from a fresh epoch, one substream per draw.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .core import NonNegVector, ProbVector, StochasticMatrix, as_param_matrix, as_param_vector
from .ensembles import Ensemble
from .errors import AllZeroParams, InvalidEnsemble, NonPositiveShape
from .rng import RngStream


def _gamma_draws(t, rng: RngStream, size):
    if size is None:
        addr = kernels.single_address(rng)
        out, ends = kernels.gamma_vectors(t, 1, *addr)
        rng.position = int(ends[0])
        return out[0]
    out, _ = kernels.gamma_vectors(t, int(size), *kernels.batch_address(rng, int(size)))
    return out


def sample_gamma(shape: float, rng: RngStream, size=None):
    """Gamma(shape, scale 1) variate(s)."""
    shape = float(shape)
    if not shape > 0:
        raise NonPositiveShape(f"shape must be positive, got {shape}")
    out = _gamma_draws(np.array([shape]), rng, size)
    return float(out[0]) if size is None else out[:, 0]


def sample_gamma_vector(t, rng: RngStream, size=None):
    """Independent Gammas with shapes ``t``; zero shapes give exactly 0."""
    t = as_param_vector(t)
    out = _gamma_draws(t.values, rng, size)
    return NonNegVector(out) if size is None else out


def sample_dirichlet(t, rng: RngStream, size=None):
    """Normalised Gamma vector; zero parameters give identically-zero components."""
    t = as_param_vector(t)
    if t.total <= 0:
        raise AllZeroParams("Dirichlet parameters are all zero")
    g = _gamma_draws(t.values, rng, size)
    if size is None:
        return ProbVector(g / g.sum())
    return g / g.sum(axis=1, keepdims=True)


def sample_gamma_matrix(A, rng: RngStream, size=None) -> np.ndarray:
    """Matrix of independent Gammas, entry (i, j) with shape alpha_ij."""
    a = as_param_matrix(A).values
    g = _gamma_draws(a.ravel(), rng, size)
    return g.reshape(a.shape) if size is None else g.reshape((-1,) + a.shape)


def sample_matrix(e: Ensemble, rng: RngStream, size=None):
    """One draw (StochasticMatrix) or a ``(size, r, c)`` batch from an ensemble."""
    if not isinstance(e, Ensemble):
        raise InvalidEnsemble(f"not an ensemble: {e!r}")
    code = e.code()
    if size is None:
        out, ends = kernels.sample_matrices(code, 1, *kernels.single_address(rng))
        rng.position = int(ends[0])
        return StochasticMatrix._trusted(out[0])
    out, _ = kernels.sample_matrices(code, int(size), *kernels.batch_address(rng, int(size)))
    return out
