"""Backend-dispatching front end for the hot loops.

Callers pass an :class:`~dirwalk.ensembles.EnsembleCode` plus replicate
addressing ``(key, epoch, subs, starts)``; see :mod:`dirwalk.rng`.
"""

from __future__ import annotations

import numpy as np

from . import _accel
from . import _kernels_np as _np


def _nb():
    from . import _kernels_nb

    return _kernels_nb


def _use_numba() -> bool:
    return _accel.backend() == "numba"


def batch_address(rng, n: int):
    """Fresh epoch, replicate i on substream i + 1, each from index 0."""
    epoch = rng.next_epoch()
    subs = np.arange(1, n + 1, dtype=np.uint64)
    starts = np.zeros(n, dtype=np.uint64)
    return rng.key, epoch, subs, starts


def single_address(rng):
    """Substream 0 of epoch 0 at the stream's cursor."""
    return rng.key, 0, np.zeros(1, dtype=np.uint64), np.array([rng.position], dtype=np.uint64)


def _u(key, epoch):
    return np.uint64(key[0]), np.uint64(key[1]), np.uint64(epoch)


def sample_matrices(code, n, key, epoch, subs, starts):
    if _use_numba():
        k0, k1, ep = _u(key, epoch)
        return _nb().sample_matrices(*code.nb_args(), code.r, code.c, n, k0, k1, ep, subs, starts)
    return _np.sample_matrices(code.np_args(), n, key, epoch, subs, starts)


def gamma_vectors(t, n, key, epoch, subs, starts):
    t = np.ascontiguousarray(t, dtype=np.float64)
    if _use_numba():
        k0, k1, ep = _u(key, epoch)
        return _nb().gamma_vectors(t, n, k0, k1, ep, subs, starts)
    return _np.gamma_vectors(t, n, key, epoch, subs, starts)


def iterate_products(code, n, eps, max_n, record, key, epoch, subs, starts):
    if _use_numba():
        k0, k1, ep = _u(key, epoch)
        return _nb().iterate_products(
            *code.nb_args(), code.r, n, float(eps), int(max_n), bool(record), k0, k1, ep, subs, starts
        )
    return _np.iterate_products(code.np_args(), code.r, n, eps, max_n, record, key, epoch, subs, starts)


def fixed_products(code, n, m, left, key, epoch, subs, starts):
    if _use_numba():
        k0, k1, ep = _u(key, epoch)
        return _nb().fixed_products(*code.nb_args(), code.r, n, int(m), bool(left), k0, k1, ep, subs, starts)
    return _np.fixed_products(code.np_args(), code.r, n, m, left, key, epoch, subs, starts)


def positivity_hits(code, trials, max_m, key, epoch, subs, starts):
    if _use_numba():
        k0, k1, ep = _u(key, epoch)
        return _nb().positivity_hits(*code.nb_args(), code.r, trials, int(max_m), k0, k1, ep, subs, starts)
    return _np.positivity_hits(code.np_args(), code.r, trials, max_m, key, epoch, subs, starts)


def exchange_chains(code, q0, n_chains, burn_in, per_chain, thin, key, epoch, subs, starts):
    q0 = np.ascontiguousarray(q0, dtype=np.float64)
    if _use_numba():
        k0, k1, ep = _u(key, epoch)
        return _nb().exchange_chains(
            *code.nb_args(), code.r, q0, n_chains, int(burn_in), int(per_chain), int(thin), k0, k1, ep, subs, starts
        )
    return _np.exchange_chains(code.np_args(), code.r, q0, n_chains, burn_in, per_chain, thin, key, epoch, subs, starts)


def polling_chains(code, b0, residue, n_chains, burn_in, per_chain, thin, fresh, key, epoch, subs, starts):
    """``residue`` is 0-based here."""
    b0 = np.ascontiguousarray(b0, dtype=np.float64)
    if _use_numba():
        k0, k1, ep = _u(key, epoch)
        return _nb().polling_chains(
            *code.nb_args(), code.r, b0, int(residue), n_chains, int(burn_in), int(per_chain), int(thin),
            bool(fresh), k0, k1, ep, subs, starts,
        )
    return _np.polling_chains(
        code.np_args(), code.r, b0, residue, n_chains, burn_in, per_chain, thin, fresh, key, epoch, subs, starts
    )


def cascades(code, frame, n, eps, max_n, record, key, epoch, subs, starts):
    frame = np.ascontiguousarray(frame, dtype=np.float64)
    if _use_numba():
        k0, k1, ep = _u(key, epoch)
        return _nb().cascades(
            *code.nb_args(), code.r, frame, n, float(eps), int(max_n), bool(record), k0, k1, ep, subs, starts
        )
    return _np.cascades(code.np_args(), code.r, frame, n, eps, max_n, record, key, epoch, subs, starts)


def reg_inc_gamma(a, x):
    x = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64).ravel()
    if _use_numba():
        return _nb().reg_inc_gamma(float(a), x)
    return _np.reg_inc_gamma(float(a), x)


def reg_inc_beta(a, b, x):
    x = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64).ravel()
    if _use_numba():
        return _nb().reg_inc_beta(float(a), float(b), x)
    return _np.reg_inc_beta(float(a), float(b), x)
