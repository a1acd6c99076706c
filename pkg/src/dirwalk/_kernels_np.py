"""Pure-numpy kernels, vectorised across replicates.

Each function mirrors its namesake in ``_kernels_nb`` and consumes every
replicate's substream in the same order, so both backends see the same
uniforms.  Outputs agree up to rounding in transcendental functions.
"""

import math

import numpy as np

from .rng import BufferedStreams

TWO_PI = 2.0 * math.pi

DIRICHLET = 0
CYCLIC = 1
LEADER = 2
MIXTURE = 3

POST_NONE = 0
POST_CYCLE = 1


# ---------------------------------------------------------------- variates


def _normal(streams, rows):
    u1 = streams.next(rows)
    u2 = streams.next(rows)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(TWO_PI * u2)


def _gamma_mt(streams, a, rows):
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(rows.size)
    pending = np.arange(rows.size)
    while pending.size:
        x = _normal(streams, rows[pending])
        v = 1.0 + c * x
        ok = v > 0.0
        live = pending[ok]
        x = x[ok]
        v = v[ok]
        v = v * v * v
        u = streams.next(rows[live])
        x2 = x * x
        accept = u < 1.0 - 0.0331 * (x2 * x2)
        rest = ~accept
        accept[rest] = np.log(u[rest]) < 0.5 * x2[rest] + d * (1.0 - v[rest] + np.log(v[rest]))
        out[live[accept]] = d * v[accept]
        pending = np.sort(np.concatenate([pending[~ok], live[~accept]]))
    return out


def _gamma(streams, a, rows):
    if a < 1.0:
        g = _gamma_mt(streams, a + 1.0, rows)
        u = streams.next(rows)
        return g * u ** (1.0 / a)
    return _gamma_mt(streams, a, rows)


# ---------------------------------------------------------------- matrices


def _matmul(a, b):
    s = a[:, :, 0, None] * b[:, None, 0, :]
    for m in range(1, a.shape[2]):
        s = s + a[:, :, m, None] * b[:, None, m, :]
    return s


def _sample_factor(kind, r, c, off, params, streams, rows):
    n = rows.size
    out = np.zeros((n, r, c))
    if kind == DIRICHLET:
        alpha = params[off : off + r * c].reshape(r, c)
        for i in range(r):
            s = np.zeros(n)
            for j in range(c):
                if alpha[i, j] > 0.0:
                    g = _gamma(streams, alpha[i, j], rows)
                    out[:, i, j] = g
                    s = s + g
            dead = s == 0.0
            if dead.any():
                out[dead, i, int(np.argmax(alpha[i]))] = 1.0
                s[dead] = 1.0
            out[:, i, :] = out[:, i, :] / s[:, None]
    elif kind == CYCLIC:
        for i in range(r):
            u = streams.next(rows)
            out[:, i, i] = u
            out[:, i, (i + 1) % r] = 1.0 - u
    elif kind == LEADER:
        u = streams.next(rows)
        ind = np.where(u > 0.5, 1.0, 0.0)
        out[:, 0, 0] = u
        out[:, 0, 1] = 1.0 - u
        for i in range(1, r):
            out[:, i, i] += ind
            out[:, i, (i + 1) % r] += 1.0 - ind
    else:
        k = int(params[off])
        cum = params[off + 1 : off + 1 + k]
        mats = params[off + 1 + k : off + 1 + k + k * r * c].reshape(k, r, c)
        u = streams.next(rows)
        pick = np.minimum(np.searchsorted(cum, u, side="right"), k - 1)
        out[:] = mats[pick]
    return out


def cycle_product(m):
    n, d, _ = m.shape
    acc = np.broadcast_to(np.eye(d), m.shape).copy()
    for r in range(d):
        x = acc[:, :, r].copy()
        acc[:, :, r] = 0.0
        acc += x[:, :, None] * m[:, None, r, :]
    return acc


def sample_ensemble(code, streams, rows):
    kinds, rcount, ccount, offs, params, post = code
    out = _sample_factor(kinds[0], rcount[0], ccount[0], offs[0], params, streams, rows)
    for f in range(1, len(kinds)):
        nxt = _sample_factor(kinds[f], rcount[f], ccount[f], offs[f], params, streams, rows)
        out = _matmul(out, nxt)
    if post == POST_CYCLE:
        out = cycle_product(out)
    return out


def _streams(key, epoch, subs, starts):
    return BufferedStreams(key, epoch, subs, starts)


def sample_matrices(code, n, key, epoch, subs, starts):
    streams = _streams(key, epoch, subs, starts)
    out = sample_ensemble(code, streams, np.arange(n))
    return out, streams.idx.copy()


def gamma_vectors(t, n, key, epoch, subs, starts):
    streams = _streams(key, epoch, subs, starts)
    rows = np.arange(n)
    out = np.zeros((n, t.size))
    for j, a in enumerate(t):
        if a > 0.0:
            out[:, j] = _gamma(streams, float(a), rows)
    return out, streams.idx.copy()


# ---------------------------------------------------------------- products


def _spread(p):
    return np.max(p.max(axis=1) - p.min(axis=1), axis=1)


def iterate_products(code, d, n, eps, max_n, record, key, epoch, subs, starts):
    streams = _streams(key, epoch, subs, starts)
    p = np.broadcast_to(np.eye(d), (n, d, d)).copy()
    steps = np.zeros(n, dtype=np.int64)
    conv = np.zeros(n, dtype=bool)
    hist = np.full((n if record else 0, max_n), np.nan)
    active = np.arange(n)
    for step in range(1, max_n + 1):
        if active.size == 0:
            break
        x = sample_ensemble(code, streams, active)
        p[active] = _matmul(x, p[active])
        s = _spread(p[active])
        if record:
            hist[active, step - 1] = s
        steps[active] = step
        done = s <= eps
        conv[active[done]] = True
        active = active[~done]
    return p, steps, conv, hist


def fixed_products(code, d, n, m, left, key, epoch, subs, starts):
    streams = _streams(key, epoch, subs, starts)
    rows = np.arange(n)
    p = np.broadcast_to(np.eye(d), (n, d, d)).copy()
    for _ in range(m):
        x = sample_ensemble(code, streams, rows)
        p = _matmul(x, p) if left else _matmul(p, x)
    return p


def positivity_hits(code, d, trials, max_m, key, epoch, subs, starts):
    streams = _streams(key, epoch, subs, starts)
    rows = np.arange(trials)
    p = np.broadcast_to(np.eye(d), (trials, d, d)).copy()
    hits = np.zeros((trials, max_m), dtype=np.uint8)
    for m in range(max_m):
        x = sample_ensemble(code, streams, rows)
        p = _matmul(x, p)
        hits[:, m] = np.all(p > 0.0, axis=(1, 2))
    return hits


# ---------------------------------------------------------------- chains


def _vecmat(q, x):
    s = q[:, 0, None] * x[:, 0, :]
    for a in range(1, q.shape[1]):
        s = s + q[:, a, None] * x[:, a, :]
    return s


def exchange_chains(code, d, q0, n_chains, burn_in, per_chain, thin, key, epoch, subs, starts):
    streams = _streams(key, epoch, subs, starts)
    rows = np.arange(n_chains)
    out = np.empty((n_chains, per_chain, d))
    q = np.broadcast_to(q0, (n_chains, d)).copy()
    kept = 0
    for step in range(1, burn_in + per_chain * thin + 1):
        q = _vecmat(q, sample_ensemble(code, streams, rows))
        if step > burn_in and (step - burn_in) % thin == 0:
            out[:, kept] = q
            kept += 1
    return out


def polling_update(b, x, r):
    """Vectorised version of the single-node polling move (returns a copy)."""
    m = b[:, r].copy()
    b = b.copy()
    b[:, r] = 0.0
    return b + m[:, None] * x[:, r, :]


def polling_chains(code, d, b0, residue, n_chains, burn_in, per_chain, thin, fresh, key, epoch, subs, starts):
    streams = _streams(key, epoch, subs, starts)
    rows = np.arange(n_chains)
    out = np.empty((n_chains, per_chain, d))
    b = np.broadcast_to(b0, (n_chains, d)).copy()
    kept = 0
    x = None
    for cyc in range(1, burn_in + per_chain * thin + 1):
        if not fresh:
            x = sample_ensemble(code, streams, rows)
        for r in range(d):
            if fresh:
                x = sample_ensemble(code, streams, rows)
            b = polling_update(b, x, r)
            if r == residue and cyc > burn_in and (cyc - burn_in) % thin == 0:
                out[:, kept] = b
                kept += 1
    return out


def cascades(code, d, frame, n, eps, max_n, record, key, epoch, subs, starts):
    streams = _streams(key, epoch, subs, starts)
    e = frame.shape[1]
    p = np.broadcast_to(np.eye(d), (n, d, d)).copy()
    v = np.broadcast_to(frame, (n, d, e)).copy()
    steps = np.zeros(n, dtype=np.int64)
    conv = np.zeros(n, dtype=bool)
    hist = np.full((n if record else 0, max_n), np.nan)
    iu, ju = np.triu_indices(d, k=1)
    active = np.arange(n)
    for step in range(1, max_n + 1):
        if active.size == 0:
            break
        x = sample_ensemble(code, streams, active)
        p[active] = _matmul(x, p[active])
        v[active] = _matmul(x, v[active])
        diff = v[active][:, iu, :] - v[active][:, ju, :]
        sq = diff[:, :, 0] * diff[:, :, 0]
        for b in range(1, e):
            sq = sq + diff[:, :, b] * diff[:, :, b]
        diam = np.sqrt(sq.max(axis=1))
        if record:
            hist[active, step - 1] = diam
        steps[active] = step
        done = diam <= eps
        conv[active[done]] = True
        active = active[~done]
    return v[:, 0, :].copy(), p[:, 0, :].copy(), steps, conv, hist


# ---------------------------------------------------------------- special functions

_FPMIN = 1e-300
_EPS = 1e-16
_MAXIT = 10000


def reg_inc_gamma(a, x):
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros(x.shape)
    pos = x > 0.0
    ser = pos & (x < a + 1.0)
    cfr = pos & ~ser
    lg = math.lgamma(a)

    if ser.any():
        xs = x[ser]
        term = np.full(xs.shape, 1.0 / a)
        s = term.copy()
        ap = a
        act = np.ones(xs.shape, dtype=bool)
        for _ in range(_MAXIT):
            ap += 1.0
            term[act] *= xs[act] / ap
            s[act] += term[act]
            act &= ~(np.abs(term) < np.abs(s) * _EPS)
            if not act.any():
                break
        out[ser] = np.minimum(1.0, s * np.exp(-xs + a * np.log(xs) - lg))

    if cfr.any():
        xc = x[cfr]
        b = xc + 1.0 - a
        c = np.full(xc.shape, 1.0 / _FPMIN)
        dd = 1.0 / b
        h = dd.copy()
        act = np.ones(xc.shape, dtype=bool)
        for i in range(1, _MAXIT):
            an = -i * (i - a)
            b[act] += 2.0
            dd[act] = an * dd[act] + b[act]
            dd[act & (np.abs(dd) < _FPMIN)] = _FPMIN
            c[act] = b[act] + an / c[act]
            c[act & (np.abs(c) < _FPMIN)] = _FPMIN
            dd[act] = 1.0 / dd[act]
            delta = np.ones(xc.shape)
            delta[act] = dd[act] * c[act]
            h[act] *= delta[act]
            act &= ~(np.abs(delta - 1.0) < _EPS)
            if not act.any():
                break
        out[cfr] = np.maximum(0.0, 1.0 - np.exp(-xc + a * np.log(xc) - lg) * h)
    return out


def _betacf(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones(x.shape)
    dd = 1.0 - qab * x / qap
    dd[np.abs(dd) < _FPMIN] = _FPMIN
    dd = 1.0 / dd
    h = dd.copy()
    act = np.ones(x.shape, dtype=bool)
    for m in range(1, _MAXIT):
        m2 = 2 * m
        xa = x[act]
        aa = m * (b - m) * xa / ((qam + m2) * (a + m2))
        d1 = 1.0 + aa * dd[act]
        d1[np.abs(d1) < _FPMIN] = _FPMIN
        c1 = 1.0 + aa / c[act]
        c1[np.abs(c1) < _FPMIN] = _FPMIN
        d1 = 1.0 / d1
        h1 = h[act] * (d1 * c1)
        aa = -(a + m) * (qab + m) * xa / ((a + m2) * (qap + m2))
        d1 = 1.0 + aa * d1
        d1[np.abs(d1) < _FPMIN] = _FPMIN
        c1 = 1.0 + aa / c1
        c1[np.abs(c1) < _FPMIN] = _FPMIN
        d1 = 1.0 / d1
        delta = d1 * c1
        h[act] = h1 * delta
        dd[act] = d1
        c[act] = c1
        idx = np.nonzero(act)[0]
        act[idx[np.abs(delta - 1.0) < _EPS]] = False
        if not act.any():
            break
    return h


def reg_inc_beta(a, b, x):
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x >= 1.0, 1.0, 0.0)
    inner = (x > 0.0) & (x < 1.0)
    if not inner.any():
        return out
    xi = x[inner]
    lead = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * np.log(xi) + b * np.log1p(-xi)
    bt = np.exp(lead)
    low = xi < a / (a + b)
    res = np.empty(xi.shape)
    if low.any():
        res[low] = np.minimum(1.0, bt[low] * _betacf(a, b, xi[low]) / a)
    if (~low).any():
        res[~low] = np.maximum(0.0, 1.0 - bt[~low] * _betacf(b, a, 1.0 - xi[~low]) / b)
    out[inner] = res
    return out
