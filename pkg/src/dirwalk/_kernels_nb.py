"""numba kernels.  Scalar loops over replicates; see _kernels_np for the twin.

RNG state per replicate is a uint64[9] array:
``[key0, key1, epoch, substream, index, buf0, buf1, buf2, buf3]``.
"""

import math

import numpy as np
from numba import njit, prange

from .rng import PHILOX_M0, PHILOX_M1, PHILOX_W0, PHILOX_W1, TWO_M52

_MASK32 = np.uint64(0xFFFFFFFF)
_U0 = np.uint64(0)
_U1 = np.uint64(1)
_U2 = np.uint64(2)
_U3 = np.uint64(3)
_U12 = np.uint64(12)
_U32 = np.uint64(32)
TWO_PI = 2.0 * math.pi

DIRICHLET = 0
CYCLIC = 1
LEADER = 2
MIXTURE = 3

POST_NONE = 0
POST_CYCLE = 1


# ---------------------------------------------------------------- rng


@njit(cache=True, inline="always")
def _mulhilo(a, b):
    lo = a * b
    a0 = a & _MASK32
    a1 = a >> _U32
    b0 = b & _MASK32
    b1 = b >> _U32
    t = a1 * b0 + ((a0 * b0) >> _U32)
    w1 = (t & _MASK32) + a0 * b1
    hi = a1 * b1 + (t >> _U32) + (w1 >> _U32)
    return hi, lo


@njit(cache=True)
def _fill_block(st):
    c0 = st[4] >> _U2
    c1 = st[3]
    c2 = st[2]
    c3 = _U0
    k0 = st[0]
    k1 = st[1]
    for rnd in range(10):
        if rnd > 0:
            k0 = k0 + PHILOX_W0
            k1 = k1 + PHILOX_W1
        hi0, lo0 = _mulhilo(PHILOX_M0, c0)
        hi1, lo1 = _mulhilo(PHILOX_M1, c2)
        n0 = hi1 ^ c1 ^ k0
        n2 = hi0 ^ c3 ^ k1
        c0, c1, c2, c3 = n0, lo1, n2, lo0
    st[5] = c0
    st[6] = c1
    st[7] = c2
    st[8] = c3


@njit(cache=True)
def rng_init(st, k0, k1, epoch, sub, start):
    st[0] = k0
    st[1] = k1
    st[2] = epoch
    st[3] = sub
    st[4] = start
    if (start & _U3) != _U0:
        _fill_block(st)


@njit(cache=True)
def next_uniform(st):
    lane = st[4] & _U3
    if lane == _U0:
        _fill_block(st)
    x = st[5 + np.int64(lane)]
    st[4] = st[4] + _U1
    return (float(x >> _U12) + 0.5) * TWO_M52


@njit(cache=True)
def next_normal(st):
    u1 = next_uniform(st)
    u2 = next_uniform(st)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(TWO_PI * u2)


@njit(cache=True)
def _gamma_mt(a, st):
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = next_normal(st)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = next_uniform(st)
        x2 = x * x
        if u < 1.0 - 0.0331 * (x2 * x2):
            return d * v
        if math.log(u) < 0.5 * x2 + d * (1.0 - v + math.log(v)):
            return d * v


@njit(cache=True)
def next_gamma(a, st):
    if a < 1.0:
        g = _gamma_mt(a + 1.0, st)
        u = next_uniform(st)
        return g * u ** (1.0 / a)
    return _gamma_mt(a, st)


# ---------------------------------------------------------------- matrices


@njit(cache=True)
def _matmul_into(a, b, out, r, k, c):
    for i in range(r):
        for j in range(c):
            s = a[i, 0] * b[0, j]
            for m in range(1, k):
                s += a[i, m] * b[m, j]
            out[i, j] = s


@njit(cache=True)
def _sample_factor(kind, r, c, off, params, st, out):
    if kind == DIRICHLET:
        for i in range(r):
            s = 0.0
            for j in range(c):
                a = params[off + i * c + j]
                g = next_gamma(a, st) if a > 0.0 else 0.0
                out[i, j] = g
                s += g
            if s == 0.0:
                jmax = 0
                for j in range(1, c):
                    if params[off + i * c + j] > params[off + i * c + jmax]:
                        jmax = j
                out[i, jmax] = 1.0
                s = 1.0
            for j in range(c):
                out[i, j] = out[i, j] / s
    elif kind == CYCLIC:
        for i in range(r):
            for j in range(c):
                out[i, j] = 0.0
        for i in range(r):
            u = next_uniform(st)
            out[i, i] = u
            out[i, (i + 1) % r] = 1.0 - u
    elif kind == LEADER:
        for i in range(r):
            for j in range(c):
                out[i, j] = 0.0
        u = next_uniform(st)
        ind = 1.0 if u > 0.5 else 0.0
        out[0, 0] = u
        out[0, 1] = 1.0 - u
        for i in range(1, r):
            out[i, i] += ind
            out[i, (i + 1) % r] += 1.0 - ind
    else:
        k = int(params[off])
        u = next_uniform(st)
        pick = k - 1
        for m in range(k):
            if u < params[off + 1 + m]:
                pick = m
                break
        base = off + 1 + k + pick * r * c
        for i in range(r):
            for j in range(c):
                out[i, j] = params[base + i * c + j]


@njit(cache=True)
def cycle_product_inplace(m, acc, d):
    """acc <- T_1(m) T_2(m) ... T_d(m), then copied into m."""
    for i in range(d):
        for j in range(d):
            acc[i, j] = 1.0 if i == j else 0.0
    for r in range(d):
        for i in range(d):
            x = acc[i, r]
            if x != 0.0:
                acc[i, r] = 0.0
                for j in range(d):
                    acc[i, j] += x * m[r, j]
    for i in range(d):
        for j in range(d):
            m[i, j] = acc[i, j]


@njit(cache=True)
def sample_ensemble(kinds, rows, cols, offs, params, post, st, out, w1, w2):
    """Draw one matrix into ``out``; w1, w2 are DxD scratch buffers."""
    nf = kinds.shape[0]
    r0 = rows[0]
    c0 = cols[0]
    if nf == 1:
        _sample_factor(kinds[0], r0, c0, offs[0], params, st, out)
    else:
        _sample_factor(kinds[0], r0, c0, offs[0], params, st, out)
        cur_c = c0
        for f in range(1, nf):
            rf = rows[f]
            cf = cols[f]
            _sample_factor(kinds[f], rf, cf, offs[f], params, st, w1)
            _matmul_into(out, w1, w2, r0, cur_c, cf)
            for i in range(r0):
                for j in range(cf):
                    out[i, j] = w2[i, j]
            cur_c = cf
    if post == POST_CYCLE:
        cycle_product_inplace(out, w2, r0)


@njit(cache=True, parallel=True)
def sample_matrices(kinds, rows, cols, offs, params, post, dim, r, c, n, k0, k1, epoch, subs, starts):
    out = np.empty((n, r, c))
    ends = np.empty(n, dtype=np.uint64)
    for i in prange(n):
        st = np.empty(9, dtype=np.uint64)
        rng_init(st, k0, k1, epoch, subs[i], starts[i])
        m = np.zeros((dim, dim))
        w1 = np.zeros((dim, dim))
        w2 = np.zeros((dim, dim))
        sample_ensemble(kinds, rows, cols, offs, params, post, st, m, w1, w2)
        for a in range(r):
            for b in range(c):
                out[i, a, b] = m[a, b]
        ends[i] = st[4]
    return out, ends


@njit(cache=True, parallel=True)
def gamma_vectors(t, n, k0, k1, epoch, subs, starts):
    d = t.shape[0]
    out = np.empty((n, d))
    ends = np.empty(n, dtype=np.uint64)
    for i in prange(n):
        st = np.empty(9, dtype=np.uint64)
        rng_init(st, k0, k1, epoch, subs[i], starts[i])
        for j in range(d):
            out[i, j] = next_gamma(t[j], st) if t[j] > 0.0 else 0.0
        ends[i] = st[4]
    return out, ends


# ---------------------------------------------------------------- products


@njit(cache=True)
def _spread(p, d):
    best = 0.0
    for j in range(d):
        lo = p[0, j]
        hi = p[0, j]
        for i in range(1, d):
            v = p[i, j]
            if v < lo:
                lo = v
            if v > hi:
                hi = v
        if hi - lo > best:
            best = hi - lo
    return best


@njit(cache=True, parallel=True)
def iterate_products(kinds, rows, cols, offs, params, post, dim, d, n, eps, max_n, record, k0, k1, epoch, subs, starts):
    finals = np.empty((n, d, d))
    steps = np.zeros(n, dtype=np.int64)
    conv = np.zeros(n, dtype=np.bool_)
    hist = np.full((n if record else 0, max_n), np.nan)
    for i in prange(n):
        st = np.empty(9, dtype=np.uint64)
        rng_init(st, k0, k1, epoch, subs[i], starts[i])
        x = np.zeros((dim, dim))
        w1 = np.zeros((dim, dim))
        w2 = np.zeros((dim, dim))
        p = np.eye(d)
        q = np.empty((d, d))
        for step in range(1, max_n + 1):
            sample_ensemble(kinds, rows, cols, offs, params, post, st, x, w1, w2)
            _matmul_into(x, p, q, d, d, d)
            for a in range(d):
                for b in range(d):
                    p[a, b] = q[a, b]
            s = _spread(p, d)
            if record:
                hist[i, step - 1] = s
            steps[i] = step
            if s <= eps:
                conv[i] = True
                break
        for a in range(d):
            for b in range(d):
                finals[i, a, b] = p[a, b]
    return finals, steps, conv, hist


@njit(cache=True, parallel=True)
def fixed_products(kinds, rows, cols, offs, params, post, dim, d, n, m, left, k0, k1, epoch, subs, starts):
    out = np.empty((n, d, d))
    for i in prange(n):
        st = np.empty(9, dtype=np.uint64)
        rng_init(st, k0, k1, epoch, subs[i], starts[i])
        x = np.zeros((dim, dim))
        w1 = np.zeros((dim, dim))
        w2 = np.zeros((dim, dim))
        p = np.eye(d)
        q = np.empty((d, d))
        for _ in range(m):
            sample_ensemble(kinds, rows, cols, offs, params, post, st, x, w1, w2)
            if left:
                _matmul_into(x, p, q, d, d, d)
            else:
                _matmul_into(p, x, q, d, d, d)
            for a in range(d):
                for b in range(d):
                    p[a, b] = q[a, b]
        for a in range(d):
            for b in range(d):
                out[i, a, b] = p[a, b]
    return out


@njit(cache=True, parallel=True)
def positivity_hits(kinds, rows, cols, offs, params, post, dim, d, trials, max_m, k0, k1, epoch, subs, starts):
    hits = np.zeros((trials, max_m), dtype=np.uint8)
    for i in prange(trials):
        st = np.empty(9, dtype=np.uint64)
        rng_init(st, k0, k1, epoch, subs[i], starts[i])
        x = np.zeros((dim, dim))
        w1 = np.zeros((dim, dim))
        w2 = np.zeros((dim, dim))
        p = np.eye(d)
        q = np.empty((d, d))
        for m in range(max_m):
            sample_ensemble(kinds, rows, cols, offs, params, post, st, x, w1, w2)
            _matmul_into(x, p, q, d, d, d)
            positive = True
            for a in range(d):
                for b in range(d):
                    p[a, b] = q[a, b]
                    if q[a, b] <= 0.0:
                        positive = False
            if positive:
                hits[i, m] = 1
    return hits


# ---------------------------------------------------------------- chains


@njit(cache=True, parallel=True)
def exchange_chains(kinds, rows, cols, offs, params, post, dim, d, q0, n_chains, burn_in, per_chain, thin, k0, k1, epoch, subs, starts):
    out = np.empty((n_chains, per_chain, d))
    for i in prange(n_chains):
        st = np.empty(9, dtype=np.uint64)
        rng_init(st, k0, k1, epoch, subs[i], starts[i])
        x = np.zeros((dim, dim))
        w1 = np.zeros((dim, dim))
        w2 = np.zeros((dim, dim))
        q = q0.copy()
        nq = np.empty(d)
        total = burn_in + per_chain * thin
        kept = 0
        for step in range(1, total + 1):
            sample_ensemble(kinds, rows, cols, offs, params, post, st, x, w1, w2)
            for j in range(d):
                s = q[0] * x[0, j]
                for a in range(1, d):
                    s += q[a] * x[a, j]
                nq[j] = s
            for j in range(d):
                q[j] = nq[j]
            if step > burn_in and (step - burn_in) % thin == 0:
                for j in range(d):
                    out[i, kept, j] = q[j]
                kept += 1
    return out


@njit(cache=True)
def polling_update(b, x, r, d):
    """Move coordinate r's mass along row r of x (in place)."""
    m = b[r]
    if m != 0.0:
        b[r] = 0.0
        for j in range(d):
            b[j] += m * x[r, j]


@njit(cache=True, parallel=True)
def polling_chains(kinds, rows, cols, offs, params, post, dim, d, b0, residue, n_chains, burn_in, per_chain, thin, fresh, k0, k1, epoch, subs, starts):
    out = np.empty((n_chains, per_chain, d))
    for i in prange(n_chains):
        st = np.empty(9, dtype=np.uint64)
        rng_init(st, k0, k1, epoch, subs[i], starts[i])
        x = np.zeros((dim, dim))
        w1 = np.zeros((dim, dim))
        w2 = np.zeros((dim, dim))
        b = b0.copy()
        total = burn_in + per_chain * thin
        kept = 0
        for cyc in range(1, total + 1):
            if not fresh:
                sample_ensemble(kinds, rows, cols, offs, params, post, st, x, w1, w2)
            for r in range(d):
                if fresh:
                    sample_ensemble(kinds, rows, cols, offs, params, post, st, x, w1, w2)
                polling_update(b, x, r, d)
                if r == residue and cyc > burn_in and (cyc - burn_in) % thin == 0:
                    for j in range(d):
                        out[i, kept, j] = b[j]
                    kept += 1
    return out


@njit(cache=True, parallel=True)
def cascades(kinds, rows, cols, offs, params, post, dim, d, frame, n, eps, max_n, record, k0, k1, epoch, subs, starts):
    e = frame.shape[1]
    points = np.empty((n, e))
    bary = np.empty((n, d))
    steps = np.zeros(n, dtype=np.int64)
    conv = np.zeros(n, dtype=np.bool_)
    hist = np.full((n if record else 0, max_n), np.nan)
    for i in prange(n):
        st = np.empty(9, dtype=np.uint64)
        rng_init(st, k0, k1, epoch, subs[i], starts[i])
        x = np.zeros((dim, dim))
        w1 = np.zeros((dim, dim))
        w2 = np.zeros((dim, dim))
        p = np.eye(d)
        q = np.empty((d, d))
        v = frame.copy()
        nv = np.empty((d, e))
        for step in range(1, max_n + 1):
            sample_ensemble(kinds, rows, cols, offs, params, post, st, x, w1, w2)
            _matmul_into(x, p, q, d, d, d)
            _matmul_into(x, v, nv, d, d, e)
            for a in range(d):
                for b in range(d):
                    p[a, b] = q[a, b]
                for b in range(e):
                    v[a, b] = nv[a, b]
            diam = 0.0
            for a in range(d):
                for a2 in range(a + 1, d):
                    s = 0.0
                    for b in range(e):
                        dd = v[a, b] - v[a2, b]
                        s += dd * dd
                    if s > diam:
                        diam = s
            diam = math.sqrt(diam)
            if record:
                hist[i, step - 1] = diam
            steps[i] = step
            if diam <= eps:
                conv[i] = True
                break
        for b in range(e):
            points[i, b] = v[0, b]
        for a in range(d):
            bary[i, a] = p[0, a]
    return points, bary, steps, conv, hist


# ---------------------------------------------------------------- special functions

_FPMIN = 1e-300
_EPS = 1e-16
_MAXIT = 10000


@njit(cache=True)
def reg_inc_gamma_scalar(a, x):
    if x <= 0.0:
        return 0.0
    lead = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        ap = a
        term = 1.0 / a
        s = term
        for _ in range(_MAXIT):
            ap += 1.0
            term *= x / ap
            s += term
            if abs(term) < abs(s) * _EPS:
                break
        return min(1.0, s * math.exp(lead))
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    dd = 1.0 / b
    h = dd
    for i in range(1, _MAXIT):
        an = -i * (i - a)
        b += 2.0
        dd = an * dd + b
        if abs(dd) < _FPMIN:
            dd = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        dd = 1.0 / dd
        delta = dd * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return max(0.0, 1.0 - math.exp(lead) * h)


@njit(cache=True)
def _betacf(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    dd = 1.0 - qab * x / qap
    if abs(dd) < _FPMIN:
        dd = _FPMIN
    dd = 1.0 / dd
    h = dd
    for m in range(1, _MAXIT):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        dd = 1.0 + aa * dd
        if abs(dd) < _FPMIN:
            dd = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        dd = 1.0 / dd
        h *= dd * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        dd = 1.0 + aa * dd
        if abs(dd) < _FPMIN:
            dd = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        dd = 1.0 / dd
        delta = dd * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


@njit(cache=True)
def reg_inc_beta_scalar(a, b, x):
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    lead = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    bt = math.exp(lead)
    if x < a / (a + b):
        return min(1.0, bt * _betacf(a, b, x) / a)
    return max(0.0, 1.0 - bt * _betacf(b, a, 1.0 - x) / b)


@njit(cache=True)
def reg_inc_gamma(a, x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = reg_inc_gamma_scalar(a, x[i])
    return out


@njit(cache=True)
def reg_inc_beta(a, b, x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = reg_inc_beta_scalar(a, b, x[i])
    return out
