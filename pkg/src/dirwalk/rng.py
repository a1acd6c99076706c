"""Counter-based uniform variates (Philox4x64-10).

Every uniform is a pure function of ``(base_seed, stream_id, epoch,
substream, index)``: the key is ``(base_seed, stream_id)``, the 256-bit
counter is ``(index // 4, substream, epoch, 0)`` and the uniform is lane
``index % 4`` of the Philox output, mapped to the open interval (0, 1).

Scalar draws on an :class:`RngStream` walk substream 0 of epoch 0.  Batched
operations claim a fresh epoch and give replicate ``i`` substream ``i + 1``,
so results never depend on evaluation order or thread count.
"""

from __future__ import annotations

import numpy as np

PHILOX_M0 = np.uint64(0xD2E7470EE14C6C93)
PHILOX_M1 = np.uint64(0xCA5A826395121157)
PHILOX_W0 = np.uint64(0x9E3779B97F4A7C15)
PHILOX_W1 = np.uint64(0xBB67AE8584CAA73B)

_MASK32 = np.uint64(0xFFFFFFFF)
_U32 = np.uint64(32)
_U12 = np.uint64(12)
_U2 = np.uint64(2)
_U3 = np.uint64(3)
TWO_M52 = 2.0**-52

_U64_MAX = 2**64 - 1


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


def philox4x64(c0, c1, c2, c3, k0, k1):
    """Ten-round Philox4x64 on uint64 arrays (broadcasting)."""
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) for c in (c0, c1, c2, c3))
    k0 = np.uint64(k0)
    k1 = np.uint64(k1)
    with np.errstate(over="ignore"):
        for rnd in range(10):
            if rnd:
                k0 = k0 + PHILOX_W0
                k1 = k1 + PHILOX_W1
            hi0, lo0 = _mulhilo(PHILOX_M0, c0)
            hi1, lo1 = _mulhilo(PHILOX_M1, c2)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def to_unit(bits):
    """Map uint64 words to doubles in (0, 1); never returns 0 or 1."""
    return ((np.asarray(bits, dtype=np.uint64) >> _U12).astype(np.float64) + 0.5) * TWO_M52


def uniforms_at(key, epoch, substreams, indices):
    """Stateless lookup: uniform number ``indices`` of each substream."""
    sub = np.asarray(substreams, dtype=np.uint64)
    idx = np.asarray(indices, dtype=np.uint64)
    sub, idx = np.broadcast_arrays(sub, idx)
    words = philox4x64(idx >> _U2, sub, np.uint64(epoch), np.uint64(0), key[0], key[1])
    lanes = np.stack(words, axis=-1)
    lane = (idx & _U3).astype(np.intp)
    return to_unit(np.take_along_axis(lanes, lane[..., None], axis=-1)[..., 0])


def _check_u64(name, value):
    value = int(value)
    if not 0 <= value <= _U64_MAX:
        raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {value}")
    return value


class RngStream:
    """A reproducible stream keyed by ``(base_seed, stream_id)``.

    The object carries a cursor (position on substream 0 and the last epoch
    handed out), so it behaves like a generator: equal keys and equal call
    sequences give bitwise-identical draws.
    """

    __slots__ = ("base_seed", "stream_id", "_position", "_epoch")

    def __init__(self, base_seed: int, stream_id: int = 0):
        self.base_seed = _check_u64("base_seed", base_seed)
        self.stream_id = _check_u64("stream_id", stream_id)
        self._position = 0
        self._epoch = 0

    def __repr__(self):
        return (
            f"RngStream(base_seed={self.base_seed}, stream_id={self.stream_id}, "
            f"position={self._position}, epoch={self._epoch})"
        )

    @property
    def key(self):
        return (np.uint64(self.base_seed), np.uint64(self.stream_id))

    @property
    def position(self) -> int:
        return self._position

    @position.setter
    def position(self, value: int):
        self._position = int(value)

    def next_epoch(self) -> int:
        self._epoch += 1
        return self._epoch

    def copy(self) -> "RngStream":
        twin = RngStream(self.base_seed, self.stream_id)
        twin._position = self._position
        twin._epoch = self._epoch
        return twin

    def seed_record(self) -> list[int]:
        return [self.base_seed, self.stream_id]

    def uniforms(self, n: int) -> np.ndarray:
        """Next ``n`` uniforms of substream 0."""
        idx = np.arange(self._position, self._position + n, dtype=np.uint64)
        self._position += n
        return uniforms_at(self.key, 0, 0, idx)

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def uniform_block(self, n_rows: int, n_cols: int) -> np.ndarray:
        """``(n_rows, n_cols)`` uniforms from a fresh epoch, one substream per row."""
        epoch = self.next_epoch()
        sub = np.arange(1, n_rows + 1, dtype=np.uint64)[:, None]
        idx = np.arange(n_cols, dtype=np.uint64)[None, :]
        return uniforms_at(self.key, epoch, sub, idx)


class BufferedStreams:
    """Vectorised cursor over many substreams for the numpy kernels.

    Each Philox call yields four uniforms; the buffer avoids recomputing the
    block until a substream's lane wraps, matching the numba kernels exactly.
    """

    def __init__(self, key, epoch, substreams, start):
        self.key = key
        self.epoch = np.uint64(epoch)
        self.sub = np.asarray(substreams, dtype=np.uint64).copy()
        self.idx = np.asarray(start, dtype=np.uint64).copy()
        self.buf = np.zeros((self.sub.size, 4), dtype=np.uint64)
        self._fill(np.nonzero(self.idx & _U3)[0])

    def _fill(self, rows):
        if rows.size == 0:
            return
        words = philox4x64(
            self.idx[rows] >> _U2, self.sub[rows], self.epoch, np.uint64(0), self.key[0], self.key[1]
        )
        self.buf[rows] = np.stack(words, axis=-1)

    def next(self, rows=None) -> np.ndarray:
        """One uniform for each selected replicate (all replicates by default)."""
        if rows is None:
            rows = np.arange(self.sub.size)
        lane = (self.idx[rows] & _U3).astype(np.intp)
        self._fill(rows[lane == 0])
        out = to_unit(self.buf[rows, lane])
        self.idx[rows] += np.uint64(1)
        return out
