"""Simplex vectors, stochastic matrices and Dirichlet/Gamma parameter objects.

All value types wrap a read-only float64 array (``.values``) and support
``np.asarray``.  Matrix indices are 0-based.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    AllZeroParams,
    DimensionMismatch,
    DirwalkError,
    NegativeEntry,
    NotSquare,
    RowSumOutOfTolerance,
)

STORED_TOL = 1e-12
INPUT_TOL = 1e-9


def _frozen(arr, ndim):
    a = np.array(arr, dtype=np.float64)
    if a.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DirwalkError("entries must be finite")
    a.setflags(write=False)
    return a


class _Value:
    __slots__ = ("values",)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        return type(self) is type(other) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((type(self).__name__, self.values.tobytes()))

    def __repr__(self):
        return f"{type(self).__name__}({self.values.tolist()!r})"

    def tolist(self):
        return self.values.tolist()

    @property
    def shape(self):
        return self.values.shape


class ProbVector(_Value):
    """A point of the probability simplex."""

    __slots__ = ()

    def __init__(self, entries, tol=STORED_TOL):
        v = _frozen(entries, 1)
        neg = np.nonzero(v < 0)[0]
        if neg.size:
            raise NegativeEntry(0, int(neg[0]), float(v[neg[0]]))
        if abs(v.sum() - 1.0) > tol:
            raise RowSumOutOfTolerance(0, float(v.sum()))
        self.values = v

    @property
    def d(self):
        return self.values.size


class StochasticMatrix(_Value):
    """An r x c nonnegative matrix whose rows each sum to one."""

    __slots__ = ()

    def __init__(self, rows, tol=STORED_TOL):
        m = _frozen(rows, 2)
        _check_rows(m, tol)
        self.values = m

    @classmethod
    def _trusted(cls, arr):
        obj = cls.__new__(cls)
        a = np.array(arr, dtype=np.float64)
        a.setflags(write=False)
        obj.values = a
        return obj

    @property
    def is_square(self):
        return self.values.shape[0] == self.values.shape[1]

    def row(self, i) -> ProbVector:
        return ProbVector(self.values[i])

    @classmethod
    def identity(cls, d):
        return cls._trusted(np.eye(d))


def _check_rows(m, tol):
    neg = np.argwhere(m < 0)
    if neg.size:
        i, j = (int(k) for k in neg[0])
        raise NegativeEntry(i, j, float(m[i, j]))
    sums = m.sum(axis=1)
    bad = np.nonzero(np.abs(sums - 1.0) > tol)[0]
    if bad.size:
        raise RowSumOutOfTolerance(int(bad[0]), float(sums[bad[0]]))


class ParamVector(_Value):
    """Dirichlet/Gamma shape vector; ``extended`` permits zero entries."""

    __slots__ = ("extended",)

    def __init__(self, entries, extended=False):
        v = _frozen(entries, 1)
        if v.size == 0:
            raise DimensionMismatch("parameter vector is empty")
        if np.any(v < 0):
            raise NegativeEntry(0, int(np.argmax(v < 0)), float(v[v < 0][0]))
        if not extended and np.any(v == 0):
            raise DirwalkError("zero parameter in a non-extended vector")
        if not np.any(v > 0):
            raise AllZeroParams("at least one parameter must be positive")
        self.values = v
        self.extended = bool(extended)

    @property
    def total(self) -> float:
        return float(self.values.sum())


class ParamMatrix(_Value):
    """Nonnegative parameter matrix (alpha or beta entries)."""

    __slots__ = ()

    def __init__(self, entries):
        m = _frozen(entries, 2)
        neg = np.argwhere(m < 0)
        if neg.size:
            i, j = (int(k) for k in neg[0])
            raise NegativeEntry(i, j, float(m[i, j]))
        self.values = m


class NonNegVector(_Value):
    """Nonnegative vector, e.g. a realisation of independent Gammas."""

    __slots__ = ()

    def __init__(self, entries):
        v = _frozen(entries, 1)
        if np.any(v < 0):
            raise NegativeEntry(0, int(np.argmax(v < 0)), float(v[v < 0][0]))
        self.values = v

    @property
    def total(self) -> float:
        return float(self.values.sum())


def as_param_vector(t, extended=True) -> ParamVector:
    if isinstance(t, ParamVector):
        return t
    return ParamVector(t, extended=extended)


def as_param_matrix(a) -> ParamMatrix:
    return a if isinstance(a, ParamMatrix) else ParamMatrix(a)


def validate_stochastic(m, tol: float = INPUT_TOL) -> StochasticMatrix:
    """Check a raw matrix and renormalise rows that are within ``tol`` of one."""
    a = np.array(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 2:
        raise DimensionMismatch(f"need an r x c matrix with c >= 2, got shape {a.shape}")
    _check_rows(a, tol)
    return StochasticMatrix._trusted(a / a.sum(axis=1, keepdims=True))


def mat_product(a, b) -> StochasticMatrix:
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[1] != y.shape[0]:
        raise DimensionMismatch(f"cannot multiply {x.shape} by {y.shape}")
    return validate_stochastic(x @ y, tol=1e-10)


def row_col_sums(A):
    """Row sums and column sums of a parameter matrix."""
    m = np.asarray(A, dtype=np.float64)
    return m.sum(axis=1), m.sum(axis=0)


def check_balance(A, tol: float = 1e-12) -> bool:
    m = np.asarray(A, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"balance needs a square matrix, got shape {m.shape}")
    rows, cols = row_col_sums(m)
    return bool(np.max(np.abs(rows - cols)) <= tol and np.all(rows > 0))


def row_spread(x) -> float:
    """Largest column range; zero exactly when all rows coincide."""
    m = np.asarray(x, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"row spread needs a square matrix, got shape {m.shape}")
    return float(np.max(m.max(axis=0) - m.min(axis=0)))
