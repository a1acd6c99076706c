"""Laws of random stochastic matrices.

An ensemble is an immutable description; :meth:`Ensemble.code` flattens it
into the integer/float arrays the kernels consume.  Composite ensembles are
flattened into their factor list (a draw is the ordered product of one draw
per factor).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ParamMatrix, StochasticMatrix, as_param_matrix, validate_stochastic
from .errors import AllZeroParams, InvalidEnsemble

DIRICHLET, CYCLIC, LEADER, MIXTURE = 0, 1, 2, 3
POST_NONE, POST_CYCLE = 0, 1


@dataclass(frozen=True)
class EnsembleCode:
    kinds: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    offs: np.ndarray
    params: np.ndarray
    post: int
    dim: int
    r: int
    c: int

    def nb_args(self):
        return (self.kinds, self.rows, self.cols, self.offs, self.params, self.post, self.dim)

    def np_args(self):
        return (self.kinds, self.rows, self.cols, self.offs, self.params, self.post)


class Ensemble:
    """Base class.  Subclasses define ``r``, ``c``, ``_factors`` and ``to_dict``."""

    kind: str = ""

    @property
    def d(self) -> int:
        return self.r

    @property
    def is_square(self) -> bool:
        return self.r == self.c

    def _factors(self):
        raise NotImplementedError

    def _post(self) -> int:
        return POST_NONE

    def code(self) -> EnsembleCode:
        kinds, rows, cols, offs, chunks = [], [], [], [], []
        pos = 0
        for kind, r, c, payload in self._factors():
            kinds.append(kind)
            rows.append(r)
            cols.append(c)
            offs.append(pos)
            chunks.append(payload)
            pos += payload.size
        params = np.concatenate(chunks) if pos else np.zeros(1)
        dim = max(max(rows), max(cols))
        return EnsembleCode(
            np.asarray(kinds, dtype=np.int64),
            np.asarray(rows, dtype=np.int64),
            np.asarray(cols, dtype=np.int64),
            np.asarray(offs, dtype=np.int64),
            np.ascontiguousarray(params, dtype=np.float64),
            self._post(),
            dim,
            self.r,
            self.c,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def param_matrix(self) -> ParamMatrix | None:
        """The alpha matrix when the law is an (extended) Dirichlet D_A."""
        return None


@dataclass(frozen=True, eq=False)
class DirichletEnsemble(Ensemble):
    """Independent rows, row i ~ D(alpha_i1, ..., alpha_ic); zeros allowed."""

    A: ParamMatrix
    kind = "dirichlet"

    def __post_init__(self):
        object.__setattr__(self, "A", as_param_matrix(self.A))
        a = self.A.values
        if a.shape[1] < 2:
            raise InvalidEnsemble("dirichlet ensemble needs at least two columns")
        empty = np.nonzero(a.sum(axis=1) <= 0)[0]
        if empty.size:
            raise AllZeroParams(f"row {int(empty[0])} of A has no positive parameter")

    @property
    def r(self):
        return self.A.values.shape[0]

    @property
    def c(self):
        return self.A.values.shape[1]

    def _factors(self):
        yield DIRICHLET, self.r, self.c, self.A.values.ravel()

    def to_dict(self):
        return {"kind": "dirichlet", "A": self.A.tolist()}

    def param_matrix(self):
        return self.A


@dataclass(frozen=True)
class CyclicEnsemble(Ensemble):
    """Row k keeps a uniform share U_k and passes the rest to bin k+1 (mod d)."""

    size: int
    kind = "cyclic"

    def __post_init__(self):
        if self.size < 2:
            raise InvalidEnsemble("cyclic ensemble needs d >= 2")

    @property
    def r(self):
        return self.size

    @property
    def c(self):
        return self.size

    def _factors(self):
        yield CYCLIC, self.size, self.size, np.zeros(0)

    def to_dict(self):
        return {"kind": "cyclic", "d": self.size}

    def param_matrix(self):
        return cyclic_param_matrix(self.size)


@dataclass(frozen=True)
class LeaderEnsemble(Ensemble):
    """Row 1 is (U, 1-U, 0, ...); rows 2..d all shift or all stay, on U > 1/2."""

    size: int
    kind = "leader"

    def __post_init__(self):
        if self.size < 2:
            raise InvalidEnsemble("leader ensemble needs d >= 2")

    @property
    def r(self):
        return self.size

    @property
    def c(self):
        return self.size

    def _factors(self):
        yield LEADER, self.size, self.size, np.zeros(0)

    def to_dict(self):
        return {"kind": "leader", "d": self.size}


@dataclass(frozen=True, eq=False)
class MixtureEnsemble(Ensemble):
    """Finite law: matrix k with probability weight k."""

    weights: tuple
    matrices: tuple
    kind = "explicit_mixture"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0 or w.size != len(self.matrices):
            raise InvalidEnsemble("need one weight per matrix")
        if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
            raise InvalidEnsemble("weights must be nonnegative with a positive total")
        w = w / w.sum()
        mats = tuple(m if isinstance(m, StochasticMatrix) else validate_stochastic(m) for m in self.matrices)
        shapes = {m.shape for m in mats}
        if len(shapes) != 1:
            raise InvalidEnsemble(f"matrices disagree in shape: {sorted(shapes)}")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        object.__setattr__(self, "matrices", mats)

    @property
    def r(self):
        return self.matrices[0].shape[0]

    @property
    def c(self):
        return self.matrices[0].shape[1]

    def _factors(self):
        k = len(self.weights)
        cum = np.cumsum(self.weights)
        cum[-1] = 1.0
        payload = np.concatenate([[float(k)], cum] + [m.values.ravel() for m in self.matrices])
        yield MIXTURE, self.r, self.c, payload

    def to_dict(self):
        return {
            "kind": "explicit_mixture",
            "components": [[w, m.tolist()] for w, m in zip(self.weights, self.matrices)],
        }


@dataclass(frozen=True)
class CompositeEnsemble(Ensemble):
    """Ordered product X_1 X_2 ... X_k of independent draws, one per factor."""

    factors: tuple
    kind = "composite"

    def __post_init__(self):
        fs = tuple(self.factors)
        if not fs:
            raise InvalidEnsemble("composite needs at least one factor")
        for f in fs:
            if isinstance(f, PollingCycleEnsemble):
                raise InvalidEnsemble("polling cycles cannot be nested in a composite")
        for a, b in zip(fs, fs[1:]):
            if a.c != b.r:
                raise InvalidEnsemble(f"factor shapes do not chain: {a.r}x{a.c} then {b.r}x{b.c}")
        object.__setattr__(self, "factors", fs)

    @property
    def r(self):
        return self.factors[0].r

    @property
    def c(self):
        return self.factors[-1].c

    def _factors(self):
        for f in self.factors:
            yield from f._factors()

    def to_dict(self):
        return {"kind": "composite", "factors": [f.to_dict() for f in self.factors]}


@dataclass(frozen=True)
class PollingCycleEnsemble(Ensemble):
    """Law of T_1(X) T_2(X) ... T_d(X) for one draw X of ``inner``."""

    inner: Ensemble
    kind = "polling_cycle"

    def __post_init__(self):
        if isinstance(self.inner, PollingCycleEnsemble) or not self.inner.is_square:
            raise InvalidEnsemble("polling cycle needs a square, non-cycle inner ensemble")

    @property
    def r(self):
        return self.inner.r

    @property
    def c(self):
        return self.inner.c

    def _factors(self):
        return self.inner._factors()

    def _post(self):
        return POST_CYCLE

    def to_dict(self):
        return {"kind": "polling_cycle", "inner": self.inner.to_dict()}


# ---------------------------------------------------------------- constructors


def dirichlet(A) -> DirichletEnsemble:
    return DirichletEnsemble(as_param_matrix(A))


def cyclic(d: int) -> CyclicEnsemble:
    return CyclicEnsemble(int(d))


def leader(d: int) -> LeaderEnsemble:
    return LeaderEnsemble(int(d))


def explicit_mixture(components: Sequence) -> MixtureEnsemble:
    """``components`` is a sequence of ``(weight, matrix)`` pairs."""
    components = list(components)
    if not components:
        raise InvalidEnsemble("mixture needs at least one component")
    weights, mats = zip(*components)
    return MixtureEnsemble(tuple(weights), tuple(mats))


def point_mass(matrix) -> MixtureEnsemble:
    return explicit_mixture([(1.0, matrix)])


def composite(factors: Sequence[Ensemble]) -> CompositeEnsemble:
    return CompositeEnsemble(tuple(factors))


def polling_cycle(inner: Ensemble) -> PollingCycleEnsemble:
    return PollingCycleEnsemble(inner)


def cyclic_param_matrix(d: int) -> ParamMatrix:
    """alpha_kk = alpha_{k,k+1 mod d} = 1, all else 0."""
    a = np.zeros((d, d))
    for k in range(d):
        a[k, k] += 1.0
        a[k, (k + 1) % d] += 1.0
    return ParamMatrix(a)


def from_dict(spec) -> Ensemble:
    """Build an ensemble from its JSON form.  A bare matrix means a point mass."""
    if isinstance(spec, list):
        return point_mass(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidEnsemble(f"cannot read ensemble from {spec!r}")
    kind = spec["kind"]
    try:
        if kind == "dirichlet":
            return dirichlet(spec["A"])
        if kind == "cyclic":
            return cyclic(spec["d"])
        if kind == "leader":
            return leader(spec["d"])
        if kind in ("explicit_mixture", "mixture"):
            return explicit_mixture([(w, m) for w, m in spec["components"]])
        if kind == "composite":
            return composite([from_dict(f) for f in spec["factors"]])
        if kind == "polling_cycle":
            return polling_cycle(from_dict(spec["inner"]))
    except (KeyError, TypeError) as exc:
        raise InvalidEnsemble(f"malformed {kind} ensemble: {exc}") from exc
    raise InvalidEnsemble(f"unknown ensemble kind {kind!r}")
