"""Distance functions on sampler states and the pairwise matrix over a pool.

Every distance exposes ``prepare(pool)`` which stacks the pool once and returns
an object whose ``row(i, start)`` gives ``d(pool[i], pool[j])`` for
``j >= start`` as a float array. The matrix, the nearest-neighbour tour and the
Lanfear map all go through it.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import FormatError, GendiagError, ShapeMismatch, UndefinedRatio
from .states import DrawState, coassociation


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("GENDIAG_THREADS", "1")))
    except ValueError:
        return 1


def _check_same(x: DrawState, y: DrawState):
    if x.shape_key != y.shape_key:
        raise ShapeMismatch(f"cannot compare {x.shape_key} with {y.shape_key}")


def euclidean(x: DrawState, y: DrawState) -> float:
    _check_same(x, y)
    if x.kind != "real_vector":
        raise ShapeMismatch(f"euclidean distance needs real vectors, got {x.kind}")
    diff = x.values - y.values
    return float(np.sqrt(np.sum(diff * diff)))


def _binary_payload(s: DrawState) -> np.ndarray:
    if s.kind == "partition":
        return coassociation(s).entries
    if s.kind == "binary_matrix":
        return s.entries
    raise ShapeMismatch(f"hamming distance needs binary matrices or partitions, got {s.kind}")


def hamming(a: DrawState, b: DrawState) -> float:
    """Number of differing entries. Partitions are compared by co-association."""
    _check_same(a, b)
    return float(np.count_nonzero(_binary_payload(a) != _binary_payload(b)))


def _log_density_values(log_density, X: np.ndarray) -> np.ndarray:
    try:
        lp = np.asarray(log_density(X), dtype=float)
    except Exception:
        lp = None
    if lp is None or lp.shape != (len(X),):
        lp = np.array([float(log_density(x)) for x in X])
    if np.any(np.isnan(lp)) or np.any(lp == np.inf):
        bad = int(np.flatnonzero(np.isnan(lp) | (lp == np.inf))[0])
        raise GendiagError(f"log density is NaN or +inf at pool index {bad}")
    return lp


def _mh_combine(lp_x, lp_y, lq_x_given_y, lq_y_given_x, lqs_x, lqs_y):
    """``1 - exp(min(t1, t2))`` with both pseudo-probabilities in log space."""
    with np.errstate(invalid="ignore"):
        t1 = np.minimum(lp_x - lp_y, 0.0) + lq_x_given_y - lqs_y
        t2 = np.minimum(lp_y - lp_x, 0.0) + lq_y_given_x - lqs_x
    return np.clip(1.0 - np.exp(np.minimum(t1, t2)), 0.0, 1.0)


def mh_distance(x: DrawState, y: DrawState, log_density: Callable, proposal) -> float:
    """Metropolis-Hastings distance between two states.

    ``log_density`` takes a state payload array; ``proposal`` provides
    ``log_q(to, frm)`` and ``log_q_star(frm)``. Symmetric in ``x`` and ``y``.
    """
    _check_same(x, y)
    xa, ya = x.array, y.array
    lp_x, lp_y = float(log_density(xa)), float(log_density(ya))
    if np.isnan(lp_x) or np.isnan(lp_y):
        raise GendiagError("log density returned NaN")
    if lp_x == -np.inf and lp_y == -np.inf:
        raise UndefinedRatio("both states have zero target density")
    return float(_mh_combine(lp_x, lp_y, proposal.log_q(xa, ya), proposal.log_q(ya, xa),
                             proposal.log_q_star(xa), proposal.log_q_star(ya)))


class _Prepared:
    def __init__(self, N):
        self.N = N
        self.evaluations = 0

    def row(self, i: int, start: int = 0, stop: int | None = None) -> np.ndarray:
        stop = self.N if stop is None else stop
        out = self._row(i, start, stop)
        self.evaluations += stop - start
        return out


class _EuclidPrep(_Prepared):
    def __init__(self, X):
        super().__init__(len(X))
        self.X = X.reshape(len(X), -1)

    def _row(self, i, start, stop):
        diff = self.X[start:stop] - self.X[i]
        return np.sqrt(np.sum(diff * diff, axis=1))


class _HammingPrep(_Prepared):
    def __init__(self, B):
        super().__init__(len(B))
        self.B = B.reshape(len(B), -1)

    def _row(self, i, start, stop):
        return np.count_nonzero(self.B[start:stop] != self.B[i], axis=1).astype(float)


class _MHPrep(_Prepared):
    def __init__(self, X, log_density, proposal):
        super().__init__(len(X))
        self.X = X
        self.proposal = proposal
        self.lp = _log_density_values(log_density, X)
        self.lqs = np.asarray(proposal.log_q_star(X), dtype=float).reshape(len(X))
        self.dead = self.lp == -np.inf

    def _row(self, i, start, stop):
        X = self.X[start:stop]
        if self.dead[i] and self.dead[start:stop].any():
            j = start + int(np.flatnonzero(self.dead[start:stop])[0])
            raise UndefinedRatio(f"pair ({i}, {j}): both states have zero target density")
        q = self.proposal
        return _mh_combine(self.lp[i], self.lp[start:stop], q.log_q(self.X[i], X), q.log_q(X, self.X[i]),
                           self.lqs[i], self.lqs[start:stop])


class _TablePrep(_Prepared):
    def __init__(self, values):
        super().__init__(len(values))
        self.values = values

    def _row(self, i, start, stop):
        return self.values[i, start:stop].copy()


class _FunctionPrep(_Prepared):
    def __init__(self, pool, fn):
        super().__init__(len(pool))
        self.pool, self.fn = pool, fn

    def _row(self, i, start, stop):
        x = self.pool[i]
        return np.array([float(self.fn(x, y)) for y in self.pool[start:stop]])


@dataclass(frozen=True)
class Euclidean:
    name = "euclidean"

    def __call__(self, x, y):
        return euclidean(x, y)

    def prepare(self, pool: Sequence[DrawState]) -> _Prepared:
        if pool[0].kind != "real_vector":
            raise ShapeMismatch(f"euclidean distance needs real vectors, got {pool[0].kind}")
        return _EuclidPrep(np.stack([s.values for s in pool]))

    def describe(self):
        return {"distance": "euclidean"}


@dataclass(frozen=True)
class Hamming:
    name = "hamming"

    def __call__(self, x, y):
        return hamming(x, y)

    def prepare(self, pool):
        return _HammingPrep(np.stack([_binary_payload(s) for s in pool]))

    def describe(self):
        return {"distance": "hamming"}


@dataclass(frozen=True)
class MetropolisHastings:
    log_density: Callable
    proposal: object
    label: str = ""
    name = "mh"

    def __call__(self, x, y):
        return mh_distance(x, y, self.log_density, self.proposal)

    def prepare(self, pool):
        return _MHPrep(np.stack([s.array for s in pool]).astype(float), self.log_density, self.proposal)

    def describe(self):
        return {"distance": "mh", "target": self.label, "proposal": self.proposal.describe()}


@dataclass(frozen=True)
class FunctionDistance:
    """Wrap any symmetric nonnegative ``fn(x, y)`` on states; evaluated pair by pair."""

    fn: Callable
    label: str = "function"
    name = "function"

    def __call__(self, x, y):
        return float(self.fn(x, y))

    def prepare(self, pool):
        return _FunctionPrep(list(pool), self.fn)

    def describe(self):
        return {"distance": "function", "label": self.label}


@dataclass(frozen=True)
class UserTable:
    """Precomputed distances indexed by pool position."""

    values: np.ndarray = field(repr=False)
    source: str = ""
    name = "table"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ShapeMismatch("distance table must be square")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise FormatError("distance table entries must be finite and nonnegative")
        if not np.array_equal(v, v.T):
            raise FormatError("distance table must be symmetric")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, x, y):
        raise TypeError("a UserTable distance is indexed by pool position, not by state")

    def prepare(self, pool):
        if len(pool) != len(self.values):
            raise ShapeMismatch(f"distance table covers {len(self.values)} states, pool has {len(pool)}")
        return _TablePrep(self.values)

    def describe(self):
        return {"distance": "table", "source": self.source}


def read_distance_table(path) -> UserTable:
    """Read a CSV with header ``i,j,distance`` of 0-based pool indices.

    Every off-diagonal unordered pair must be present; missing diagonal entries
    default to 0. A pair listed in both orders must agree.
    """
    entries = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["i", "j", "distance"]:
            raise FormatError("expected header 'i,j,distance'", 1)
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != 3:
                raise FormatError("expected 3 columns", lineno)
            try:
                i, j, d = int(row[0]), int(row[1]), float(row[2])
            except ValueError:
                raise FormatError(f"cannot parse {row}", lineno) from None
            if i < 0 or j < 0:
                raise FormatError("indices must be nonnegative", lineno)
            if not np.isfinite(d) or d < 0:
                raise FormatError(f"distance must be finite and nonnegative, got {d}", lineno)
            key = (min(i, j), max(i, j))
            if key in entries and entries[key] != d:
                raise FormatError(f"conflicting values for pair {key}", lineno)
            entries[key] = d
    if not entries:
        raise FormatError("distance table is empty")
    N = max(max(k) for k in entries) + 1
    M = np.zeros((N, N))
    missing = []
    for i in range(N):
        for j in range(i, N):
            if (i, j) in entries:
                M[i, j] = M[j, i] = entries[(i, j)]
            elif i != j:
                missing.append((i, j))
    if missing:
        raise FormatError(f"{len(missing)} missing pairs, first {missing[0]}")
    return UserTable(M, source=str(path))


@dataclass(frozen=True)
class PairwiseDistanceMatrix:
    values: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.values)

    def row(self, i: int) -> np.ndarray:
        return self.values[i]

    def __getitem__(self, ij):
        return self.values[ij]


class LazyPairwise:
    """Row-on-demand view of the pairwise distances; nothing is cached.

    The nearest-neighbour tour reads each row once, so this gives the same
    evaluations as the dense matrix without O(N^2) memory.
    """

    def __init__(self, pool, d):
        self._prep = d.prepare(pool)
        self.size = len(pool)

    @property
    def evaluations(self):
        return self._prep.evaluations

    def row(self, i: int) -> np.ndarray:
        return _checked(self._prep.row(i), i, 0)

    def __getitem__(self, ij):
        i, j = ij
        return float(self._prep.row(i, j, j + 1)[0])


def _checked(r, i, start):
    bad = ~np.isfinite(r) | (r < 0)
    if bad.any():
        j = start + int(np.flatnonzero(bad)[0])
        raise GendiagError(f"distance for pair ({i}, {j}) is {r[j - start]}, expected finite and >= 0")
    return r


def pairwise_matrix(pool: Sequence[DrawState], d) -> PairwiseDistanceMatrix:
    """Dense symmetric matrix of ``d`` over the pool; each unordered pair is evaluated once."""
    if len(pool) == 0:
        raise ShapeMismatch("pool is empty")
    prep = d.prepare(pool)
    N = len(pool)
    M = np.empty((N, N))

    def fill(i):
        r = _checked(prep.row(i, i), i, i)
        M[i, i:] = r
        M[i:, i] = r

    workers = min(_threads(), N)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            list(ex.map(fill, range(N)))
    else:
        for i in range(N):
            fill(i)
    M.setflags(write=False)
    return PairwiseDistanceMatrix(M)
