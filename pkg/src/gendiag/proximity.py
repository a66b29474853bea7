"""Proximity maps: sending the pool of unique states to the real line.

Two maps are provided. The Lanfear map is the distance to a fixed reference
state. The nearest-neighbour map walks a greedy travelling-salesman tour over
the pool, cuts the resulting cycle open at one position, and assigns each
state its distance travelled along the tour from the cut.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch
from .states import ChainSet, DrawState

# relative slack when comparing cut objectives for ties
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class ProximityMap:
    values: np.ndarray
    variant: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class Tour:
    """Greedy cycle ``x_0 -> x_1 -> ... -> x_{N-1} -> x_0`` over pool indices.

    ``cumdist[j]`` is the distance travelled from ``x_0`` to ``x_j``;
    ``cycle_length`` adds the closing edge back to ``x_0``. ``edges[j]`` is the
    edge entering ``x_j``, so ``edges[0]`` is the closing edge.
    """

    ordering: np.ndarray
    cumdist: np.ndarray
    cycle_length: float
    edges: np.ndarray

    @property
    def N(self) -> int:
        return len(self.ordering)

    def positions(self) -> np.ndarray:
        pos = np.empty(self.N, dtype=np.int64)
        pos[self.ordering] = np.arange(self.N)
        return pos


@dataclass(frozen=True)
class MappedChainSet:
    """Univariate chains, one row per chain."""

    values: np.ndarray
    chain_ids: tuple = ()
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2:
            raise ShapeMismatch("mapped chains must be a (k, n) array")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if not self.chain_ids:
            object.__setattr__(self, "chain_ids", tuple(range(v.shape[0])))

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


def lanfear_map(cs: ChainSet, d, reference: DrawState | int) -> ProximityMap:
    """Distance from every pool state to ``reference``; exactly N evaluations.

    ``reference`` may be a state or a pool index.
    """
    pool = cs.pool
    if isinstance(reference, (int, np.integer)):
        if not 0 <= reference < cs.N:
            raise ShapeMismatch(f"reference index {reference} outside pool of size {cs.N}")
        prep = d.prepare(pool)
        values = prep.row(int(reference))
        ref_desc = {"pool_index": int(reference)}
    else:
        if reference.shape_key != cs.shape_key:
            raise ShapeMismatch(f"reference has shape {reference.shape_key}, pool has {cs.shape_key}")
        prep = d.prepare(tuple(pool) + (reference,))
        values = prep.row(cs.N, 0, cs.N)
        ref_desc = {"state": repr(reference)}
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        j = int(np.flatnonzero(~np.isfinite(values) | (values < 0))[0])
        raise ValueError(f"distance from pool index {j} to reference is {values[j]}")
    return ProximityMap(values, "lanfear", {"reference": ref_desc, "evaluations": prep.evaluations})


def nn_tour(pairwise, start: int = 0) -> Tour:
    """Nearest-neighbour tour from ``start``.

    ``pairwise`` is anything with ``size`` and ``row(i)`` (a dense
    :class:`PairwiseDistanceMatrix` or a :class:`LazyPairwise`). Ties go to the
    lowest pool index; self-distances never enter the tour.
    """
    N = pairwise.size
    if not 0 <= start < N:
        raise ShapeMismatch(f"start index {start} outside pool of size {N}")
    first = np.array(pairwise.row(start), dtype=float)
    order = np.empty(N, dtype=np.int64)
    cum = np.zeros(N)
    edges = np.zeros(N)
    visited = np.zeros(N, dtype=bool)
    order[0] = cur = start
    visited[start] = True
    r = first
    for t in range(1, N):
        r = first.copy() if t == 1 else np.array(pairwise.row(cur), dtype=float)
        r[visited] = np.inf
        nxt = int(np.argmin(r))
        edges[t] = r[nxt]
        cum[t] = cum[t - 1] + r[nxt]
        order[t] = cur = nxt
        visited[nxt] = True
    edges[0] = first[order[-1]]
    return Tour(order, cum, float(cum[-1] + edges[0]), edges)


def rotation_values(tour: Tour, m: int) -> np.ndarray:
    """Distance travelled from ``x_m`` to each ``x_j`` going forward around the cycle,
    indexed by tour position ``j``."""
    C, L = tour.cumdist, tour.cycle_length
    f = C - C[m]
    f[:m] += L
    return f


def cut_objectives(tour: Tour, cs: ChainSet) -> np.ndarray:
    """Total vertical travel of all chains for every cut position ``m``.

    A transition between tour positions ``lo < hi`` travels ``C[hi] - C[lo]``
    unless the cut falls in ``(lo, hi]``, where it travels ``L - (C[hi] - C[lo])``
    instead. Summing those corrections with a difference array gives all N
    objectives in O(N + transitions).
    """
    N = tour.N
    pos = tour.positions()
    p = pos[cs.index_chains]
    a, b = p[:, :-1].ravel(), p[:, 1:].ravel()
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    moved = lo != hi
    lo, hi = lo[moved], hi[moved]
    delta = tour.cumdist[hi] - tour.cumdist[lo]
    diff = np.zeros(N + 1)
    np.add.at(diff, lo + 1, tour.cycle_length - 2 * delta)
    np.add.at(diff, hi + 1, -(tour.cycle_length - 2 * delta))
    return np.sum(delta) + np.cumsum(diff[:N])


def pick_cut(objectives: np.ndarray, edges: np.ndarray | None = None) -> int:
    """Cut position minimising the objective.

    Objectives within TIE_RTOL of the minimum count as tied. Among tied cuts the
    one removing the longest tour edge wins, which gives the most compact map;
    remaining ties, or ``edges=None``, go to the smallest index.
    """
    obj = np.asarray(objectives, dtype=float)
    tol = TIE_RTOL * float(np.max(np.abs(obj)))
    tied = np.flatnonzero(obj <= obj.min() + tol)
    if edges is None:
        return int(tied[0])
    return int(tied[np.argmax(np.asarray(edges)[tied])])


def cut_point_select(tour: Tour, cs: ChainSet, tie_break: str = "longest_edge") -> ProximityMap:
    """Open the tour at the cut with the least total chain travel.

    ``tie_break`` is ``"longest_edge"`` (see :func:`pick_cut`) or ``"first"``.
    """
    if tour.N != cs.N:
        raise ShapeMismatch(f"tour covers {tour.N} states, pool has {cs.N}")
    if tour.N == 1:
        return ProximityMap(np.zeros(1), "nn", {"start": int(tour.ordering[0]), "cut_index": 0,
                                                "cycle_length": tour.cycle_length, "objective": 0.0,
                                                "tie_break": tie_break})
    if tie_break not in ("longest_edge", "first"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    D = cut_objectives(tour, cs)
    m = pick_cut(D, tour.edges if tie_break == "longest_edge" else None)
    values = np.empty(tour.N)
    values[tour.ordering] = rotation_values(tour, m)
    return ProximityMap(values, "nn", {"start": int(tour.ordering[0]), "cut_index": m,
                                       "cycle_length": tour.cycle_length, "objective": float(D[m]),
                                       "tie_break": tie_break})


def nn_map(cs: ChainSet, pairwise, start: int = 0, tie_break: str = "longest_edge") -> ProximityMap:
    return cut_point_select(nn_tour(pairwise, start), cs, tie_break)


def apply_map(cs: ChainSet, pm: ProximityMap, provenance: dict | None = None) -> MappedChainSet:
    if len(pm) != cs.N:
        raise ShapeMismatch(f"map covers {len(pm)} states, pool has {cs.N}")
    return MappedChainSet(pm.values[cs.index_chains], tuple(cs.chain_ids), dict(provenance or {}))
