"""Sampler states, chains, and deduplication into a pool of unique draws."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import EmptyInput, InvalidState, ShapeMismatch


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, order="C", copy=True)
    a.setflags(write=False)
    return a


class _State:
    kind: str = ""

    @property
    def array(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def shape_key(self) -> tuple:
        return (self.kind, self.array.shape)

    def __eq__(self, other):
        if not isinstance(other, _State):
            return NotImplemented
        return canonicalize(self) == canonicalize(other)

    def __hash__(self):
        return hash(canonicalize(self))


@dataclass(frozen=True, eq=False)
class RealVector(_State):
    values: np.ndarray
    kind = "real_vector"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 0:
            v = v.reshape(1)
        if v.ndim != 1 or v.size == 0:
            raise InvalidState("real vector must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(v)):
            raise InvalidState("real vector has non-finite entries")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def array(self):
        return self.values

    def __repr__(self):
        return f"RealVector({self.values.tolist()})"


@dataclass(frozen=True, eq=False)
class BinaryMatrix(_State):
    entries: np.ndarray
    kind = "binary_matrix"

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.ndim != 2:
            raise InvalidState("binary matrix must be 2-D")
        if not np.all((a == 0) | (a == 1)):
            raise InvalidState("binary matrix entries must be 0 or 1")
        object.__setattr__(self, "entries", _frozen(a.astype(np.uint8)))

    @classmethod
    def from_flat(cls, rows: int, cols: int, data: Sequence[int]) -> BinaryMatrix:
        if len(data) != rows * cols:
            raise InvalidState(f"expected {rows * cols} entries, got {len(data)}")
        return cls(np.asarray(data).reshape(rows, cols))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def array(self):
        return self.entries

    def __repr__(self):
        return f"BinaryMatrix({self.rows}x{self.cols})"


@dataclass(frozen=True, eq=False)
class Partition(_State):
    labels: np.ndarray
    kind = "partition"

    def __post_init__(self):
        a = np.asarray(self.labels)
        if a.ndim != 1 or a.size == 0:
            raise InvalidState("partition labels must be a non-empty 1-D sequence")
        if not np.issubdtype(a.dtype, np.integer):
            if not np.all(np.equal(np.mod(a, 1), 0)):
                raise InvalidState("partition labels must be integers")
        if np.any(a < 0):
            raise InvalidState("partition labels must be nonnegative")
        object.__setattr__(self, "labels", _frozen(a.astype(np.int64)))

    @property
    def array(self):
        return self.labels

    def __repr__(self):
        return f"Partition({self.labels.tolist()})"


DrawState = Union[RealVector, BinaryMatrix, Partition]

_TAGS = {"real_vector": b"R", "binary_matrix": b"B", "partition": b"P"}


def canonicalize(state: DrawState) -> bytes:
    """Byte encoding that is equal for two states iff they are exactly equal.

    Reals compare bitwise, so ``0.0`` and ``-0.0`` are distinct states.
    """
    a = state.array
    if state.kind == "real_vector" and not np.all(np.isfinite(a)):
        raise InvalidState("real vector has non-finite entries")
    head = _TAGS[state.kind] + struct.pack(f"<B{a.ndim}Q", a.ndim, *a.shape)
    return head + a.astype(a.dtype.newbyteorder("<"), copy=False).tobytes()


def coassociation(p: Partition) -> BinaryMatrix:
    """Matrix with entry (i, j) = 1 iff observations i and j share a cluster."""
    lab = p.labels
    return BinaryMatrix((lab[:, None] == lab[None, :]).astype(np.uint8))


@dataclass(frozen=True)
class Chain:
    draws: tuple
    chain_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "draws", tuple(self.draws))
        keys = {d.shape_key for d in self.draws}
        if len(keys) > 1:
            raise ShapeMismatch(f"chain {self.chain_id} mixes state shapes: {sorted(map(str, keys))}")

    def __len__(self):
        return len(self.draws)


@dataclass(frozen=True)
class ChainSet:
    chains: tuple
    pool: tuple
    index_chains: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return len(self.chains)

    @property
    def n(self) -> int:
        return len(self.chains[0])

    @property
    def N(self) -> int:
        return len(self.pool)

    @property
    def kind(self) -> str:
        return self.pool[0].kind

    @property
    def shape_key(self) -> tuple:
        return self.pool[0].shape_key

    @property
    def chain_ids(self) -> list[int]:
        return [c.chain_id for c in self.chains]

    def pool_array(self) -> np.ndarray:
        """Stacked payloads of the pool, shape ``(N, *state_shape)``."""
        return np.stack([s.array for s in self.pool])

    def reconstruct(self) -> list[list]:
        return [[self.pool[i] for i in row] for row in self.index_chains]

    def drop_burn_in(self, burn_in: int) -> ChainSet:
        if burn_in <= 0:
            return self
        if burn_in >= self.n:
            raise EmptyInput(f"burn-in {burn_in} leaves no draws (chain length {self.n})")
        return build_chain_set([Chain(c.draws[burn_in:], c.chain_id) for c in self.chains])


def build_chain_set(chains: Sequence[Chain]) -> ChainSet:
    """Deduplicate all draws into a pool in first-occurrence order.

    Chains are scanned in ``chain_id`` order and draws in iteration order.
    """
    if not chains:
        raise EmptyInput("no chains given")
    chains = sorted(chains, key=lambda c: c.chain_id)
    ids = [c.chain_id for c in chains]
    if len(set(ids)) != len(ids):
        raise ShapeMismatch(f"duplicate chain ids: {ids}")
    n = len(chains[0])
    if n == 0:
        raise EmptyInput("chains are empty")
    if any(len(c) != n for c in chains):
        raise ShapeMismatch(f"chains differ in length: {[len(c) for c in chains]}")
    key = chains[0].draws[0].shape_key
    for c in chains:
        if c.draws[0].shape_key != key:
            raise ShapeMismatch(f"chain {c.chain_id} has shape {c.draws[0].shape_key}, expected {key}")

    seen: dict[bytes, int] = {}
    pool = []
    index = np.empty((len(chains), n), dtype=np.int64)
    for i, c in enumerate(chains):
        for j, d in enumerate(c.draws):
            b = canonicalize(d)
            idx = seen.get(b)
            if idx is None:
                idx = seen[b] = len(pool)
                pool.append(d)
            index[i, j] = idx
    index.setflags(write=False)
    return ChainSet(tuple(chains), tuple(pool), index)


def real_chains(values, chain_ids=None) -> list[Chain]:
    """Wrap a ``(k, n)`` or ``(k, n, dim)`` array of draws as chains of RealVector."""
    a = np.asarray(values, dtype=np.float64)
    if a.ndim == 2:
        a = a[..., None]
    if chain_ids is None:
        chain_ids = range(a.shape[0])
    return [Chain([RealVector(x) for x in row], cid) for cid, row in zip(chain_ids, a)]
