"""NDJSON chain files and state JSON objects.

One object per line::

    {"chain": 0, "iter": 0, "state": {"type": "real_vector", "values": [0.5]}}
    {"chain": 0, "iter": 1, "state": {"type": "binary_matrix", "rows": 2, "cols": 2, "data": [0, 1, 1, 0]}}
    {"chain": 0, "iter": 2, "state": {"type": "partition", "labels": [0, 0, 1]}}

Iterations must run contiguously from 0 within each chain.
"""

from __future__ import annotations

import json
from collections import defaultdict
from pathlib import Path
from typing import IO, Iterable

from .errors import FormatError, InvalidState
from .states import BinaryMatrix, Chain, ChainSet, DrawState, Partition, RealVector, build_chain_set


def state_to_json(s: DrawState) -> dict:
    if s.kind == "real_vector":
        return {"type": "real_vector", "values": s.values.tolist()}
    if s.kind == "binary_matrix":
        return {"type": "binary_matrix", "rows": s.rows, "cols": s.cols,
                "data": s.entries.ravel().tolist()}
    return {"type": "partition", "labels": s.labels.tolist()}


def state_from_json(obj) -> DrawState:
    if not isinstance(obj, dict):
        raise InvalidState("state must be a JSON object")
    kind = obj.get("type")
    try:
        if kind == "real_vector":
            vals = obj["values"]
            if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in vals):
                raise InvalidState("real_vector values must be numbers")
            return RealVector(vals)
        if kind == "binary_matrix":
            return BinaryMatrix.from_flat(int(obj["rows"]), int(obj["cols"]), obj["data"])
        if kind == "partition":
            return Partition(obj["labels"])
    except KeyError as e:
        raise InvalidState(f"{kind} state missing field {e}") from None
    except TypeError as e:
        raise InvalidState(f"bad {kind} payload: {e}") from None
    raise InvalidState(f"unknown state type {kind!r}")


def write_ndjson(cs: ChainSet | Iterable[Chain], fh: IO[str]) -> None:
    chains = cs.chains if isinstance(cs, ChainSet) else cs
    for c in chains:
        for t, d in enumerate(c.draws):
            rec = {"chain": c.chain_id, "iter": t, "state": state_to_json(d)}
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_ndjson(fh: IO[str]) -> list[Chain]:
    """Parse chains; errors carry the 1-based line number."""
    draws: dict[int, list] = defaultdict(list)
    for lineno, line in enumerate(fh, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise FormatError(f"invalid JSON ({e.msg})", lineno) from None
        if not isinstance(rec, dict):
            raise FormatError("record must be a JSON object", lineno)
        for key in ("chain", "iter", "state"):
            if key not in rec:
                raise FormatError(f"missing field {key!r}", lineno)
        cid, it = rec["chain"], rec["iter"]
        if not isinstance(cid, int) or isinstance(cid, bool) or not isinstance(it, int) or isinstance(it, bool):
            raise FormatError("'chain' and 'iter' must be integers", lineno)
        if it != len(draws[cid]):
            raise FormatError(f"chain {cid}: expected iter {len(draws[cid])}, got {it}", lineno)
        try:
            draws[cid].append(state_from_json(rec["state"]))
        except InvalidState as e:
            raise FormatError(str(e), lineno) from None
    if not draws:
        raise FormatError("no records found")
    return [Chain(draws[cid], cid) for cid in sorted(draws)]


def load_chain_set(path, burn_in: int = 0) -> ChainSet:
    """Read an NDJSON file, drop ``burn_in`` draws per chain, then deduplicate."""
    with open(Path(path)) as fh:
        chains = read_ndjson(fh)
    if burn_in:
        chains = [Chain(c.draws[burn_in:], c.chain_id) for c in chains]
    return build_chain_set(chains)
