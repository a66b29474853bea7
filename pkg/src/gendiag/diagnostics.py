"""Univariate multi-chain diagnostics and the generalized diagnostic pipeline."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .distances import LazyPairwise, pairwise_matrix
from .errors import Degenerate, GendiagError, ShapeMismatch, ZeroVarianceWarning
from .proximity import MappedChainSet, ProximityMap, apply_map, lanfear_map, nn_tour, cut_point_select
from .states import ChainSet, DrawState

ESS_METHOD = "per-chain initial positive sequence (Geyer), summed over chains"
PSRF_METHOD = "Gelman-Rubin, no chain splitting, floored at 1"


def _as_chains(chains) -> np.ndarray:
    a = np.asarray(chains, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise ShapeMismatch(f"expected (k, n) chains, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise GendiagError("chains contain non-finite values")
    return a


def autocorrelation(x: np.ndarray) -> np.ndarray:
    """Biased sample autocorrelation at lags 0..n-1, via FFT."""
    n = len(x)
    x = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n] / n
    return acov / acov[0]


def chain_ess(x) -> float:
    """ESS of one chain, ``n / tau`` with the initial positive sequence estimate of ``tau``.

    Lag pairs ``rho(2m) + rho(2m+1)`` are summed while positive. The result is
    kept in ``(0, n]``. A constant chain gets ``n`` and a ZeroVarianceWarning.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if np.ptp(x) == 0:
        warnings.warn("constant chain, ESS reported as its length", ZeroVarianceWarning, stacklevel=2)
        return float(n)
    rho = autocorrelation(x)
    m = n // 2
    pairs = rho[0:2 * m:2] + rho[1:2 * m:2]
    neg = np.flatnonzero(pairs <= 0)
    stop = neg[0] if neg.size else m
    tau = -1.0 + 2.0 * np.sum(pairs[:stop])
    if not tau > 0:
        return float(n)
    return float(min(n / tau, n))


def ess_per_chain(chains) -> tuple[np.ndarray, list[int]]:
    """Per-chain ESS values and the row indices of zero-variance chains."""
    a = _as_chains(chains)
    if a.shape[1] < 4:
        raise ShapeMismatch(f"ESS needs at least 4 draws per chain, got {a.shape[1]}")
    out, flat = np.empty(len(a)), []
    for i, row in enumerate(a):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ZeroVarianceWarning)
            out[i] = chain_ess(row)
        if any(issubclass(w.category, ZeroVarianceWarning) for w in caught):
            flat.append(i)
    return out, flat


def ess(chains) -> float:
    """Total effective sample size: per-chain ESS summed over chains."""
    per, flat = ess_per_chain(chains)
    if flat:
        warnings.warn(f"zero-variance chains {flat}; each contributes its length",
                      ZeroVarianceWarning, stacklevel=2)
    return float(np.sum(per))


def psrf(chains) -> float:
    """Gelman-Rubin potential scale reduction factor.

    ``sqrt(((n-1)/n W + B/n) / W)`` with W the mean within-chain variance and
    B/n the variance of the chain means, floored at 1. Raises :class:`Degenerate`
    when every draw is identical and returns ``inf`` when chains are constant
    at different values.
    """
    a = _as_chains(chains)
    k, n = a.shape
    if k < 2:
        raise ShapeMismatch("PSRF needs at least 2 chains")
    if n < 2:
        raise ShapeMismatch("PSRF needs at least 2 draws per chain")
    W = float(np.mean(np.var(a, axis=1, ddof=1)))
    B_n = float(np.var(np.mean(a, axis=1), ddof=1))
    if W == 0:
        if B_n == 0:
            raise Degenerate("all draws identical; PSRF undefined")
        return math.inf
    return max(1.0, math.sqrt(((n - 1) / n * W + B_n) / W))


def traceplot_table(chains) -> list[tuple[int, int, float]]:
    """Long-format rows ``(chain_id, iter, value)``, chain-major."""
    if isinstance(chains, MappedChainSet):
        vals, ids = chains.values, chains.chain_ids
    else:
        vals = _as_chains(chains)
        ids = range(len(vals))
    return [(int(cid), t, float(v)) for cid, row in zip(ids, vals) for t, v in enumerate(row)]


def write_traceplot_csv(chains, fh: IO[str]) -> None:
    fh.write("chain,iter,value\n")
    for cid, t, v in traceplot_table(chains):
        fh.write(f"{cid},{t},{v!r}\n")


def read_traceplot_csv(fh: IO[str]) -> MappedChainSet:
    reader = csv.reader(fh)
    if next(reader, None) != ["chain", "iter", "value"]:
        raise GendiagError("expected header 'chain,iter,value'")
    rows: dict[int, list[float]] = {}
    for cid, t, v in reader:
        seq = rows.setdefault(int(cid), [])
        if int(t) != len(seq):
            raise GendiagError(f"chain {cid}: non-contiguous iter {t}")
        seq.append(float(v))
    ids = sorted(rows)
    return MappedChainSet(np.array([rows[i] for i in ids]), tuple(ids))


def band_overlap(a: Sequence[float], b: Sequence[float]) -> float:
    """Share of draws from each group falling inside the other group's range.

    0 means the two groups occupy disjoint bands of the traceplot.
    """
    a, b = np.asarray(a, dtype=float).ravel(), np.asarray(b, dtype=float).ravel()
    in_b = np.count_nonzero((a >= b.min()) & (a <= b.max()))
    in_a = np.count_nonzero((b >= a.min()) & (b <= a.max()))
    return (in_a + in_b) / (len(a) + len(b))


def chain_overlap(mapped: MappedChainSet, i: int) -> float:
    """Band overlap between chain row ``i`` and all other chains."""
    v = mapped.values
    return band_overlap(v[i], np.delete(v, i, axis=0))


def split_bands(mapped: MappedChainSet) -> tuple[list[int], list[int]]:
    """Split chain rows in two at the widest gap between sorted chain means."""
    means = mapped.values.mean(axis=1)
    order = np.argsort(means, kind="stable")
    cut = int(np.argmax(np.diff(means[order]))) + 1
    return sorted(order[:cut].tolist()), sorted(order[cut:].tolist())


@dataclass(frozen=True)
class Lanfear:
    reference: DrawState | int = 0


@dataclass(frozen=True)
class NearestNeighbor:
    start: int = 0
    # dense caches the full matrix; otherwise rows are computed as the tour needs them
    dense: bool = False
    tie_break: str = "longest_edge"


@dataclass
class DiagnosticReport:
    ess: float
    psrf: float | None
    per_chain_ess: list
    traceplot: MappedChainSet
    flags: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        psrf = self.psrf if self.psrf is not None and math.isfinite(self.psrf) else None
        return {"ess": self.ess, "psrf": psrf, "per_chain_ess": list(self.per_chain_ess),
                "flags": list(self.flags), "config": self.config}


def summarize(mapped: MappedChainSet, config: dict | None = None) -> DiagnosticReport:
    """ESS, PSRF and flags for already univariate chains."""
    per, flat = ess_per_chain(mapped)
    flags = [f"zero_variance:chain={mapped.chain_ids[i]}" for i in flat]
    if flat:
        warnings.warn(f"constant mapped chains {[mapped.chain_ids[i] for i in flat]}",
                      ZeroVarianceWarning, stacklevel=2)
    p = None
    if mapped.k < 2:
        flags.append("psrf_degenerate" if np.ptp(mapped.values) == 0 else "psrf_undefined:single_chain")
    else:
        try:
            p = psrf(mapped)
        except Degenerate:
            flags.append("psrf_degenerate")
        else:
            if math.isinf(p):
                flags.append("psrf_infinite")
    cfg = {"ess_method": ESS_METHOD, "psrf_method": PSRF_METHOD}
    cfg.update(config or {})
    return DiagnosticReport(float(np.sum(per)), p, [float(x) for x in per], mapped, flags, cfg)


def standard_diagnostics(cs: ChainSet) -> DiagnosticReport:
    """Plain ESS/PSRF on the raw draws of 1-D real chains."""
    if cs.kind != "real_vector" or cs.shape_key[1] != (1,):
        raise ShapeMismatch("standard diagnostics need 1-D real chains")
    raw = MappedChainSet(cs.pool_array()[:, 0][cs.index_chains], tuple(cs.chain_ids), {"map": "identity"})
    return summarize(raw, {"map": "identity"})


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except GendiagError as e:
        try:
            err = type(e)(f"{name}: {e}")
        except TypeError:
            err = GendiagError(f"{name}: {e}")
        raise err from e


def build_map(cs: ChainSet, d, map_choice) -> ProximityMap:
    if isinstance(map_choice, Lanfear):
        return _stage("lanfear map", lanfear_map, cs, d, map_choice.reference)
    if isinstance(map_choice, NearestNeighbor):
        if map_choice.dense:
            pw = _stage("pairwise distances", pairwise_matrix, cs.pool, d)
        else:
            pw = _stage("pairwise distances", LazyPairwise, cs.pool, d)
        tour = _stage("nearest-neighbour tour", nn_tour, pw, map_choice.start)
        return _stage("cut-point selection", cut_point_select, tour, cs, map_choice.tie_break)
    raise TypeError(f"unknown map choice {map_choice!r}")


def run_generalized_diagnostic(cs: ChainSet, d, map_choice=NearestNeighbor()) -> DiagnosticReport:
    """Map every draw to the real line and evaluate ESS, PSRF and the traceplot."""
    pm = build_map(cs, d, map_choice)
    config = {
        "distance": d.describe(),
        "map": {"variant": pm.variant, **{k: v for k, v in pm.meta.items()}},
        "chains": cs.k, "draws_per_chain": cs.n, "unique_states": cs.N,
    }
    mapped = apply_map(cs, pm, config)
    return _stage("diagnostics", summarize, mapped, config)
