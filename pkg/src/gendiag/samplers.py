"""Seeded Metropolis-Hastings runs for the 1-D case studies, synthetic chains
over binary matrices and partitions, and a binned KL divergence.

Randomness comes from numpy's PCG64 generator; each chain draws from its own
stream spawned off ``SeedSequence(seed)``, so a scenario is reproducible from
its seed alone.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp, ndtr

from .errors import EmptyHistogram, GendiagError
from .proposals import RandomWalk, ReflectMixture
from .states import BinaryMatrix, Chain, ChainSet, Partition, build_chain_set, real_chains

RNG_ALGORITHM = "numpy PCG64, one SeedSequence.spawn stream per chain"

DEFAULT_STARTS = (-6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0)


@dataclass(frozen=True)
class GaussianMixture1D:
    weights: tuple
    means: tuple
    sds: tuple

    def __post_init__(self):
        w, m, s = (np.asarray(x, dtype=float) for x in (self.weights, self.means, self.sds))
        if not (w.shape == m.shape == s.shape) or w.ndim != 1 or w.size == 0:
            raise ValueError("weights, means and sds must be equal-length sequences")
        if np.any(w <= 0) or np.any(s <= 0):
            raise ValueError("weights and sds must be positive")
        if not math.isclose(w.sum(), 1.0, rel_tol=1e-9):
            raise ValueError("weights must sum to 1")
        for name, arr in zip(("weights", "means", "sds"), (w, m, s)):
            object.__setattr__(self, name, tuple(arr.tolist()))

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)[..., None]
        m, s, w = np.array(self.means), np.array(self.sds), np.array(self.weights)
        z = (x - m) / s
        comp = np.log(w) - 0.5 * z * z - np.log(s) - 0.5 * math.log(2 * math.pi)
        return logsumexp(comp, axis=-1)

    def scalar_logpdf(self, x: float) -> float:
        comps = [lw - 0.5 * ((x - m) / s) ** 2 - ls
                 for lw, m, s, ls in self._terms]
        top = max(comps)
        if top == -math.inf:
            return top
        return top + math.log(sum(math.exp(c - top) for c in comps))

    @property
    def _terms(self):
        c = 0.5 * math.log(2 * math.pi)
        return [(math.log(w), m, s, math.log(s) + c) for w, m, s in zip(self.weights, self.means, self.sds)]

    def log_density(self, payload):
        """Log density of state payloads shaped ``(..., 1)``."""
        return self.logpdf(np.asarray(payload, dtype=float)[..., 0])

    def cdf(self, x):
        x = np.asarray(x, dtype=float)[..., None]
        return np.sum(np.array(self.weights) * ndtr((x - np.array(self.means)) / np.array(self.sds)), axis=-1)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        comp = rng.choice(len(self.weights), size=size, p=self.weights)
        return np.array(self.means)[comp] + np.array(self.sds)[comp] * rng.standard_normal(size)

    def to_json(self):
        return {"weights": list(self.weights), "means": list(self.means), "sds": list(self.sds)}


# three narrow modes at -3, 0, 3
X3 = GaussianMixture1D((1 / 3, 1 / 3, 1 / 3), (-3.0, 0.0, 3.0), (0.1, 0.1, 0.1))
# two unit-variance modes at -3, 3
X2 = GaussianMixture1D((0.5, 0.5), (-3.0, 3.0), (1.0, 1.0))

TARGETS = {"x3": X3, "x2": X2}


def proposal_from_json(obj):
    fam, sd = obj.get("family"), obj.get("sd")
    if fam == "random_walk":
        return RandomWalk(float(sd))
    if fam == "reflect_mixture":
        return ReflectMixture(float(sd))
    raise GendiagError(f"unknown proposal family {fam!r}")


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    target: GaussianMixture1D
    proposal: object
    starts: tuple = DEFAULT_STARTS
    n_iter: int = 2000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "starts", tuple(float(s) for s in self.starts))
        if not self.starts:
            raise ValueError("need at least one start")
        if self.n_iter < 1:
            raise ValueError("n_iter must be positive")

    def to_json(self) -> dict:
        return {"name": self.name, "target": self.target.to_json(), "proposal": self.proposal.describe(),
                "starts": list(self.starts), "n_iter": self.n_iter, "seed": self.seed}

    def spec_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


_NAMED = {
    "m1": ("x3", RandomWalk(1.0)),
    "m2": ("x3", ReflectMixture(0.1)),
    "m3": ("x2", RandomWalk(0.1)),
    "m4": ("x2", RandomWalk(2.0)),
}


def scenario(name: str, seed: int = 0, n_iter: int = 2000, starts=DEFAULT_STARTS) -> ScenarioSpec:
    """Named case study: m1/m2 on the tri-modal target, m3/m4 on the bi-modal one."""
    try:
        tgt, prop = _NAMED[name]
    except KeyError:
        raise GendiagError(f"unknown scenario {name!r}; choose from {sorted(_NAMED)}") from None
    return ScenarioSpec(name, TARGETS[tgt], prop, starts, n_iter, seed)


def scenario_from_json(obj: dict) -> ScenarioSpec:
    name = obj.get("name", "custom")
    seed = int(obj.get("seed", 0))
    n_iter = int(obj.get("n_iter", 2000))
    starts = obj.get("starts", DEFAULT_STARTS)
    if name in _NAMED and "target" not in obj and "proposal" not in obj:
        return scenario(name, seed, n_iter, starts)
    try:
        t = obj["target"]
        target = TARGETS[t] if isinstance(t, str) else GaussianMixture1D(t["weights"], t["means"], t["sds"])
        proposal = proposal_from_json(obj["proposal"])
    except (KeyError, TypeError) as e:
        raise GendiagError(f"bad scenario spec: {e}") from None
    return ScenarioSpec(name, target, proposal, starts, n_iter, seed)


def chain_rngs(seed: int, k: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(k)]


def mh_draws(spec: ScenarioSpec) -> tuple[np.ndarray, np.ndarray]:
    """Raw draws ``(k, n_iter)`` and per-chain acceptance rates.

    The first draw of each chain is its start. Acceptance uses
    ``min(P(y)/P(x), 1)``, valid because both shipped proposals are symmetric.
    """
    k, n = len(spec.starts), spec.n_iter
    out = np.empty((k, n))
    acc = np.zeros(k)
    logp = spec.target.scalar_logpdf
    for i, (rng, x0) in enumerate(zip(chain_rngs(spec.seed, k), spec.starts)):
        x = np.array([x0])
        lp = logp(x0)
        out[i, 0] = x0
        for t in range(1, n):
            y = spec.proposal.sample(rng, x)
            lpy = logp(float(y[0]))
            u = rng.random()
            if u == 0.0 or math.log(u) <= lpy - lp:
                x, lp = y, lpy
                acc[i] += 1
            out[i, t] = x[0]
    return out, acc / max(n - 1, 1)


def mh_run(spec: ScenarioSpec) -> ChainSet:
    draws, _ = mh_draws(spec)
    return build_chain_set(real_chains(draws))


@dataclass(frozen=True)
class BinaryMatrixChains:
    """Each step resamples every entry with probability ``flip_rate`` from its
    own Bernoulli law, so chains wander around a fixed high-probability matrix."""

    rows: int = 15
    cols: int = 15
    flip_rate: float = 0.02


@dataclass(frozen=True)
class PartitionChains:
    """Each step reassigns every observation with probability ``resample_rate``:
    to its home cluster with probability ``fidelity``, otherwise uniformly."""

    n_obs: int = 30
    n_clusters: int = 3
    resample_rate: float = 0.05
    fidelity: float = 0.8


def synthetic_discrete_chains(kind, k: int, n: int, seed: int = 0, trapped: bool = False,
                              trapped_chain: int = 0) -> ChainSet:
    """Seeded stand-in chains over binary matrices or partitions.

    With ``trapped`` set, chain ``trapped_chain`` is frozen at a state far from
    where the others move: the complement of the typical matrix, or the
    partition putting every observation in one cluster.
    """
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    ss = np.random.SeedSequence(seed)
    shared_seed, chain_seed = ss.spawn(2)
    shared = np.random.Generator(np.random.PCG64(shared_seed))
    rngs = [np.random.Generator(np.random.PCG64(s)) for s in chain_seed.spawn(k)]
    chains = []
    if isinstance(kind, BinaryMatrixChains):
        if not 0 <= kind.flip_rate <= 1:
            raise ValueError("flip_rate must be in [0, 1]")
        shape = (kind.rows, kind.cols)
        # inclusion probabilities near 0 or 1, like a concentrated posterior
        p = np.where(shared.random(shape) < 0.3, 0.9, 0.05)
        for i, rng in enumerate(rngs):
            if trapped and i == trapped_chain:
                frozen = BinaryMatrix((p < 0.5).astype(np.uint8))
                chains.append(Chain([frozen] * n, i))
                continue
            x = (rng.random(shape) < p).astype(np.uint8)
            draws = [BinaryMatrix(x)]
            for _ in range(n - 1):
                redo = rng.random(shape) < kind.flip_rate
                fresh = (rng.random(shape) < p).astype(np.uint8)
                x = np.where(redo, fresh, x)
                draws.append(BinaryMatrix(x))
            chains.append(Chain(draws, i))
    elif isinstance(kind, PartitionChains):
        if not 0 <= kind.resample_rate <= 1:
            raise ValueError("resample_rate must be in [0, 1]")
        home = np.arange(kind.n_obs) % kind.n_clusters
        shared.shuffle(home)
        for i, rng in enumerate(rngs):
            if trapped and i == trapped_chain:
                chains.append(Chain([Partition(np.zeros(kind.n_obs, dtype=np.int64))] * n, i))
                continue
            z = home.copy()
            draws = [Partition(z)]
            for _ in range(n - 1):
                redo = rng.random(kind.n_obs) < kind.resample_rate
                loyal = rng.random(kind.n_obs) < kind.fidelity
                rand = rng.integers(kind.n_clusters, size=kind.n_obs)
                z = np.where(redo, np.where(loyal, home, rand), z)
                draws.append(Partition(z))
            chains.append(Chain(draws, i))
    else:
        raise TypeError(f"unknown chain kind {kind!r}")
    return build_chain_set(chains)


def binned_kl(p_mass: np.ndarray, counts: np.ndarray) -> float:
    """KL(P || Q) where Q is the histogram ``counts`` with one pseudo-count per empty bin."""
    p = np.asarray(p_mass, dtype=float)
    c = np.asarray(counts, dtype=float)
    if c.sum() == 0:
        raise EmptyHistogram("no draws fall in the support")
    c = c + (c == 0)
    p = p / p.sum()
    q = c / c.sum()
    keep = p > 0
    return float(max(0.0, np.sum(p[keep] * np.log(p[keep] / q[keep]))))


def kl_binned(target: GaussianMixture1D, draws: Sequence[float], bin_width: float = 0.1,
              support: tuple = (-7.0, 7.0)) -> float:
    """KL divergence from the binned target to the binned empirical distribution of ``draws``."""
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    lo, hi = support
    nbins = int(round((hi - lo) / bin_width))
    edges = lo + bin_width * np.arange(nbins + 1)
    edges[-1] = hi
    mass = np.diff(target.cdf(edges))
    if mass.sum() < 1 - 1e-6:
        raise ValueError(f"support {support} holds only {mass.sum():.6g} of the target mass")
    counts, _ = np.histogram(np.asarray(draws, dtype=float).ravel(), bins=edges)
    return binned_kl(mass, counts)


def occupancy(draws, lo: float, hi: float) -> float:
    """Fraction of draws strictly inside ``(lo, hi)``."""
    d = np.asarray(draws, dtype=float).ravel()
    return float(np.count_nonzero((d > lo) & (d < hi)) / d.size)
