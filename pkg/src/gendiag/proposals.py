"""Proposal densities for Metropolis-Hastings, usable both for sampling and
for the MH distance.

``log_q(to, frm)`` broadcasts over leading axes; the trailing axis is the state
dimension. ``log_q_star(frm)`` is ``log max_y Q(y | frm)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
_LOG_HALF = math.log(0.5)


def _normal_logpdf(x, mu, sd):
    z = (np.asarray(x, dtype=float) - mu) / sd
    return -0.5 * np.sum(z * z, axis=-1) - z.shape[-1] * (math.log(sd) + _LOG_SQRT_2PI)


@dataclass(frozen=True)
class RandomWalk:
    """Isotropic Gaussian step: ``Y ~ N(x, sd^2 I)``."""

    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError("proposal sd must be positive")

    def sample(self, rng: np.random.Generator, x: np.ndarray) -> np.ndarray:
        return x + self.sd * rng.standard_normal(np.shape(x))

    def log_q(self, to, frm):
        return _normal_logpdf(to, frm, self.sd)

    def log_q_star(self, frm):
        frm = np.asarray(frm, dtype=float)
        return np.full(frm.shape[:-1], -frm.shape[-1] * (math.log(self.sd) + _LOG_SQRT_2PI))

    def describe(self) -> dict:
        return {"family": "random_walk", "sd": self.sd}


@dataclass(frozen=True)
class ReflectMixture:
    """Equal mixture of ``N(x, sd^2)`` and ``N(-x, sd^2)``.

    The density depends on the pair only through ``(y - x)^2`` and ``(y + x)^2``,
    so ``Q(y|x) = Q(x|y)``.
    """

    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError("proposal sd must be positive")

    def sample(self, rng: np.random.Generator, x: np.ndarray) -> np.ndarray:
        centre = x if rng.random() < 0.5 else -x
        return centre + self.sd * rng.standard_normal(np.shape(x))

    def log_q(self, to, frm):
        frm = np.asarray(frm, dtype=float)
        return _LOG_HALF + np.logaddexp(_normal_logpdf(to, frm, self.sd),
                                        _normal_logpdf(to, -frm, self.sd))

    def log_q_star(self, frm):
        # 1-D: the mixture peaks at 0 when |x| <= sd, otherwise at +-y with
        # y = |x| tanh(|x| y / sd^2), found by bisection; x, -x and 0 are kept as guards
        frm = np.asarray(frm, dtype=float)
        cands = [self.log_q(frm, frm), self.log_q(-frm, frm), self.log_q(np.zeros_like(frm), frm)]
        if frm.shape[-1] == 1:
            cands.append(self.log_q(self._mode(frm), frm))
        return np.maximum.reduce(cands)

    def _mode(self, frm):
        a = np.abs(frm)
        s2 = self.sd * self.sd
        lo, hi = np.zeros_like(a), a.copy()
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            up = a * np.tanh(a * mid / s2) > mid
            lo, hi = np.where(up, mid, lo), np.where(up, hi, mid)
        return np.where(a > self.sd, 0.5 * (lo + hi), 0.0)

    def describe(self) -> dict:
        return {"family": "reflect_mixture", "sd": self.sd}


@dataclass(frozen=True)
class CustomProposal:
    """User-supplied log proposal density.

    Without an analytic ``log_q_star`` the maximum is found by evaluating
    ``log_q`` on ``grid_points`` equally spaced 1-D points in ``bounds``.
    """

    log_q_fn: Callable
    log_q_star_fn: Optional[Callable] = None
    bounds: Optional[tuple] = None
    grid_points: int = 10_000

    def __post_init__(self):
        if self.log_q_star_fn is None and self.bounds is None:
            raise ValueError("need either log_q_star_fn or grid bounds")

    def log_q(self, to, frm):
        return self.log_q_fn(to, frm)

    def log_q_star(self, frm):
        if self.log_q_star_fn is not None:
            return self.log_q_star_fn(frm)
        frm = np.asarray(frm, dtype=float)
        grid = np.linspace(self.bounds[0], self.bounds[1], self.grid_points)[:, None]
        flat = frm.reshape(-1, frm.shape[-1])
        out = np.array([np.max(self.log_q(grid, f)) for f in flat])
        return out.reshape(frm.shape[:-1])

    def describe(self) -> dict:
        return {"family": "custom", "bounds": self.bounds}
