"""The Dirichlet mechanism.

Releases a draw from a Dirichlet density concentrated (with weight ``k``)
on the sensitive input vector.  This module covers density evaluation,
seeded sampling, the pointwise privacy-loss ratio between adjacent inputs,
and output moments with the accuracy/privacy knob that follows from them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import (
    AdjacencyError,
    DimensionMismatchError,
    DomainMembershipError,
    NumericalError,
    UnboundedDensityError,
)
from .simplex import TOLERANCE, SimplexVector, differing_pair
from .special import ln_gamma

_MAX_REDRAW_ROUNDS = 100


@dataclass(frozen=True)
class MechanismConfig:
    """Concentration multiplier k > 0; larger k means lower output variance."""

    k: float

    def __post_init__(self):
        if not self.k > 0.0:
            raise ValueError(f"k must be positive, got {self.k!r}")


@dataclass(frozen=True)
class RngSeed:
    """Reproducibility contract: a (seed, stream) pair of 64-bit integers.

    Independent streams (and keys derived from them) are realized through
    numpy's SeedSequence spawning, so results are independent of scheduling
    when work is partitioned across streams.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        for name, v in (("seed", self.seed), ("stream", self.stream)):
            if not 0 <= int(v) < 2**64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v!r}")

    def generator(self, *extra_keys: int) -> np.random.Generator:
        """A PCG64 generator on the stream identified by (stream, extra_keys)."""
        seq = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream, *extra_keys)
        )
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class SampleBatch:
    """Mechanism draws as rows, with redraw diagnostics.

    ``redraws`` counts rows that were re-sampled because floating-point
    underflow produced a zero coordinate (vanishingly rare; nonzero values
    indicate extremely small k * p entries).
    """

    values: np.ndarray
    redraws: int

    @property
    def count(self) -> int:
        return self.values.shape[0]


def _require_interior(p: SimplexVector, name: str) -> None:
    if not p.is_interior:
        raise DomainMembershipError(f"{name} must be interior (all entries > 0)")


def log_density(cfg: MechanismConfig, p: SimplexVector, x: SimplexVector) -> float:
    """Log of the Dirichlet density of output ``x`` for input ``p``.

    The density is taken with respect to Lebesgue measure on the first
    n - 1 coordinates.  Zero coordinates in ``x`` yield ``-inf`` when the
    corresponding exponent is non-negative and an error when the density
    is unbounded there.
    """
    _require_interior(p, "input vector p")
    if p.n != x.n:
        raise DimensionMismatchError(f"p has dimension {p.n}, x has {x.n}")
    k = cfg.k
    log_b = math.fsum(ln_gamma(k * pi) for pi in p.entries) - ln_gamma(k)
    total = -log_b
    for pi, xi in zip(p.entries, x.entries):
        exponent = k * pi - 1.0
        if xi == 0.0:
            if exponent < 0.0:
                raise UnboundedDensityError(
                    f"density is unbounded at a zero coordinate with "
                    f"k * p_i = {k * pi!r} < 1"
                )
            if exponent == 0.0:
                continue
            return -math.inf
        total += exponent * math.log(xi)
    return total


def sample_many(
    cfg: MechanismConfig, p: SimplexVector, seed: RngSeed, count: int
) -> SampleBatch:
    """Draw ``count`` outputs by normalizing gamma variates.

    Deterministic given the seed.  Rows containing exact zeros after
    normalization (underflow at tiny shape parameters) are redrawn and
    counted in the result's diagnostics.
    """
    _require_interior(p, "input vector p")
    if count < 1:
        raise ValueError(f"count must be positive, got {count!r}")
    shapes = cfg.k * np.asarray(p.entries)
    gen = seed.generator()
    values = gen.gamma(shape=shapes, size=(count, p.n))
    values /= values.sum(axis=1, keepdims=True)
    redraws = 0
    for _ in range(_MAX_REDRAW_ROUNDS):
        bad = ~np.all(np.isfinite(values) & (values > 0.0), axis=1)
        n_bad = int(bad.sum())
        if n_bad == 0:
            return SampleBatch(values=values, redraws=redraws)
        redraws += n_bad
        redrawn = gen.gamma(shape=shapes, size=(n_bad, p.n))
        redrawn /= redrawn.sum(axis=1, keepdims=True)
        values[bad] = redrawn
    raise NumericalError(
        f"sampling kept producing zero coordinates after "
        f"{_MAX_REDRAW_ROUNDS} redraw rounds (k p = {tuple(shapes)!r})"
    )


def sample(cfg: MechanismConfig, p: SimplexVector, seed: RngSeed) -> SimplexVector:
    """One mechanism output."""
    batch = sample_many(cfg, p, seed, 1)
    return SimplexVector(batch.values[0])


def privacy_loss(
    cfg: MechanismConfig, p: SimplexVector, q: SimplexVector, x: SimplexVector
) -> float:
    """Log-likelihood ratio of observing ``x`` under inputs ``p`` vs ``q``.

    Requires ``p`` and ``q`` to differ at exactly two mass-conserving
    entries (or to be equal, giving zero loss) and ``x`` to be interior.
    """
    if p.n != q.n or p.n != x.n:
        raise DimensionMismatchError(
            f"dimensions differ: p={p.n}, q={q.n}, x={x.n}"
        )
    _require_interior(x, "output vector x")
    pair = differing_pair(p, q)
    if pair is None:
        return 0.0
    i, j = pair
    k = cfg.k
    pi, pj = p.entries[i - 1], p.entries[j - 1]
    qi, qj = q.entries[i - 1], q.entries[j - 1]
    xi, xj = x.entries[i - 1], x.entries[j - 1]
    return (
        ln_gamma(k * qi)
        + ln_gamma(k * qj)
        - ln_gamma(k * pi)
        - ln_gamma(k * pj)
        + k * (pi - qi) * math.log(xi / xj)
    )


def privacy_loss_batch(
    cfg: MechanismConfig, p: SimplexVector, q: SimplexVector, xs: np.ndarray
) -> np.ndarray:
    """Vectorized privacy loss over rows of interior outputs ``xs``."""
    if xs.ndim != 2 or xs.shape[1] != p.n:
        raise DimensionMismatchError(
            f"expected outputs of shape (count, {p.n}), got {xs.shape}"
        )
    pair = differing_pair(p, q)
    if pair is None:
        return np.zeros(xs.shape[0])
    i, j = pair
    k = cfg.k
    pi, pj = p.entries[i - 1], p.entries[j - 1]
    qi, qj = q.entries[i - 1], q.entries[j - 1]
    const = (
        ln_gamma(k * qi) + ln_gamma(k * qj) - ln_gamma(k * pi) - ln_gamma(k * pj)
    )
    return const + k * (pi - qi) * (np.log(xs[:, i - 1]) - np.log(xs[:, j - 1]))


def moments(
    cfg: MechanismConfig, p: SimplexVector
) -> tuple[SimplexVector, tuple[float, ...]]:
    """Exact output mean (the input itself) and per-coordinate variance."""
    _require_interior(p, "input vector p")
    denom = cfg.k + 1.0
    variance = tuple(pi * (1.0 - pi) / denom for pi in p.entries)
    return p, variance


def worst_case_variance(cfg: MechanismConfig) -> float:
    """Largest per-coordinate output variance over all inputs."""
    return 1.0 / (4.0 * (cfg.k + 1.0))


def calibrate_k_for_variance(target_variance: float) -> MechanismConfig:
    """Smallest k whose worst-case output variance equals the target."""
    if not 0.0 < target_variance < 0.25:
        raise ValueError(
            f"target variance must lie in (0, 0.25), got {target_variance!r}"
        )
    return MechanismConfig(k=0.25 / target_variance - 1.0)
