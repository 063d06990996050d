"""(epsilon, delta) accounting for identity and average queries.

delta comes from minimizing the probability that every constrained output
coordinate clears the partition threshold gamma; log-concavity of that
probability lets the minimization run over the handful of domain vertices
only.  epsilon has a closed form in beta-function ratios, with an optional
elementary upper bound replacing the betas when all their arguments exceed
one.  gamma itself is calibrated by bisection against an admissible delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Sequence

import numpy as np

from .exceptions import (
    ApproximationInvalidError,
    CalibrationInfeasibleError,
    DomainTooTightError,
)
from .mechanism import MechanismConfig
from .simplex import TOLERANCE, AdjacencyParams, DomainSpec, restricted_vertices
from .special import dirichlet_tail, ln_beta

#: Absolute tolerance requested from the quadrature behind each
#: vertex probability.
QUADRATURE_TOL = 1e-9

#: Monte-Carlo draw count for domains with more than three constrained
#: coordinates, where nested quadrature stops being practical.
MC_DRAWS = 10**6
_MC_ENTROPY = 0x0D1A1C

#: Search floor and absolute bisection tolerance for gamma calibration.
GAMMA_FLOOR = 1e-12
GAMMA_BISECT_TOL = 1e-10

DivisorConvention = Literal["collection_size", "dimension"]


@dataclass(frozen=True)
class PartitionParam:
    """Output-space partition threshold gamma for a given |W|.

    The region where all W coordinates are at least gamma must be nonempty,
    which bounds gamma by 1 / |W|.
    """

    gamma: float
    w_size: int

    def __post_init__(self):
        if self.w_size < 1:
            raise ValueError(f"w_size must be positive, got {self.w_size!r}")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if (self.w_size - 1) * self.gamma >= 1.0:
            raise ValueError(
                f"(|W| - 1) * gamma = {(self.w_size - 1) * self.gamma!r} "
                f"must stay below 1"
            )
        if self.w_size * self.gamma > 1.0 + TOLERANCE:
            raise ValueError(
                f"|W| * gamma = {self.w_size * self.gamma!r} must not exceed 1"
            )


class Omega1Estimate(NamedTuple):
    """A vertex probability with its numerical error estimate."""

    value: float
    error: float
    method: str


class VertexDiagnostic(NamedTuple):
    """Per-vertex probability record carried into reports."""

    vertex: tuple[float, ...]
    probability: float
    error: float
    method: str


@dataclass(frozen=True)
class ReportDiagnostics:
    vertices: tuple[VertexDiagnostic, ...]
    argmin_vertex: tuple[float, ...]
    calibrated: bool
    gamma_binding: bool


@dataclass(frozen=True)
class PrivacyReport:
    """Bundled accounting output for one query setting."""

    epsilon: float
    epsilon_approx: float | None
    delta: float
    gamma: PartitionParam
    query: str
    collection_size: int | None
    divisor_convention: DivisorConvention
    domain: DomainSpec
    adjacency: AdjacencyParams
    mechanism: MechanismConfig
    diagnostics: ReportDiagnostics

    @property
    def approximated(self) -> bool:
        return self.epsilon_approx is not None

    @property
    def effective_b(self) -> float:
        """Adjacency budget at the released-vector level.

        Identity queries release the vector itself; average queries
        release a mean that moves by at most ``b / divisor`` in 1-norm
        when one collection member changes.
        """
        if self.query == "identity":
            return self.adjacency.b
        divisor = (
            self.collection_size
            if self.divisor_convention == "collection_size"
            else self.domain.n
        )
        return self.adjacency.b / divisor


def _as_gamma(gamma: float | PartitionParam, w_size: int) -> float:
    if isinstance(gamma, PartitionParam):
        if gamma.w_size != w_size:
            raise ValueError(
                f"partition parameter was built for |W| = {gamma.w_size}, "
                f"this domain has |W| = {w_size}"
            )
        return gamma.gamma
    return float(gamma)


def omega1_probability(
    cfg: MechanismConfig,
    p_tilde: Sequence[float],
    gamma: float | PartitionParam,
) -> Omega1Estimate:
    """Probability that all constrained coordinates clear gamma.

    ``p_tilde`` is the input projected onto the constrained coordinates
    with the aggregated remainder appended; the mechanism output restricted
    to those coordinates is Dirichlet with parameters ``k * p_tilde``.
    Closed form for one constrained coordinate, nested adaptive quadrature
    for two or three, Monte-Carlo with reported standard error above that.
    """
    pt = tuple(float(v) for v in p_tilde)
    m = len(pt) - 1
    if m < 1:
        raise ValueError("p_tilde needs at least two entries")
    if any(not v > 0.0 for v in pt):
        raise ValueError(f"p_tilde must be interior, got {pt!r}")
    if abs(math.fsum(pt) - 1.0) > TOLERANCE:
        raise ValueError(f"p_tilde entries must sum to 1, got {math.fsum(pt)!r}")
    g = _as_gamma(gamma, m)
    if g * m > 1.0:
        return Omega1Estimate(value=0.0, error=0.0, method="infeasible_gamma")
    alphas = tuple(cfg.k * v for v in pt)
    if m == 1:
        value, err = dirichlet_tail(alphas, g, QUADRATURE_TOL)
        return Omega1Estimate(value=value, error=err, method="closed_form")
    if m <= 3:
        value, err = dirichlet_tail(alphas, g, QUADRATURE_TOL)
        return Omega1Estimate(value=value, error=err, method="quadrature")
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=_MC_ENTROPY))
    )
    draws = rng.gamma(shape=np.asarray(alphas), size=(MC_DRAWS, len(alphas)))
    draws /= draws.sum(axis=1, keepdims=True)
    hits = np.all(draws[:, :m] >= g, axis=1)
    value = float(hits.mean())
    stderr = math.sqrt(max(value * (1.0 - value), 1.0 / MC_DRAWS) / MC_DRAWS)
    return Omega1Estimate(value=value, error=stderr, method="monte_carlo")


def _vertex_p_tilde(vertex: Sequence[float]) -> tuple[float, ...]:
    return tuple(vertex) + (1.0 - math.fsum(vertex),)


def _vertex_estimates(
    cfg: MechanismConfig, d: DomainSpec, gamma: float | PartitionParam
) -> list[VertexDiagnostic]:
    """Omega-1 probability at every domain vertex.

    Permuting constrained coordinates leaves the probability unchanged, so
    vertices sharing a sorted projection reuse one evaluation.
    """
    g = _as_gamma(gamma, d.w_size)
    cache: dict[tuple[float, ...], Omega1Estimate] = {}
    out = []
    for vertex in restricted_vertices(d):
        key = tuple(sorted(vertex))
        est = cache.get(key)
        if est is None:
            est = omega1_probability(cfg, _vertex_p_tilde(vertex), g)
            cache[key] = est
        out.append(
            VertexDiagnostic(
                vertex=vertex,
                probability=est.value,
                error=est.error,
                method=est.method,
            )
        )
    return out


def delta_identity(
    cfg: MechanismConfig, d: DomainSpec, gamma: float | PartitionParam
) -> tuple[float, tuple[float, ...]]:
    """delta and the vertex attaining it.

    delta is one minus the smallest vertex probability; log-concavity of
    the probability over the domain makes the vertex minimum global.
    """
    estimates = _vertex_estimates(cfg, d, gamma)
    worst = min(estimates, key=lambda e: e.probability)
    return 1.0 - worst.probability, worst.vertex


def _epsilon_terms(
    cfg: MechanismConfig,
    d: DomainSpec,
    a: AdjacencyParams,
    gamma: float | PartitionParam,
    divisor: int,
) -> tuple[float, float, float]:
    """Shared scaffolding for the exact privacy level.

    Returns the four beta arguments' half-shift, and the two epsilon terms.
    """
    if divisor < 1:
        raise ValueError(f"divisor must be a positive integer, got {divisor!r}")
    k, eta, eta_bar = cfg.k, d.eta, d.eta_bar
    shift = a.b / (2.0 * divisor)
    if 2.0 * eta + eta_bar + shift >= 1.0:
        raise DomainTooTightError(
            f"2 eta + eta_bar + b/(2 divisor) = "
            f"{2.0 * eta + eta_bar + shift!r} must stay below 1 for the "
            f"privacy level to be defined"
        )
    g = _as_gamma(gamma, d.w_size)
    PartitionParam(gamma=g, w_size=d.w_size)
    first = ln_beta(k * eta, k * (1.0 - eta_bar - eta)) - ln_beta(
        k * (eta + shift), k * (1.0 - eta_bar - eta - shift)
    )
    second = k * shift * math.log((1.0 - (d.w_size - 1) * g) / g)
    return shift, first, second


def epsilon_identity(
    cfg: MechanismConfig,
    d: DomainSpec,
    a: AdjacencyParams,
    gamma: float | PartitionParam,
) -> float:
    """Privacy level for releasing a single vector."""
    _, first, second = _epsilon_terms(cfg, d, a, gamma, divisor=1)
    return first + second


def epsilon_identity_approx(
    cfg: MechanismConfig,
    d: DomainSpec,
    a: AdjacencyParams,
    gamma: float | PartitionParam,
) -> float:
    """Upper bound on the identity privacy level via the beta envelope.

    Replaces the numerator beta by its elementary upper bound and the
    denominator by its lower bound, so the result always dominates
    ``epsilon_identity``.  Only valid when all four beta arguments exceed
    one; refuses otherwise.
    """
    return _epsilon_approx(cfg, d, a, gamma, divisor=1)


def _epsilon_approx(
    cfg: MechanismConfig,
    d: DomainSpec,
    a: AdjacencyParams,
    gamma: float | PartitionParam,
    divisor: int,
) -> float:
    shift, _, second = _epsilon_terms(cfg, d, a, gamma, divisor)
    k, eta, eta_bar = cfg.k, d.eta, d.eta_bar
    args = (
        k * eta,
        k * (1.0 - eta_bar - eta),
        k * (eta + shift),
        k * (1.0 - eta_bar - eta - shift),
    )
    if any(v <= 1.0 for v in args):
        raise ApproximationInvalidError(
            f"the beta envelope needs every argument above 1, got {args!r}"
        )
    a1, b1, a2, b2 = args
    upper_num = math.log((a1 + b1 - 1.0) / ((2.0 * a1 - 1.0) * (2.0 * b1 - 1.0)))
    lower_den = 2.0 - a2 - b2
    return upper_num - lower_den + second


def epsilon_average(
    cfg: MechanismConfig,
    d: DomainSpec,
    a: AdjacencyParams,
    gamma: float | PartitionParam,
    collection_size: int,
    convention: DivisorConvention = "collection_size",
) -> float:
    """Privacy level for releasing the average of a collection.

    One member changing by at most ``b`` moves the average by at most
    ``b / (2 N)`` per entry, so the identity-level formula applies with the
    shift scaled down by the collection size.  The paper-literal dimension
    divisor is available behind ``convention="dimension"`` for comparison
    studies.
    """
    if collection_size < 1:
        raise ValueError(
            f"collection size must be a positive integer, got {collection_size!r}"
        )
    divisor = collection_size if convention == "collection_size" else d.n
    _, first, second = _epsilon_terms(cfg, d, a, gamma, divisor=divisor)
    return first + second


def epsilon_average_approx(
    cfg: MechanismConfig,
    d: DomainSpec,
    a: AdjacencyParams,
    gamma: float | PartitionParam,
    collection_size: int,
    convention: DivisorConvention = "collection_size",
) -> float:
    """Beta-envelope upper bound on the average-query privacy level."""
    if collection_size < 1:
        raise ValueError(
            f"collection size must be a positive integer, got {collection_size!r}"
        )
    divisor = collection_size if convention == "collection_size" else d.n
    return _epsilon_approx(cfg, d, a, gamma, divisor=divisor)


def calibrate_gamma(
    cfg: MechanismConfig, d: DomainSpec, delta_hat: float
) -> PartitionParam:
    """Largest gamma whose worst-vertex failure probability stays within
    ``delta_hat``.

    The vertex probability decreases strictly in gamma, so plain bisection
    applies; at the result delta binds at ``delta_hat`` unless even the
    cap ``1 / |W|`` satisfies the constraint.
    """
    if not 0.0 < delta_hat < 1.0:
        raise ValueError(f"delta_hat must lie in (0, 1), got {delta_hat!r}")
    m = d.w_size
    target = 1.0 - delta_hat

    def min_prob(g: float) -> float:
        return min(e.probability for e in _vertex_estimates(cfg, d, g))

    cap = 1.0 / m
    if min_prob(GAMMA_FLOOR) < target:
        raise CalibrationInfeasibleError(
            f"no gamma at or above {GAMMA_FLOOR} keeps the failure "
            f"probability within delta_hat = {delta_hat!r}"
        )
    if min_prob(cap) >= target:
        return PartitionParam(gamma=cap, w_size=m)
    lo, hi = GAMMA_FLOOR, cap
    while hi - lo > GAMMA_BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if min_prob(mid) >= target:
            lo = mid
        else:
            hi = mid
    return PartitionParam(gamma=lo, w_size=m)


def privacy_report(
    cfg: MechanismConfig,
    d: DomainSpec,
    a: AdjacencyParams,
    query: str,
    *,
    delta_hat: float | None = None,
    gamma: float | PartitionParam | None = None,
    collection_size: int | None = None,
    convention: DivisorConvention = "collection_size",
) -> PrivacyReport:
    """Full accounting bundle for one setting.

    Exactly one of ``delta_hat`` (auto-calibration) or ``gamma`` must be
    supplied.  For average queries ``collection_size`` is required.
    """
    if (delta_hat is None) == (gamma is None):
        raise ValueError("supply exactly one of delta_hat or gamma")
    if query not in ("identity", "average"):
        raise ValueError(f"query must be 'identity' or 'average', got {query!r}")
    if query == "average" and collection_size is None:
        raise ValueError("average queries need a collection size")
    calibrated = gamma is None
    if calibrated:
        part = calibrate_gamma(cfg, d, delta_hat)
    else:
        part = (
            gamma
            if isinstance(gamma, PartitionParam)
            else PartitionParam(gamma=float(gamma), w_size=d.w_size)
        )
        _as_gamma(part, d.w_size)
    estimates = _vertex_estimates(cfg, d, part.gamma)
    worst = min(estimates, key=lambda e: e.probability)
    delta = 1.0 - worst.probability
    if query == "identity":
        eps = epsilon_identity(cfg, d, a, part)
        try:
            eps_approx = epsilon_identity_approx(cfg, d, a, part)
        except ApproximationInvalidError:
            eps_approx = None
    else:
        eps = epsilon_average(cfg, d, a, part, collection_size, convention)
        try:
            eps_approx = epsilon_average_approx(
                cfg, d, a, part, collection_size, convention
            )
        except ApproximationInvalidError:
            eps_approx = None
    binding = part.gamma < 1.0 / d.w_size - GAMMA_BISECT_TOL
    return PrivacyReport(
        epsilon=eps,
        epsilon_approx=eps_approx,
        delta=delta,
        gamma=part,
        query=query,
        collection_size=collection_size,
        divisor_convention=convention,
        domain=d,
        adjacency=a,
        mechanism=cfg,
        diagnostics=ReportDiagnostics(
            vertices=tuple(estimates),
            argmin_vertex=worst.vertex,
            calibrated=calibrated,
            gamma_binding=binding,
        ),
    )
