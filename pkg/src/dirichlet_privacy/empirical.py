"""Monte-Carlo auditor and experiment generator.

Checks the two probabilistic-privacy conditions empirically (mass outside
the good region, and the pointwise loss bound inside it), verifies output
moments, and runs the bundled average-query experiment end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fixture as fixture_mod
from .accounting import PartitionParam, PrivacyReport, omega1_probability
from .exceptions import AdjacencyError, DirichletPrivacyError
from .mechanism import (
    MechanismConfig,
    RngSeed,
    privacy_loss_batch,
    sample_many,
)
from .simplex import (
    AdjacencyParams,
    Collection,
    DomainSpec,
    SimplexVector,
    are_b_adjacent,
    average,
    restricted_vertices,
)

#: Slack applied when counting pointwise-loss exceedances, covering the
#: numerical error of the epsilon computation itself.
LOSS_SLACK = 1e-9


@dataclass(frozen=True)
class AuditConfig:
    """Sampling budget, seed, and confidence level for audits."""

    samples: int
    seed: RngSeed
    confidence: float = 0.99

    def __post_init__(self):
        if self.samples < 1000:
            raise ValueError(
                f"audits need at least 1000 samples, got {self.samples!r}"
            )
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(
                f"confidence must lie in (0, 1), got {self.confidence!r}"
            )


@dataclass(frozen=True)
class AuditResult:
    """Empirical counterpart of a privacy report for one adjacent pair."""

    samples: int
    empirical_delta: float
    delta_ci: tuple[float, float]
    max_observed_loss: float
    loss_violations: int
    omega1_count: int
    empirical_mean: SimplexVector
    empirical_variance: tuple[float, ...]
    redraws: int


def _normal_quantile(p: float) -> float:
    """Inverse standard-normal CDF (Acklam's rational approximation)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile needs p in (0, 1), got {p!r}")
    a = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
    b = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00)
    plow, phigh = 0.02425, 1 - 0.02425
    if p < plow:
        q = math.sqrt(-2 * math.log(p))
        return (((((c[0]*q+c[1])*q+c[2])*q+c[3])*q+c[4])*q+c[5]) / \
            ((((d[0]*q+d[1])*q+d[2])*q+d[3])*q+1)
    if p > phigh:
        q = math.sqrt(-2 * math.log(1 - p))
        return -(((((c[0]*q+c[1])*q+c[2])*q+c[3])*q+c[4])*q+c[5]) / \
            ((((d[0]*q+d[1])*q+d[2])*q+d[3])*q+1)
    q = p - 0.5
    r = q * q
    return (((((a[0]*r+a[1])*r+a[2])*r+a[3])*r+a[4])*r+a[5])*q / \
        (((((b[0]*r+b[1])*r+b[2])*r+b[3])*r+b[4])*r+1)


def binomial_ci(successes: int, trials: int, confidence: float) -> tuple[float, float]:
    """Normal-approximation binomial interval with continuity correction."""
    if trials < 1:
        raise ValueError("trials must be positive")
    z = _normal_quantile(0.5 + confidence / 2.0)
    p = successes / trials
    half = z * math.sqrt(p * (1.0 - p) / trials) + 0.5 / trials
    return max(0.0, p - half), min(1.0, p + half)


def audit_pair(
    cfg: MechanismConfig,
    p: SimplexVector,
    q: SimplexVector,
    report: PrivacyReport,
    ac: AuditConfig,
) -> AuditResult:
    """Empirically check a privacy report on one adjacent input pair.

    Draws from the mechanism at ``p``; the fraction of draws leaving the
    good region estimates delta, and every draw inside it has its loss
    against ``q`` compared with the reported epsilon.
    """
    d = report.domain
    effective = AdjacencyParams(b=report.effective_b)
    if not are_b_adjacent(p, q, d, effective):
        raise AdjacencyError(
            "audited vectors are not adjacent at the released-vector level "
            f"(budget {effective.b!r}) for this report"
        )
    batch = sample_many(cfg, p, ac.seed, ac.samples)
    xs = batch.values
    w_cols = [i - 1 for i in d.w_indices]
    in_omega1 = np.all(xs[:, w_cols] >= report.gamma.gamma, axis=1)
    omega2_count = int(ac.samples - in_omega1.sum())
    empirical_delta = omega2_count / ac.samples
    ci = binomial_ci(omega2_count, ac.samples, ac.confidence)
    omega1_xs = xs[in_omega1]
    if omega1_xs.shape[0] == 0 or tuple(p.entries) == tuple(q.entries):
        max_loss = 0.0
        violations = 0
    else:
        losses = privacy_loss_batch(cfg, p, q, omega1_xs)
        max_loss = float(losses.max())
        violations = int((losses > report.epsilon + LOSS_SLACK).sum())
    mean = xs.mean(axis=0)
    variance = tuple(float(v) for v in xs.var(axis=0, ddof=1))
    return AuditResult(
        samples=ac.samples,
        empirical_delta=empirical_delta,
        delta_ci=ci,
        max_observed_loss=max_loss,
        loss_violations=violations,
        omega1_count=int(in_omega1.sum()),
        empirical_mean=SimplexVector(mean / mean.sum()),
        empirical_variance=variance,
        redraws=batch.redraws,
    )


@dataclass(frozen=True)
class ExperimentSpec:
    """Parameters of one average-query experiment arm pair."""

    k: float
    runs: int
    seed: RngSeed
    collection: Collection | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError(f"runs must be positive, got {self.runs!r}")
        if not self.k > 0.0:
            raise ValueError(f"k must be positive, got {self.k!r}")


@dataclass(frozen=True)
class ExperimentResult:
    """Per-run outputs plus the summary statistics of both arms."""

    k: float
    runs: int
    average_p: SimplexVector
    average_q: SimplexVector
    outputs_p: np.ndarray
    outputs_q: np.ndarray
    mean_p: tuple[float, ...]
    mean_q: tuple[float, ...]
    variance_p: tuple[float, ...]
    variance_q: tuple[float, ...]
    perturbed_member: int
    perturbed_indices: tuple[int, int]


def perturbed_collection(collection: Collection) -> tuple[Collection, int]:
    """Adjacent collection: one member shifted by the extremal perturbation.

    Applies ``+PERTURBATION`` / ``-PERTURBATION`` at ``PERTURBED_INDICES``
    to the first member that admits it while keeping every membership
    constraint, and returns the new collection with the donor's index.
    """
    i, j = fixture_mod.PERTURBED_INDICES
    shift = fixture_mod.PERTURBATION
    domain = collection.domain
    for idx, member in enumerate(collection):
        entries = list(member.entries)
        entries[i - 1] += shift
        entries[j - 1] -= shift
        if entries[j - 1] <= 0.0:
            continue
        try:
            candidate = SimplexVector(entries)
        except DirichletPrivacyError:
            continue
        members = list(collection.members)
        members[idx] = candidate
        try:
            return Collection(members, domain=domain), idx
        except DirichletPrivacyError:
            continue
    raise DirichletPrivacyError(
        "no member admits the extremal perturbation inside the domain"
    )


def run_average_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run the repeated-release experiment on both adjacent collections.

    Each run draws one mechanism output per arm from an independent
    substream keyed by (arm, run index), so results do not depend on
    evaluation order.
    """
    collection = spec.collection if spec.collection is not None else fixture_mod.load_collection()
    q_collection, donor = perturbed_collection(collection)
    avg_p = average(collection)
    avg_q = average(q_collection)
    cfg = MechanismConfig(k=spec.k)
    outputs = []
    for arm_idx, avg in enumerate((avg_p, avg_q)):
        shapes = cfg.k * np.asarray(avg.entries)
        rows = np.empty((spec.runs, avg.n))
        for r in range(spec.runs):
            gen = spec.seed.generator(arm_idx, r)
            draw = gen.gamma(shape=shapes)
            rows[r] = draw / draw.sum()
        outputs.append(rows)
    out_p, out_q = outputs
    return ExperimentResult(
        k=spec.k,
        runs=spec.runs,
        average_p=avg_p,
        average_q=avg_q,
        outputs_p=out_p,
        outputs_q=out_q,
        mean_p=tuple(float(v) for v in out_p.mean(axis=0)),
        mean_q=tuple(float(v) for v in out_q.mean(axis=0)),
        variance_p=tuple(float(v) for v in out_p.var(axis=0, ddof=1)),
        variance_q=tuple(float(v) for v in out_q.var(axis=0, ddof=1)),
        perturbed_member=donor,
        perturbed_indices=fixture_mod.PERTURBED_INDICES,
    )


@dataclass(frozen=True)
class ProbeResult:
    passed: bool
    worst_slack: float
    trials: int


def logconcavity_probe(
    cfg: MechanismConfig,
    d: DomainSpec,
    gamma: float | PartitionParam,
    trials: int,
    seed: RngSeed,
    prob_fn=None,
) -> ProbeResult:
    """Midpoint log-concavity check of the good-region probability.

    Samples pairs in the domain's W-projection (as convex combinations of
    its vertices), and verifies that the probability at the midpoint
    dominates the geometric mean of the endpoint probabilities.  A
    replacement ``prob_fn(p_tilde) -> float`` can be injected to self-test
    the harness against a deliberately broken probability.
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials!r}")
    g = gamma.gamma if isinstance(gamma, PartitionParam) else float(gamma)
    if prob_fn is None:
        prob_fn = lambda pt: omega1_probability(cfg, pt, g).value
    vertices = np.array(restricted_vertices(d))
    rng = seed.generator()
    worst = math.inf
    for _ in range(trials):
        weights = rng.dirichlet(np.ones(len(vertices)), size=2)
        u = weights[0] @ vertices
        v = weights[1] @ vertices
        mid = 0.5 * (u + v)
        pu = prob_fn(tuple(u) + (1.0 - float(np.sum(u)),))
        pv = prob_fn(tuple(v) + (1.0 - float(np.sum(v)),))
        pm = prob_fn(tuple(mid) + (1.0 - float(np.sum(mid)),))
        if min(pu, pv, pm) <= 0.0:
            slack = -math.inf if pm <= 0.0 < min(pu, pv) else 0.0
        else:
            slack = math.log(pm) - 0.5 * (math.log(pu) + math.log(pv))
        worst = min(worst, slack)
    return ProbeResult(passed=worst >= -1e-7, worst_slack=worst, trials=trials)
