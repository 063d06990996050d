"""Differential privacy on the unit simplex via the Dirichlet mechanism.

The mechanism releases a Dirichlet draw concentrated on the sensitive
input, so outputs are always valid probability vectors.  This package
provides the domain model, exact and approximate (epsilon, delta)
accounting for identity and average queries, threshold calibration,
seeded sampling, and a Monte-Carlo audit harness, plus a CLI for
producing reproducible artifacts.
"""

__version__ = "0.1.0"

from ._backend import BACKEND as KERNEL_BACKEND
from .accounting import (
    PartitionParam,
    PrivacyReport,
    calibrate_gamma,
    delta_identity,
    epsilon_average,
    epsilon_average_approx,
    epsilon_identity,
    epsilon_identity_approx,
    omega1_probability,
    privacy_report,
)
from .empirical import (
    AuditConfig,
    AuditResult,
    ExperimentSpec,
    audit_pair,
    logconcavity_probe,
    run_average_experiment,
)
from .mechanism import (
    MechanismConfig,
    RngSeed,
    calibrate_k_for_variance,
    log_density,
    moments,
    privacy_loss,
    sample,
    sample_many,
    worst_case_variance,
)
from .simplex import (
    AdjacencyParams,
    Collection,
    DomainSpec,
    SimplexVector,
    are_b_adjacent,
    average,
    in_restricted_domain,
    make_adjacent,
    restricted_vertices,
)
from .special import BetaBounds, beta_bounds
