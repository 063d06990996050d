"""Bundled reference collection for the average-query experiment.

The collection holds 100 vectors in the restricted domain of the 3-simplex
(eta = eta_bar = 0.05) whose average is pinned to ``TARGET_AVERAGE`` to
within accumulated rounding of order 1e-16.  It ships as package data so
experiment artifacts are exactly reproducible; ``build_collection`` is the
deterministic generator that produced the file and doubles as its
provenance check.

A one-member perturbation of the collection at ``PERTURBED_INDICES`` by
``+/- PERTURBATION`` yields the adjacent collection used as the comparison
arm; the member picked as the perturbation donor is generated with a large
third entry so the shifted member stays inside the domain.
"""

from __future__ import annotations

import csv
import hashlib
import io
from importlib import resources
from pathlib import Path

import numpy as np

from .exceptions import DirichletPrivacyError
from .simplex import Collection, DomainSpec, SimplexVector

#: Domain the collection lives in.  With n = 3 the only admissible
#: two-element constraint set is {1, 2}; the accounting used alongside the
#: experiment depends on |W| and (eta, eta_bar) only.
FIXTURE_DOMAIN = DomainSpec(n=3, w_indices=(1, 2), eta=0.05, eta_bar=0.05)

#: Average of the bundled collection.
TARGET_AVERAGE = (0.363154, 0.315923, 0.320923)

#: 1-based coordinate pair and per-coordinate shift applied to one member
#: to form the adjacent collection (total 1-norm change 2 * PERTURBATION).
PERTURBED_INDICES = (2, 3)
PERTURBATION = 0.5

_GENERATOR_SEED = 20260809
_SIZE = 100
_DONOR_TARGET = np.array([0.06, 0.07, 0.87])
_JITTER = 0.12

_DATA_NAME = "collection_p.csv"

#: SHA-256 of the bundled CSV; the loader refuses silently modified data.
BUNDLED_SHA256 = "771127a813d1149fc604dc99ffa98079eac58e01b1125943bc2c40092a6fcd63"


def build_collection() -> Collection:
    """Regenerate the bundled collection from scratch.

    Ninety-nine members are symmetric jitter pairs around the mean that the
    first 99 rows must hit, and the final member absorbs all accumulated
    rounding so the overall average lands on ``TARGET_AVERAGE``.
    """
    rng = np.random.Generator(np.random.PCG64(_GENERATOR_SEED))
    target = np.array(TARGET_AVERAGE)
    lead_mean = (_SIZE * target - _DONOR_TARGET) / (_SIZE - 1)
    rows = []
    for _ in range(49):
        a, b = rng.uniform(-_JITTER, _JITTER, size=2)
        jitter = np.array([a, b, -a - b])
        rows.append(lead_mean + jitter)
        rows.append(lead_mean - jitter)
    rows.append(lead_mean.copy())
    balancer = _SIZE * target - np.sum(rows, axis=0)
    rows.append(balancer)
    return Collection(
        (SimplexVector(row) for row in rows), domain=FIXTURE_DOMAIN
    )


def collection_csv_bytes(collection: Collection) -> bytes:
    """Canonical CSV serialization (17 significant digits, LF endings)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"p_{i}" for i in range(1, collection.n + 1)])
    for member in collection:
        writer.writerow([format(v, ".17g") for v in member.entries])
    return buf.getvalue().encode("ascii")


def fixture_sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _parse_collection(data: bytes, domain: DomainSpec | None) -> Collection:
    reader = csv.reader(io.StringIO(data.decode("ascii")))
    header = next(reader)
    members = [SimplexVector(float(v) for v in row) for row in reader if row]
    if len(header) != members[0].n:
        raise DirichletPrivacyError("fixture header does not match row width")
    return Collection(members, domain=domain)


def load_collection(path: str | Path | None = None) -> Collection:
    """Load the bundled collection, or a caller-supplied CSV.

    The bundled file is integrity-checked against ``BUNDLED_SHA256``.
    External files skip the domain attachment only if they fail membership,
    never silently: parsing validates every row as a simplex vector and
    bundled data additionally as domain members.
    """
    if path is None:
        data = (
            resources.files("dirichlet_privacy")
            .joinpath(f"data/{_DATA_NAME}")
            .read_bytes()
        )
        digest = fixture_sha256(data)
        if digest != BUNDLED_SHA256:
            raise DirichletPrivacyError(
                f"bundled collection hash mismatch: expected "
                f"{BUNDLED_SHA256}, found {digest}"
            )
        return _parse_collection(data, FIXTURE_DOMAIN)
    data = Path(path).read_bytes()
    return _parse_collection(data, None)


def write_bundled_csv(path: str | Path) -> str:
    """Regenerate the CSV next to the package sources; returns its digest."""
    data = collection_csv_bytes(build_collection())
    Path(path).write_bytes(data)
    return fixture_sha256(data)
