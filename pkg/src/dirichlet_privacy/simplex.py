"""Unit-simplex domain model.

Defines probability vectors, the restricted domain (interior vectors whose
W-indexed entries stay above ``eta`` and jointly below ``1 - eta_bar``),
the two-entry adjacency relation, collections and their averages, and
vertex enumeration of the restricted domain's W-projection.

All types are immutable; all operations are pure. Coordinate indices in
``W`` are 1-based throughout the public API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .exceptions import (
    AdjacencyError,
    DimensionMismatchError,
    DomainMembershipError,
    InfeasibleDomainError,
    InvalidSimplexError,
)

#: Tolerance for membership and equality checks on double-precision sums.
TOLERANCE = 1e-12


@dataclass(frozen=True)
class SimplexVector:
    """A probability vector: non-negative entries summing to one."""

    entries: tuple[float, ...]

    def __init__(self, entries: Iterable[float]):
        vals = tuple(float(v) for v in entries)
        if len(vals) < 2:
            raise InvalidSimplexError(
                f"simplex vectors need at least 2 entries, got {len(vals)}"
            )
        for v in vals:
            if not v >= 0.0:
                raise InvalidSimplexError(f"negative entry {v!r}")
        total = math.fsum(vals)
        if abs(total - 1.0) > TOLERANCE:
            raise InvalidSimplexError(
                f"entries sum to {total!r}, expected 1 within {TOLERANCE}"
            )
        object.__setattr__(self, "entries", vals)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def is_interior(self) -> bool:
        """True when every entry is strictly positive."""
        return all(v > 0.0 for v in self.entries)

    def __getitem__(self, i: int) -> float:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class DomainSpec:
    """Parameters of the restricted domain.

    ``w_indices`` are 1-based coordinate indices, all at most ``n - 1`` (the
    final coordinate is the slack coordinate and may not be constrained).
    Feasibility requires ``|W| * eta <= 1 - eta_bar``; equality yields a
    one-point domain and is allowed.
    """

    n: int
    w_indices: tuple[int, ...]
    eta: float
    eta_bar: float

    def __init__(self, n: int, w_indices: Iterable[int], eta: float, eta_bar: float):
        n = int(n)
        if n < 2:
            raise InfeasibleDomainError(f"dimension must be at least 2, got {n}")
        w = tuple(sorted(int(i) for i in w_indices))
        if not w:
            raise InfeasibleDomainError("W must be nonempty")
        if len(set(w)) != len(w):
            raise InfeasibleDomainError(f"W has repeated indices: {w}")
        if w[0] < 1 or w[-1] > n - 1:
            raise InfeasibleDomainError(
                f"W indices must lie in 1..{n - 1}, got {w}"
            )
        eta = float(eta)
        eta_bar = float(eta_bar)
        if not 0.0 < eta < 1.0 or not 0.0 < eta_bar < 1.0:
            raise InfeasibleDomainError(
                f"eta and eta_bar must lie in (0, 1), got {eta!r}, {eta_bar!r}"
            )
        if len(w) * eta > 1.0 - eta_bar + TOLERANCE:
            raise InfeasibleDomainError(
                f"|W| * eta = {len(w) * eta!r} exceeds 1 - eta_bar = "
                f"{1.0 - eta_bar!r}; the restricted domain is empty"
            )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "w_indices", w)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "eta_bar", eta_bar)

    @property
    def w_size(self) -> int:
        return len(self.w_indices)

    def project(self, p: SimplexVector) -> tuple[float, ...]:
        """The W-indexed entries of ``p``, in index order."""
        if p.n != self.n:
            raise DimensionMismatchError(
                f"vector has dimension {p.n}, domain expects {self.n}"
            )
        return tuple(p.entries[i - 1] for i in self.w_indices)

    def p_tilde(self, p: SimplexVector) -> tuple[float, ...]:
        """W entries of ``p`` plus the aggregated remainder as final entry."""
        proj = self.project(p)
        return proj + (1.0 - math.fsum(proj),)


@dataclass(frozen=True)
class AdjacencyParams:
    """Adjacency radius: the 1-norm budget b in (0, 1]."""

    b: float

    def __post_init__(self):
        if not 0.0 < self.b <= 1.0:
            raise AdjacencyError(f"b must lie in (0, 1], got {self.b!r}")


@dataclass(frozen=True)
class Collection:
    """An ordered list of same-dimension simplex vectors.

    When ``domain`` is given, every member must lie in the restricted
    domain.
    """

    members: tuple[SimplexVector, ...]
    domain: DomainSpec | None = field(default=None)

    def __init__(self, members: Iterable[SimplexVector], domain: DomainSpec | None = None):
        mem = tuple(members)
        if not mem:
            raise InvalidSimplexError("a collection needs at least one member")
        n = mem[0].n
        for i, p in enumerate(mem):
            if not isinstance(p, SimplexVector):
                raise InvalidSimplexError(f"member {i} is not a SimplexVector")
            if p.n != n:
                raise DimensionMismatchError(
                    f"member {i} has dimension {p.n}, expected {n}"
                )
        if domain is not None:
            if domain.n != n:
                raise DimensionMismatchError(
                    f"domain has dimension {domain.n}, members have {n}"
                )
            for i, p in enumerate(mem):
                if not in_restricted_domain(p, domain):
                    raise DomainMembershipError(
                        f"member {i} lies outside the restricted domain"
                    )
        object.__setattr__(self, "members", mem)
        object.__setattr__(self, "domain", domain)

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def n(self) -> int:
        return self.members[0].n

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


def in_restricted_domain(p: SimplexVector, d: DomainSpec) -> bool:
    """Membership test for the restricted domain.

    True iff ``p`` is interior, every W entry is at least ``eta``, and the
    W entries sum to at most ``1 - eta_bar`` (each inequality checked with
    tolerance ``TOLERANCE``).
    """
    if p.n != d.n:
        raise DimensionMismatchError(
            f"vector has dimension {p.n}, domain expects {d.n}"
        )
    if not p.is_interior:
        return False
    proj = d.project(p)
    if any(v < d.eta - TOLERANCE for v in proj):
        return False
    return math.fsum(proj) <= 1.0 - d.eta_bar + TOLERANCE


def _differing_indices(p: SimplexVector, q: SimplexVector) -> tuple[int, ...]:
    """1-based indices where the two vectors differ beyond tolerance."""
    return tuple(
        i + 1
        for i, (a, b) in enumerate(zip(p.entries, q.entries))
        if abs(a - b) > TOLERANCE
    )


def are_b_adjacent(
    p: SimplexVector, q: SimplexVector, d: DomainSpec, a: AdjacencyParams
) -> bool:
    """Adjacency per the two-entry perturbation relation.

    True iff ``p`` and ``q`` agree outside two W indices and differ by at
    most ``b`` in 1-norm.  Equal vectors count as adjacent (the zero
    perturbation).
    """
    if p.n != q.n:
        raise DimensionMismatchError(
            f"vectors have dimensions {p.n} and {q.n}"
        )
    for name, v in (("first", p), ("second", q)):
        if not in_restricted_domain(v, d):
            raise DomainMembershipError(
                f"{name} vector lies outside the restricted domain"
            )
    diff = _differing_indices(p, q)
    if not diff:
        return True
    if len(diff) != 2:
        return False
    if any(i not in d.w_indices for i in diff):
        return False
    l1 = math.fsum(abs(x - y) for x, y in zip(p.entries, q.entries))
    return l1 <= a.b + TOLERANCE


def make_adjacent(
    p: SimplexVector,
    d: DomainSpec,
    a: AdjacencyParams,
    i: int,
    j: int,
    shift: float,
) -> SimplexVector:
    """Perturb ``p`` by ``+shift`` at index ``i`` and ``-shift`` at ``j``.

    Both indices are 1-based and must lie in W; ``|shift|`` may not exceed
    ``b / 2``; the result must stay inside the restricted domain.
    """
    if i == j:
        raise AdjacencyError("indices i and j must differ")
    for idx in (i, j):
        if idx not in d.w_indices:
            raise AdjacencyError(f"index {idx} is not in W = {d.w_indices}")
    if abs(shift) > a.b / 2.0 + TOLERANCE:
        raise AdjacencyError(
            f"|shift| = {abs(shift)!r} exceeds b/2 = {a.b / 2.0!r}"
        )
    if not in_restricted_domain(p, d):
        raise DomainMembershipError("input vector lies outside the restricted domain")
    entries = list(p.entries)
    entries[i - 1] += shift
    entries[j - 1] -= shift
    if entries[i - 1] < 0.0 or entries[j - 1] < 0.0:
        raise DomainMembershipError(
            f"shift {shift!r} drives an entry below zero"
        )
    q = SimplexVector(entries)
    if not in_restricted_domain(q, d):
        raise DomainMembershipError(
            f"shift {shift!r} at indices ({i}, {j}) leaves the restricted domain"
        )
    return q


def average(c: Collection) -> SimplexVector:
    """Entrywise mean of the collection."""
    n = c.n
    sums = [math.fsum(p.entries[i] for p in c.members) for i in range(n)]
    return SimplexVector(s / c.size for s in sums)


def restricted_vertices(d: DomainSpec) -> list[tuple[float, ...]]:
    """Vertices of the W-projection of the restricted domain.

    The projection is the polytope { y : y_i >= eta, sum(y) <= 1 - eta_bar }
    in ``|W|`` dimensions.  Its vertices are the all-eta point plus, for
    each coordinate, the point where that coordinate takes the remaining
    budget ``1 - eta_bar - (|W| - 1) eta``.  Coincident points (the
    one-point degenerate domain) are deduplicated.
    """
    m = d.w_size
    top = 1.0 - d.eta_bar - (m - 1) * d.eta
    vertices: list[tuple[float, ...]] = [tuple([d.eta] * m)]
    if top > d.eta + TOLERANCE:
        for i in range(m):
            v = [d.eta] * m
            v[i] = top
            vertices.append(tuple(v))
    return vertices


def differing_pair(p: SimplexVector, q: SimplexVector) -> tuple[int, int] | None:
    """The 1-based index pair where two adjacent vectors differ.

    Returns None for equal vectors; raises AdjacencyError when the vectors
    differ in any number of entries other than exactly two or when the
    perturbation is not mass-conserving on the pair.
    """
    if p.n != q.n:
        raise DimensionMismatchError(f"vectors have dimensions {p.n} and {q.n}")
    diff = _differing_indices(p, q)
    if not diff:
        return None
    if len(diff) != 2:
        raise AdjacencyError(
            f"vectors differ at {len(diff)} entries, expected exactly 2"
        )
    i, j = diff
    pi, pj = p.entries[i - 1], p.entries[j - 1]
    qi, qj = q.entries[i - 1], q.entries[j - 1]
    if abs((pi + pj) - (qi + qj)) > TOLERANCE:
        raise AdjacencyError(
            "the perturbation does not conserve mass on the differing pair"
        )
    return i, j
