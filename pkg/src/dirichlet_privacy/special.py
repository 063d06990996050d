"""Scalar special functions used by the accounting computations.

Thin facade over the selected kernel backend (compiled extension or
pure-Python fallback) plus the elementary beta-function envelope used by
the approximate privacy level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._backend import BACKEND, digamma, dirichlet_tail, ln_beta, ln_gamma, reg_inc_beta

__all__ = [
    "BACKEND",
    "BetaBounds",
    "beta_bounds",
    "digamma",
    "dirichlet_tail",
    "ln_beta",
    "ln_gamma",
    "reg_inc_beta",
]


@dataclass(frozen=True)
class BetaBounds:
    """Envelope exp(2-a-b) <= beta(a, b) <= (a+b-1) / ((2a-1)(2b-1))."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower > 0.0:
            raise ValueError(f"lower bound must be positive, got {self.lower!r}")
        if self.lower > self.upper:
            raise ValueError(
                f"lower bound {self.lower!r} exceeds upper bound {self.upper!r}"
            )


def beta_bounds(a: float, b: float) -> BetaBounds:
    """Elementary two-sided bounds on beta(a, b), valid for a, b > 1."""
    if not (a > 1.0 and b > 1.0):
        raise ValueError(
            f"beta bounds require a > 1 and b > 1, got a={a!r}, b={b!r}"
        )
    lower = math.exp(2.0 - a - b)
    upper = (a + b - 1.0) / ((2.0 * a - 1.0) * (2.0 * b - 1.0))
    return BetaBounds(lower=lower, upper=upper)
