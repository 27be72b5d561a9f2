"""Telling arcsine branches apart with a second decay measurement.

A single decay probability leaves a discrete tower of bare couplings.
Measuring a different mode settles it, except on modes whose frequency
ratio is an integer: there every unit-decay branch predicts the same
value, and by the classic irrationality argument those are exactly the
perfect-square mode labels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .flow import renormalised_coupling_branches

__all__ = [
    "Measurement",
    "branch_degenerate",
    "unit_decay_spectrum",
    "identify_branch",
    "pairwise_distinctness",
]


@dataclass(frozen=True)
class Measurement:
    """Observed decay probability for mode j with its tolerance."""

    j: int
    probability: float
    tolerance: float

    def __post_init__(self):
        if self.j < 0:
            raise ValueError("mode index must be >= 0")
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("probability must lie in [0, 1]")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be > 0")


def branch_degenerate(j: int) -> bool:
    """True when mode j cannot separate unit-decay branches.

    That happens iff sqrt(j+1) is an integer; decided in exact integer
    arithmetic, so no float threshold is involved.
    """
    if j < 0:
        raise ValueError("mode index must be >= 0")
    r = math.isqrt(j + 1)
    return r * r == j + 1


def unit_decay_spectrum(n: int, j: int) -> float:
    """P_j predicted for mode j by the n-th unit-decay branch.

    Unit decay on mode 0 forces g0 = (n + 1/2)*pi; the other modes then
    read sin^2(sqrt(j+1)*(n+1/2)*pi).
    """
    if n < 0:
        raise ValueError("branch number must be >= 0")
    if j < 0:
        raise ValueError("mode index must be >= 0")
    return float(math.sin(math.sqrt(j + 1.0) * (n + 0.5) * math.pi) ** 2)


def identify_branch(first: Measurement, second: Measurement, n_max: int):
    """Branches consistent with both measurements, with their bare couplings.

    The first measurement must be on mode 0; it generates the candidate
    tower.  A candidate survives when its predictions for both modes sit
    inside the stated tolerances.  Returns (BranchIndex, g0) pairs; for
    non-degenerate second modes and tight tolerances at most one
    survives.
    """
    if first.j != 0:
        raise ValueError("the first measurement must be on mode 0")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    out = []
    for branch, g0 in renormalised_coupling_branches(first.probability, n_max):
        p0 = math.sin(g0) ** 2
        pj = math.sin(g0 * math.sqrt(second.j + 1.0)) ** 2
        if (abs(p0 - first.probability) <= first.tolerance
                and abs(pj - second.probability) <= second.tolerance):
            out.append((branch, g0))
    return out


def pairwise_distinctness(j: int, n_max: int) -> float:
    """Smallest gap between unit-decay predictions on mode j.

    A lower bound on the measurement resolution needed to separate
    branches 0..n_max there.  Degenerate modes are rejected since every
    gap is zero.
    """
    if branch_degenerate(j):
        raise ValueError(f"mode {j} is degenerate: sqrt({j + 1}) is an integer")
    if n_max < 1:
        raise ValueError("need n_max >= 1 for a pairwise gap")
    values = [unit_decay_spectrum(n, j) for n in range(n_max + 1)]
    gap = math.inf
    for a in range(len(values)):
        for b in range(a + 1, len(values)):
            gap = min(gap, abs(values[a] - values[b]))
    return gap
