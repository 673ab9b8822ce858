"""Serial priority mechanisms under lower/upper quotas.

`run_priolq` is a serial dictatorship with a menu restriction: students pick
their favorite project in priority order, but once the remaining students are
exactly as many as the unfilled lower-quota seats, menus shrink to the
quota-deficient projects so that every lower quota can still be met.

`run_rplq_exact` averages that mechanism over all n! priority orders with
exact rational weights; `run_rplq_sampled` is the seeded Monte Carlo
estimator for markets too large to enumerate. `clone_market` extends any
mechanism to multi-unit demand by cloning students.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .model import Market, Matrix, choice, validate_permutation

#: largest n for which run_rplq_exact enumerates all n! orders
EXACT_ENUMERATION_LIMIT = 8


@dataclass(frozen=True)
class RplqResult:
    """Outcome of the random-priority lottery.

    `assignment` is the averaged n x k matrix. `mode` is "exact" when all n!
    orders were enumerated, "monte-carlo" when estimated from `samples` seeded
    draws.
    """

    assignment: Matrix
    mode: str
    samples: Optional[int] = None
    seed: Optional[int] = None


def run_priolq(market: Market, order: Sequence[int]) -> Matrix:
    """Serial dictatorship with lower-quota menu restriction.

    Students are processed in `order` (a permutation of 0..n-1). At each
    step, if the unfilled lower-quota seats number strictly fewer than the
    students left to place, the current student chooses among all projects
    with remaining upper capacity; otherwise every remaining seat is needed
    for a lower quota and the menu is restricted to the quota-deficient
    projects.

    Returns a deterministic 0/1 assignment matrix, always feasible.

    Only integer quotas are supported: with fractional pinned quotas no
    deterministic assignment is feasible at all, so the mechanism has no
    well-defined outcome.
    """
    if not market.has_integer_quotas():
        raise ValueError("priority mechanisms require integer quotas")
    order = validate_permutation(order, market.n)
    counts = [0] * market.k
    rows = [[0] * market.k for _ in range(market.n)]
    for step, student in enumerate(order):
        remaining = market.n - step
        deficient = [p for p in range(market.k) if counts[p] < market.lower[p]]
        unfilled = sum(market.lower[p] - counts[p] for p in deficient)
        # feasibility of the partial assignment; a failure here is a bug
        assert unfilled <= remaining
        if unfilled < remaining:
            menu = [p for p in range(market.k) if counts[p] < market.upper[p]]
        else:
            menu = deficient
        best = choice(market.prefs, student, menu)
        rows[student][best] = 1
        counts[best] += 1
    return tuple(tuple(row) for row in rows)


def run_rplq_exact(market: Market, limit: int = EXACT_ENUMERATION_LIMIT) -> RplqResult:
    """Average run_priolq over all n! priority orders, exactly.

    Every entry of the result is a Fraction with denominator dividing n!.
    Markets with n > `limit` are rejected; use run_rplq_sampled for those.
    """
    if market.n > limit:
        raise ValueError(
            f"n={market.n} exceeds the exact-enumeration limit {limit};"
            " use run_rplq_sampled instead"
        )
    totals = [[0] * market.k for _ in range(market.n)]
    for order in itertools.permutations(range(market.n)):
        outcome = run_priolq(market, order)
        for i in range(market.n):
            for j in range(market.k):
                totals[i][j] += outcome[i][j]
    weight = Fraction(1, math.factorial(market.n))
    assignment = tuple(
        tuple(weight * totals[i][j] for j in range(market.k)) for i in range(market.n)
    )
    return RplqResult(assignment=assignment, mode="exact")


def run_rplq_sampled(market: Market, samples: int, seed: int) -> RplqResult:
    """Monte Carlo estimate of the random-priority lottery.

    Draws `samples` uniform priority orders from a deterministic generator
    seeded with `seed` (Fisher-Yates shuffles) and averages the outcomes.
    Entries are exact rationals with denominator dividing `samples`, rows
    sum to exactly 1, and results are reproducible for a fixed seed.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = random.Random(seed)
    totals = [[0] * market.k for _ in range(market.n)]
    order = list(range(market.n))
    for _ in range(samples):
        rng.shuffle(order)
        outcome = run_priolq(market, order)
        for i in range(market.n):
            for j in range(market.k):
                totals[i][j] += outcome[i][j]
    assignment = tuple(
        tuple(Fraction(totals[i][j], samples) for j in range(market.k))
        for i in range(market.n)
    )
    return RplqResult(assignment=assignment, mode="monte-carlo", samples=samples, seed=seed)


def clone_market(market: Market, q: int) -> tuple:
    """Clone every student q times, for multi-unit assignment.

    Clone j of student i sits at row i*q + j of the cloned market and
    inherits the student's ranking. Requires sum(l) <= q*n <= sum(u) so the
    cloned market is feasible.

    Returns (cloned_market, aggregate) where aggregate maps any matrix over
    the cloned students back to an n x k matrix by summing clone rows; rows
    of the aggregate of a feasible assignment each sum to q.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    if not sum(market.lower) <= q * market.n <= sum(market.upper):
        raise ValueError(
            f"quotas cannot host q*n = {q * market.n} unit demands"
        )
    prefs = []
    for ranking in market.prefs:
        prefs.extend([ranking] * q)
    cloned = Market(market.projects, market.lower, market.upper, prefs)

    def aggregate(mat: Matrix) -> Matrix:
        if len(mat) != q * market.n:
            raise ValueError(f"expected {q * market.n} rows, got {len(mat)}")
        return tuple(
            tuple(sum(mat[i * q + j][p] for j in range(q)) for p in range(len(mat[0])))
            for i in range(market.n)
        )

    return cloned, aggregate
