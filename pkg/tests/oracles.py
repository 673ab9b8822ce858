"""Independent oracle implementations used to cross-check the mechanisms.

Deliberately written from the definitions, sharing no code with the package
internals beyond the Market container, so that agreement is evidence rather
than tautology.
"""

from fractions import Fraction

from quotassign.model import Market, choice, column_sums


def classical_ps(market: Market):
    """Plain simultaneous eating with upper quotas only (lower quotas ignored).

    Every student eats their best non-exhausted project at unit speed; a
    project leaves the menu when its consumed mass reaches the upper quota.
    Valid comparison target for markets with all lower quotas zero.
    """
    n, k = market.n, market.k
    rows = [[Fraction(0)] * k for _ in range(n)]
    t = Fraction(0)
    while t < 1:
        omega = [sum(rows[i][p] for i in range(n)) for p in range(k)]
        menu = {p for p in range(k) if omega[p] < market.upper[p]}
        eating = [choice(market.prefs, i, menu) for i in range(n)]
        counts = [eating.count(p) for p in range(k)]
        dt = 1 - t
        for p in menu:
            if counts[p]:
                dt = min(dt, (market.upper[p] - omega[p]) / counts[p])
        for i in range(n):
            rows[i][eating[i]] += dt
        t += dt
    return tuple(tuple(row) for row in rows)


def discrete_eating(market: Market, steps: int = 1000):
    """Fixed-step simulation of quota-constrained eating.

    Re-evaluates the active-project definition on a grid of `steps` equal
    time slices and advances each student by one slice on their best active
    project. Returns (assignment, pattern_change_times); the change times
    bracket the exact event times to within one step.
    """
    n, k = market.n, market.k
    rows = [[Fraction(0)] * k for _ in range(n)]
    step = Fraction(1, steps)
    changes = []
    previous = None
    for j in range(steps):
        t = Fraction(j, steps)
        omega = [sum(rows[i][p] for i in range(n)) for p in range(k)]
        slack = n * (1 - t) - sum(
            max(market.lower[p] - omega[p], 0) for p in range(k)
        )
        active = set()
        for p in range(k):
            if omega[p] < market.lower[p]:
                active.add(p)
            elif omega[p] < market.upper[p] and slack > 0:
                active.add(p)
        eating = tuple(choice(market.prefs, i, active) for i in range(n))
        if previous is not None and eating != previous:
            changes.append(t)
        previous = eating
        for i in range(n):
            rows[i][eating[i]] += step
    return tuple(tuple(row) for row in rows), changes


def improve_until_efficient(matrix, market: Market, find_improvement):
    """Brute-force ordinal-efficiency oracle: apply improvements to fixpoint.

    `find_improvement(matrix, market)` must return an improved matrix or
    None. The input was ordinally efficient iff the fixpoint equals it.
    """
    current = matrix
    for _ in range(1000):
        improved = find_improvement(current, market)
        if improved is None:
            return current
        current = improved
    raise AssertionError("improvement iteration did not terminate")


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def exists_dominating(R, market: Market, denominator: int):
    """Exhaustive search for a feasible matrix sd-dominating R row by row.

    Enumerates every matrix whose entries are multiples of 1/denominator.
    Complete whenever R's entries and the quotas are such multiples: the
    cycle/chain improvement shifts only move amounts derived from R's
    entries and quota slacks, so an improving matrix exists at this
    resolution iff one exists at all. Returns the first dominator or None.
    """
    import itertools

    from quotassign.axioms import sd_dominates

    n, k = market.n, market.k
    row_candidates = []
    for i in range(n):
        options = []
        for comp in _compositions(denominator, k):
            row = tuple(Fraction(c, denominator) for c in comp)
            if sd_dominates(row, R[i], market.prefs[i]):
                options.append(row)
        row_candidates.append(options)
    for rows in itertools.product(*row_candidates):
        if rows == tuple(tuple(r) for r in R):
            continue
        cols = [sum(rows[i][p] for i in range(n)) for p in range(k)]
        if all(
            market.lower[p] <= cols[p] <= market.upper[p] for p in range(k)
        ):
            return rows
    return None
