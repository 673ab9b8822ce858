"""Exact checkers for fairness and efficiency axioms.

All comparisons are stochastic-dominance (sd) comparisons of lottery rows:
x sd-dominates y under a ranking iff every prefix sum of x, taken in ranking
order, is at least the corresponding prefix sum of y.

Ordinal efficiency of a random assignment under quotas is characterized by
two graph conditions on the "tau" relation (p tau q iff some student prefers
p to q yet holds positive probability of q): the relation must be acyclic,
and there must be no chain of tau edges from a project with slack upper
quota to a project strictly above its lower quota. Both failures are
constructive: a cycle or chain yields an explicit probability shift that
every touched student strictly prefers, returned as an ImprovementWitness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .model import (
    Market,
    Matrix,
    assigned_project,
    column_sums,
    feasibility_violations,
)

TAU_CYCLE = "tau-cycle"
WASTEFUL_CHAIN = "wasteful-chain"


def sd_dominates(x: Sequence, y: Sequence, pref: Sequence[int], strict: bool = False) -> bool:
    """Does lottery row x stochastically dominate row y under `pref`?

    Weak mode: every prefix sum of x in preference order is >= that of y.
    Strict mode additionally requires x != y.
    """
    assert len(x) == len(y) == len(pref)
    total_x = Fraction(0)
    total_y = Fraction(0)
    for p in pref:
        total_x += x[p]
        total_y += y[p]
        if total_x < total_y:
            return False
    if strict:
        return tuple(x) != tuple(y)
    return True


def is_envy_free(R: Matrix, prefs: Sequence[Sequence[int]]) -> tuple:
    """Every student's row sd-dominates every other row under her own ranking.

    Returns (True, None) or (False, (i, j)) for the first pair where student
    i's row fails to dominate student j's.
    """
    for i, ranking in enumerate(prefs):
        for j in range(len(R)):
            if i != j and not sd_dominates(R[i], R[j], ranking):
                return False, (i, j)
    return True, None


def is_weakly_envy_free(R: Matrix, prefs: Sequence[Sequence[int]]) -> tuple:
    """No student's row is strictly sd-dominated by another's under her ranking.

    Returns (True, None) or (False, (i, j)) where row j strictly dominates
    row i under student i's ranking.
    """
    for i, ranking in enumerate(prefs):
        for j in range(len(R)):
            if i != j and sd_dominates(R[j], R[i], ranking, strict=True):
                return False, (i, j)
    return True, None


def tau_graph(R: Matrix, prefs: Sequence[Sequence[int]]) -> dict:
    """Directed edges {(p, q): witness student} with p preferred to q by the
    witness while the witness holds positive probability of q."""
    k = len(R[0]) if R else 0
    edges = {}
    for i, ranking in enumerate(prefs):
        position = {p: pos for pos, p in enumerate(ranking)}
        for q in range(k):
            if R[i][q] > 0:
                for p in range(k):
                    if p != q and position[p] < position[q] and (p, q) not in edges:
                        edges[(p, q)] = i
    return edges


def find_tau_cycle(R: Matrix, prefs: Sequence[Sequence[int]]) -> Optional[tuple]:
    """A directed cycle in the tau graph, or None.

    Returns (projects, witnesses): projects[j] tau projects[j+1] (cyclically)
    with witnesses[j] the student certifying that edge.
    """
    edges = tau_graph(R, prefs)
    k = len(R[0]) if R else 0
    successors = [[] for _ in range(k)]
    for (p, q) in sorted(edges):
        successors[p].append(q)

    WHITE, GRAY, BLACK = 0, 1, 2
    color = [WHITE] * k
    stack = []

    def visit(node):
        color[node] = GRAY
        stack.append(node)
        for succ in successors[node]:
            if color[succ] == GRAY:
                cycle = stack[stack.index(succ):]
                return cycle
            if color[succ] == WHITE:
                found = visit(succ)
                if found is not None:
                    return found
        stack.pop()
        color[node] = BLACK
        return None

    for start in range(k):
        if color[start] == WHITE:
            cycle = visit(start)
            if cycle is not None:
                witnesses = tuple(
                    edges[(cycle[j], cycle[(j + 1) % len(cycle)])]
                    for j in range(len(cycle))
                )
                return tuple(cycle), witnesses
    return None


def find_wasteful_chain(
    R: Matrix, prefs: Sequence[Sequence[int]], market: Market
) -> Optional[tuple]:
    """A shortest tau path from slack upper capacity to slack lower quota.

    Searches for projects p_1, ..., p_{l+1} (l >= 1) with p_1 below its upper
    quota, p_{l+1} strictly above its lower quota, and consecutive tau edges.
    Returns (students, projects) with students[j] witnessing the j-th edge,
    or None. Chains that revisit a project only exist alongside a tau cycle,
    so checking find_tau_cycle first makes this search complete.
    """
    cols = column_sums(R)
    sources = [p for p in range(market.k) if cols[p] < market.upper[p]]
    sinks = {q for q in range(market.k) if cols[q] > market.lower[q]}
    if not sources or not sinks:
        return None
    edges = tau_graph(R, prefs)
    successors = [[] for _ in range(market.k)]
    for (p, q) in sorted(edges):
        successors[p].append(q)

    parent = {p: None for p in sources}

    def path_to(node):
        path = [node]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        return list(reversed(path))

    frontier = list(sources)
    while frontier:
        nxt = []
        for node in frontier:
            for succ in successors[node]:
                if succ in sinks:
                    # test on expansion: a sink that doubles as a source is
                    # still a valid chain end (even closing back on its own
                    # start), only a repeat strictly inside the path is not
                    projects = path_to(node) + [succ]
                    if succ not in projects[1:-1]:
                        students = tuple(
                            edges[(projects[j], projects[j + 1])]
                            for j in range(len(projects) - 1)
                        )
                        return students, tuple(projects)
                if succ not in parent:
                    parent[succ] = node
                    nxt.append(succ)
        frontier = nxt
    return None


@dataclass(frozen=True)
class ImprovementWitness:
    """A feasible probability shift strictly improving every touched student.

    `kind` is "tau-cycle" or "wasteful-chain". `projects` lists the cycle
    nodes (closing edge implied) or the chain nodes; `students` the witness
    per edge. `improved` = R + `shift` sd-dominates R row by row, strictly
    for every witness, and `delta` is the exact amount shifted per edge.
    """

    kind: str
    projects: tuple
    students: tuple
    delta: Fraction
    shift: Matrix
    improved: Matrix


def _apply_shift(R: Matrix, moves) -> tuple:
    """Apply (student, from_project, to_project, delta) moves; returns
    (shift, improved)."""
    n, k = len(R), len(R[0])
    shift = [[Fraction(0)] * k for _ in range(n)]
    for student, source, target, delta in moves:
        shift[student][source] -= delta
        shift[student][target] += delta
    improved = tuple(
        tuple(R[i][j] + shift[i][j] for j in range(k)) for i in range(n)
    )
    return tuple(tuple(row) for row in shift), improved


def _witness_from_cycle(R: Matrix, prefs, cycle, witnesses) -> ImprovementWitness:
    m = len(cycle)
    delta = min(R[witnesses[j]][cycle[(j + 1) % m]] for j in range(m))
    moves = [
        (witnesses[j], cycle[(j + 1) % m], cycle[j], delta) for j in range(m)
    ]
    shift, improved = _apply_shift(R, moves)
    return ImprovementWitness(
        kind=TAU_CYCLE,
        projects=tuple(cycle),
        students=tuple(witnesses),
        delta=delta,
        shift=shift,
        improved=improved,
    )


def _witness_from_chain(R: Matrix, market, students, projects) -> ImprovementWitness:
    cols = column_sums(R)
    head, tail = projects[0], projects[-1]
    delta = min(
        min(R[students[j]][projects[j + 1]] for j in range(len(students))),
        market.upper[head] - cols[head],
        cols[tail] - market.lower[tail],
    )
    moves = [
        (students[j], projects[j + 1], projects[j], delta)
        for j in range(len(students))
    ]
    shift, improved = _apply_shift(R, moves)
    return ImprovementWitness(
        kind=WASTEFUL_CHAIN,
        projects=tuple(projects),
        students=tuple(students),
        delta=delta,
        shift=shift,
        improved=improved,
    )


def _verify_witness(witness: ImprovementWitness, R: Matrix, prefs, market) -> None:
    assert witness.delta > 0
    assert not feasibility_violations(witness.improved, market)
    assert witness.improved != R
    touched = set(witness.students)
    for i, ranking in enumerate(prefs):
        assert sd_dominates(witness.improved[i], R[i], ranking, strict=i in touched)


def is_ordinally_efficient(R: Matrix, market: Market) -> tuple:
    """Decide ordinal efficiency: R is efficient iff the tau graph is
    acyclic and no wasteful chain exists.

    Returns (True, None), or (False, ImprovementWitness) with a verified
    feasible assignment that sd-dominates R for everyone and strictly
    improves the witness students.

    Raises
    ------
    ValueError
        If R is not feasible for the market.
    """
    violations = feasibility_violations(R, market)
    if violations:
        raise ValueError("assignment is infeasible: " + "; ".join(violations))
    cycle = find_tau_cycle(R, market.prefs)
    if cycle is not None:
        witness = _witness_from_cycle(R, market.prefs, *cycle)
        _verify_witness(witness, R, market.prefs, market)
        return False, witness
    chain = find_wasteful_chain(R, market.prefs, market)
    if chain is not None:
        witness = _witness_from_chain(R, market, *chain)
        _verify_witness(witness, R, market.prefs, market)
        return False, witness
    return True, None


def is_ml_fair(mu: Matrix, prefs: Sequence[Sequence[int]], master_list: Sequence[int]) -> tuple:
    """No student prefers the project of a student placed later in the list.

    `master_list` orders students from highest to lowest priority. Returns
    (True, None) or (False, (i, j)) where i precedes j yet prefers j's
    project to her own.
    """
    position = {student: pos for pos, student in enumerate(master_list)}
    assigned = [assigned_project(row) for row in mu]
    for i, ranking in enumerate(prefs):
        rank = {p: pos for pos, p in enumerate(ranking)}
        for j in range(len(mu)):
            if j != i and rank[assigned[j]] < rank[assigned[i]] and position[j] > position[i]:
                return False, (i, j)
    return True, None


def is_mqc_efficient(mu: Matrix, market: Market, guard: int = 10**6) -> tuple:
    """Is the deterministic assignment Pareto-undominated among all feasible
    deterministic assignments?

    Exhaustive: enumerates every way to give each student one project and
    filters by quotas, so it requires k**n <= `guard`. Returns (True, None)
    or (False, dominating_matrix).
    """
    n, k = market.n, market.k
    if k**n > guard:
        raise ValueError(
            f"{k}**{n} candidate assignments exceed the enumeration guard;"
            " check a sample of assignments instead"
        )
    violations = feasibility_violations(mu, market)
    if violations:
        raise ValueError("assignment is infeasible: " + "; ".join(violations))
    current = [assigned_project(row) for row in mu]
    ranks = [
        {p: pos for pos, p in enumerate(ranking)} for ranking in market.prefs
    ]
    for candidate in itertools.product(range(k), repeat=n):
        counts = [0] * k
        for p in candidate:
            counts[p] += 1
        if any(
            counts[p] < market.lower[p] or counts[p] > market.upper[p]
            for p in range(k)
        ):
            continue
        weakly_better = all(
            ranks[i][candidate[i]] <= ranks[i][current[i]] for i in range(n)
        )
        if weakly_better and any(
            ranks[i][candidate[i]] < ranks[i][current[i]] for i in range(n)
        ):
            dominating = tuple(
                tuple(1 if j == candidate[i] else 0 for j in range(k))
                for i in range(n)
            )
            return False, dominating
    return True, None
