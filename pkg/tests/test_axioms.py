import itertools
import random
from fractions import Fraction

import pytest

from quotassign.axioms import (
    TAU_CYCLE,
    WASTEFUL_CHAIN,
    find_tau_cycle,
    find_wasteful_chain,
    is_envy_free,
    is_ml_fair,
    is_mqc_efficient,
    is_ordinally_efficient,
    is_weakly_envy_free,
    sd_dominates,
    tau_graph,
)
from quotassign.eating import run_pslq
from quotassign.model import Market, is_feasible
from quotassign.priority import run_priolq

from conftest import random_market
from goldens import (
    CHAIN_DOMINATING,
    CHAIN_MATRIX,
    DOMINATES_SIX,
    PSLQ_FIVE,
    PSLQ_LOWER_QUOTAS,
    PSLQ_THIRDS,
    RPLQ_LOWER_QUOTAS,
    RPLQ_SIX,
    market_chain,
    market_five,
    market_lower_quotas,
    market_six,
    market_thirds,
    mat,
)
from oracles import exists_dominating, improve_until_efficient


def fr(s):
    return Fraction(s)


ABC = (0, 1, 2)  # ranking a > b > c


def test_sd_reflexive_weak_not_strict():
    x = (fr("1/2"), fr("1/3"), fr("1/6"))
    assert sd_dominates(x, x, ABC)
    assert not sd_dominates(x, x, ABC, strict=True)


def test_sd_thirds_rows():
    x = (fr("2/3"), fr("1/3"), fr(0))
    y = (fr("2/3"), fr(0), fr("1/3"))
    assert sd_dominates(x, y, ABC, strict=True)
    assert not sd_dominates(y, x, ABC)


def test_sd_six_rows():
    x = (fr("2/3"), fr(0), fr("1/3"), fr(0))
    y = (fr("3/5"), fr("1/15"), fr("1/3"), fr(0))
    assert sd_dominates(x, y, (0, 1, 2, 3), strict=True)


def test_sd_incomparable():
    x = (fr("1/2"), fr(0), fr("1/2"))
    y = (fr(0), fr(1), fr(0))
    assert not sd_dominates(x, y, ABC)
    assert not sd_dominates(y, x, ABC)


def test_sd_antisymmetry_random():
    rng = random.Random(3)
    for _ in range(200):
        k = rng.randint(1, 4)
        denom = rng.randint(1, 6)
        x = tuple(Fraction(rng.randint(0, denom), denom) for _ in range(k))
        y = tuple(Fraction(rng.randint(0, denom), denom) for _ in range(k))
        pref = list(range(k))
        rng.shuffle(pref)
        if sd_dominates(x, y, pref) and sd_dominates(y, x, pref):
            assert x == y


def test_envy_free_golden():
    assert is_envy_free(PSLQ_FIVE, market_five().prefs) == (True, None)
    assert is_envy_free(PSLQ_LOWER_QUOTAS, market_lower_quotas().prefs) == (True, None)


def test_envy_violation_random_priority():
    ok, pair = is_envy_free(RPLQ_LOWER_QUOTAS, market_lower_quotas().prefs)
    assert not ok
    assert pair == (0, 2)  # student 1 envies student 3's 7/8 of b


def test_envy_free_single_student():
    m = Market(["a"], [0], [None], [["a"]])
    assert is_envy_free(mat("1"), m.prefs) == (True, None)


def test_weak_envy_freeness():
    assert is_weakly_envy_free(RPLQ_LOWER_QUOTAS, market_lower_quotas().prefs) == (True, None)
    # both want a; student 1 holding only b is strictly dominated
    prefs = ((0, 1), (0, 1))
    ok, pair = is_weakly_envy_free(mat("0 1", "1 0"), prefs)
    assert not ok and pair == (0, 1)


def test_envy_free_implies_weakly_envy_free(rng):
    for _ in range(50):
        m = random_market(rng)
        R = run_pslq(m)
        if is_envy_free(R, m.prefs)[0]:
            assert is_weakly_envy_free(R, m.prefs)[0]


def test_tau_graph_chain_market():
    edges = tau_graph(CHAIN_MATRIX, market_chain().prefs)
    assert edges == {(0, 1): 0, (1, 2): 1}


def test_tau_graph_everyone_on_top_choice():
    prefs = ((0, 1), (1, 0))
    assert tau_graph(mat("1 0", "0 1"), prefs) == {}


def test_tau_acyclic_on_chain_market():
    assert find_tau_cycle(CHAIN_MATRIX, market_chain().prefs) is None


def test_tau_cycle_on_swap():
    prefs = ((0, 1), (1, 0))
    cycle = find_tau_cycle(mat("0 1", "1 0"), prefs)
    assert cycle is not None
    projects, witnesses = cycle
    assert sorted(projects) == [0, 1]
    assert set(witnesses) == {0, 1}


def test_wasteful_chain_found():
    found = find_wasteful_chain(CHAIN_MATRIX, market_chain().prefs, market_chain())
    assert found is not None
    students, projects = found
    assert projects == (0, 1, 2)
    assert students == (0, 1)


def test_no_wasteful_chain_in_eating_outputs():
    assert find_wasteful_chain(PSLQ_FIVE, market_five().prefs, market_five()) is None


def test_single_project_market_has_no_chain():
    m = Market(["a"], [0], [None], [["a"], ["a"]])
    R = mat("1", "1")
    assert find_wasteful_chain(R, m.prefs, m) is None
    assert is_ordinally_efficient(R, m) == (True, None)


def test_inefficiency_of_random_priority_six():
    m = market_six()
    ok, witness = is_ordinally_efficient(RPLQ_SIX, m)
    assert not ok
    assert witness.kind == WASTEFUL_CHAIN
    assert witness.delta == Fraction(1, 15)
    assert witness.improved[0] == (fr("2/3"), fr(0), fr("1/3"), fr(0))
    assert is_feasible(witness.improved, m)
    for i, ranking in enumerate(m.prefs):
        assert sd_dominates(witness.improved[i], RPLQ_SIX[i], ranking)


def test_inefficiency_of_chain_matrix():
    m = market_chain()
    ok, witness = is_ordinally_efficient(CHAIN_MATRIX, m)
    assert not ok
    assert witness.kind == WASTEFUL_CHAIN
    assert witness.projects == (0, 1, 2)
    assert witness.students == (0, 1)
    assert witness.delta == Fraction(1, 2)
    assert witness.improved == CHAIN_DOMINATING


def test_cycle_witness_construction():
    prefs = ((0, 1), (1, 0))
    m = Market(["a", "b"], [0, 0], [1, 1], [["a", "b"], ["b", "a"]])
    ok, witness = is_ordinally_efficient(mat("0 1", "1 0"), m)
    assert not ok
    assert witness.kind == TAU_CYCLE
    assert witness.improved == mat("1 0", "0 1")
    assert witness.delta == 1


def test_eating_outputs_are_ordinally_efficient():
    for market, R in [
        (market_five(), PSLQ_FIVE),
        (market_lower_quotas(), PSLQ_LOWER_QUOTAS),
        (market_thirds(), PSLQ_THIRDS),
    ]:
        assert is_ordinally_efficient(R, market) == (True, None)


def test_eating_efficient_on_random_markets(rng):
    for _ in range(60):
        m = random_market(rng)
        ok, witness = is_ordinally_efficient(run_pslq(m), m)
        assert ok, (m.projects, m.lower, m.upper, m.prefs, witness)


def test_ordinal_efficiency_rejects_infeasible():
    with pytest.raises(ValueError, match="infeasible"):
        is_ordinally_efficient(mat("1 0 0", "1 0 0"), market_chain())


def test_checker_agrees_with_improvement_fixpoint():
    # iterate the checker's own witnesses to a fixpoint; inefficiency of the
    # input is equivalent to the fixpoint differing from it
    rng = random.Random(17)

    def find_improvement(R, market):
        ok, witness = is_ordinally_efficient(R, market)
        return None if ok else witness.improved

    for _ in range(120):
        n, k = rng.randint(1, 4), rng.randint(1, 3)
        denominator = rng.choice([1, 2, 3, 6])
        rows = []
        for _ in range(n):
            cuts = sorted(rng.randint(0, denominator) for _ in range(k - 1))
            parts = [b - a for a, b in zip([0] + cuts, cuts + [denominator])]
            rows.append(tuple(Fraction(c, denominator) for c in parts))
        R = tuple(rows)
        cols = [sum(r[p] for r in rows) for p in range(k)]
        lower = [rng.randint(0, int(cols[p])) for p in range(k)]
        upper = [rng.randint(-(-cols[p] // 1), n) for p in range(k)]
        prefs = []
        for _ in range(n):
            ranking = list(range(k))
            rng.shuffle(ranking)
            prefs.append(ranking)
        m = Market([f"p{j}" for j in range(k)], lower, upper, prefs)
        ok, _ = is_ordinally_efficient(R, m)
        fixpoint = improve_until_efficient(R, m, find_improvement)
        assert ok == (fixpoint == R)
        for i in range(n):
            assert sd_dominates(fixpoint[i], R[i], m.prefs[i])


def test_checker_complete_against_exhaustive_search():
    # micro-scale completeness: agree with a brute-force hunt for any
    # feasible dominating matrix on a 1/4-resolution grid
    rng = random.Random(23)
    for _ in range(40):
        n, k, denominator = 2, 3, 4
        rows = []
        for _ in range(n):
            cuts = sorted(rng.randint(0, denominator) for _ in range(k - 1))
            parts = [b - a for a, b in zip([0] + cuts, cuts + [denominator])]
            rows.append(tuple(Fraction(c, denominator) for c in parts))
        R = tuple(rows)
        cols = [sum(r[p] for r in rows) for p in range(k)]
        lower = [rng.randint(0, int(cols[p])) for p in range(k)]
        upper = [rng.randint(int(-(-cols[p] // 1)), n) for p in range(k)]
        prefs = []
        for _ in range(n):
            ranking = list(range(k))
            rng.shuffle(ranking)
            prefs.append(ranking)
        m = Market([f"p{j}" for j in range(k)], lower, upper, prefs)
        ok, _ = is_ordinally_efficient(R, m)
        assert ok == (exists_dominating(R, m, denominator) is None)


def test_ml_fairness_of_priority_runs():
    m = market_lower_quotas()
    mu = run_priolq(m, [0, 1, 2, 3])
    assert is_ml_fair(mu, m.prefs, [0, 1, 2, 3]) == (True, None)


def test_ml_fairness_violation():
    prefs = ((0, 1), (0, 1))
    mu = mat("0 1", "1 0")  # the later student gets the project both prefer
    ok, pair = is_ml_fair(mu, prefs, [0, 1])
    assert not ok and pair == (0, 1)
    # with the list reversed the same assignment is fair
    assert is_ml_fair(mu, prefs, [1, 0]) == (True, None)


def test_ml_fairness_single_student():
    assert is_ml_fair(mat("1"), ((0,),), [0]) == (True, None)


def test_mqc_efficiency_of_priority_runs():
    m = market_lower_quotas()
    for order in itertools.permutations(range(4)):
        mu = run_priolq(m, order)
        assert is_mqc_efficient(mu, m) == (True, None)


def test_mqc_dominated_swap():
    m = Market(["a", "b"], [0, 0], [1, 1], [["a", "b"], ["b", "a"]])
    ok, better = is_mqc_efficient(mat("0 1", "1 0"), m)
    assert not ok
    assert better == mat("1 0", "0 1")


def test_mqc_unique_assignment_is_efficient():
    m = Market(["a", "b"], [2, 0], [2, 0], [["a", "b"], ["b", "a"]])
    assert is_mqc_efficient(mat("1 0", "1 0"), m) == (True, None)


def test_mqc_guard():
    prefs = [["a", "b", "c", "d"]] * 12
    m = Market(["a", "b", "c", "d"], [0] * 4, [None] * 4, prefs)
    mu = tuple((1, 0, 0, 0) for _ in range(12))
    with pytest.raises(ValueError, match="guard"):
        is_mqc_efficient(mu, m)
