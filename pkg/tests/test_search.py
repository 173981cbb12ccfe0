import pytest

from powercone.core import AlphaWeight
from powercone.mediated import lower_bound, upper_bound
from powercone.search import (
    FEASIBLE,
    FOUND,
    HEURISTIC,
    INFEASIBLE,
    OPTIMAL,
    SearchBudget,
    UNKNOWN,
    feasible_at,
    solve_exact,
)


def test_feasible_at_trivial_cases():
    ctx = AlphaWeight((1, 1))
    out = feasible_at(ctx, 1)
    assert out.status == FOUND
    assert out.graph.cardinality == 1
    assert out.graph.validate() == []


def test_feasible_at_infeasible_below_goal():
    ctx = AlphaWeight((1, 2, 3))
    assert feasible_at(ctx, 0).status == INFEASIBLE
    out = feasible_at(ctx, 2)
    assert out.status == INFEASIBLE


def test_feasible_at_node_limit_gives_unknown():
    ctx = AlphaWeight((13, 33, 34))
    out = feasible_at(ctx, 7, budget=SearchBudget(node_limit=200))
    assert out.status == UNKNOWN
    assert out.expansions <= 200 + 1


def test_solve_small_optimal():
    ctx = AlphaWeight((1, 2, 3))
    res = solve_exact(ctx)
    assert res.status == OPTIMAL
    assert res.cardinality == 3
    assert res.graph.validate() == []
    assert res.cardinality >= lower_bound(ctx)


def test_solve_reaches_upper_bound_fallback():
    # No 3 node integer certificate exists for (1,1,1); the dyadic
    # fallback construction still delivers the closed form count and the
    # integer levels below it are proven empty, hence optimal status for
    # the integer search.
    ctx = AlphaWeight((1, 1, 1))
    res = solve_exact(ctx)
    assert res.cardinality == 3
    assert res.graph.validate() == []
    assert res.proven_infeasible == (2,)


def test_solve_two_dimensional():
    res = solve_exact(AlphaWeight((3, 5)))
    assert res.cardinality == 3
    assert res.status == OPTIMAL


def test_solve_respects_cardinality_cap():
    ctx = AlphaWeight((13, 17, 44))
    res = solve_exact(ctx, SearchBudget(max_cardinality=lower_bound(ctx)))
    # Cap below the closed form bound means the fallback certificate is
    # only heuristic.
    assert res.status == HEURISTIC
    assert res.graph.validate() == []


def test_solve_budget_exhaustion_is_reported():
    ctx = AlphaWeight((35, 58, 87))
    res = solve_exact(ctx, SearchBudget(node_limit=100))
    assert res.status in (FEASIBLE, HEURISTIC)
    assert res.graph.validate() == []
    assert res.cardinality <= upper_bound(ctx)


def test_determinism():
    ctx = AlphaWeight((2, 5, 19))
    a = solve_exact(ctx, SearchBudget(node_limit=50_000))
    b = solve_exact(ctx, SearchBudget(node_limit=50_000))
    assert a.cardinality == b.cardinality
    assert a.graph.X == b.graph.X
    assert a.graph.pairs == b.graph.pairs


@pytest.mark.slow
def test_solve_medium_instance():
    res = solve_exact(AlphaWeight((2, 5, 19)))
    assert res.status == OPTIMAL
    assert res.cardinality == 6
    assert res.graph.validate() == []
