"""Exact minimum-cardinality search for mediated graphs.

The solver runs iterative deepening on the cardinality k, starting at the
lower bound.  At each k a depth-first witness-completion search runs over
integer lattice points of the anchor simplex: the worklist starts at the
goal point, and covering a node means choosing a witness pair (midpoint
split), possibly introducing new nodes that join the worklist.  States are
memoized on (node set, uncovered set) so transpositions are pruned.

The search universe is the integer lattice.  The binary-decomposition graph
(which may use dyadic points) caps the iteration: at k = upper_bound it is
returned as a constructive certificate without further search.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterator

from .core import AlphaWeight, InvalidInputError
from .mediated import (
    MediatedGraph,
    binary_decomposition_graph,
    lower_bound,
    upper_bound,
)

FOUND = "found"
INFEASIBLE = "infeasible"
UNKNOWN = "unknown"

OPTIMAL = "optimal"
FEASIBLE = "feasible"
HEURISTIC = "heuristic"


@dataclass(frozen=True)
class SearchBudget:
    """Resource limits for the exact search.

    max_cardinality caps the deepening loop, node_limit caps the number of
    expanded search states per feasibility call, time_limit is wall-clock
    seconds for the whole solve.
    """

    max_cardinality: int | None = None
    node_limit: int | None = None
    time_limit: float | None = None


@dataclass
class FeasibilityOutcome:
    status: str  # found / infeasible / unknown
    graph: MediatedGraph | None = None
    expansions: int = 0


@dataclass
class SolveOutcome:
    graph: MediatedGraph
    cardinality: int
    status: str  # optimal / feasible / heuristic
    proven_infeasible: tuple[int, ...] = ()


class _Timeout(Exception):
    pass


class _Searcher:
    def __init__(self, ctx: AlphaWeight, k: int, deadline: float | None,
                 node_limit: int | None):
        self.ctx = ctx
        self.k = k
        self.deadline = deadline
        self.node_limit = node_limit
        self.shat = ctx.shat
        self.dim = ctx.d - 1
        self.anchors = frozenset(ctx.anchors())
        self.anchor_list = sorted(self.anchors)
        self.b = ctx.goal
        self.expansions = 0
        self.failed: dict[tuple[frozenset, frozenset], int] = {}
        self.witness: dict[tuple, tuple] = {}

    def _tick(self):
        self.expansions += 1
        if self.node_limit is not None and self.expansions > self.node_limit:
            raise _Timeout
        if self.deadline is not None and self.expansions % 64 == 0:
            if time.monotonic() > self.deadline:
                raise _Timeout

    def _in_simplex(self, p: tuple) -> bool:
        total = 0
        for c in p:
            if c < 0:
                return False
            total += c
        return total <= self.shat

    def _coverable_free(self, p: tuple, existing: frozenset) -> bool:
        """Whether p already has a witness pair inside existing points."""
        for y in existing:
            if y == p:
                continue
            z = tuple(2 * a - c for a, c in zip(p, y))
            if z != y and z in existing and y <= z:
                return True
        return False

    def _candidates(self, x: tuple, nodes: frozenset, remaining: int
                    ) -> Iterator[tuple[tuple, tuple]]:
        existing = self.anchors | nodes
        tx = tuple(2 * c for c in x)
        cost1 = []
        for y in self.anchor_list + sorted(nodes):
            z = tuple(t - c for t, c in zip(tx, y))
            if z == y or not self._in_simplex(z):
                continue
            if z in existing:
                if y < z:
                    yield (y, z)
            elif remaining >= 1:
                score = 0 if self._coverable_free(z, existing | {x, z}) else 1
                cost1.append((score, y, z))
        cost1.sort()
        for _, y, z in cost1:
            yield (y, z)
        if remaining >= 2:
            yield from self._new_pairs(x, tx, existing)

    def _new_pairs(self, x: tuple, tx: tuple, existing: frozenset
                   ) -> Iterator[tuple[tuple, tuple]]:
        """Pairs (y, z) with y + z = 2x where both points are new."""
        shat = self.shat
        lo_sum = max(0, sum(tx) - shat)
        scored = []
        suffix_cap = [0] * (self.dim + 1)
        for i in range(self.dim - 1, -1, -1):
            suffix_cap[i] = suffix_cap[i + 1] + tx[i]

        def rec(prefix: tuple, idx: int, s: int):
            if idx == self.dim:
                if s < lo_sum:
                    return
                y = prefix
                if not y < x:
                    return
                z = tuple(t - c for t, c in zip(tx, y))
                if y in existing or z in existing:
                    return
                aug = existing | {x, y, z}
                score = (0 if self._coverable_free(y, aug) else 1) + \
                        (0 if self._coverable_free(z, aug) else 1)
                scored.append((score, y, z))
                return
            for v in range(min(tx[idx], shat - s) + 1):
                if s + v + suffix_cap[idx + 1] < lo_sum:
                    continue
                rec(prefix + (v,), idx + 1, s + v)

        rec((), 0, 0)
        scored.sort()
        for _, y, z in scored:
            yield (y, z)

    def _pick(self, nodes: frozenset, uncovered: frozenset, remaining: int):
        """Most-constrained uncovered node, counting cheap candidates."""
        if len(uncovered) == 1:
            return next(iter(uncovered))
        existing = self.anchors | nodes
        best, best_count = None, None
        for x in sorted(uncovered):
            tx = tuple(2 * c for c in x)
            n = 0
            for y in existing:
                z = tuple(t - c for t, c in zip(tx, y))
                if z == y or not self._in_simplex(z):
                    continue
                if z in existing or remaining >= 1:
                    n += 1
                    if best_count is not None and n >= best_count:
                        break
            if best_count is None or n < best_count:
                best, best_count = x, n
                if n == 0:
                    break
        return best

    def run(self) -> tuple | None:
        nodes = frozenset([self.b])
        return self._dfs(nodes, frozenset([self.b]))

    def _dfs(self, nodes: frozenset, uncovered: frozenset):
        if not uncovered:
            return nodes
        self._tick()
        remaining = self.k - len(nodes)
        key = (nodes, uncovered)
        if self.failed.get(key, -1) >= remaining:
            return None
        x = self._pick(nodes, uncovered, remaining)
        rest = uncovered - {x}
        for y, z in self._candidates(x, nodes, remaining):
            added = [p for p in (y, z) if p not in self.anchors and p not in nodes]
            if len(added) > remaining:
                continue
            self.witness[x] = (y, z)
            result = self._dfs(nodes | frozenset(added), rest | frozenset(added))
            if result is not None:
                return result
            del self.witness[x]
        prev = self.failed.get(key, -1)
        if remaining > prev:
            if len(self.failed) < 2_000_000:
                self.failed[key] = remaining
        return None


def feasible_at(ctx: AlphaWeight, k: int, budget: SearchBudget | None = None
                ) -> FeasibilityOutcome:
    """Complete search for a mediated graph with exactly |X| <= k integer nodes."""
    if ctx.d < 2:
        raise InvalidInputError("mediated graphs need at least two weights")
    if k < 1:
        return FeasibilityOutcome(INFEASIBLE)
    budget = budget or SearchBudget()
    deadline = None
    if budget.time_limit is not None:
        deadline = time.monotonic() + budget.time_limit
    searcher = _Searcher(ctx, k, deadline, budget.node_limit)
    try:
        nodes = searcher.run()
    except _Timeout:
        return FeasibilityOutcome(UNKNOWN, expansions=searcher.expansions)
    except RecursionError:
        return FeasibilityOutcome(UNKNOWN, expansions=searcher.expansions)
    if nodes is None:
        return FeasibilityOutcome(INFEASIBLE, expansions=searcher.expansions)
    order = [ctx.goal] + sorted(p for p in nodes if p != ctx.goal)
    graph = MediatedGraph(ctx, tuple(order),
                          tuple(searcher.witness[p] for p in order))
    return FeasibilityOutcome(FOUND, graph, searcher.expansions)


def solve_exact(ctx: AlphaWeight, budget: SearchBudget | None = None) -> SolveOutcome:
    """Iterative deepening from the lower bound, capped by the binary graph.

    The status is "optimal" when every smaller cardinality was proven
    infeasible over the integer search lattice, "feasible" when some level
    was abandoned on budget, and "heuristic" when the budget ran out before
    any search level finished and the binary-decomposition fallback is all
    we have.
    """
    budget = budget or SearchBudget()
    lb = lower_bound(ctx)
    ub = upper_bound(ctx)
    cap = ub if budget.max_cardinality is None else min(ub, budget.max_cardinality)
    deadline = None
    if budget.time_limit is not None:
        deadline = time.monotonic() + budget.time_limit
    proven: list[int] = []
    saw_unknown = False
    for k in range(lb, cap):
        remaining = None
        if deadline is not None:
            remaining = max(0.0, deadline - time.monotonic())
        level_budget = SearchBudget(node_limit=budget.node_limit, time_limit=remaining)
        outcome = feasible_at(ctx, k, level_budget)
        if outcome.status == FOUND:
            status = OPTIMAL if not saw_unknown else FEASIBLE
            return SolveOutcome(outcome.graph, k, status, tuple(proven))
        if outcome.status == INFEASIBLE:
            proven.append(k)
        else:
            saw_unknown = True
    graph = binary_decomposition_graph(ctx)
    if cap < ub:
        status = HEURISTIC
    elif not saw_unknown:
        status = OPTIMAL
    else:
        status = HEURISTIC if not proven else FEASIBLE
    return SolveOutcome(graph, graph.cardinality, status, tuple(proven))
