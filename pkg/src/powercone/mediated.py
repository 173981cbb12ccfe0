"""Mediated graphs: midpoint digraphs encoding SOC systems for geometric means.

A mediated graph for a weight vector alpha = s / shat consists of a node set
X of lattice points containing the goal point b = (s_1, ..., s_{d-1}) in
which every node is the midpoint of two distinct nodes drawn from X together
with the anchors {shat * e_j} and the origin.  Each node translates into one
rotated second-order constraint w_x^2 <= w_y * w_z, so |X| is exactly the
number of three-dimensional rotated cones in the induced representation of
x <= z_1^{alpha_1} * ... * z_d^{alpha_d}.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .core import (
    AlphaWeight,
    DomainError,
    InvalidInputError,
    Point,
    barycentric,
    canon_coord,
    canon_point,
    midpoint,
)


@dataclass(frozen=True)
class SocConstraint:
    """A rotated second-order constraint lhs^2 <= factors[0] * factors[1]."""

    lhs: str
    factors: tuple[str, str]


@dataclass(frozen=True)
class SocSystem:
    variables: tuple[str, ...]
    constraints: tuple[SocConstraint, ...]


@dataclass(frozen=True)
class MediatedGraph:
    """Node set X with one witness pair per node, aligned with X order."""

    ctx: AlphaWeight
    X: tuple[Point, ...]
    pairs: tuple[tuple[Point, Point], ...]

    def __post_init__(self):
        object.__setattr__(self, "X", tuple(canon_point(p) for p in self.X))
        object.__setattr__(
            self, "pairs",
            tuple((canon_point(y), canon_point(z)) for y, z in self.pairs))

    def witness(self, node: Point) -> tuple[Point, Point]:
        node = canon_point(node)
        for x, pair in zip(self.X, self.pairs):
            if x == node:
                return pair
        raise KeyError(node)

    @property
    def cardinality(self) -> int:
        return len(self.X)

    def validate(self) -> list[str]:
        return validate(self)

    def node_names(self) -> dict[Point, str]:
        return node_names(self)

    def to_soc(self) -> SocSystem:
        return to_soc(self)

    def to_dot(self) -> str:
        return to_dot(self)


def _popcount_set(value: int) -> int:
    """Number of set bits; 0 has none."""
    return bin(value).count("1")


def lower_bound(ctx: AlphaWeight) -> int:
    """Cardinality lower bound: max(d - 1, ceil(log2 shat))."""
    shat = ctx.shat
    return max(ctx.d - 1, (shat - 1).bit_length())


def upper_bound(ctx: AlphaWeight) -> int:
    """Cardinality of the binary-decomposition graph.

    Counts one node per set bit of each weight and of the power-of-two
    padding remainder, minus one for the final merge into the goal.
    """
    shat = ctx.shat
    k = (shat - 1).bit_length()
    rem = (1 << k) - shat
    return sum(_popcount_set(v) for v in ctx.s) + _popcount_set(rem) - 1


def _bits(value: int) -> list[int]:
    return [i for i in range(value.bit_length()) if value >> i & 1]


def binary_decomposition_graph(ctx: AlphaWeight) -> MediatedGraph:
    """Build the binary-decomposition graph, of cardinality upper_bound(ctx).

    Each weight s_i contributes one dyadic block of copies of anchor i per
    set bit, and the padding remainder 2^K - shat contributes blocks of
    copies of the goal itself.  Blocks of equal dyadic level are merged
    pairwise; every merge is a midpoint and the final merge lands on the
    goal.  Merged points may have dyadic (non-integer) coordinates.
    """
    if ctx.d < 2:
        raise InvalidInputError("mediated graphs need at least two weights")
    shat = ctx.shat
    K = max(1, (shat - 1).bit_length())
    rem = (1 << K) - shat
    anchors = ctx.anchors()
    anchor_set = set(anchors)
    b = canon_point(ctx.goal)

    items: list[tuple[int, Point]] = []
    for i, si in enumerate(ctx.s):
        for k in _bits(si):
            items.append((k, anchors[i]))
    for k in _bits(rem):
        items.append((k, b))

    target_card = upper_bound(ctx)

    def point_key(p: Point):
        return tuple(Fraction(c) for c in p)

    def matchings(group: list[Point], known: frozenset[Point]):
        """All pairings of the group, best collision score first.

        A midpoint wasted on a collision (an anchor, an already known node
        or a twin produced in the same round) shrinks the mediated set
        below the closed form count, so pairings avoiding collisions are
        preferred; groups are about as small as the number of weights.
        """
        found: list[tuple[int, list]] = []
        seen: set[frozenset] = set()

        def rec(rem: list[Point], acc: list, fresh: set[Point], score: int):
            if not rem:
                key = frozenset((min(a, bb, key=point_key), max(a, bb, key=point_key))
                                for a, bb in acc)
                if key not in seen:
                    seen.add(key)
                    found.append((score, list(acc)))
                return
            a = rem[0]
            for i in range(1, len(rem)):
                bb = rem[i]
                m = midpoint(a, bb)
                new = a != bb and m not in known and m not in fresh
                if new:
                    fresh.add(m)
                acc.append((a, bb))
                rec(rem[1:i] + rem[i + 1:], acc, fresh, score + new)
                acc.pop()
                if new:
                    fresh.discard(m)
        rec(group, [], set(), 0)
        found.sort(key=lambda t: -t[0])
        return [m for _, m in found]

    # A collision at one level can be forced by pairing choices made
    # earlier, so the merge backtracks across levels until every midpoint
    # is fresh; the first completed merge is kept as a fallback in case the
    # closed form count is unreachable within the work budget.
    budget = [20000]
    fallback: list[tuple[tuple[Point, ...], dict]] = []

    def merge(items: list[tuple[int, Point]], order: tuple[Point, ...],
              witness: dict) -> tuple[tuple[Point, ...], dict] | None:
        if len(items) == 1:
            if canon_point(items[0][1]) != b:
                raise DomainError("dyadic merge did not terminate at the goal point")
            if b not in witness:
                raise DomainError("goal point received no witness pair")
            if not fallback:
                fallback.append((order, witness))
            return (order, witness) if len(order) == target_card else None
        kmin = min(level for level, _ in items)
        group = sorted((p for level, p in items if level == kmin), key=point_key)
        rest = [(level, p) for level, p in items if level != kmin]
        if len(group) % 2:
            raise DomainError("unbalanced dyadic merge; weights are inconsistent")
        known = frozenset(anchor_set) | set(order)
        for match in matchings(group, known):
            if budget[0] <= 0:
                break
            budget[0] -= 1
            nxt_items = list(rest)
            nxt_order = list(order)
            nxt_witness = dict(witness)
            for a, bb in match:
                m = midpoint(a, bb)
                if a != bb and m not in anchor_set:
                    if m not in nxt_witness:
                        nxt_witness[m] = (a, bb)
                    if m != b and m not in nxt_order:
                        nxt_order.append(m)
                nxt_items.append((kmin + 1, m))
            result = merge(nxt_items, tuple(nxt_order), nxt_witness)
            if result is not None:
                return result
        return None

    result = merge(items, (b,), {})
    if result is None:
        result = fallback[0]
    order, witness = result
    return MediatedGraph(ctx, tuple(order), tuple(witness[p] for p in order))


def validate(graph: MediatedGraph) -> list[str]:
    """Return a list of violation messages; empty means the graph is valid."""
    errs: list[str] = []
    ctx = graph.ctx
    if ctx.d < 2:
        return ["weight vector must have at least two entries"]
    b = canon_point(ctx.goal)
    anchors = set(ctx.anchors())
    nodes = list(graph.X)
    node_set = set(nodes)
    if len(node_set) != len(nodes):
        errs.append("duplicate nodes in X")
    if b not in node_set:
        errs.append(f"goal point {b!r} missing from X")
    overlap = node_set & anchors
    if overlap:
        errs.append(f"nodes coincide with anchors: {sorted(map(str, overlap))}")
    if len(graph.pairs) != len(nodes):
        errs.append("witness list length differs from |X|")
        return errs
    available = node_set | anchors
    for x, (y, z) in zip(nodes, graph.pairs):
        if y == z:
            errs.append(f"witness pair for {x!r} is not two distinct points")
            continue
        if y not in available or z not in available:
            errs.append(f"witness pair for {x!r} uses unknown points {y!r}, {z!r}")
            continue
        if any(2 * Fraction(c) != Fraction(a) + Fraction(bb) for c, a, bb in zip(x, y, z)):
            errs.append(f"{x!r} is not the midpoint of {y!r} and {z!r}")
        if not ctx.contains(x):
            errs.append(f"node {x!r} lies outside the anchor simplex")
    return errs


def node_names(graph: MediatedGraph) -> dict[Point, str]:
    """Canonical variable naming: goal -> x, anchors -> z_j, others -> w_i."""
    ctx = graph.ctx
    b = canon_point(ctx.goal)
    names: dict[Point, str] = {}
    for j, a in enumerate(ctx.anchors(), start=1):
        names[a] = f"z_{j}"
    names[b] = "x"
    i = 0
    for p in graph.X:
        if p != b:
            i += 1
            names[p] = f"w_{i}"
    return names


def to_soc(graph: MediatedGraph) -> SocSystem:
    """One rotated second-order constraint per node, in X order."""
    errs = validate(graph)
    if errs:
        raise DomainError("invalid mediated graph: " + "; ".join(errs))
    names = node_names(graph)
    constraints = tuple(
        SocConstraint(names[x], (names[y], names[z]))
        for x, (y, z) in zip(graph.X, graph.pairs))
    ordered = ["x"] + [f"z_{j}" for j in range(1, graph.ctx.d + 1)]
    ordered += [f"w_{i}" for i in range(1, len(graph.X))]
    return SocSystem(tuple(ordered), constraints)


def to_dot(graph: MediatedGraph) -> str:
    """GraphViz rendering: anchors are boxes, the goal is the doubled node."""
    names = node_names(graph)
    b = canon_point(graph.ctx.goal)

    def label(p: Point) -> str:
        return "(" + ", ".join(str(c) for c in p) + ")"

    lines = ["digraph mediated {", "  rankdir=LR;"]
    for a in graph.ctx.anchors():
        lines.append(f'  "{names[a]}" [label="{names[a]}\\n{label(a)}" shape=box];')
    for p in graph.X:
        shape = "doublecircle" if p == b else "circle"
        lines.append(f'  "{names[p]}" [label="{names[p]}\\n{label(p)}" shape={shape}];')
    for x, (y, z) in zip(graph.X, graph.pairs):
        lines.append(f'  "{names[x]}" -> "{names[y]}";')
        lines.append(f'  "{names[x]}" -> "{names[z]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _coord_to_json(c):
    c = canon_coord(c)
    if isinstance(c, int):
        return c
    if (c.denominator & (c.denominator - 1)) == 0:
        return float(c)
    return [c.numerator, c.denominator]


def _coord_from_json(v):
    if isinstance(v, list):
        return canon_coord(Fraction(v[0], v[1]))
    return canon_coord(Fraction(v))


def to_json_dict(graph: MediatedGraph) -> dict:
    return {
        "s": list(graph.ctx.s),
        "X": [[_coord_to_json(c) for c in p] for p in graph.X],
        "witness": [
            {"node": [_coord_to_json(c) for c in x],
             "pair": [[_coord_to_json(c) for c in y], [_coord_to_json(c) for c in z]]}
            for x, (y, z) in zip(graph.X, graph.pairs)
        ],
    }


def from_json_dict(data: dict) -> MediatedGraph:
    try:
        ctx = AlphaWeight(tuple(int(v) for v in data["s"]))
        X = tuple(tuple(_coord_from_json(c) for c in p) for p in data["X"])
        by_node = {}
        for entry in data["witness"]:
            node = tuple(_coord_from_json(c) for c in entry["node"])
            y, z = entry["pair"]
            by_node[canon_point(node)] = (
                tuple(_coord_from_json(c) for c in y),
                tuple(_coord_from_json(c) for c in z))
        pairs = tuple(by_node[canon_point(p)] for p in X)
    except (KeyError, TypeError, IndexError) as exc:
        raise InvalidInputError(f"malformed mediated graph JSON: {exc}") from exc
    return MediatedGraph(ctx, X, pairs)


def dumps(graph: MediatedGraph, **kwargs) -> str:
    return json.dumps(to_json_dict(graph), **kwargs)


def loads(text: str) -> MediatedGraph:
    return from_json_dict(json.loads(text))
