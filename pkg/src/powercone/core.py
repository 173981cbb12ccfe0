"""Exact rational geometry for weighted geometric means.

A weight vector alpha = (s_1, ..., s_d) / shat with positive integer s_i,
gcd(s_1, ..., s_d) = 1 and shat = sum(s_i) lives on the standard simplex.
All downstream machinery (mediated graphs, cone rewriting) works with the
integer vector s and exact rational barycentric coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Iterator, Sequence

Rational = Fraction

# A lattice point is a (d-1)-tuple of coordinates.  Search code uses plain
# ints; constructions that halve points may introduce dyadic Fractions.
Point = tuple


class InvalidInputError(ValueError):
    """An argument violates a documented precondition."""


class DomainError(ValueError):
    """A geometric argument lies outside its admissible region."""


def canon_coord(value) -> int | Fraction:
    """Return the coordinate as an int when integral, else an exact Fraction."""
    f = Fraction(value)
    return int(f) if f.denominator == 1 else f


def canon_point(coords: Iterable) -> Point:
    return tuple(canon_coord(c) for c in coords)


@dataclass(frozen=True)
class AlphaWeight:
    """A simplex weight vector stored in lowest integer terms.

    s is the tuple of positive integer weights with gcd 1; the rational
    weights are s_i / shat.
    """

    s: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.s, tuple):
            object.__setattr__(self, "s", tuple(self.s))
        if not self.s:
            raise InvalidInputError("weight vector must be non-empty")
        for v in self.s:
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise InvalidInputError(f"weights must be positive integers, got {self.s!r}")
        if reduce(gcd, self.s) != 1:
            raise InvalidInputError(f"weights must have gcd 1, got {self.s!r}; use normalize_alpha")

    @property
    def d(self) -> int:
        return len(self.s)

    @property
    def shat(self) -> int:
        return sum(self.s)

    @property
    def alpha(self) -> tuple[Fraction, ...]:
        shat = self.shat
        return tuple(Fraction(v, shat) for v in self.s)

    @property
    def goal(self) -> Point:
        """The lattice point carrying the weight vector: (s_1, ..., s_{d-1})."""
        return self.s[:-1]

    def anchors(self) -> tuple[Point, ...]:
        """The d anchor points: shat * e_j for j < d, then the origin."""
        dim = self.d - 1
        shat = self.shat
        out = []
        for j in range(dim):
            pt = [0] * dim
            pt[j] = shat
            out.append(tuple(pt))
        out.append(tuple([0] * dim))
        return tuple(out)

    def contains(self, point: Sequence) -> bool:
        """Whether the point lies in the anchor simplex (coords >= 0, sum <= shat)."""
        if len(point) != self.d - 1:
            return False
        total = 0
        for c in point:
            if c < 0:
                return False
            total += c
        return total <= self.shat


def normalize_alpha(raw: Sequence[int]) -> AlphaWeight:
    """Canonicalize an integer weight vector by dividing out the gcd."""
    vals = tuple(raw)
    if not vals:
        raise InvalidInputError("weight vector must be non-empty")
    for v in vals:
        if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
            raise InvalidInputError(f"weights must be positive integers, got {vals!r}")
    g = reduce(gcd, vals)
    return AlphaWeight(tuple(v // g for v in vals))


def weights_to_alpha(weights: Sequence[Fraction]) -> AlphaWeight:
    """Build an AlphaWeight from rational weights summing to 1."""
    fracs = [Fraction(w) for w in weights]
    if any(w <= 0 for w in fracs):
        raise InvalidInputError(f"weights must be positive, got {weights!r}")
    if sum(fracs) != 1:
        raise InvalidInputError(f"weights must sum to 1, got {weights!r}")
    denom = reduce(lambda a, b: a * b // gcd(a, b), (w.denominator for w in fracs))
    return normalize_alpha(tuple(int(w * denom) for w in fracs))


def barycentric(point: Sequence, ctx: AlphaWeight) -> tuple[Fraction, ...]:
    """Barycentric coordinates of a point with respect to the ctx anchors.

    Anchor shat*e_j carries weight mu_j = coord_j / shat for j < d and the
    origin carries the slack mu_d = 1 - sum(mu_j).  These are the exponents
    a node contributes in the geometric-mean reading of the graph.
    """
    if len(point) != ctx.d - 1:
        raise InvalidInputError(f"point dimension {len(point)} != {ctx.d - 1}")
    shat = ctx.shat
    mu = [Fraction(c, 1) / shat for c in point]
    slack = 1 - sum(mu)
    if any(m < 0 for m in mu) or slack < 0:
        raise DomainError(f"point {point!r} lies outside the anchor simplex")
    mu.append(slack)
    return tuple(mu)


def integer_simplex_points(ctx: AlphaWeight) -> Iterator[tuple[int, ...]]:
    """All integer lattice points of the anchor simplex, lexicographic order."""
    dim = ctx.d - 1
    shat = ctx.shat

    def rec(prefix: tuple[int, ...], left: int):
        if len(prefix) == dim:
            yield prefix
            return
        for v in range(left + 1):
            yield from rec(prefix + (v,), left - v)

    yield from rec((), shat)


def midpoint(y: Sequence, z: Sequence) -> Point:
    return canon_point(Fraction(a + b) / 2 for a, b in zip(y, z))
