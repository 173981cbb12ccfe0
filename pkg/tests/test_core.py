from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from powercone.core import (
    AlphaWeight,
    DomainError,
    InvalidInputError,
    barycentric,
    canon_point,
    integer_simplex_points,
    midpoint,
    normalize_alpha,
    weights_to_alpha,
)


def test_normalize_divides_gcd():
    assert normalize_alpha((2, 4, 6)).s == (1, 2, 3)
    assert normalize_alpha((1, 2, 3)).s == (1, 2, 3)
    assert normalize_alpha((5,)).s == (1,)


def test_normalize_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        normalize_alpha(())
    with pytest.raises(InvalidInputError):
        normalize_alpha((0, 2))
    with pytest.raises(InvalidInputError):
        normalize_alpha((-1, 2))
    with pytest.raises(InvalidInputError):
        normalize_alpha((1, Fraction(1, 2)))


def test_alpha_weight_invariants():
    a = AlphaWeight((1, 2, 3))
    assert a.d == 3
    assert a.shat == 6
    assert a.alpha == (Fraction(1, 6), Fraction(1, 3), Fraction(1, 2))
    assert a.goal == (1, 2)
    assert a.anchors() == ((6, 0), (0, 6), (0, 0))
    with pytest.raises(InvalidInputError):
        AlphaWeight((2, 4))


def test_contains():
    a = AlphaWeight((1, 2, 3))
    assert a.contains((1, 2))
    assert a.contains((6, 0))
    assert not a.contains((7, 0))
    assert not a.contains((-1, 2))
    assert not a.contains((4, 3))


def test_barycentric_examples():
    a = AlphaWeight((1, 2, 3))
    assert barycentric((1, 2), a) == (Fraction(1, 6), Fraction(1, 3), Fraction(1, 2))
    assert barycentric((0, 6), a) == (0, 1, 0)
    assert barycentric((0, 0), a) == (0, 0, 1)
    with pytest.raises(DomainError):
        barycentric((7, 0), a)


def test_integer_simplex_points_count():
    a = AlphaWeight((1, 2))  # shat=3, dim=1
    assert list(integer_simplex_points(a)) == [(0,), (1,), (2,), (3,)]
    b = AlphaWeight((1, 1, 1))  # shat=3, dim=2
    assert len(list(integer_simplex_points(b))) == 10


def test_midpoint_exactness():
    assert midpoint((1, 2), (3, 4)) == (2, 3)
    assert midpoint((0, 0), (1, 3)) == (Fraction(1, 2), Fraction(3, 2))
    assert canon_point((Fraction(4, 2), Fraction(1, 3))) == (2, Fraction(1, 3))


def test_weights_to_alpha():
    a = weights_to_alpha((Fraction(1, 6), Fraction(1, 3), Fraction(1, 2)))
    assert a.s == (1, 2, 3)
    with pytest.raises(InvalidInputError):
        weights_to_alpha((Fraction(1, 2), Fraction(1, 3)))


@st.composite
def weight_vectors(draw, max_d=5, max_entry=40):
    d = draw(st.integers(2, max_d))
    s = tuple(draw(st.integers(1, max_entry)) for _ in range(d))
    return s


@given(weight_vectors())
def test_normalize_idempotent(s):
    a = normalize_alpha(s)
    assert normalize_alpha(a.s).s == a.s
    assert sum(a.alpha) == 1


@settings(max_examples=40, deadline=None)
@given(weight_vectors(max_d=4, max_entry=12))
def test_barycentric_sums_to_one(s):
    a = normalize_alpha(s)
    for p in list(integer_simplex_points(a))[:50]:
        mu = barycentric(p, a)
        assert sum(mu) == 1
        assert all(m >= 0 for m in mu)
