from fractions import Fraction

import sympy
from hypothesis import given, strategies as st

from bettilab import polynomials as P
from bettilab import series

small_int = st.integers(-6, 6)
poly = st.lists(small_int, min_size=1, max_size=6).map(lambda c: [Fraction(v) for v in c])


def to_sympy(p):
    x = sympy.Symbol("x")
    return sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in p])) or [0], x)


@given(poly, poly)
def test_mul_matches_sympy(a, b):
    assert to_sympy(P.mul(a, b)) == to_sympy(a) * to_sympy(b)


@given(poly, poly.filter(lambda q: any(q)))
def test_divmod_identity(a, b):
    q, r = P.divmod_poly(a, b)
    assert P.trim(P.add(P.mul(q, b), r)) == P.trim(a)
    assert P.degree(r) < P.degree(b)


@given(poly.filter(lambda p: P.degree(p) >= 2))
def test_discriminant_matches_sympy(p):
    x = sympy.Symbol("x")
    expr = to_sympy(p)
    assert Fraction(str(sympy.discriminant(expr.as_expr(), x))) == P.discriminant(p)


def test_parse_and_print():
    assert P.parse("x^4-1") == [-1, 0, 0, 0, 1]
    assert P.parse("(x^3-2x)^2-1") == [-1, 0, 4, 0, -4, 0, 1]
    assert P.parse("x/2 + 1/3") == [Fraction(1, 3), Fraction(1, 2)]
    assert P.to_string([Fraction(-1), 0, 0, 0, Fraction(1)]) == "x^4-1"


def test_squarefree():
    assert P.is_squarefree(P.parse("x^4-1"))
    assert not P.is_squarefree(P.parse("(x^2+1)^2"))


@given(st.lists(st.integers(-5, 5), min_size=2, max_size=5))
def test_series_inverse_and_sqrt(c):
    a = [Fraction(1)] + [Fraction(v) for v in c]
    n = 6
    assert series.mul(a, series.inv(a, n), n) == [1] + [0] * (n - 1)
    s = series.sqrt1(a, n)
    assert series.mul(s, s, n) == series.pad(a, n)


def test_series_reversion():
    # u + u^2 reverted is (sqrt(1 + 4z) - 1) / 2 = z - z^2 + 2 z^3 - 5 z^4
    a = [0, Fraction(1), Fraction(1)]
    assert series.reverse(a, 5) == [0, 1, -1, 2, -5]
