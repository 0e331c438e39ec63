"""Dense univariate polynomials as coefficient lists, lowest degree first.

The helpers are field-agnostic: coefficients may be ``int``, ``Fraction``,
``complex`` or mpmath numbers.  Exact zero tests are used unless a
``is_zero`` predicate is supplied.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from typing import Callable, Sequence

Poly = list


def _exact_zero(c) -> bool:
    return c == 0


def trim(p: Sequence, is_zero: Callable = _exact_zero) -> Poly:
    p = list(p)
    while p and is_zero(p[-1]):
        p.pop()
    return p


def degree(p: Sequence, is_zero: Callable = _exact_zero) -> int:
    """Degree, with ``-1`` for the zero polynomial."""
    return len(trim(p, is_zero)) - 1


def add(p: Sequence, q: Sequence) -> Poly:
    n = max(len(p), len(q))
    out = [0] * n
    for i, c in enumerate(p):
        out[i] = out[i] + c
    for i, c in enumerate(q):
        out[i] = out[i] + c
    return trim(out)


def neg(p: Sequence) -> Poly:
    return [-c for c in p]


def sub(p: Sequence, q: Sequence) -> Poly:
    return add(p, neg(q))


def scale(p: Sequence, c) -> Poly:
    return trim([c * a for a in p])


def mul(p: Sequence, q: Sequence) -> Poly:
    if not p or not q:
        return []
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return trim(out)


def power(p: Sequence, n: int) -> Poly:
    out: Poly = [1]
    for _ in range(n):
        out = mul(out, p)
    return out


def divmod_poly(p: Sequence, q: Sequence, is_zero: Callable = _exact_zero):
    """Euclidean division ``p = quot*q + rem`` with ``deg rem < deg q``."""
    p = trim(p, is_zero)
    q = trim(q, is_zero)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p)
    dq = len(q) - 1
    lead = q[-1]
    if len(rem) - 1 < dq:
        return [], rem
    quot = [0] * (len(rem) - dq)
    for k in range(len(rem) - 1 - dq, -1, -1):
        c = rem[k + dq] / lead
        quot[k] = c
        if c != 0:
            for i, b in enumerate(q):
                rem[k + i] = rem[k + i] - c * b
        rem[k + dq] = 0 * c
    return trim(quot, is_zero), trim(rem[:dq], is_zero)


def deriv(p: Sequence) -> Poly:
    return trim([k * c for k, c in enumerate(p)][1:])


def evaluate(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def from_roots(roots: Sequence) -> Poly:
    return reduce(mul, ([-r, 1] for r in roots), [1])


def gcd(p: Sequence, q: Sequence, is_zero: Callable = _exact_zero) -> Poly:
    """Monic gcd over a field."""
    a, b = trim(p, is_zero), trim(q, is_zero)
    while b:
        _, r = divmod_poly(a, b, is_zero)
        a, b = b, r
    if not a:
        return []
    return [c / a[-1] for c in a]


def is_squarefree(p: Sequence) -> bool:
    """Exact squarefreeness test (rational coefficients)."""
    return degree(gcd(p, deriv(p))) == 0


def resultant(p: Sequence, q: Sequence):
    """Resultant via the Euclidean algorithm over a field (exact)."""
    a, b = trim(p), trim(q)
    if not a or not b:
        return 0
    res = Fraction(1)
    while True:
        da, db = len(a) - 1, len(b) - 1
        if db == 0:
            return res * Fraction(b[0]) ** da
        _, r = divmod_poly(a, b)
        if not r:
            return 0
        dr = len(r) - 1
        if (da * db) % 2:
            res = -res
        res *= Fraction(b[-1]) ** (da - dr)
        a, b = b, r


def discriminant(p: Sequence):
    """Discriminant of a monic-or-not polynomial with exact coefficients."""
    p = trim(p)
    n = len(p) - 1
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return Fraction(sign) * resultant(p, deriv(p)) / Fraction(p[-1])


def to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    if isinstance(c, float) and c.is_integer():
        return Fraction(int(c))
    raise TypeError(f"not an exact rational: {c!r}")


def parse(text: str) -> Poly:
    """Parse ``"x^4-1"``-style input into exact rational coefficients."""
    import sympy
    from sympy.parsing.sympy_parser import (
        convert_xor,
        implicit_multiplication_application,
        parse_expr,
        standard_transformations,
    )

    x = sympy.Symbol("x")
    transforms = standard_transformations + (implicit_multiplication_application, convert_xor)
    expr = parse_expr(text, local_dict={"x": x}, transformations=transforms)
    coeffs = sympy.Poly(sympy.expand(expr), x, domain="QQ").all_coeffs()[::-1]
    return [Fraction(int(c.p), int(c.q)) for c in coeffs]


def format_coeff(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(c)


def to_string(p: Sequence) -> str:
    """Human-readable form, highest degree first."""
    terms = []
    for k in range(len(p) - 1, -1, -1):
        c = p[k]
        if c == 0:
            continue
        mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
        if mono and c == 1:
            s = mono
        elif mono and c == -1:
            s = "-" + mono
        else:
            s = format_coeff(c) + ("*" + mono if mono else "")
        terms.append(s)
    if not terms:
        return "0"
    return "+".join(terms).replace("+-", "-")
