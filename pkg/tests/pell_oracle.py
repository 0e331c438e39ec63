"""Brute-force torsion order via sympy (no code shared with the solver)."""

from fractions import Fraction

import sympy

x, w = sympy.symbols("x w")


def sqrt_coefficients(f, terms):
    """``sqrt(f) = x^(g+1) sum_k a_k x^-k``: the a_k from sympy's series in w = 1/x."""
    deg = len(f) - 1
    fw = sum(sympy.Rational(c.numerator, c.denominator) * w ** (deg - k) for k, c in enumerate(f))
    ser = sympy.series(sympy.sqrt(fw), w, 0, terms).removeO()
    return [ser.coeff(w, k) for k in range(terms)]


def oracle_order(f, n_max):
    f = [Fraction(c) for c in f]
    deg = len(f) - 1
    g = deg // 2 - 1
    a = sqrt_coefficients(f, 2 * n_max + 4)
    fx = sum(sympy.Rational(c.numerator, c.denominator) * x**k for k, c in enumerate(f))
    for n in range(g + 1, n_max + 1):
        m = n - g
        # Q = sum q_i x^i (i < m); Q sqrt(f) must have no x^-1 .. x^-(n-1) terms
        rows = [[a[g + 1 + e + i] for i in range(m)] for e in range(1, n)]
        A = sympy.Matrix(rows) if rows else sympy.zeros(0, m)
        null = A.nullspace() if rows else [sympy.Matrix([1] + [0] * (m - 1))]
        for v in null:
            Q = sum(v[i] * x**i for i in range(m))
            Ppoly = sum(v[i] * a[k] * x ** (g + 1 + i - k) for i in range(m) for k in range(g + 2 + i))
            rem = sympy.Poly(sympy.expand(Ppoly**2 - fx * Q**2), x)
            if rem.degree() <= 0 and rem.as_expr() != 0:
                return n
    return None
