"""Polynomial Pell equations ``P^2 - f Q^2 = c`` and torsion of ``[inf+] - [inf-]``.

If ``P^2 - f Q^2 = c`` with ``c`` a nonzero constant and ``deg P = n``, the
function ``P + Q y`` has divisor ``n([inf+] - [inf-])``, so the section is
torsion of order dividing ``n``.  Minimal solutions are read off the
continued-fraction expansion of ``sqrt(f)`` at infinity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from . import polynomials as P
from . import series
from .curve_family import FamilyPoint, even_model, make_point
from .errors import DegenerateDiscriminant, InvalidParam, NonSquarefree, NotEvenDegree

FLOAT_DPS = 40
FLOAT_TOL = 1e-20


@dataclass(frozen=True)
class LaurentSeries:
    """``sum_k coeffs[k] x^(lead_exp - k)``, known up to ``len(coeffs)`` terms."""

    coeffs: tuple
    lead_exp: int

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def coefficient(self, exp: int):
        k = self.lead_exp - exp
        if k < 0:
            return 0
        if k >= len(self.coeffs):
            raise IndexError(f"x^{exp} lies beyond the truncation order")
        return self.coeffs[k]

    def polynomial_part(self) -> list:
        """Terms with nonnegative exponent, lowest degree first."""
        return P.trim([self.coefficient(e) for e in range(self.lead_exp + 1)])

    def times_polynomial(self, q: Sequence) -> "LaurentSeries":
        """Product with a polynomial; the result loses ``deg q`` trailing terms."""
        dq = len(q) - 1
        n = self.order - dq
        out = []
        for k in range(n):
            acc = 0
            for i, c in enumerate(q):
                # x^i * x^(lead - m) contributes to x^(lead + dq - k) when m = k - dq + i
                m = k - dq + i
                if 0 <= m < self.order:
                    acc = acc + c * self.coeffs[m]
            out.append(acc)
        return LaurentSeries(tuple(out), self.lead_exp + dq)


def _check_even_monic(f: Sequence) -> int:
    f = P.trim(f)
    deg = len(f) - 1
    if deg < 2 or deg % 2:
        raise NotEvenDegree(f"need an even-degree polynomial of degree >= 2, got degree {deg}")
    if f[-1] != 1:
        raise InvalidParam("polynomial must be monic")
    return deg // 2 - 1


def sqrt_series(f: Sequence, order: int) -> LaurentSeries:
    """``S`` with ``S^2 = f`` to ``order`` terms, ``S = x^{g+1}(1 + O(1/x))``."""
    f = P.trim(f)
    g = _check_even_monic(f)
    deg = 2 * g + 2
    # f = x^deg (1 + u(w)), w = 1/x
    u = [f[deg - k] for k in range(deg + 1)]
    s = series.sqrt1(u, order)
    return LaurentSeries(tuple(s), g + 1)


@dataclass(frozen=True)
class PellSolution:
    P: tuple
    Q: tuple
    c: object
    order: int
    exact: bool = True

    def residual(self, f: Sequence):
        lhs = P.sub(P.mul(self.P, self.P), P.mul(f, P.mul(self.Q, self.Q)))
        return P.sub(lhs, [self.c])

    def to_json(self) -> dict:
        return {
            "found": True,
            "P": P.to_string(self.P),
            "Q": P.to_string(self.Q),
            "c": P.format_coeff(self.c) if self.exact else str(self.c),
            "order": self.order,
        }


def _require_squarefree(f):
    if not P.is_squarefree(f):
        raise NonSquarefree("f has a repeated root")


def pell_solve(f: Sequence, n_max: int | None = None, exact: bool = True) -> PellSolution | None:
    """Minimal solution of ``P^2 - f Q^2 = c`` with ``deg P <= n_max``, or ``None``.

    Runs the continued fraction of ``sqrt(f)``: with ``a_0`` the polynomial
    part of ``sqrt(f)`` and ``(P_0, Q_0) = (0, 1)``,

        a_k = quo(a_0 + P_k, Q_k),  P_{k+1} = a_k Q_k - P_k,
        Q_{k+1} = (f - P_{k+1}^2) / Q_k,

    and the convergents ``p_k/q_k`` satisfy
    ``p_k^2 - f q_k^2 = (-1)^{k+1} Q_{k+1}``.  The first constant ``Q_{k+1}``
    gives the minimal solution.
    """
    if exact:
        return _continued_fraction([P.to_fraction(c) for c in P.trim(f)], n_max, True)
    with mpmath.workdps(FLOAT_DPS):
        fm = [mpmath.mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else mpmath.mpf(c) for c in f]
        return _continued_fraction(P.trim(fm), n_max, False)


def _continued_fraction(f, n_max, exact):
    g = _check_even_monic(f)
    if exact:
        _require_squarefree(f)
    n_max = 4 * g + 4 if n_max is None else n_max
    a0 = sqrt_series(f, g + 2).polynomial_part()
    scale = max(abs(c) for c in f)

    def zero(c):
        return c == 0 if exact else abs(c) <= FLOAT_TOL * scale

    Pk, Qk = [0], [1]
    p_prev, p_cur = [0], [1]  # p_{k-2}, p_{k-1}
    q_prev, q_cur = [1], [0]
    k = 0
    while True:
        a, _ = P.divmod_poly(P.add(a0, Pk), Qk, zero)
        p_prev, p_cur = p_cur, P.add(P.mul(a, p_cur), p_prev)
        q_prev, q_cur = q_cur, P.add(P.mul(a, q_cur), q_prev)
        if P.degree(p_cur, zero) > n_max:
            return None
        P_next = P.sub(P.mul(a, Qk), Pk)
        Q_next, rem = P.divmod_poly(P.sub(f, P.mul(P_next, P_next)), Qk, zero)
        if rem and not all(zero(c) for c in rem):
            raise ArithmeticError("continued fraction lost exactness")
        Q_next = P.trim(Q_next, zero)
        if not Q_next:
            raise NonSquarefree("f is a perfect square")
        if len(Q_next) == 1:
            c = Q_next[0] * (-1) ** (k + 1)
            lead = p_cur[-1]
            Pn = [x / lead for x in P.trim(p_cur, zero)]
            Qn = [x / lead for x in P.trim(q_cur, zero)]
            sol = PellSolution(tuple(Pn), tuple(Qn), c / (lead * lead), len(Pn) - 1, exact)
            res = sol.residual(f)
            if exact and res:
                raise ArithmeticError("Pell identity failed")
            if not exact and any(abs(x) > FLOAT_TOL * scale * (1 + abs(sol.c)) for x in res):
                raise ArithmeticError("Pell identity failed in floating mode")
            return sol
        Pk, Qk = P_next, Q_next
        k += 1


def torsion_order(f: Sequence, n_max: int | None = None) -> int | None:
    sol = pell_solve(f, n_max)
    return None if sol is None else sol.order


def brute_force_order(f: Sequence, n_max: int) -> int | None:
    """Smallest ``n <= n_max`` admitting ``Q`` with ``P^2 - f Q^2`` constant.

    Independent of the continued fraction: for each ``n`` the coefficients
    of ``x^{-1} .. x^{-(n-1)}`` in ``sqrt(f) Q`` must vanish, a homogeneous
    linear system in the ``n - g`` coefficients of ``Q``.
    """
    import sympy

    f = [P.to_fraction(c) for c in P.trim(f)]
    g = _check_even_monic(f)
    S = sqrt_series(f, 2 * n_max + 4)
    for n in range(g + 1, n_max + 1):
        m = n - g  # unknown coefficients of Q, degree n - g - 1
        rows = []
        for e in range(1, n):
            # coefficient of x^{-e} in S * x^i
            rows.append([S.coefficient(-e - i) for i in range(m)])
        A = sympy.Matrix(rows) if rows else sympy.zeros(0, m)
        if m and (A.rows == 0 or A.rank() < m):
            return n
    return None


@dataclass(frozen=True)
class PellFamilyResult:
    point: FamilyPoint
    solution: PellSolution
    betti_distance: float | None = None

    def __iter__(self):
        return iter((self.point, self.solution))


def pell_family(Ppoly: Sequence, p, validate: bool = False) -> PellFamilyResult:
    """Even-degree point ``f = P^2 - p`` with certificate ``(P, 1, p)``.

    With ``validate`` the numerical Betti vector is checked to lie near
    ``(1/n) Z^{2g}``, ``n = deg P``.
    """
    Pp = [P.to_fraction(c) for c in P.trim(Ppoly)]
    p = P.to_fraction(p)
    n = len(Pp) - 1
    if n < 2 or Pp[-1] != 1:
        raise InvalidParam("P must be monic of degree g + 1 >= 2")
    f = P.sub(P.mul(Pp, Pp), [p])
    if P.discriminant(f) == 0:
        raise DegenerateDiscriminant("P^2 - p has a repeated root")
    g = n - 1
    point = make_point(even_model(g), [c for c in f[:-1]] + [Fraction(0)] * (2 * g + 2 - len(f[:-1])))
    sol = PellSolution(tuple(Pp), (Fraction(1),), p, n)
    assert not sol.residual(f)
    dist = betti_torsion_distance(point, n) if validate else None
    return PellFamilyResult(point, sol, dist)


def betti_torsion_distance(point: FamilyPoint, n: int) -> float:
    """Distance of ``n * beta`` from the integer lattice, divided by ``n``."""
    from .betti_map import evaluate

    beta = evaluate(point).evaluation.beta
    return float(np.max(np.abs(beta * n - np.rint(beta * n)))) / n
