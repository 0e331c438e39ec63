"""Kodaira-Spencer map of the odd-degree family via residues.

For ``y^2 = f(x) = x(x-1)(x-s_0)...(x-s_{2g-2})`` and the deformation
``d/ds_i``, pairing the cocycle with ``x^j dx^2 / y^k`` leaves the 1-form

    x^j y^(2-k) dx / (h(x) (x - s_i)),   2 y dy = h(x) dx,

whose only pole near ``P_i = (s_i, 0)`` is at ``P_i``.  For even quadratic
differentials (``k = 2``) the residue is ``c_i s_i^j`` with
``c_i = 2 / f'(s_i)``; for odd ones (``k = 1``) it vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import polynomials as P
from . import series
from .curve_family import FamilyPoint, ModelKind, h_polynomial
from .errors import InvalidParam, ResidueDisagreement
from .quadrature import trapezoid_circle
from .rank import RankResult, numerical_rank

AGREE_TOL = 1e-10
SERIES_TERMS = 4


def _roots(p: FamilyPoint, exact: bool):
    if exact:
        return [Fraction(0), Fraction(1)] + p.exact_params()
    return [0j, 1 + 0j] + [complex(c) for c in p.params]


def _check(p: FamilyPoint, i: int, j: int, k: int):
    if p.model.kind is not ModelKind.ODD:
        raise InvalidParam("Kodaira-Spencer residues are implemented for the odd-degree model")
    g = p.genus
    if not 0 <= i <= 2 * g - 2:
        raise InvalidParam(f"parameter index {i} out of range")
    if not 0 <= j <= 2 * g - 2:
        raise InvalidParam(f"exponent {j} out of range 0..{2 * g - 2}")
    if k not in (1, 2):
        raise InvalidParam("quadratic differential must carry y^1 or y^2 in the denominator")


def residue_series(p: FamilyPoint, i: int, j: int, k: int = 2, exact: bool | None = None):
    """Residue from the local expansion in the uniformizer ``y`` at ``P_i``.

    Writing ``z = y^2`` and ``x = s_i + u(z)`` (series reversion of
    ``f(s_i + u) = z``), the 1-form becomes ``2 y^(1-k) S(z) dy`` with
    ``S = x^j z u'(z) / (h(x) u)``; its ``y^{-1}`` coefficient is the residue.
    """
    _check(p, i, j, k)
    exact = p.is_rational if exact is None else exact
    roots = _roots(p, exact)
    s = roots[2 + i]
    n = SERIES_TERMS
    f = P.from_roots(roots)
    h = h_polynomial(p)
    if not exact:
        h = [complex(c) for c in h]
    # f(s + u) = z as a series in u, then reverted: u(z) with u[0] = 0
    fs = _taylor(f, s, n + 1)
    fs[0] = 0  # s_i is a root by construction; drop floating-point residue
    u = series.reverse(fs, n + 1)
    x = [s + u[0]] + u[1:]
    xj = [1] + [0] * n
    for _ in range(j):
        xj = series.mul(xj, x, n + 1)
    hx = series.compose(_taylor(h, s, n + 1), u, n + 1)
    u_over_z = u[1:] + [0]  # u / z
    du = series.deriv(u) + [0]
    S = series.mul(series.mul(xj, du, n + 1), series.inv(series.mul(hx, u_over_z, n + 1), n + 1), n + 1)
    # 2 y^(1-k) S(z) dy: the y^{-1} coefficient needs 1 - k + 2m = -1
    if (k - 2) % 2:
        return 0 * S[0]
    return 2 * S[(k - 2) // 2]


def _taylor(poly, s, n):
    out, d, fact = [], list(poly), 1
    for m in range(n):
        out.append(P.evaluate(d, s) / fact)
        d = P.deriv(d)
        fact *= m + 1
    return out


def residue_contour(p: FamilyPoint, i: int, j: int, k: int = 2, n_nodes: int = 64) -> complex:
    """Residue from the trapezoid rule on the doubled circle around ``x = s_i``.

    Going twice around ``s_i`` in the ``x``-plane lifts to one loop around
    ``P_i``; ``y`` is continued as ``sqrt(x - s_i) sqrt(f / (x - s_i))``.
    """
    _check(p, i, j, k)
    roots = _roots(p, False)
    s = roots[2 + i]
    others = [r for m, r in enumerate(roots) if m != 2 + i]
    radius = 1e-2 * min(abs(s - r) for r in others)
    h = h_polynomial(p)
    h = np.array([complex(c) for c in h[::-1]])
    rest0 = np.prod([s - r for r in others])

    def F(z):
        theta = 2 * math.pi * np.arange(len(z)) / n_nodes
        root_local = math.sqrt(radius) * np.exp(0.5j * theta)  # continuous sqrt(x - s)
        rest = np.ones_like(z)
        for r in others:
            rest = rest * (z - r)
        y = root_local * np.sqrt(rest / rest0) * np.sqrt(rest0)
        return z**j * y ** (2 - k) / (np.polyval(h, z) * (z - s))

    return trapezoid_circle(F, s, radius, n=n_nodes, turns=2)


def ks_residue(p: FamilyPoint, i: int, j: int, k: int = 2, tol: float = AGREE_TOL):
    """Residue computed by series and by contour; raises if they disagree."""
    a = residue_series(p, i, j, k)
    b = residue_contour(p, i, j, k)
    scale = max(1.0, abs(complex(a)))
    if abs(complex(a) - b) > tol * scale:
        raise ResidueDisagreement(f"series {complex(a)} vs contour {b} at i={i}, j={j}")
    return a


@dataclass(frozen=True)
class KSTensor:
    s: FamilyPoint
    M: list  # (2g-1) x (2g-1), exact entries when s is rational
    c: list
    symmetric_forms: list  # T_i with (T_i)_ab = M[i][a + b]

    @property
    def genus(self) -> int:
        return self.s.genus

    def matrix(self) -> np.ndarray:
        return np.array([[complex(v) for v in row] for row in self.M])

    def determinant(self):
        if self.s.is_rational:
            import sympy

            return Fraction(str(sympy.Matrix(self.M).det()))
        return complex(np.linalg.det(self.matrix()))

    def forms(self) -> list:
        return [np.array([[complex(v) for v in row] for row in T]) for T in self.symmetric_forms]

    def to_json(self) -> dict:
        def enc(v):
            return P.format_coeff(v) if isinstance(v, Fraction) else [complex(v).real, complex(v).imag]

        det = self.determinant()
        return {
            "M": [[enc(v) for v in row] for row in self.M],
            "c": [enc(v) for v in self.c],
            "det": enc(det),
        }


def ks_tensor(p: FamilyPoint, check: bool = True) -> KSTensor:
    """``M[i][j] = theta_{d/ds_i}(x^j dx^2 / y^2)`` with both residue methods."""
    n = 2 * p.genus - 1
    g = p.genus
    M = [[ks_residue(p, i, j) if check else residue_series(p, i, j) for j in range(n)] for i in range(n)]
    c = [row[0] for row in M]
    T = [[[M[i][a + b] for b in range(g)] for a in range(g)] for i in range(n)]
    return KSTensor(p, M, c, T)


def c_closed_form(p: FamilyPoint, i: int):
    """``2 / f'(s_i)``."""
    roots = _roots(p, p.is_rational)
    f = P.from_roots(roots)
    return 2 / P.evaluate(P.deriv(f), roots[2 + i])


def contracted_rank(T, omega) -> RankResult:
    """Rank of the matrix whose rows are ``(T_i omega)^T``."""
    omega = np.asarray(omega, dtype=complex)
    rows = np.array([np.asarray(Ti, dtype=complex) @ omega for Ti in T])
    return numerical_rank(rows)


@dataclass(frozen=True)
class ContractedMax:
    max_rank: int
    witness: np.ndarray


def max_contracted_rank(T, n_trials: int = 20, rng=None, witness=None) -> ContractedMax:
    """Largest certified contracted rank over random ``omega`` (plus a given witness)."""
    if n_trials < 1:
        raise InvalidParam("n_trials must be positive")
    rng = np.random.default_rng(0) if rng is None else rng
    T = [np.asarray(Ti, dtype=complex) for Ti in T]
    g = T[0].shape[0] if T else 0
    candidates = [] if witness is None else [np.asarray(witness, dtype=complex)]
    candidates += [rng.normal(size=g) + 1j * rng.normal(size=g) for _ in range(n_trials)]
    best, arg = 0, np.zeros(g, dtype=complex)
    for w in candidates:
        r = contracted_rank(T, w)
        if r.certified and r.rank > best:
            best, arg = r.rank, w
    return ContractedMax(best, arg)


def vandermonde_witness(g: int) -> np.ndarray:
    """``omega = (1, 0, ..., 0)``: rows become ``c_i (1, s_i, ..., s_i^{g-1})``."""
    w = np.zeros(g, dtype=complex)
    w[0] = 1
    return w
