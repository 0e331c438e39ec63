"""Webs of quadrics: vectors outside the kernel of every nonzero member.

For a basis ``Q_1..Q_g`` of a ``g``-dimensional space of quadratic forms on
``C^g``, a vector ``p`` lies in the kernel of some nonzero member exactly when
``D(p) = det[Q_1 p | ... | Q_g p]`` vanishes.  ``D`` is homogeneous of degree
``g`` and has degree at most ``g`` in each variable, so vanishing on the grid
``{0..g}^g`` forces ``D = 0`` identically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import Inconclusive, InvalidParam

REGULAR_TOL = 1e-8


@dataclass(frozen=True)
class QuadricWeb:
    g: int
    basis: tuple  # g symmetric g x g matrices (lists of lists)

    def __post_init__(self):
        if len(self.basis) != self.g:
            raise InvalidParam(f"a web in dimension {self.g} needs {self.g} forms")
        for Q in self.basis:
            A = np.asarray(Q, dtype=complex)
            if A.shape != (self.g, self.g) or not np.allclose(A, A.T):
                raise InvalidParam("forms must be symmetric g x g matrices")
        flat = np.array([np.asarray(Q, dtype=complex).ravel() for Q in self.basis])
        if np.linalg.matrix_rank(flat) < self.g:
            raise InvalidParam("forms are linearly dependent")

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for Q in self.basis for row in Q for v in row)

    def arrays(self) -> list:
        return [np.asarray(Q, dtype=complex) for Q in self.basis]

    def to_json(self) -> dict:
        def enc(v):
            return str(v) if isinstance(v, Fraction) else v

        return {"g": self.g, "basis": [[[enc(v) for v in row] for row in Q] for Q in self.basis]}


def monomial_form(g: int, i: int, j: int) -> list:
    """Matrix of ``x_i x_j`` (symmetric, exact entries)."""
    Q = [[Fraction(0)] * g for _ in range(g)]
    if i == j:
        Q[i][i] = Fraction(1)
    else:
        Q[i][j] = Q[j][i] = Fraction(1, 2)
    return Q


def web_from_monomials(g: int, pairs) -> QuadricWeb:
    return QuadricWeb(g, tuple(monomial_form(g, i, j) for i, j in pairs))


def counterexample_web() -> QuadricWeb:
    """``span{x0^2, x0 x1, x1^2, x2 x3}`` in four variables."""
    return web_from_monomials(4, [(0, 0), (0, 1), (1, 1), (2, 3)])


def _exact_det(M) -> Fraction:
    """Fraction-valued determinant by Gaussian elimination."""
    A = [[Fraction(v) for v in row] for row in M]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            if A[r][c] != 0:
                q = A[r][c] / A[c][c]
                A[r] = [a - q * b for a, b in zip(A[r], A[c])]
    return det


def web_determinant(W: QuadricWeb, p, exact: bool | None = None):
    """``D(p) = det[Q_1 p | ... | Q_g p]``."""
    exact = W.exact and all(isinstance(v, (int, Fraction)) for v in p) if exact is None else exact
    if exact:
        cols = [[sum(Fraction(Q[r][c]) * p[c] for c in range(W.g)) for r in range(W.g)] for Q in W.basis]
        return _exact_det([[cols[k][r] for k in range(W.g)] for r in range(W.g)])
    pv = np.asarray(p, dtype=complex)
    return complex(np.linalg.det(np.stack([Q @ pv for Q in W.arrays()], axis=1)))


def _scale(W: QuadricWeb, p) -> float:
    norm_q = max(np.linalg.norm(Q, 2) for Q in W.arrays())
    return float((norm_q * np.linalg.norm(np.asarray(p, dtype=complex))) ** W.g)


@dataclass(frozen=True)
class RegularVector:
    vector: tuple
    value: object
    samples: int


@dataclass(frozen=True)
class IdenticallySingular:
    """Certificate that ``D`` vanishes identically (exact grid evaluation)."""

    grid_points: int
    random_points: int


def _sample_vectors(g: int, rng, n_trials: int):
    for _ in range(n_trials):
        yield tuple(int(v) for v in rng.integers(-10, 11, size=g))
    for _ in range(n_trials):
        yield tuple(rng.normal(size=g) + 1j * rng.normal(size=g))


def find_regular_vector(W: QuadricWeb, n_trials: int = 20, rng=None):
    """A vector ``p`` with ``D(p) != 0`` or an :class:`IdenticallySingular` certificate."""
    rng = np.random.default_rng(0) if rng is None else rng
    count = 0
    for p in _sample_vectors(W.g, rng, n_trials):
        count += 1
        if not any(p):
            continue
        exact = W.exact and all(isinstance(v, int) for v in p)
        D = web_determinant(W, p, exact)
        if exact and D != 0:
            return RegularVector(p, D, count)
        if not exact and abs(D) > REGULAR_TOL * _scale(W, p):
            return RegularVector(p, D, count)
    if W.exact:
        grid = list(itertools.product(range(W.g + 1), repeat=W.g))
        if all(web_determinant(W, q, True) == 0 for q in grid):
            return IdenticallySingular(len(grid), count)
        nz = next(q for q in grid if web_determinant(W, q, True) != 0)
        return RegularVector(nz, web_determinant(W, nz, True), count + len(grid))
    raise Inconclusive("D(p) stayed below threshold at every sample; floating input cannot certify D = 0")


@dataclass(frozen=True)
class NondegenerateWitness:
    found: bool
    coefficients: tuple | None
    trials: int


def has_nondegenerate_member(W: QuadricWeb, n_trials: int = 20, rng=None) -> NondegenerateWitness:
    """Search ``sum lambda_k Q_k`` with nonzero determinant (all-ones first, then random)."""
    rng = np.random.default_rng(0) if rng is None else rng
    forms = W.arrays()
    scale = max(np.linalg.norm(Q, 2) for Q in forms)
    trials = [np.ones(W.g)] + [rng.normal(size=W.g) + 1j * rng.normal(size=W.g) for _ in range(n_trials)]
    for n, lam in enumerate(trials, 1):
        M = sum(l * Q for l, Q in zip(lam, forms))
        if abs(np.linalg.det(M)) > REGULAR_TOL * (scale * np.linalg.norm(lam)) ** W.g:
            return NondegenerateWitness(True, tuple(complex(v) for v in lam), n)
    return NondegenerateWitness(False, None, len(trials))


def kernel_member(W: QuadricWeb, p) -> np.ndarray | None:
    """Coefficients of a nonzero member with ``p`` in its kernel, if any (numerical)."""
    pv = np.asarray(p, dtype=complex)
    A = np.stack([Q @ pv for Q in W.arrays()], axis=1)
    _, s, vh = np.linalg.svd(A)
    if s[-1] > REGULAR_TOL * max(1.0, s[0]):
        return None
    return vh[-1].conj()


def random_web(g: int, rng) -> QuadricWeb:
    """Random integer web containing the identity (hence a nondegenerate member)."""
    while True:
        forms = [np.eye(g, dtype=int)]
        for _ in range(g - 1):
            A = rng.integers(-5, 6, size=(g, g))
            forms.append(A + A.T)
        flat = np.array([Q.ravel() for Q in forms])
        if np.linalg.matrix_rank(flat) == g:
            return QuadricWeb(g, tuple([[int(v) for v in row] for row in Q] for Q in forms))


def conjugate_web(W: QuadricWeb, A) -> QuadricWeb:
    """``A^T Q_k A`` for each basis form."""
    A = np.asarray(A)
    exact = W.exact and np.issubdtype(A.dtype, np.integer)
    out = []
    for Q in W.basis:
        if exact:
            Qf = [[Fraction(v) for v in row] for row in Q]
            n = W.g
            M = [[sum(int(A[k][i]) * Qf[k][l] * int(A[l][j]) for k in range(n) for l in range(n)) for j in range(n)] for i in range(n)]
            out.append(M)
        else:
            out.append((A.T @ np.asarray(Q, dtype=complex) @ A).tolist())
    return QuadricWeb(W.g, tuple(out))
