"""Quadrature rules on [0, 1] with node doubling.

Two integral shapes occur for abelian integrals:

* ``int_0^1 F(t) dt / sqrt(t(1-t))`` for segments between two branch points.
  Gauss-Chebyshev absorbs both endpoint singularities; tanh-sinh is the
  fallback when a nearby branch point spoils spectral convergence.
* ``int_0^1 F(t) dt`` with smooth ``F`` (Gauss-Legendre).

``F`` is vectorised: it takes an array of ``n`` nodes and returns an
``(n, k)`` array.  The ``"dd"`` precision runs the same rules in 106-bit
mpmath arithmetic on object arrays.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np
from scipy.special import roots_legendre

from .errors import QuadratureDivergence, SchemaError

DD_PREC = 106
DD_TOL = 1e-26


@dataclass(frozen=True)
class QuadratureConfig:
    nodes: int = 64
    refine_tol: float = 1e-13
    precision: str = "double"
    max_nodes: int = 8192

    def __post_init__(self):
        if self.precision not in ("double", "dd"):
            raise SchemaError(f"precision must be 'double' or 'dd', got {self.precision!r}")
        if self.nodes < 16:
            raise SchemaError("quadrature order must be at least 16")

    def to_json(self) -> dict:
        return {"nodes": self.nodes, "refine_tol": self.refine_tol, "precision": self.precision}

    @classmethod
    def from_json(cls, obj: dict) -> "QuadratureConfig":
        try:
            return cls(
                nodes=int(obj.get("nodes", 64)),
                refine_tol=float(obj.get("refine_tol", 1e-13)),
                precision=str(obj.get("precision", "double")),
            )
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"bad quadrature config: {exc}") from exc


DEFAULT_CONFIG = QuadratureConfig()


class Backend:
    """Arithmetic used for node generation and integrand evaluation."""

    name = "double"

    def asarray(self, values):
        return np.asarray(values, dtype=complex)

    def sqrt(self, z):
        return np.sqrt(z)

    def const(self, c):
        return complex(c)

    def to_complex(self, arr) -> np.ndarray:
        return np.asarray(arr, dtype=complex)

    def chebyshev(self, n: int):
        return _cheb_double(n)

    def legendre(self, n: int):
        return _leg_double(n)

    def tanh_sinh(self, level: int):
        return _ts_double(level)


class DDBackend(Backend):
    name = "dd"
    _sqrt = np.frompyfunc(lambda z: mpmath.sqrt(z), 1, 1)

    def asarray(self, values):
        with mpmath.workprec(DD_PREC):
            return np.array([mpmath.mpc(v) for v in np.ravel(values)], dtype=object).reshape(np.shape(values))

    def sqrt(self, z):
        with mpmath.workprec(DD_PREC):
            return self._sqrt(z)

    def const(self, c):
        with mpmath.workprec(DD_PREC):
            return mpmath.mpc(c)

    def polish(self, coeffs, roots, steps: int = 4):
        """Newton-refine double-precision roots of ``coeffs`` (highest first)."""
        with mpmath.workprec(DD_PREC):
            c = [mpmath.mpc(v) for v in coeffs]
            d = [k * v for k, v in zip(range(len(c) - 1, 0, -1), c[:-1])]
            out = []
            for r in roots:
                r = mpmath.mpc(r)
                for _ in range(steps):
                    r -= mpmath.polyval(c, r) / mpmath.polyval(d, r)
                out.append(r)
        return np.array(out, dtype=object)

    def to_complex(self, arr):
        return np.array([complex(v) for v in np.ravel(arr)], dtype=complex).reshape(np.shape(arr))

    def chebyshev(self, n):
        return _cheb_dd(n)

    def legendre(self, n):
        return _leg_dd(n)

    def tanh_sinh(self, level):
        return _ts_dd(level)


_BACKENDS = {"double": Backend(), "dd": DDBackend()}


def backend(precision: str) -> Backend:
    return _BACKENDS[precision]


# -------------------------------------------------------------- node tables


@functools.lru_cache(maxsize=64)
def _cheb_double(n: int):
    k = np.arange(1, n + 1)
    half = (2 * k - 1) * np.pi / (4 * n)
    w = np.full(n, np.pi / n)
    return np.cos(half) ** 2, np.sin(half) ** 2, w


@functools.lru_cache(maxsize=64)
def _leg_double(n: int):
    x, w = roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * w


@functools.lru_cache(maxsize=32)
def _ts_double(level: int):
    h = 2.0 ** (-level)
    s = np.arange(-4.0, 4.0 + h / 2, h)
    u = 0.5 * np.pi * np.sinh(s)
    # t and 1-t computed separately to keep relative accuracy at both ends
    t = 1.0 / (1.0 + np.exp(-2.0 * u))
    t1 = 1.0 / (1.0 + np.exp(2.0 * u))
    w = h * 0.5 * np.pi * np.cosh(s) / np.cosh(u)
    return t, t1, w


@functools.lru_cache(maxsize=16)
def _cheb_dd(n: int):
    with mpmath.workprec(DD_PREC):
        half = [(2 * k - 1) * mpmath.pi / (4 * n) for k in range(1, n + 1)]
        t = [mpmath.cos(a) ** 2 for a in half]
        t1 = [mpmath.sin(a) ** 2 for a in half]
        w = [mpmath.pi / n] * n
    return np.array(t, dtype=object), np.array(t1, dtype=object), np.array(w, dtype=object)


@functools.lru_cache(maxsize=16)
def _leg_dd(n: int):
    with mpmath.workprec(DD_PREC):
        xs, ws = [], []
        # Newton on P_n seeded by the double-precision nodes
        x0, _ = roots_legendre(n)
        for x in x0:
            x = mpmath.mpf(x)
            for _ in range(8):
                p, dp = mpmath.legendre(n, x), mpmath.diff(lambda z: mpmath.legendre(n, z), x)
                x -= p / dp
            dp = mpmath.diff(lambda z: mpmath.legendre(n, z), x)
            xs.append((x + 1) / 2)
            ws.append(1 / ((1 - x * x) * dp * dp))
    return np.array(xs, dtype=object), np.array(ws, dtype=object)


@functools.lru_cache(maxsize=16)
def _ts_dd(level: int):
    with mpmath.workprec(DD_PREC):
        h = mpmath.mpf(2) ** (-level)
        n = int(4 / float(h))
        ts, t1s, ws = [], [], []
        for k in range(-n, n + 1):
            s = k * h
            u = mpmath.pi / 2 * mpmath.sinh(s)
            ts.append(1 / (1 + mpmath.exp(-2 * u)))
            t1s.append(1 / (1 + mpmath.exp(2 * u)))
            ws.append(h * mpmath.pi / 2 * mpmath.cosh(s) / mpmath.cosh(u))
    return np.array(ts, dtype=object), np.array(t1s, dtype=object), np.array(ws, dtype=object)


# ------------------------------------------------------------------ drivers


@dataclass
class QuadResult:
    value: np.ndarray
    error: float
    nodes: int
    rule: str


def _weighted_sum(F, t, w):
    if t.dtype == object:
        with mpmath.workprec(DD_PREC):
            return np.tensordot(w, F(t), axes=(0, 0))
    return np.tensordot(w, F(t), axes=(0, 0))


def _singular_sum(F, t, t1, w, pair):
    G = (lambda x: F(x, t1)) if pair else F
    return _weighted_sum(G, t, w)


def _rel_change(a, b, bk: Backend) -> float:
    a, b = bk.to_complex(a), bk.to_complex(b)
    return float(np.max(np.abs(a - b)) / (1.0 + np.max(np.abs(b))))


def _tolerance(cfg: QuadratureConfig) -> float:
    # extended precision is only useful if refinement continues past double
    return cfg.refine_tol if cfg.precision == "double" else min(cfg.refine_tol, DD_TOL)


def integrate_singular(F: Callable, cfg: QuadratureConfig = DEFAULT_CONFIG, pair: bool = False) -> QuadResult:
    """``int_0^1 F(t) / sqrt(t (1 - t)) dt`` for ``F`` smooth on [0, 1].

    With ``pair`` set, ``F`` is called as ``F(t, 1 - t)`` with the complement
    computed independently, so factors vanishing at ``t = 1`` keep their
    relative accuracy.
    """
    bk = backend(cfg.precision)
    tol = _tolerance(cfg)
    n = cfg.nodes
    err = math.inf
    prev = _singular_sum(F, *bk.chebyshev(n), pair)
    while 2 * n <= cfg.max_nodes:
        n *= 2
        cur = _singular_sum(F, *bk.chebyshev(n), pair)
        err = _rel_change(cur, prev, bk)
        if err < tol:
            return QuadResult(bk.to_complex(cur), err, n, "chebyshev")
        prev = cur
    # near-singular region: tanh-sinh handles the endpoints without relying
    # on analyticity in a large Bernstein ellipse
    prev = _singular_sum(F, *bk.tanh_sinh(4), pair)
    for level in range(5, 12):
        cur = _singular_sum(F, *bk.tanh_sinh(level), pair)
        err = _rel_change(cur, prev, bk)
        if err < tol:
            return QuadResult(bk.to_complex(cur), err, len(bk.tanh_sinh(level)[0]), "tanh-sinh")
        prev = cur
    raise QuadratureDivergence(f"segment integral did not converge (last relative change {err:.3e})")


def integrate_smooth(F: Callable, cfg: QuadratureConfig = DEFAULT_CONFIG) -> QuadResult:
    """``int_0^1 F(t) dt`` for ``F`` analytic on [0, 1]."""
    bk = backend(cfg.precision)
    tol = _tolerance(cfg)
    n = cfg.nodes
    limit = min(cfg.max_nodes, 4096 if bk.name == "double" else 512)
    err = math.inf
    prev = _weighted_sum(F, *bk.legendre(n))
    while 2 * n <= limit:
        n *= 2
        cur = _weighted_sum(F, *bk.legendre(n))
        err = _rel_change(cur, prev, bk)
        if err < tol:
            return QuadResult(bk.to_complex(cur), err, n, "legendre")
        prev = cur
    raise QuadratureDivergence(f"smooth integral did not converge (last relative change {err:.3e})")


def tanh_sinh_singular(F: Callable, level: int = 8, precision: str = "double") -> np.ndarray:
    """Fixed-level tanh-sinh for ``int_0^1 F(t)/sqrt(t(1-t)) dt``; used as an oracle."""
    bk = backend(precision)
    t, _, w = bk.tanh_sinh(level)
    return bk.to_complex(_weighted_sum(F, t, w))


def chebyshev_singular(F: Callable, n: int) -> np.ndarray:
    t, _, w = _cheb_double(n)
    return _weighted_sum(F, t, w)


def trapezoid_circle(F: Callable, center: complex, radius: float, n: int = 64, turns: int = 1) -> complex:
    """``(1/2 pi i) * contour integral of F(z) dz`` on a circle traversed ``turns`` times.

    ``F`` receives the array of nodes in traversal order (useful when the
    integrand carries a tracked square root).
    """
    theta = 2 * math.pi * np.arange(n * turns) / n
    z = center + radius * np.exp(1j * theta)
    dz = 1j * (z - center)
    return complex(np.sum(F(z) * dz) * (2 * math.pi / n) / (2j * math.pi))
