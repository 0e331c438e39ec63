"""Abelian logarithms of sections, Betti coordinates and their derivatives.

A section is either ``[inf+] - [inf-]`` on the even-degree model or a fixed
divisor ``P1 - P2``.  Its abelian logarithm ``Lambda`` is defined modulo the
period lattice; Betti coordinates solve ``Lambda = beta Omega`` with real
``beta``.  Derivatives are taken along a parametrised family with every
stencil point continued back to the cycle basis of the base point, and the
lattice ambiguity of ``Lambda`` resolved by continuity of ``beta``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from . import polynomials as P
from .curve_family import CurveData, FamilyModel, FamilyPoint, ModelKind, curve_data, make_point
from .errors import (
    BettiLabError,
    IllConditioned,
    InvalidParam,
    InvalidSection,
    JacobianSingular,
    MonodromyStep,
    NewtonDiverged,
    NotEvenDegree,
    PathThroughBranchPoint,
)
from .periods import (
    CycleBasis,
    PeriodData,
    SheetFunction,
    _powers,
    continue_periods,
    periods_at,
)
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, backend, integrate_smooth
from .rank import certified_rank, numerical_rank

BRANCH_CLEARANCE = 1e-6
ON_CURVE_TOL = 1e-10


# ---------------------------------------------------------------- sections


class SectionKind(str, enum.Enum):
    INFINITY_DIFFERENCE = "infinity_difference"
    DIVISOR_PAIR = "divisor_pair"


@dataclass(frozen=True)
class SectionSpec:
    kind: SectionKind
    points: tuple = ()  # ((x1, y1), (x2, y2)) for a divisor pair

    def to_json(self) -> dict:
        out = {"kind": self.kind.value}
        if self.points:
            out["points"] = [[[complex(v).real, complex(v).imag] for v in pt] for pt in self.points]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SectionSpec":
        kind = SectionKind(obj.get("kind", "infinity_difference"))
        if kind is SectionKind.INFINITY_DIFFERENCE:
            return INFINITY_DIFFERENCE
        pts = obj.get("points")
        if not pts or len(pts) != 2:
            raise InvalidSection("divisor_pair needs two points [[x, y], [x, y]]")

        def dec(v):
            return complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)

        return cls(kind, tuple((dec(p[0]), dec(p[1])) for p in pts))


INFINITY_DIFFERENCE = SectionSpec(SectionKind.INFINITY_DIFFERENCE)


def divisor_pair(c: CurveData, p1, p2) -> SectionSpec:
    """``P1 - P2`` with ``P = (x, y)``; both points must lie on the curve."""
    pts = []
    for x, y in (p1, p2):
        x, y = complex(x), complex(y)
        fx = c.eval_f(x)
        if abs(y * y - fx) > ON_CURVE_TOL * (1 + abs(fx)):
            raise InvalidSection(f"point ({x}, {y}) is not on the curve: |y^2 - f(x)| = {abs(y * y - fx):.3e}")
        pts.append((x, y))
    return SectionSpec(SectionKind.DIVISOR_PAIR, tuple(pts))


def section_at(sec: SectionSpec, c: CurveData) -> SectionSpec:
    """Move a divisor pair to a nearby curve keeping ``x`` and the nearest ``y``."""
    if sec.kind is SectionKind.INFINITY_DIFFERENCE:
        return sec
    pts = []
    for x, y in sec.points:
        r = np.sqrt(complex(c.eval_f(x)))
        pts.append((x, r if abs(r - y) <= abs(r + y) else -r))
    return SectionSpec(sec.kind, tuple(pts))


# ---------------------------------------------------------- abelian logs


def abelian_log(
    c: CurveData, sec: SectionSpec, basis: CycleBasis, cfg: QuadratureConfig = DEFAULT_CONFIG, split: float | None = None
) -> np.ndarray:
    """``Lambda_j = int x^j dx / y`` over a deterministic path representing ``sec``."""
    if sec.kind is SectionKind.INFINITY_DIFFERENCE:
        if c.kind is not ModelKind.EVEN:
            raise NotEvenDegree("[inf+] - [inf-] needs the even-degree model")
        return _infinity_difference(c, basis, cfg, split)
    (x1, y1), (x2, y2) = sec.points
    if x1 == x2 and y1 == y2:
        return np.zeros(c.genus, dtype=complex)
    return _point_integral(c, basis, x1, y1, cfg) - _point_integral(c, basis, x2, y2, cfg)


def _infinity_difference(c, basis, cfg, split):
    """``2 int_{e}^{inf+} omega`` with ``e`` the last ordered branch point.

    The path runs from ``e`` along the ordering direction ``u`` to
    ``X0 = e + u T`` (substitution ``r = T sigma^2`` removes the endpoint
    singularity) and then radially to infinity with ``x = X0 / w``.
    """
    g = c.genus
    Y = SheetFunction(basis, cfg.precision, f=c.f)
    bk = Y.bk
    n = len(Y.points)
    e = Y.points[n - 1]
    u = Y.u
    rmax = float(np.max(np.abs(basis.branch_points)))
    T = split if split is not None else abs(complex(basis.branch_points[-1])) + 2 * rmax + 1
    T = bk.const(T)

    def ray(s):
        off = u * T * s * s
        x = e + off
        return (2 * T * u) * _powers(x, g) * (s / Y(x, anchor=n - 1, offset=off))[:, None]

    X0 = e + u * T
    pts = Y.points

    def outer(w):
        S = w * 0 + 1
        for ei in pts:
            S = S * bk.sqrt(1 - ei * w / X0)
        k = np.arange(g)
        powX = np.array([X0 ** int(j - g) for j in k], dtype=object if bk.name == "dd" else complex)
        cols = np.stack([w ** int(g - 1 - j) for j in k], axis=-1)
        return cols * powX[None, :] / S[:, None]

    part1 = integrate_smooth(ray, cfg).value
    part2 = integrate_smooth(outer, cfg).value
    return 2 * (part1 + part2)


class _PathSqrt:
    """``sqrt(f)`` continued along a polyline starting at a branch point."""

    def __init__(self, roots: np.ndarray, start: int, vertices: list):
        self.roots = roots
        self.start = start
        self.vertices = [complex(v) for v in vertices]
        self.nseg = len(self.vertices) - 1
        grid = np.linspace(0, self.nseg, 64 * self.nseg + 1)[1:]
        if self.f_of(grid[-1:])[0] == 0:
            grid = grid[:-1]
        self.grid, self.ygrid = self._refine(grid)

    def x_of(self, tau):
        tau = np.asarray(tau, dtype=float)
        k = np.clip(np.floor(tau).astype(int), 0, self.nseg - 1)
        v = np.array(self.vertices)
        return v[k] + (v[k + 1] - v[k]) * (tau - k)

    def f_of(self, tau):
        x = self.x_of(tau)
        out = np.ones_like(x)
        for i, r in enumerate(self.roots):
            if i == self.start:
                d = np.where(np.asarray(tau) < 1, (self.vertices[1] - self.vertices[0]) * np.asarray(tau), x - r)
                out = out * d
            else:
                out = out * (x - r)
        return out

    def _refine(self, grid):
        for _ in range(60):
            f = self.f_of(grid)
            ratio = np.abs(np.angle(f[1:] / f[:-1]))
            bad = np.nonzero(ratio > math.pi / 4)[0]
            if not len(bad):
                break
            mids = 0.5 * (grid[bad] + grid[bad + 1])
            grid = np.sort(np.concatenate([grid, mids]))
        else:
            raise PathThroughBranchPoint("square-root tracking did not settle along the path")
        f = self.f_of(grid)
        y = np.sqrt(f)
        for k in range(1, len(y)):
            if abs(y[k] - y[k - 1]) > abs(y[k] + y[k - 1]):
                y[k] = -y[k]
        return grid, y

    def signs(self, tau) -> np.ndarray:
        """Sign to apply to the principal root at each ``tau``."""
        tau = np.asarray(tau, dtype=float)
        idx = np.clip(np.searchsorted(self.grid, tau), 0, len(self.grid) - 1)
        ref = self.ygrid[idx]
        y = np.sqrt(self.f_of(tau))
        return np.where(np.abs(y - ref) <= np.abs(y + ref), 1.0, -1.0)

    def end_value(self):
        return np.sqrt(self.f_of(np.array([float(self.nseg)])))[0] * self.signs(np.array([float(self.nseg)]))[0]


def _clearance(points, start, vertices, end_is_branch) -> float:
    best = math.inf
    for i, r in enumerate(points):
        if i == start or (end_is_branch and abs(r - vertices[-1]) < BRANCH_CLEARANCE):
            continue
        for a, b in zip(vertices[:-1], vertices[1:]):
            ab = b - a
            t = min(1.0, max(0.0, ((r - a) * ab.conjugate()).real / abs(ab) ** 2))
            best = min(best, abs(a + t * ab - r))
    return best


def _point_integral(c: CurveData, basis: CycleBasis, x, y, cfg) -> np.ndarray:
    """``int_{e_1}^{(x, y)} omega`` along a straight (or once-bent) path."""
    g = c.genus
    pts = np.asarray(basis.branch_points, dtype=complex)
    e1 = pts[0]
    x = complex(x)
    if abs(x - e1) < BRANCH_CLEARANCE:
        return np.zeros(g, dtype=complex)
    end_is_branch = bool(np.min(np.abs(pts - x)) < BRANCH_CLEARANCE)
    end_index = int(np.argmin(np.abs(pts - x))) if end_is_branch else None
    vertices = [e1, x]
    if _clearance(pts, 0, vertices, end_is_branch) < BRANCH_CLEARANCE:
        # deterministic detour through an offset midpoint
        mid = 0.5 * (e1 + x) + 0.25j * (x - e1)
        vertices = [e1, mid, x]
        if _clearance(pts, 0, vertices, end_is_branch) < BRANCH_CLEARANCE:
            raise PathThroughBranchPoint(f"path from {e1} to {x} passes within {BRANCH_CLEARANCE} of a branch point")
    track = _PathSqrt(pts, 0, vertices)
    bk = backend(cfg.precision)
    roots_bk = bk.asarray(pts)
    total = np.zeros(g, dtype=complex)
    for k in range(track.nseg):
        a, b = vertices[k], vertices[k + 1]
        for half in (0, 1):

            def F(s, a=a, b=b, half=half, k=k):
                sd = bk.to_complex(s).real
                tl = 0.5 * sd * sd if half == 0 else 1 - 0.5 * sd * sd
                signs = track.signs(k + tl)
                # t and 1 - t are both formed without cancellation
                q = s * s / 2
                t, omt = (q, 1 - q) if half == 0 else (1 - q, q)
                xa = bk.const(a) + bk.const(b - a) * t
                fx = xa * 0 + 1
                last = k == track.nseg - 1
                for i, r in enumerate(roots_bk):
                    if i == 0 and k == 0:
                        d = bk.const(b - a) * t
                    elif i == end_index and last:
                        d = bk.const(a - b) * omt
                    else:
                        d = xa - r
                    fx = fx * d
                yv = bk.sqrt(fx) * signs
                return bk.const(b - a) * _powers(xa, g) * (s / yv)[:, None]

            total = total + integrate_smooth(F, cfg).value
    y_end = track.end_value()
    if abs(y) > 0 and abs(y_end + y) < abs(y_end - y):
        total = -total
    return total


# ------------------------------------------------------- Betti coordinates


@dataclass(frozen=True)
class BettiEvaluation:
    Lambda: np.ndarray
    beta: np.ndarray
    L: np.ndarray
    residual_reconstruction: float
    residual_realness: float
    residual_siegel: float
    beta_siegel: np.ndarray
    beta_integer: np.ndarray = field(repr=False)
    beta_fraction: np.ndarray = field(repr=False)

    def to_json(self) -> dict:
        return {
            "Lambda": [[z.real, z.imag] for z in self.Lambda],
            "beta": [float(b) for b in self.beta],
            "beta_integer": [int(b) for b in self.beta_integer],
            "beta_fraction": [float(b) for b in self.beta_fraction],
            "L": [[z.real, z.imag] for z in self.L],
            "residual_reconstruction": self.residual_reconstruction,
            "residual_realness": self.residual_realness,
            "residual_siegel": self.residual_siegel,
        }


def betti_coords(Lambda, pd: PeriodData) -> BettiEvaluation:
    """Real ``beta`` with ``Lambda = beta Omega`` via the conjugate block system."""
    Lam = np.asarray(Lambda, dtype=complex)
    om = pd.omega
    A = np.hstack([om, om.conj()])
    if np.linalg.cond(A) > 1e12:
        raise IllConditioned(f"(Omega, conj Omega) condition number {np.linalg.cond(A):.3e}")
    rhs = np.concatenate([Lam, Lam.conj()])
    b = np.linalg.solve(A.T, rhs)
    realness = float(np.max(np.abs(b.imag))) if b.size else 0.0
    beta = b.real
    recon = float(np.linalg.norm(Lam - beta @ om))
    # Siegel-space route: L = Lambda Omega_1^{-1}, beta_2 = Im L (Im Z)^{-1}
    L = np.linalg.solve(pd.omega1.T, Lam)
    b2 = np.linalg.solve(pd.Z.imag.T, L.imag)
    b1 = (L - b2 @ pd.Z).real
    siegel = float(np.max(np.abs(b1 + b2 @ pd.Z - L))) if L.size else 0.0
    beta_s = np.concatenate([b1, b2])
    ints = np.rint(beta)
    return BettiEvaluation(Lam, beta, L, recon, realness, siegel, beta_s, ints.astype(np.int64), beta - ints)


# ------------------------------------------------------------ families


@dataclass(frozen=True)
class UniversalFamily:
    """All parameters of the model vary."""

    model: FamilyModel

    @property
    def dim(self) -> int:
        return self.model.arity

    def params(self, t) -> list:
        return [complex(v) for v in t]

    def point(self, t) -> FamilyPoint:
        return make_point(self.model, _clean(self.params(t)))

    def coords(self, p: FamilyPoint) -> np.ndarray:
        return p.as_array()


@dataclass(frozen=True)
class LinearSlice:
    """``params = base + sum_k t_k directions[k]``; a zero direction is a dummy parameter."""

    model: FamilyModel
    base: tuple
    directions: tuple

    @property
    def dim(self) -> int:
        return len(self.directions)

    def params(self, t) -> list:
        v = np.array([complex(b) for b in self.base], dtype=complex)
        for tk, d in zip(t, self.directions):
            v = v + complex(tk) * np.asarray(d, dtype=complex)
        return list(v)

    def point(self, t) -> FamilyPoint:
        return make_point(self.model, _clean(self.params(t)))


@dataclass(frozen=True)
class TranslationSlice:
    """``f(x - t)`` for a fixed even-degree ``f``: an isotrivial one-parameter family."""

    model: FamilyModel
    base: tuple

    @property
    def dim(self) -> int:
        return 1

    def params(self, t) -> list:
        if self.model.kind is not ModelKind.EVEN:
            raise NotEvenDegree("translation slices use the even-degree model")
        f = [complex(c) for c in self.base] + [1.0]
        shift = complex(t[0])
        out: list = []
        for k, ck in enumerate(f):
            out = P.add(out, P.scale(P.power([-shift, 1.0], k), ck))
        out = out + [0j] * (len(f) - len(out))
        return out[:-1]

    def point(self, t) -> FamilyPoint:
        return make_point(self.model, _clean(self.params(t)))


def _clean(values) -> list:
    return [v.real if isinstance(v, complex) and v.imag == 0 else v for v in values]


# ------------------------------------------------------ continued states


@dataclass(frozen=True)
class BettiState:
    point: FamilyPoint
    section: SectionSpec
    periods: PeriodData
    evaluation: BettiEvaluation


def evaluate(
    p: FamilyPoint, sec: SectionSpec = INFINITY_DIFFERENCE, cfg: QuadratureConfig = DEFAULT_CONFIG, direction=1.0
) -> BettiState:
    """Periods, abelian logarithm and Betti coordinates in the canonical basis."""
    pd = periods_at(p, cfg, direction)
    c = curve_data(p)
    sec = section_at(sec, c)
    lam = abelian_log(c, sec, pd.basis, cfg)
    return BettiState(p, sec, pd, betti_coords(lam, pd))


def continue_state(state: BettiState, target: FamilyPoint) -> BettiState:
    """Evaluate at ``target`` in the cycle basis of ``state``, keeping ``beta`` continuous."""
    pd = continue_periods(state.periods, target)
    c = curve_data(target)
    sec = section_at(state.section, c)
    lam = abelian_log(c, sec, pd.basis, state.periods.config)
    raw = betti_coords(lam, pd)
    shift = np.rint(state.evaluation.beta - raw.beta)
    if np.any(shift):
        lam = lam + shift @ pd.omega
        raw = betti_coords(lam, pd)
    return BettiState(target, sec, pd, raw)


def continue_state_along(state: BettiState, path, max_depth: int = 12) -> BettiState:
    cur = state
    for target in path:
        cur = _bisect_state(cur, target, max_depth)
    return cur


def _bisect_state(state, target, depth):
    try:
        return continue_state(state, target)
    except MonodromyStep:
        if depth == 0:
            raise
    mid = make_point(target.model, _clean(list(0.5 * (state.point.as_array() + target.as_array()))))
    return _bisect_state(_bisect_state(state, mid, depth - 1), target, depth - 1)


# ------------------------------------------------------------ derivatives


# finite-difference noise floor for singular values of J and H
JAC_NOISE = 1e-6


def default_steps(t0) -> np.ndarray:
    return 1e-5 * (1 + np.abs(np.asarray(t0, dtype=complex)))


@dataclass
class Derivatives:
    """Derivatives of ``beta``, ``Lambda``, ``Omega``, ``L`` and ``Z`` (extrapolated central differences)."""

    base: BettiState
    h: np.ndarray
    d_beta: np.ndarray  # (d, 2, 2g): derivative along Re / Im of each parameter
    d_lambda: np.ndarray  # (d, g) holomorphic
    d_omega: np.ndarray  # (d, 2g, g)
    d_L: np.ndarray  # (d, g)
    d_Z: np.ndarray  # (d, g, g)
    cauchy_riemann: float

    @property
    def dim(self) -> int:
        return self.d_beta.shape[0]

    @property
    def genus(self) -> int:
        return self.d_lambda.shape[1]

    def jacobian_matrix(self) -> np.ndarray:
        return self.d_beta.reshape(2 * self.dim, -1)

    def matrix_I(self, nu) -> np.ndarray:
        nu = np.asarray(nu, dtype=complex)
        return self.d_lambda + np.einsum("k,ikj->ij", nu, self.d_omega)

    def matrix_H(self, mu, mu0: complex = 1.0) -> np.ndarray:
        mu = np.asarray(mu, dtype=complex)
        return mu0 * self.d_L + np.einsum("k,ikj->ij", mu, self.d_Z)


def _central(family, t0, base, hs):
    d = family.dim
    g = base.periods.genus
    d_beta = np.zeros((d, 2, 2 * g))
    d_lam = np.zeros((d, 2, g), dtype=complex)
    d_om = np.zeros((d, 2 * g, g), dtype=complex)
    d_L = np.zeros((d, g), dtype=complex)
    d_Z = np.zeros((d, g, g), dtype=complex)
    for i in range(d):
        for part, unit in enumerate((1.0, 1j)):
            step = np.zeros(d, dtype=complex)
            step[i] = unit * hs[i]
            plus = continue_state(base, family.point(t0 + step))
            minus = continue_state(base, family.point(t0 - step))
            denom = 2 * hs[i]
            d_beta[i, part] = (plus.evaluation.beta - minus.evaluation.beta) / denom
            d_lam[i, part] = (plus.evaluation.Lambda - minus.evaluation.Lambda) / (denom * unit)
            if part == 0:
                d_om[i] = (plus.periods.omega - minus.periods.omega) / denom
                d_L[i] = (plus.evaluation.L - minus.evaluation.L) / denom
                d_Z[i] = (plus.periods.Z - minus.periods.Z) / denom
    return d_beta, d_lam, d_om, d_L, d_Z


def derivatives(
    family,
    t0,
    sec: SectionSpec = INFINITY_DIFFERENCE,
    h=None,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    base: BettiState | None = None,
) -> Derivatives:
    """Central differences at ``h`` and ``h/2`` with one Richardson step (error ``O(h^4)``)."""
    t0 = np.asarray(t0, dtype=complex)
    d = family.dim
    hs = default_steps(t0) if h is None else np.broadcast_to(np.asarray(h, dtype=float), (d,))
    if base is None:
        base = evaluate(family.point(t0), sec, cfg)
    coarse = _central(family, t0, base, hs)
    fine = _central(family, t0, base, hs / 2)
    d_beta, d_lam, d_om, d_L, d_Z = ((4 * b - a) / 3 for a, b in zip(coarse, fine))
    cr = float(np.max(np.abs(d_lam[:, 0] - d_lam[:, 1]))) if d_lam.size else 0.0
    return Derivatives(base, np.asarray(hs), d_beta, d_lam[:, 0], d_om, d_L, d_Z, cr)


@dataclass(frozen=True)
class BettiJacobian:
    J: np.ndarray
    singular_values: tuple
    rank: int
    step: np.ndarray
    gap: float

    def to_json(self) -> dict:
        return {
            "J": self.J.tolist(),
            "singular_values": list(self.singular_values),
            "rank": self.rank,
            "gap": self.gap,
            "step": [float(x) for x in self.step],
        }


def _family_and_coords(p, family):
    if family is None:
        return UniversalFamily(p.model), p.as_array()
    if hasattr(family, "coords"):
        return family, family.coords(p)
    raise InvalidParam("pass the slice coordinates t0 together with a non-universal family")


def betti_jacobian(
    p: FamilyPoint | None,
    sec: SectionSpec = INFINITY_DIFFERENCE,
    h=None,
    family=None,
    t0=None,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> BettiJacobian:
    """``J`` with rows ``d beta / d Re t_i``, ``d beta / d Im t_i`` and its certified rank."""
    if t0 is None:
        family, t0 = _family_and_coords(p, family)
    der = derivatives(family, t0, sec, h, cfg)
    return jacobian_from(der)


def jacobian_from(der: Derivatives) -> BettiJacobian:
    J = der.jacobian_matrix()
    res = certified_rank(J, abs_tol=JAC_NOISE)
    return BettiJacobian(J, res.singular_values, res.rank, der.h, res.gap)


def matrix_I(p, sec=INFINITY_DIFFERENCE, nu=None, h=None, family=None, t0=None, cfg=DEFAULT_CONFIG) -> np.ndarray:
    """``(I_nu)_ij = d_i Lambda_j + sum_k nu_k d_i Omega_kj``; ``nu`` defaults to ``-beta``."""
    if t0 is None:
        family, t0 = _family_and_coords(p, family)
    der = derivatives(family, t0, sec, h, cfg)
    if nu is None:
        nu = -der.base.evaluation.beta
    return der.matrix_I(nu)


def matrix_H(p, sec=INFINITY_DIFFERENCE, mu=None, h=None, family=None, t0=None, mu0=1.0, cfg=DEFAULT_CONFIG):
    """``(H_mu)_ij = mu0 d_i L_j + sum_k mu_k d_i Z_kj``."""
    if t0 is None:
        family, t0 = _family_and_coords(p, family)
    der = derivatives(family, t0, sec, h, cfg)
    if mu is None:
        mu = np.zeros(der.genus)
    return der.matrix_H(mu, mu0)


def max_rank_H(der: Derivatives, n_mu: int = 200, rng=None, mu0_slices=(1.0, 0.0)) -> int:
    """Largest certified rank of ``H_mu`` over random complex ``mu``."""
    rng = np.random.default_rng(0) if rng is None else rng
    best = 0
    g = der.genus
    for _ in range(n_mu):
        mu = rng.normal(size=g) + 1j * rng.normal(size=g)
        for mu0 in mu0_slices:
            r = numerical_rank(der.matrix_H(mu, mu0), abs_tol=JAC_NOISE)
            if r.certified:
                best = max(best, r.rank)
    return best


# ------------------------------------------------------------- rank scans


@dataclass(frozen=True)
class ScanSample:
    t: tuple
    rank: int | None
    singular_values: tuple
    status: str  # "ok", "ambiguous", "skipped"


@dataclass(frozen=True)
class ScanReport:
    max_rank: int
    argmax: tuple | None
    histogram: dict
    skipped: int
    ambiguous: int
    samples: tuple

    def to_json(self) -> dict:
        return {
            "max_rank": self.max_rank,
            "argmax": None if self.argmax is None else [[complex(z).real, complex(z).imag] for z in self.argmax],
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "skipped": self.skipped,
            "ambiguous": self.ambiguous,
        }


def _scan_one(args):
    family, t, sec, cfg = args
    try:
        der = derivatives(family, t, sec, None, cfg)
    except BettiLabError:
        return ScanSample(tuple(t), None, (), "skipped")
    res = numerical_rank(der.jacobian_matrix(), abs_tol=JAC_NOISE)
    status = "ok" if res.certified else "ambiguous"
    return ScanSample(tuple(t), res.rank if res.certified else None, res.singular_values, status)


def sample_box(lower, upper, n: int, rng) -> np.ndarray:
    lo = np.asarray(lower, dtype=complex)
    hi = np.asarray(upper, dtype=complex)
    re = rng.uniform(lo.real, hi.real, size=(n, len(lo)))
    im = rng.uniform(lo.imag, hi.imag, size=(n, len(lo)))
    return re + 1j * im


def rank_scan(
    family,
    lower,
    upper,
    n_samples: int,
    sec: SectionSpec = INFINITY_DIFFERENCE,
    seed: int = 0,
    threads: int = 1,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> ScanReport:
    """Generic rank of ``J`` over uniform samples of a box (degenerate samples skipped)."""
    rng = np.random.default_rng(seed)
    ts = sample_box(lower, upper, n_samples, rng)
    jobs = [(family, t, sec, cfg) for t in ts]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            samples = list(ex.map(_scan_one, jobs))
    else:
        samples = [_scan_one(j) for j in jobs]
    hist: dict = {}
    best, arg = 0, None
    for s in samples:
        if s.status != "ok":
            continue
        hist[s.rank] = hist.get(s.rank, 0) + 1
        if arg is None or s.rank > best:
            best, arg = s.rank, s.t
    return ScanReport(
        best,
        arg,
        hist,
        sum(s.status == "skipped" for s in samples),
        sum(s.status == "ambiguous" for s in samples),
        tuple(samples),
    )


# ---------------------------------------------------------- torsion targets

COND_MAX = 1e10


@dataclass(frozen=True)
class NewtonResult:
    point: FamilyPoint
    state: BettiState
    residual: float
    iterations: int
    free_params: tuple
    target: tuple

    def to_json(self) -> dict:
        return {
            "point": self.point.to_json(),
            "residual": self.residual,
            "iterations": self.iterations,
            "free_params": list(self.free_params),
            "target": [P.format_coeff(Fraction(x)) for x in self.target],
            "beta": [float(b) for b in self.state.evaluation.beta],
        }


def _as_rational(target, max_den: int) -> tuple:
    out = []
    for v in target:
        if isinstance(v, (int, Fraction, str)):
            try:
                q = Fraction(v)
            except ValueError as exc:
                raise InvalidParam(f"target entry {v!r} is not a rational") from exc
        else:
            q = Fraction(float(v)).limit_denominator(max_den)
            if abs(float(q) - float(v)) > 1e-12:
                raise InvalidParam(f"target entry {v!r} is not a rational with denominator <= {max_den}")
        if q.denominator > max_den:
            raise InvalidParam(f"target denominator {q.denominator} exceeds {max_den}")
        out.append(q)
    return tuple(out)


def _residual_vec(state: BettiState, target: np.ndarray) -> np.ndarray:
    return state.evaluation.Lambda - target @ state.periods.omega


def torsion_target_solve(
    p0: FamilyPoint,
    sec: SectionSpec = INFINITY_DIFFERENCE,
    target=None,
    tol: float = 1e-10,
    max_iter: int = 50,
    max_den: int = 1000,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> NewtonResult:
    """Damped Newton on ``Lambda(s) - target Omega(s) = 0`` over ``g`` free parameters."""
    fam = UniversalFamily(p0.model)
    state = evaluate(p0, sec, cfg)
    g = state.periods.genus
    if fam.dim < g:
        raise InvalidParam("need at least g parameters to hit a torsion target")
    if target is None:
        target = [Fraction(round(b)) for b in state.evaluation.beta]
    tq = _as_rational(target, max_den)
    if len(tq) != 2 * g:
        raise InvalidParam(f"target must have {2 * g} entries")
    tv = np.array([float(x) for x in tq])
    s = p0.as_array()
    F = _residual_vec(state, tv)
    res = float(np.linalg.norm(F))
    if res < tol:
        return NewtonResult(p0, state, res, 0, tuple(range(g)), tq)

    free = None
    for it in range(1, max_iter + 1):
        Jfull = _holomorphic_jacobian(fam, s, state, tv, range(fam.dim) if free is None else free)
        if free is None:
            # keep the g best-conditioned columns, freeze the rest
            _, _, piv = scipy.linalg.qr(Jfull, pivoting=True)
            free = tuple(sorted(int(k) for k in piv[:g]))
            Jac = Jfull[:, list(free)]
        else:
            Jac = Jfull
        cond = np.linalg.cond(Jac)
        if not np.isfinite(cond) or cond > COND_MAX:
            raise JacobianSingular(f"Newton Jacobian condition number {cond:.3e} exceeds {COND_MAX:.0e}")
        delta = -np.linalg.solve(Jac, F)
        alpha = 1.0
        for _ in range(12):
            s_new = s.copy()
            s_new[list(free)] += alpha * delta
            try:
                cand = continue_state_along(state, [fam.point(s_new)], max_depth=6)
            except BettiLabError:
                alpha /= 2
                continue
            F_new = _residual_vec(cand, tv)
            if np.linalg.norm(F_new) < res:
                break
            alpha /= 2
        else:
            raise NewtonDiverged(f"line search failed at iteration {it} (residual {res:.3e})")
        s, state, F = s_new, cand, F_new
        res = float(np.linalg.norm(F))
        if res < tol:
            return NewtonResult(state.point, state, res, it, free, tq)
    raise NewtonDiverged(f"no convergence in {max_iter} iterations (residual {res:.3e})")


def _holomorphic_jacobian(fam, s, state, tv, cols) -> np.ndarray:
    cols = list(cols)
    out = np.zeros((len(tv) // 2, len(cols)), dtype=complex)
    for n, k in enumerate(cols):
        h = 1e-6 * (1 + abs(s[k]))
        e = np.zeros(len(s), dtype=complex)
        e[k] = h
        plus = continue_state(state, fam.point(s + e))
        minus = continue_state(state, fam.point(s - e))
        out[:, n] = (_residual_vec(plus, tv) - _residual_vec(minus, tv)) / (2 * h)
    return out


def nearest_target(beta, denominator: int) -> tuple:
    return tuple(Fraction(round(b * denominator), denominator) for b in beta)
