"""Symplectic cycle bases and period matrices of hyperelliptic curves.

Geometry
--------
Branch points are ordered lexicographically by ``(Re, Im)`` of ``e / u``
where ``u`` is a unit *direction* (default 1).  Consecutive points are then
joined by segments lying in disjoint strips orthogonal to ``u``.  Branch cuts
sit on the segments ``[e1, e2], [e3, e4], ...``; for odd degree the last
point carries a cut along the ray ``e_n + u [0, inf)``.  With those cuts

    Y(x) = prod_pairs (b - a) sqrt(t) sqrt(t - 1),  t = (x - a) / (b - a)
           [* i sqrt(u) sqrt(-(x - e_n) / u)   for odd degree]

is single valued and analytic off the cuts, with ``Y ~ x^{g+1}`` at infinity
(even degree).  Sheet ``+`` is ``y = Y``.

The chain cycle ``c_m`` encircles ``[e_m, e_{m+1}]`` (``m = 1..2g``); odd ``m``
are loops around a cut (counter-clockwise on sheet ``+``), even ``m`` are
loops around a gap.  Adjacent chain cycles meet once, others are disjoint,
so the intersection matrix is tridiagonal.  An integer congruence reduction
turns the chain into a symplectic basis.

Periods of ``omega_j = x^j dx / y`` (``j = 0..g-1``) are stored with one row
per cycle, so ``Omega`` is ``2g x g`` and ``Lambda = beta Omega``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .curve_family import CurveData, FamilyPoint, ModelKind, curve_data
from .errors import BasisDegeneracy, IllConditioned, MonodromyStep
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, backend, integrate_singular

# orientation of the chain: c_m . c_{m+1} for consecutive chain cycles
CHAIN_SIGN = -1
OMEGA1_COND_MAX = 1e12


# ------------------------------------------------------------------ bases


@dataclass(frozen=True)
class Cycle:
    """Loop around the segment between two ordered branch points."""

    start: int
    end: int
    kind: str  # "cut" or "gap"
    sheet: int = 1


@dataclass(frozen=True)
class CycleBasis:
    branch_points: np.ndarray
    direction: complex
    cycles: tuple
    intersection_matrix: np.ndarray
    transform_to_symplectic: np.ndarray
    odd: bool

    @property
    def genus(self) -> int:
        return len(self.cycles) // 2

    def is_symplectic(self) -> bool:
        T, K = self.transform_to_symplectic, self.intersection_matrix
        return bool(np.array_equal(T @ K @ T.T, standard_form(self.genus)))


def standard_form(g: int) -> np.ndarray:
    J = np.zeros((2 * g, 2 * g), dtype=np.int64)
    J[:g, g:] = np.eye(g, dtype=np.int64)
    J[g:, :g] = -np.eye(g, dtype=np.int64)
    return J


def order_branch_points(points, direction: complex = 1.0) -> np.ndarray:
    pts = np.asarray(points, dtype=complex)
    rot = pts / direction
    idx = np.lexsort((rot.imag, rot.real))
    return pts[idx]


def chain_intersection_matrix(n_cycles: int) -> np.ndarray:
    """Intersection form of a chain of loops around consecutive segments."""
    K = np.zeros((n_cycles, n_cycles), dtype=np.int64)
    for m in range(n_cycles - 1):
        K[m, m + 1] = CHAIN_SIGN
        K[m + 1, m] = -CHAIN_SIGN
    return K


def symplectic_reduction(K: np.ndarray, order=None) -> np.ndarray:
    """Integer ``T`` with ``T K T^T = J`` for a unimodular alternating ``K``.

    Vectors are processed in ``order``; each pivot ``e`` is paired with a
    partner ``f`` (``e.f = 1``, found by a Euclidean reduction among the
    remaining vectors) and the rest are projected off the pair.  Rows of the
    result are ``(e_1..e_g, f_1..f_g)``.
    """
    K = np.asarray(K, dtype=object)
    n = K.shape[0]
    if K.shape != (n, n) or n % 2 or np.any(K + K.T != 0) or np.any(np.diag(K) != 0):
        raise BasisDegeneracy("intersection matrix must be square, alternating and of even size")
    order = list(range(n)) if order is None else list(order)
    eye = np.eye(n, dtype=object) * 1
    remaining = [eye[i].copy() for i in order]

    def form(u, v):
        return int(u @ K @ v)

    es, fs = [], []
    while remaining:
        e = remaining.pop(0)
        while True:
            pairings = [(abs(form(e, v)), i) for i, v in enumerate(remaining) if form(e, v) != 0]
            if not pairings:
                raise BasisDegeneracy("intersection matrix is degenerate")
            if len(pairings) == 1 or min(pairings)[0] == 1:
                break
            _, pivot = min(pairings)
            pv = form(e, remaining[pivot])
            for _, i in pairings:
                if i != pivot:
                    q = form(e, remaining[i]) // pv
                    remaining[i] = remaining[i] - q * remaining[pivot]
        value, i = min(pairings)
        if value != 1:
            raise BasisDegeneracy("intersection matrix is not unimodular")
        f = remaining.pop(i)
        if form(e, f) < 0:
            f = -f
        remaining = [v - form(v, f) * e + form(v, e) * f for v in remaining]
        es.append(e)
        fs.append(f)
    T = np.array(es + fs, dtype=np.int64)
    if not np.array_equal(T @ np.asarray(K, dtype=np.int64) @ T.T, standard_form(n // 2)):
        raise BasisDegeneracy("symplectic reduction failed")
    return T


def _chain_order(g: int) -> list:
    # pair each cut loop with the gap loop to its right, last pair first:
    # the e-vectors are then the cut loops themselves
    order = []
    for k in range(g - 1, -1, -1):
        order += [2 * k, 2 * k + 1]
    return order


# below this clearance the default ordering is replaced by a rotated one
CLEARANCE_MIN = 0.1
ROTATIONS = 24


def chain_clearance(pts) -> float:
    """Smallest distance from a branch point to a chain segment it is not an end of,
    relative to the smallest pairwise distance (0 when segments meet)."""
    pts = np.asarray(pts, dtype=complex)
    n = len(pts)
    if n < 3:
        return np.inf
    if not _segments_disjoint(pts):
        return 0.0
    diff = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(diff, np.inf)
    sep = np.min(diff)
    best = np.inf
    for k in range(n - 1):
        a, b = pts[k], pts[k + 1]
        for m in range(n):
            if m in (k, k + 1):
                continue
            t = ((pts[m] - a) * np.conj(b - a)).real / abs(b - a) ** 2
            best = min(best, abs(pts[m] - (a + min(max(t, 0.0), 1.0) * (b - a))))
    return float(best / sep)


def choose_direction(points, direction: complex = 1.0) -> complex:
    """``direction`` itself unless its ordering is geometrically degenerate; then the
    rotation (from a fixed list) with the largest clearance."""
    direction = complex(direction) / abs(direction)
    if chain_clearance(order_branch_points(points, direction)) >= CLEARANCE_MIN:
        return direction
    candidates = [direction * cmath.exp(1j * math.pi * k / ROTATIONS) for k in range(1, ROTATIONS)]
    scores = [chain_clearance(order_branch_points(points, d)) for d in candidates]
    k = int(np.argmax(scores))
    if scores[k] == 0:
        raise BasisDegeneracy("every candidate ordering has intersecting chain segments")
    return candidates[k]


def build_cycle_basis(c: CurveData, direction: complex = 1.0, adapt: bool = True) -> CycleBasis:
    """Chain cycles along the ordered branch points, reduced to a symplectic basis."""
    direction = choose_direction(c.branch_points, direction) if adapt else complex(direction) / abs(direction)
    pts = order_branch_points(c.branch_points, direction)
    g = c.genus
    odd = c.kind is ModelKind.ODD
    expected = 2 * g + 1 if odd else 2 * g + 2
    if len(pts) != expected:
        raise BasisDegeneracy(f"expected {expected} branch points, got {len(pts)}")
    if not _segments_disjoint(pts):
        raise BasisDegeneracy("chain segments intersect")
    cycles = tuple(Cycle(m, m + 1, "cut" if m % 2 == 0 else "gap") for m in range(2 * g))
    K = chain_intersection_matrix(2 * g)
    T = symplectic_reduction(K, _chain_order(g))
    return CycleBasis(pts, direction, cycles, K, T, odd)


def _segments_cross(p1, p2, q1, q2) -> bool:
    """Proper or touching intersection of closed segments [p1,p2], [q1,q2]."""

    def orient(a, b, c):
        v = (b - a).conjugate() * (c - a)
        return np.sign(round(v.imag, 14))

    def on_seg(a, b, c):
        return min(a.real, b.real) <= c.real <= max(a.real, b.real) and min(a.imag, b.imag) <= c.imag <= max(
            a.imag, b.imag
        )

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return any(
        o == 0 and on_seg(a, b, c)
        for o, a, b, c in ((o1, p1, p2, q1), (o2, p1, p2, q2), (o3, q1, q2, p1), (o4, q1, q2, p2))
    )


def _segments_disjoint(pts) -> bool:
    """Non-adjacent chain segments must not meet (brute-force check)."""
    n = len(pts)
    for i in range(n - 1):
        for k in range(i + 2, n - 1):
            if _segments_cross(pts[i], pts[i + 1], pts[k], pts[k + 1]):
                return False
    return True


# ---------------------------------------------------------- branch of sqrt f


class SheetFunction:
    """The analytic branch ``Y`` of ``sqrt(f)`` fixed by a cycle basis."""

    def __init__(self, basis: CycleBasis, precision: str = "double", f=None):
        self.bk = backend(precision)
        pts = basis.branch_points
        n = len(pts)
        if precision == "dd" and f is not None:
            self.points = self.bk.polish(f, pts)
        else:
            self.points = self.bk.asarray(pts)
        self.pairs = [(self.points[2 * k], self.points[2 * k + 1]) for k in range(n // 2)]
        self.ray = self.points[n - 1] if basis.odd else None
        self.u = self.bk.const(basis.direction)
        self.sqrt_u = self.bk.sqrt(self.bk.asarray([basis.direction]))[0]

    def pair_factor(self, x, k, anchor=None, offset=None):
        a, b = self.pairs[k]
        if anchor == 2 * k:
            t, t1 = offset / (b - a), (offset + a - b) / (b - a)
        elif anchor == 2 * k + 1:
            t, t1 = (offset + b - a) / (b - a), offset / (b - a)
        else:
            t = (x - a) / (b - a)
            t1 = (x - b) / (b - a)
        return (b - a) * self.bk.sqrt(t) * self.bk.sqrt(t1)

    def ray_factor(self, x, anchor=None, offset=None):
        d = offset if anchor == len(self.points) - 1 else x - self.ray
        return 1j * self.sqrt_u * self.bk.sqrt(-d / self.u)

    def __call__(self, x, skip: int | None = None, anchor: int | None = None, offset=None):
        """``Y(x)``, optionally omitting pair ``skip``.

        With ``anchor`` set, ``x = points[anchor] + offset`` and factors
        vanishing at that point use ``offset`` directly (no cancellation).
        """
        out = None
        for k in range(len(self.pairs)):
            if k == skip:
                continue
            fac = self.pair_factor(x, k, anchor, offset)
            out = fac if out is None else out * fac
        if self.ray is not None:
            fac = self.ray_factor(x, anchor, offset)
            out = fac if out is None else out * fac
        if out is None:
            out = x * 0 + 1
        return out


def _powers(x, g):
    cols = [x * 0 + 1]
    for _ in range(1, g):
        cols.append(cols[-1] * x)
    return np.stack(cols, axis=-1)


def chain_periods(Y: SheetFunction, g: int, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Periods of the ``2g`` chain cycles, rows indexed by cycle."""
    bk = Y.bk
    pts = Y.points
    rows, err = [], 0.0
    two_i = bk.const(2j)
    for m in range(2 * g):
        a, b = pts[m], pts[m + 1]
        if m % 2 == 0:
            k = m // 2

            def F(t, t1, a=a, b=b, k=k):
                x = a + (b - a) * t
                return two_i * _powers(x, g) / Y(x, skip=k)[:, None]

        else:

            def F(t, t1, a=a, b=b, m=m):
                # evaluate Y from whichever endpoint is nearer, so that the
                # vanishing factor is (b - a) t or (b - a) (1 - t) exactly
                x = a + (b - a) * t
                near_a = np.asarray(t <= 0.5, dtype=bool)
                y = np.empty(len(t), dtype=object if bk.name == "dd" else complex)
                y[near_a] = Y(x[near_a], anchor=m, offset=(b - a) * t[near_a])
                y[~near_a] = Y(x[~near_a], anchor=m + 1, offset=(a - b) * t1[~near_a])
                w = bk.sqrt(t * t1)
                return (2 * (b - a)) * _powers(x, g) * (w / y)[:, None]

        res = integrate_singular(F, cfg, pair=True)
        rows.append(res.value)
        err = max(err, res.error)
    return np.array(rows, dtype=complex), err


# ------------------------------------------------------------ period data


@dataclass(frozen=True)
class PeriodData:
    omega1: np.ndarray
    omega2: np.ndarray
    Z: np.ndarray
    basis: CycleBasis
    quadrature_error: float
    point: FamilyPoint | None = None
    config: QuadratureConfig = DEFAULT_CONFIG
    chain: np.ndarray | None = field(default=None, repr=False)

    @property
    def omega(self) -> np.ndarray:
        return np.vstack([self.omega1, self.omega2])

    @property
    def genus(self) -> int:
        return self.omega1.shape[0]

    @property
    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.Z - self.Z.T)))

    @property
    def min_imag_eig(self) -> float:
        return float(np.min(np.linalg.eigvalsh(0.5 * (self.Z.imag + self.Z.imag.T))))

    def lattice_matrix(self) -> np.ndarray:
        """Real ``2g x 2g`` matrix ``[Re Omega | Im Omega]``."""
        om = self.omega
        return np.hstack([om.real, om.imag])


def assemble(chain: np.ndarray, basis: CycleBasis, transform=None, **kw) -> PeriodData:
    T = basis.transform_to_symplectic if transform is None else transform
    om = T.astype(float) @ chain
    g = basis.genus
    om1, om2 = om[:g], om[g:]
    if np.linalg.cond(om1) > OMEGA1_COND_MAX:
        raise IllConditioned(f"Omega_1 condition number {np.linalg.cond(om1):.3e} exceeds {OMEGA1_COND_MAX:.0e}")
    Z = np.linalg.solve(om1.T, om2.T).T
    return PeriodData(om1, om2, Z, basis, chain=chain, **kw)


def period_matrix(
    c: CurveData,
    basis: CycleBasis | None = None,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    point: FamilyPoint | None = None,
) -> PeriodData:
    """Period matrices ``Omega_1``, ``Omega_2`` and ``Z = Omega_2 Omega_1^{-1}``."""
    if basis is None:
        basis = build_cycle_basis(c)
    Y = SheetFunction(basis, cfg.precision, f=c.f)
    chain, err = chain_periods(Y, c.genus, cfg)
    return assemble(chain, basis, quadrature_error=err, point=point, config=cfg)


def periods_at(p: FamilyPoint, cfg: QuadratureConfig = DEFAULT_CONFIG, direction: complex = 1.0) -> PeriodData:
    c = curve_data(p)
    return period_matrix(c, build_cycle_basis(c, direction), cfg, point=p)


# ------------------------------------------------------------ continuation

# rounding slack allowed when identifying the integer change of basis
MATCH_TOL = 0.2


def lattice_change(reference: np.ndarray, new: np.ndarray):
    """Integer ``M`` with ``reference ~ M new`` for ``2g x g`` period matrices."""
    R_ref = np.hstack([reference.real, reference.imag])
    R_new = np.hstack([new.real, new.imag])
    raw = np.linalg.solve(R_new.T, R_ref.T).T
    M = np.rint(raw)
    return M.astype(np.int64), float(np.max(np.abs(raw - M)))


def continue_periods(pd: PeriodData, target: FamilyPoint, direction: complex | None = None) -> PeriodData:
    """Periods at ``target`` expressed in the cycle basis carried by ``pd``.

    The step must be small enough that the lattice moves by less than the
    rounding slack; otherwise :class:`MonodromyStep` asks for subdivision.
    """
    if pd.point is not None and target == pd.point:
        return pd
    if direction is None:
        direction = pd.basis.direction
    new = periods_at(target, pd.config, direction)
    M, slack = lattice_change(pd.omega, new.omega)
    g = pd.genus
    if slack > MATCH_TOL or not np.array_equal(M @ standard_form(g) @ M.T, standard_form(g)):
        raise MonodromyStep(f"continuation step too large (rounding slack {slack:.3f}); subdivide")
    T = M @ new.basis.transform_to_symplectic
    basis = replace(new.basis, transform_to_symplectic=T)
    return assemble(new.chain, basis, quadrature_error=new.quadrature_error, point=target, config=pd.config)


def continue_along(pd: PeriodData, path, max_depth: int = 12) -> PeriodData:
    """Continue through a sequence of family points, bisecting failed steps."""
    from .curve_family import make_point

    cur = pd
    for target in path:
        cur = _continue_bisect(cur, target, max_depth, make_point)
    return cur


def _continue_bisect(pd, target, depth, make_point):
    try:
        return continue_periods(pd, target)
    except MonodromyStep:
        if depth == 0:
            raise
    a, b = pd.point.as_array(), target.as_array()
    mid = make_point(target.model, list(0.5 * (a + b)))
    half = _continue_bisect(pd, mid, depth - 1, make_point)
    return _continue_bisect(half, target, depth - 1, make_point)


# ------------------------------------------------------------ invariants


def elliptic_j(tau: complex, terms: int = 60) -> complex:
    """Klein's ``j`` from its q-expansion (``E4^3 / Delta``), after SL2(Z) reduction."""
    tau = reduce_tau(tau)
    q = np.exp(2j * np.pi * tau)
    n = np.arange(1, terms + 1)
    sigma3 = np.array([sum(d**3 for d in range(1, k + 1) if k % d == 0) for k in n], dtype=float)
    qn = q**n
    e4 = 1 + 240 * np.sum(sigma3 * qn)
    delta = q * np.prod((1 - qn) ** 24)
    return complex(e4**3 / delta)


def reduce_tau(tau: complex, max_iter: int = 200) -> complex:
    """Move ``tau`` into the standard fundamental domain."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half plane")
    for _ in range(max_iter):
        tau = tau - round(tau.real)
        if abs(tau) < 1 - 1e-15:
            tau = -1 / tau
        else:
            break
    return tau
