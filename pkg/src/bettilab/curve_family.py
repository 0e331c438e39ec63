"""Hyperelliptic family models and per-point curve data.

Two models are supported:

* ``ODD``:  ``y^2 = x(x-1)(x-s_0)...(x-s_{2g-2})``, degree ``2g+1``, one point
  at infinity, ``2g-1`` parameters.
* ``EVEN``: ``y^2 = x^{2g+2} + s_{2g+1} x^{2g+1} + ... + s_0``, two points at
  infinity ``inf+`` / ``inf-``, ``2g+2`` parameters (coefficients, low first).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import Sequence

import numpy as np

from . import polynomials as P
from .errors import DegenerateDiscriminant, InvalidParam, RootFindingFailure

# declared degenerate below this relative root separation
COLLISION_TOL = 1e-8


class ModelKind(str, enum.Enum):
    ODD = "odd"
    EVEN = "even"


class InfinityStructure(str, enum.Enum):
    ONE_POINT = "one_point"
    TWO_POINTS = "two_points"


@dataclass(frozen=True)
class FamilyModel:
    kind: ModelKind
    genus: int

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if int(self.genus) < 1:
            raise InvalidParam(f"genus must be positive, got {self.genus}")

    @property
    def arity(self) -> int:
        g = self.genus
        return 2 * g - 1 if self.kind is ModelKind.ODD else 2 * g + 2

    @property
    def degree(self) -> int:
        g = self.genus
        return 2 * g + 1 if self.kind is ModelKind.ODD else 2 * g + 2


def odd_model(g: int) -> FamilyModel:
    return FamilyModel(ModelKind.ODD, g)


def even_model(g: int) -> FamilyModel:
    return FamilyModel(ModelKind.EVEN, g)


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction)) and not isinstance(c, bool)


@dataclass(frozen=True)
class FamilyPoint:
    """A validated parameter vector.  Build through :func:`make_point`."""

    model: FamilyModel
    params: tuple
    _roots: tuple = field(default=(), repr=False, compare=False)

    @property
    def genus(self) -> int:
        return self.model.genus

    @property
    def is_real(self) -> bool:
        return all(complex(c).imag == 0 for c in self.params)

    @property
    def is_rational(self) -> bool:
        return all(_is_exact(c) for c in self.params)

    def as_array(self) -> np.ndarray:
        return np.array([complex(c) for c in self.params], dtype=complex)

    def exact_params(self) -> list[Fraction]:
        return [P.to_fraction(c) for c in self.params]

    def to_json(self) -> dict:
        return point_to_json(self)

    def key(self) -> str:
        """Canonical string used for hashing and caching."""
        return json.dumps(point_to_json(self), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class CurveData:
    """Defining polynomial (highest degree first) and its branch points."""

    f: np.ndarray
    fprime: np.ndarray
    branch_points: np.ndarray
    genus: int
    infinity_structure: InfinityStructure
    kind: ModelKind

    def eval_f(self, x):
        return np.polyval(self.f, x)

    def eval_fprime(self, x):
        return np.polyval(self.fprime, x)


def _min_separation(points: np.ndarray) -> float:
    if len(points) < 2:
        return np.inf
    diff = np.abs(points[:, None] - points[None, :])
    diff[np.diag_indices(len(points))] = np.inf
    return float(diff.min())


def _collision_scale(points: np.ndarray) -> float:
    return COLLISION_TOL * max(1.0, float(np.max(np.abs(points))))


def make_point(model: FamilyModel, params: Sequence[Number]) -> FamilyPoint:
    """Validate ``params`` against ``model`` and return a :class:`FamilyPoint`."""
    params = tuple(params)
    if len(params) != model.arity:
        raise InvalidParam(
            f"{model.kind.value} model of genus {model.genus} takes {model.arity} parameters, got {len(params)}"
        )
    for c in params:
        if not isinstance(c, Number) or isinstance(c, bool):
            raise InvalidParam(f"parameter {c!r} is not a number")
        if not np.isfinite(complex(c)):
            raise InvalidParam(f"parameter {c!r} is not finite")

    if model.kind is ModelKind.ODD:
        vals = [complex(c) for c in params]
        for i, c in enumerate(vals):
            if c == 0 or c == 1:
                raise InvalidParam(f"parameter s_{i} = {params[i]} collides with a fixed root 0 or 1")
            for j in range(i):
                if vals[j] == c:
                    raise InvalidParam(f"parameters s_{j} and s_{i} are equal")
        roots = np.array([0.0, 1.0] + vals, dtype=complex)
    else:
        roots = _even_roots(params)

    sep = _min_separation(roots)
    if sep < _collision_scale(roots):
        raise DegenerateDiscriminant(f"branch points collide (min separation {sep:.3e})")
    return FamilyPoint(model, params, tuple(roots))


def _even_roots(params) -> np.ndarray:
    coeffs = np.array([1.0] + [complex(c) for c in reversed(params)], dtype=complex)
    roots = np.roots(coeffs)
    return polish_roots(coeffs, roots)


def polish_roots(coeffs: np.ndarray, roots: np.ndarray, max_iter: int = 20) -> np.ndarray:
    """Newton-polish approximate roots of ``coeffs`` (highest degree first)."""
    d = np.polyder(coeffs)
    roots = np.array(roots, dtype=complex)
    fx = np.polyval(coeffs, roots)
    for _ in range(max_iter):
        with np.errstate(all="ignore"):
            step = fx / np.polyval(d, roots)
            cand = roots - step
            fc = np.polyval(coeffs, cand)
        # near-double roots can throw a step far away; keep only improving ones
        take = np.isfinite(cand) & (np.abs(fc) < np.abs(fx))
        if not take.any():
            break
        roots = np.where(take, cand, roots)
        fx = np.where(take, fc, fx)
        if np.all(np.abs(np.where(take, step, 0)) <= 4 * np.finfo(float).eps * (1 + np.abs(roots))):
            break
    resid = np.abs(np.polyval(coeffs, roots))
    bound = 1e-11 * np.polyval(np.abs(coeffs), np.abs(roots))
    if not np.all(np.isfinite(roots)) or np.any(resid > bound):
        raise RootFindingFailure(f"root polishing did not converge (max residual {resid.max():.3e})")
    return roots


def curve_data(p: FamilyPoint) -> CurveData:
    """Expand ``f``, its derivative and the branch points for a family point."""
    roots = np.array(p._roots, dtype=complex) if p._roots else None
    if p.model.kind is ModelKind.ODD:
        if roots is None:
            roots = np.array([0.0, 1.0] + [complex(c) for c in p.params], dtype=complex)
        f = np.poly(roots).astype(complex)
        inf = InfinityStructure.ONE_POINT
    else:
        f = np.array([1.0] + [complex(c) for c in reversed(p.params)], dtype=complex)
        if roots is None:
            roots = _even_roots(p.params)
        inf = InfinityStructure.TWO_POINTS
    return CurveData(
        f=f,
        fprime=np.polyder(f),
        branch_points=roots,
        genus=p.genus,
        infinity_structure=inf,
        kind=p.model.kind,
    )


def exact_f(p: FamilyPoint) -> list[Fraction]:
    """Exact coefficients of ``f`` (lowest first) for rational points."""
    s = p.exact_params()
    if p.model.kind is ModelKind.ODD:
        return P.from_roots([Fraction(0), Fraction(1)] + s)
    return s + [Fraction(1)]


def h_polynomial(p: FamilyPoint) -> list:
    """``h = f/x + f/(x-1) + sum_i f/(x-s_i)`` for the odd model, as a polynomial.

    Coefficients are exact for rational points.
    """
    if p.model.kind is not ModelKind.ODD:
        raise InvalidParam("h(x) is defined for the odd-degree model only")
    if p.is_rational:
        roots = [Fraction(0), Fraction(1)] + p.exact_params()
    else:
        roots = [0j, 1 + 0j] + [complex(c) for c in p.params]
    total: list = []
    for i in range(len(roots)):
        total = P.add(total, P.from_roots(roots[:i] + roots[i + 1 :]))
    return total


# ---------------------------------------------------------------- JSON I/O


def _encode_scalar(c):
    if _is_exact(c):
        return P.format_coeff(Fraction(c))
    z = complex(c)
    return [z.real, z.imag]


def _decode_scalar(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        re, im = float(v[0]), float(v[1])
        return re if im == 0 else complex(re, im)
    if isinstance(v, int) and not isinstance(v, bool):
        return v
    if isinstance(v, float):
        return v
    raise InvalidParam(f"cannot decode parameter {v!r}")


def point_to_json(p: FamilyPoint) -> dict:
    return {
        "model": p.model.kind.value,
        "genus": p.genus,
        "params": [_encode_scalar(c) for c in p.params],
    }


def point_from_json(obj: dict) -> FamilyPoint:
    try:
        model = FamilyModel(ModelKind(obj["model"]), int(obj["genus"]))
        params = [_decode_scalar(v) for v in obj["params"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParam(f"malformed family point: {exc}") from exc
    return make_point(model, params)
