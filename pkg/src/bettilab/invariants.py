"""Quick invariant suite behind ``betti-lab verify``.

Each check is small enough to run in a few seconds and returns
``(passed, detail)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import polynomials as P
from .betti_map import TranslationSlice, betti_jacobian, evaluate
from .curve_family import even_model, make_point, odd_model
from .kodaira_spencer import ks_tensor, max_contracted_rank, vandermonde_witness
from .monodromy_census import Series, census_report
from .periods import elliptic_j, periods_at
from .quadric_webs import IdenticallySingular, RegularVector, counterexample_web, find_regular_vector, random_web
from .torsion_pell import brute_force_order, pell_solve, torsion_order


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def random_point(model, rng, scale: float = 2.0):
    while True:
        params = list(scale * (rng.normal(size=model.arity) + 1j * rng.normal(size=model.arity)))
        try:
            return make_point(model, params)
        except Exception:
            continue


def _riemann(rng):
    worst_sym, worst_eig = 0.0, np.inf
    for g in (1, 2, 3):
        for model in (odd_model(g), even_model(g)):
            for _ in range(3):
                pd = periods_at(random_point(model, rng))
                worst_sym = max(worst_sym, pd.symmetry_residual)
                worst_eig = min(worst_eig, pd.min_imag_eig)
    return worst_sym < 1e-8 and worst_eig > 0, f"max |Z - Z^T| = {worst_sym:.2e}, min eig Im Z = {worst_eig:.3g}"


def _lemniscatic(rng):
    js = [elliptic_j(periods_at(make_point(odd_model(1), [-1])).Z[0, 0])]
    js.append(elliptic_j(periods_at(make_point(even_model(1), [-1, 0, 0, 0])).Z[0, 0]))
    err = max(abs(j - 1728) for j in js)
    return err < 1e-6, f"|j - 1728| <= {err:.2e}"


def _symplectic(rng):
    ok = True
    for g in (1, 2, 3):
        pd = periods_at(random_point(even_model(g), rng))
        ok &= pd.basis.is_symplectic()
    return ok, "T K T^T = J for g = 1, 2, 3"


def _reconstruction(rng):
    worst = 0.0
    for g in (1, 2):
        for _ in range(3):
            ev = evaluate(random_point(even_model(g), rng)).evaluation
            worst = max(worst, ev.residual_reconstruction, ev.residual_realness)
    return worst < 1e-8, f"max residual {worst:.2e}"


def _even_rank(rng):
    ranks = []
    for g in (1, 2):
        jac = betti_jacobian(random_point(even_model(g), rng))
        ranks.append(jac.rank)
    iso = betti_jacobian(None, family=TranslationSlice(even_model(1), (-1.0, 0.3, 0.0, 0.0)), t0=[0.2 + 0.1j])
    ok = ranks == [2, 4] and iso.rank == 0
    return ok, f"universal ranks {ranks}, isotrivial slice rank {iso.rank}"


def _pell(rng):
    a = torsion_order(P.parse("x^4-1"))
    b = torsion_order(P.parse("(x^3-2x)^2-1"))
    agree = True
    for _ in range(3):
        f = [Fraction(int(v)) for v in rng.integers(-5, 6, size=4)] + [Fraction(1)]
        if not P.is_squarefree(f):
            continue
        sol = pell_solve(f, 8)
        agree &= (None if sol is None else sol.order) == brute_force_order(f, 8)
    return a == 2 and b == 3 and agree, f"orders {a}, {b}; brute-force agreement {agree}"


def _pell_betti(rng):
    ev = evaluate(make_point(even_model(1), [-1, 0, 0, 0])).evaluation
    d = float(np.max(np.abs(2 * ev.beta - np.rint(2 * ev.beta))))
    return d < 1e-6, f"distance of 2 beta from Z^2: {d:.2e}"


def _kodaira_spencer(rng):
    ok, worst = True, 0.0
    for g, s in ((1, [Fraction(2)]), (2, [Fraction(2), Fraction(3), Fraction(5)])):
        T = ks_tensor(make_point(odd_model(g), s))
        for i, si in enumerate(s):
            for j in range(2 * g - 1):
                ok &= T.M[i][j] == T.M[i][0] * si**j
        ok &= T.determinant() != 0
        ok &= max_contracted_rank(T.forms(), 5, rng, vandermonde_witness(g)).max_rank == g
    T3 = ks_tensor(random_point(odd_model(3), rng, 1.0))
    M = T3.matrix()
    s3 = [complex(v) for v in T3.s.params]
    for i, si in enumerate(s3):
        worst = max(worst, max(abs(M[i, j] / M[i, 0] - si**j) / max(1, abs(si) ** j) for j in range(5)))
    return ok and worst < 1e-10, f"exact ratio law and ranks; g=3 ratio error {worst:.2e}"


def _webs(rng):
    cert = find_regular_vector(counterexample_web())
    regular = all(isinstance(find_regular_vector(random_web(g, rng), 20, rng), RegularVector) for g in (1, 2, 3))
    return isinstance(cert, IdenticallySingular) and regular, "g=4 counterexample singular; random webs regular"


def _census(rng):
    rep = census_report(40, 9)
    ok = all(c.series is Series.C and c.m == 1 for c in rep.feasible) and len(rep.feasible) == 40
    return ok, f"{len(rep.cases)} cases, {len(rep.feasible)} feasible"


CHECKS = [
    ("riemann_relations", _riemann),
    ("lemniscatic_j", _lemniscatic),
    ("symplectic_basis", _symplectic),
    ("betti_reconstruction", _reconstruction),
    ("even_rank", _even_rank),
    ("pell_certificates", _pell),
    ("pell_betti_consistency", _pell_betti),
    ("kodaira_spencer", _kodaira_spencer),
    ("quadric_webs", _webs),
    ("census", _census),
]


def run_checks(seed: int = 0, names=None) -> list[CheckResult]:
    out = []
    for name, fn in CHECKS:
        if names and name not in names:
            continue
        rng = np.random.default_rng(seed)
        t0 = time.perf_counter()
        try:
            passed, detail = fn(rng)
        except Exception as exc:  # a crash is a failed check, reported not raised
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(passed), detail, time.perf_counter() - t0))
    return out
