import cmath

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bettilab.curve_family import curve_data, even_model, make_point, odd_model
from bettilab.jsonio import period_data_from_json, period_data_to_json
from bettilab.periods import (
    build_cycle_basis,
    chain_intersection_matrix,
    continue_along,
    continue_periods,
    elliptic_j,
    lattice_change,
    periods_at,
    standard_form,
    symplectic_reduction,
)
from bettilab.quadrature import QuadratureConfig

from conftest import bounded_complex, point_or_none, well_separated


def j_from_lambda(lam):
    return 256 * (lam**2 - lam + 1) ** 3 / (lam**2 * (lam - 1) ** 2)


def j_from_quartic(e, d, c, b, a=1):
    # classical invariants of a x^4 + b x^3 + c x^2 + d x + e
    inv_i = 12 * a * e - 3 * b * d + c**2
    inv_j = 72 * a * c * e + 9 * b * c * d - 27 * a * d**2 - 27 * e * b**2 - 2 * c**3
    return 6912 * inv_i**3 / (4 * inv_i**3 - inv_j**2)


def segment_crossings(p1, p2, q1, q2):
    def orient(a, b, c):
        return np.sign(((b - a) * (c - a).conjugate()).imag)

    return orient(p1, p2, q1) != orient(p1, p2, q2) and orient(q1, q2, p1) != orient(q1, q2, p2)


def loop_polygon(a, b, width=0.2, n=40):
    """Thin ellipse around the segment [a, b]."""
    mid, half = (a + b) / 2, (b - a) / 2
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return mid + half * (1.1 * np.cos(t) + 1j * width * np.sin(t))


def crossing_count(P, Q):
    n, m = len(P), len(Q)
    return sum(
        segment_crossings(P[i], P[(i + 1) % n], Q[k], Q[(k + 1) % m]) for i in range(n) for k in range(m)
    )


def test_genus_one_basis():
    b = build_cycle_basis(curve_data(make_point(odd_model(1), [-1])))
    assert len(b.cycles) == 2
    T, K = b.transform_to_symplectic, b.intersection_matrix
    assert (T @ K @ T.T).tolist() == [[0, 1], [-1, 0]]


def test_intersections_match_geometric_oracle():
    b = build_cycle_basis(curve_data(make_point(odd_model(2), [2, 3, 5])))
    pts = b.branch_points
    loops = [loop_polygon(pts[c.start], pts[c.end]) for c in b.cycles]
    for i in range(4):
        for k in range(4):
            if i != k:
                # two transverse crossings per +-1 intersection between loops on two sheets
                assert crossing_count(loops[i], loops[k]) == 2 * abs(b.intersection_matrix[i, k])
    assert b.is_symplectic()


@given(st.integers(1, 6))
def test_reduction_is_symplectic(g):
    K = chain_intersection_matrix(2 * g)
    T = symplectic_reduction(K)
    assert np.array_equal(T @ K @ T.T, standard_form(g))
    assert round(abs(np.linalg.det(T))) == 1


@settings(max_examples=10)
@given(st.integers(1, 3), st.booleans(), st.data())
def test_riemann_relations(g, odd, data):
    model = odd_model(g) if odd else even_model(g)
    params = data.draw(st.lists(bounded_complex(), min_size=model.arity, max_size=model.arity))
    p = point_or_none(model, params)
    assume(p is not None and well_separated(p))
    pd = periods_at(p)
    assert pd.symmetry_residual < 1e-8
    assert pd.min_imag_eig > 0
    assert np.linalg.cond(np.hstack([pd.omega, pd.omega.conj()])) < 1e12


def test_lemniscatic_j():
    for p in (make_point(odd_model(1), [-1]), make_point(even_model(1), [-1, 0, 0, 0])):
        assert abs(elliptic_j(periods_at(p).Z[0, 0]) - 1728) < 1e-6


@settings(max_examples=15)
@given(bounded_complex(2.5))
def test_j_matches_legendre_formula(lam):
    p = point_or_none(odd_model(1), [lam])
    assume(p is not None and well_separated(p, 0.1))
    ref = j_from_lambda(lam)
    got = elliptic_j(periods_at(p).Z[0, 0])
    assert abs(got - ref) < 1e-6 * max(1, abs(ref))


@settings(max_examples=15)
@given(st.lists(bounded_complex(2.0), min_size=4, max_size=4))
def test_j_matches_quartic_invariants(params):
    p = point_or_none(even_model(1), params)
    assume(p is not None and well_separated(p, 0.1))
    ref = j_from_quartic(*params)
    got = elliptic_j(periods_at(p).Z[0, 0])
    assert abs(got - ref) < 1e-6 * max(1, abs(ref))


@pytest.mark.parametrize("model,params", [
    (odd_model(2), [2.5, -1 + 1j, 3j]),
    (even_model(2), [0.3, -1, 0.5j, 2, -0.7, 0.1]),
])
def test_basis_independence(model, params):
    # a rotated ordering gives another symplectic basis of the same lattice
    p = make_point(model, params)
    a = periods_at(p)
    b = periods_at(p, direction=cmath.exp(0.7j))
    M, slack = lattice_change(a.omega, b.omega)
    assert slack < 1e-8
    J = standard_form(p.genus)
    assert np.array_equal(M @ J @ M.T, J)
    assert np.allclose(M.astype(float) @ b.omega, a.omega, atol=1e-10)


def test_j_basis_independent():
    p = make_point(even_model(1), [0.3 + 0.2j, -1.1, 0.5, 0.2])
    ja = elliptic_j(periods_at(p).Z[0, 0])
    jb = elliptic_j(periods_at(p, direction=1j).Z[0, 0])
    assert abs(ja - jb) < 1e-6 * abs(ja)


@pytest.mark.parametrize("g", [1, 2, 3])
def test_doubling_converges(g):
    p = make_point(even_model(g), list(np.linspace(-1, 1, 2 * g + 2) + 0.3j))
    a = periods_at(p, QuadratureConfig(nodes=64)).omega
    b = periods_at(p, QuadratureConfig(nodes=128)).omega
    assert np.max(np.abs(a - b)) < 1e-10 * np.max(np.abs(b))


def test_dd_precision_agrees():
    p = make_point(odd_model(1), [2.5 + 0.5j])
    a = periods_at(p).omega
    b = periods_at(p, QuadratureConfig(precision="dd")).omega
    assert np.max(np.abs(a - b)) < 1e-12


def test_continuation_identity_and_continuity():
    p = make_point(odd_model(2), [2.5, -1 + 1j, 3j])
    pd = periods_at(p)
    assert continue_periods(pd, p) is pd
    q = make_point(odd_model(2), [2.5 + 1e-4, -1 + 1j, 3j])
    step = np.max(np.abs(continue_periods(pd, q).omega - pd.omega))
    assert 0 < step < 1e-2


def test_monodromy_loop_is_symplectic():
    s0 = -0.5
    pd = periods_at(make_point(odd_model(1), [s0]))
    # s0 circles the fixed branch point 0
    path = [make_point(odd_model(1), [0.5 * cmath.exp(1j * (np.pi + t))]) for t in np.linspace(0, 2 * np.pi, 41)[1:]]
    end = continue_along(pd, path)
    M, slack = lattice_change(end.omega, pd.omega)
    assert slack < 1e-8
    assert np.array_equal(M @ standard_form(1) @ M.T, standard_form(1))
    assert not np.array_equal(M, np.eye(2, dtype=int))
    assert abs(np.trace(M)) == 2  # unipotent: a squared Dehn twist


def test_period_json_roundtrip():
    pd = periods_at(make_point(even_model(2), [0.3, -1, 0.5j, 2, -0.7, 0.1]))
    back = period_data_from_json(period_data_to_json(pd))
    assert np.array_equal(back.omega, pd.omega)
    assert np.array_equal(back.Z, pd.Z)


def test_close_real_roots_converge():
    # two branch points 1.75e-3 apart next to an odd chain segment
    r = np.array([-2.5106843, -2.11246779, -1.85205644, -1.85030245, 1.09972144, 1.72258165, 1.81418497, 1.91776031])
    f = np.poly(r)[::-1].real
    pd = periods_at(make_point(even_model(3), list(f[:-1])))
    assert pd.symmetry_residual < 1e-8 and pd.min_imag_eig > 0
