from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bettilab.curve_family import make_point, odd_model
from bettilab.errors import InvalidParam
from bettilab.kodaira_spencer import (
    c_closed_form,
    contracted_rank,
    ks_residue,
    ks_tensor,
    max_contracted_rank,
    residue_contour,
    residue_series,
    vandermonde_witness,
)
from bettilab.quadric_webs import counterexample_web

from conftest import bounded_complex, point_or_none, well_separated

S235 = make_point(odd_model(2), [Fraction(2), Fraction(3), Fraction(5)])


def random_odd_point(g, rng):
    while True:
        p = point_or_none(odd_model(g), list(rng.normal(size=2 * g - 1) * 2 + 2j * rng.normal(size=2 * g - 1)))
        if p is not None and well_separated(p, 0.1):
            return p


def test_c0_at_235():
    assert ks_residue(S235, 0, 0) == Fraction(1, 3)
    assert c_closed_form(S235, 0) == Fraction(1, 3)


def test_determinant_is_scaled_vandermonde():
    T = ks_tensor(S235)
    c = T.c
    assert T.determinant() == c[0] * c[1] * c[2] * (3 - 2) * (5 - 2) * (5 - 3)
    assert T.determinant() == Fraction(-1, 180)


def test_exact_ratio_law():
    T = ks_tensor(S235)
    for i, s in enumerate([2, 3, 5]):
        for j in range(3):
            assert T.M[i][j] == T.M[i][0] * s**j


@settings(max_examples=30)
@given(st.integers(1, 3), st.data())
def test_series_and_contour_agree(g, data):
    params = data.draw(st.lists(bounded_complex(3.0), min_size=2 * g - 1, max_size=2 * g - 1))
    p = point_or_none(odd_model(g), params)
    assume(p is not None and well_separated(p, 0.1))
    i = data.draw(st.integers(0, 2 * g - 2))
    j = data.draw(st.integers(0, 2 * g - 2))
    a = complex(residue_series(p, i, j))
    b = residue_contour(p, i, j)
    assert abs(a - b) < 1e-10 * max(1, abs(a))
    assert abs(a - complex(c_closed_form(p, i)) * complex(params[i]) ** j) < 1e-10 * max(1, abs(a))


@pytest.mark.parametrize("g", [1, 2, 3])
def test_float_ratio_law_and_rank_one(g, rng):
    p = random_odd_point(g, rng)
    T = ks_tensor(p)
    M = T.matrix()
    s = p.as_array()
    for i in range(2 * g - 1):
        for j in range(2 * g - 1):
            assert abs(M[i, j] / M[i, 0] - s[i] ** j) < 1e-10 * max(1, abs(s[i]) ** j)
        sv = np.linalg.svd(T.forms()[i], compute_uv=False)
        if g > 1:
            assert sv[1] / sv[0] < 1e-10
    assert abs(T.determinant()) > 0
    assert max_contracted_rank(T.forms(), 10, rng, vandermonde_witness(g)).max_rank == g


def test_odd_differentials_vanish(rng):
    p = random_odd_point(3, rng)
    for i in range(5):
        assert residue_series(p, i, 0, k=1) == 0
        assert abs(residue_contour(p, i, 0, k=1)) < 1e-12


def test_permuting_parameters_permutes_rows():
    perm = [2, 0, 1]
    q = make_point(odd_model(2), [S235.params[k] for k in perm])
    A, B = ks_tensor(S235), ks_tensor(q)
    assert [B.M[i] for i in range(3)] == [A.M[k] for k in perm]


def test_conditioning_for_separated_points(rng):
    p = random_odd_point(3, rng)
    assert np.linalg.cond(ks_tensor(p).matrix()) < 1e10


def test_contracted_rank_edge_cases():
    T = ks_tensor(S235).forms()
    assert contracted_rank(T, np.zeros(2)).rank == 0
    assert max_contracted_rank([np.zeros((2, 2))] * 3, 5).max_rank == 0
    with pytest.raises(InvalidParam):
        max_contracted_rank(T, 0)


def test_degenerate_span_has_deficient_contraction(rng):
    T = counterexample_web().arrays()
    res = max_contracted_rank(T, 50, rng)
    assert res.max_rank < 4


def test_rank_bound_cross_check(rng):
    g = 2
    T = ks_tensor(random_odd_point(g, rng)).forms()
    d = 2 * g - 1
    assert 2 * max_contracted_rank(T, 10, rng).max_rank <= 2 * min(d, g)


def test_even_model_rejected():
    from bettilab.curve_family import even_model

    with pytest.raises(InvalidParam):
        residue_series(make_point(even_model(1), [-1, 0, 0, 0]), 0, 0)
