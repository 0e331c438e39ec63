import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from bettilab.errors import SchemaError
from bettilab.quadrature import (
    QuadratureConfig,
    integrate_singular,
    integrate_smooth,
    tanh_sinh_singular,
    trapezoid_circle,
)


@given(st.integers(0, 12))
def test_chebyshev_moments(n):
    # int_0^1 t^n / sqrt(t (1 - t)) dt = pi * binom(2n, n) / 4^n
    res = integrate_singular(lambda t: t**n)
    assert res.value == pytest.approx(math.pi * math.comb(2 * n, n) / 4**n, rel=1e-13)


def test_singular_against_mpmath():
    F = lambda t: np.exp(t) / (2 - t)  # noqa: E731
    # t = sin^2(theta) removes the endpoint singularities for the reference
    with mpmath.workdps(30):
        ref = 2 * mpmath.quad(lambda th: mpmath.exp(mpmath.sin(th) ** 2) / (2 - mpmath.sin(th) ** 2), [0, mpmath.pi / 2])
    assert integrate_singular(F).value == pytest.approx(complex(ref), rel=1e-13)
    assert tanh_sinh_singular(F) == pytest.approx(complex(ref), rel=1e-12)


def test_dd_agrees_with_double():
    F = lambda t: 1 / (1.5 - t) ** 0.5  # noqa: E731
    a = integrate_singular(F).value
    b = integrate_singular(F, QuadratureConfig(precision="dd")).value
    assert abs(a - b) < 1e-14


def test_smooth():
    assert integrate_smooth(lambda t: np.cos(t)).value == pytest.approx(math.sin(1), rel=1e-14)


def test_residue_on_circle():
    assert trapezoid_circle(lambda z: 3 / (z - 0.1), 0, 1) == pytest.approx(3)
    assert abs(trapezoid_circle(lambda z: z**2, 0, 1)) < 1e-14


def test_config_validation():
    with pytest.raises(SchemaError):
        QuadratureConfig(precision="quad")
    with pytest.raises(SchemaError):
        QuadratureConfig(nodes=8)
    cfg = QuadratureConfig(nodes=32, precision="dd")
    assert QuadratureConfig.from_json(cfg.to_json()) == cfg
