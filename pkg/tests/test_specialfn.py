import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scalekernel import specialfn as sf
from scalekernel.errors import DomainError, OrderDomainError, ParameterPole

mp.mp.dps = 30


def rel(a, b):
    return abs(a - b) / abs(b)


def test_hermite_closed_values():
    assert sf.hermite_H(-1.0, 0.0) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-12)
    assert sf.hermite_H(-2.0, 0.0) == pytest.approx(0.5, rel=1e-12)


def test_hermite_decays_in_x():
    vals = [sf.hermite_H(-1.0, x) for x in (0.0, 1.0, 2.0, 5.0, 10.0, 30.0)]
    assert all(a > b > 0 for a, b in zip(vals, vals[1:]))


def test_hermite_rejects_nonnegative_order():
    with pytest.raises(OrderDomainError):
        sf.hermite_H(0.0, 1.0)


@pytest.mark.parametrize("v", [-0.1, -0.5, -1.0, -2.3, -4.0])
@pytest.mark.parametrize("x", [-4.0, -1.5, 0.0, 0.7, 4.0])
def test_parabolic_D_matches_mpmath(v, x):
    assert rel(sf.parabolic_D(v, x), float(mp.pcfd(v, x))) < 1e-9


def test_parabolic_D_known_values():
    assert sf.parabolic_D(-1.0, 0.0) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-12)
    v = -0.5
    exact = 2 ** (v / 2) * math.sqrt(math.pi) / math.gamma((1 - v) / 2)
    assert sf.parabolic_D(v, 0.0) == pytest.approx(exact, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(-4.0, -0.1), st.floats(-4.0, 4.0))
def test_parabolic_D_is_scaled_hermite(v, x):
    lhs = sf.parabolic_D(v, x)
    rhs = 2 ** (-v / 2) * math.exp(-x * x / 4) * sf.hermite_H(v, x / math.sqrt(2))
    assert rel(lhs, rhs) < 1e-10
    assert lhs > 0


@settings(max_examples=40, deadline=None)
@given(st.floats(-3.0, -0.1), st.floats(-3.0, 3.0))
def test_parabolic_D_derivative_vs_central_difference(v, x):
    h = 1e-4
    fd = (
        -sf.parabolic_D(v, x + 2 * h) + 8 * sf.parabolic_D(v, x + h)
        - 8 * sf.parabolic_D(v, x - h) + sf.parabolic_D(v, x - 2 * h)
    ) / (12 * h)
    d = sf.parabolic_D(v, x, derivative=True)
    assert abs(d - fd) <= 1e-7 * max(abs(d), 1e-3)


def test_scaled_parabolic_D_far_tail():
    # plain D_v underflows long before the scaled form
    v, x = -0.5, 60.0
    exact = mp.exp(mp.mpf(x) ** 2 / 4) * mp.pcfd(v, x)
    assert rel(sf.scaled_parabolic_D(v, x), float(exact)) < 1e-9


def test_kummer_trivial_cases():
    assert sf.kummer_M(0.3, 1.7, 0.0) == 1.0
    for z in (-5.0, -0.3, 0.0, 2.0, 20.0):
        assert sf.kummer_M(1.0, 1.0, z) == pytest.approx(math.exp(z), rel=1e-14)


def test_kummer_against_extended_precision_series():
    exact = mp.nsum(lambda n: mp.rf(0.5, n) * mp.mpf(-1) ** n / (mp.rf(1.5, n) * mp.factorial(n)), [0, 200])
    assert rel(sf.kummer_M(0.5, 1.5, -1.0), float(exact)) < 1e-14


@pytest.mark.parametrize("a, b", [(0.4, 2.3), (1.7, 3.1), (2.5, 1.2)])
@pytest.mark.parametrize("z", [-45.0, -30.0, -3.0, 0.5, 30.0, 45.0])
def test_kummer_matches_mpmath(a, b, z):
    assert rel(sf.kummer_M(a, b, z), float(mp.hyp1f1(a, b, z))) < 1e-12


def test_kummer_transform_agrees_at_crossover():
    a, b, z = 0.7, 2.2, 30.0
    assert rel(sf.kummer_M(a, b, z), math.exp(z) * sf.kummer_M(b - a, b, -z)) < 1e-9


def test_kummer_pole():
    with pytest.raises(ParameterPole):
        sf.kummer_M(1.0, -2.0, 0.5)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.05, 8.0))
def test_tricomi_power_case(a, z):
    assert rel(sf.tricomi_U(a, a + 1.0, z), z ** -a) < 1e-9


@pytest.mark.parametrize("a, b, z", [(1.0, 1.0, 1.0), (0.3, 2.6, 0.05), (1.4, 3.9, 4.0), (0.8, 0.5, 20.0)])
def test_tricomi_matches_mpmath(a, b, z):
    assert rel(sf.tricomi_U(a, b, z), float(mp.hyperu(a, b, z))) < 1e-9


def test_tricomi_self_convergence():
    loose = sf.tricomi_U(1.0, 1.0, 1.0)
    tight = sf.tricomi_U(1.0, 1.0, 1.0, sf.QuadratureConfig(abs_tol=5e-13, rel_tol=5e-11))
    assert rel(loose, tight) < 1e-10


def test_tricomi_leading_asymptotic():
    ratios = [sf.tricomi_U(0.5, 2.0, z) * z ** 0.5 for z in (1e3, 1e4)]
    assert abs(ratios[1] - 1) < abs(ratios[0] - 1) < 1e-3


def test_tricomi_domain():
    with pytest.raises(DomainError):
        sf.tricomi_U(0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        sf.tricomi_U(1.0, 1.0, 0.0)


def test_derivative_recurrences():
    a, b, z, h = 0.6, 2.4, 1.3, 1e-5
    fd_m = (sf.kummer_M(a, b, z + h) - sf.kummer_M(a, b, z - h)) / (2 * h)
    fd_u = (sf.tricomi_U(a, b, z + h) - sf.tricomi_U(a, b, z - h)) / (2 * h)
    assert rel(sf.kummer_M_prime(a, b, z), fd_m) < 1e-8
    assert rel(sf.tricomi_U_prime(a, b, z), fd_u) < 1e-7


def test_gamma():
    for x in np.linspace(0.05, 49.5, 40):
        assert rel(sf.gamma(x), float(mp.gamma(x))) < 1e-13
    with pytest.raises(ParameterPole):
        sf.gamma(-2.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 4.0), st.floats(0.1, 4.0), st.floats(0.01, 25.0))
def test_positivity_on_eigen_domain(a, db, z):
    b = a + db
    assert sf.kummer_M(a, b, z) > 0
    assert sf.tricomi_U(a, b, z) > 0
