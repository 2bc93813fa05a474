import math

import numpy as np
import pytest

import scalekernel as sk
from scalekernel.errors import DomainError, InvalidParameter, NoBracket
from scalekernel.valuation import boundary_values, varsigma_at_zero

from conftest import BM_GOLDEN

FAMILIES = [("bm", (0.0, 1.0)), ("ou", (1.0,)), ("shiryaev", (1.0, 0.5))]


def test_bm_golden_value(bm_kernel):
    prob = sk.BarrierProblem(bm_kernel, 1.0, 1.2)
    assert sk.value_function(prob, 0.5) == pytest.approx(BM_GOLDEN, rel=1e-14)


def test_outer_branches(ou_kernel):
    prob = sk.BarrierProblem(ou_kernel, 1.0, 1.5)
    v0, va = boundary_values(prob)
    assert sk.value_function(prob, -0.5) == pytest.approx(v0 - 0.75, rel=1e-14)
    assert sk.value_function(prob, 3.0) == pytest.approx(va + 2.0, rel=1e-14)
    assert v0 == sk.value_function(prob, 0.0)
    assert va == pytest.approx(sk.value_function(prob, 1.0), rel=1e-14)


def test_bm_boundary_value_at_optimum(bm_kernel):
    prob = sk.BarrierProblem(bm_kernel, math.acosh(1.2), 1.2)
    v0, _ = boundary_values(prob)
    assert v0 == pytest.approx(-math.sqrt(0.44), rel=1e-13)


@pytest.mark.parametrize("name", ["bm", "ou", "shiryaev"])
def test_boundary_values_solve_linear_system(kernels, name):
    # V(0) W1(0,0)... expressed through the two smooth-fit equations
    k = kernels[name]
    a, kap = 1.3, 1.4
    v0, va = boundary_values(sk.BarrierProblem(k, a, kap))
    d = k.W12(0.0, a)
    assert v0 * d == pytest.approx(k.W1(0.0, 0.0) - kap * k.W1(a, 0.0), rel=1e-9)
    assert va * d == pytest.approx(k.W1(0.0, a) - kap * k.W1(a, a), rel=1e-9)


@pytest.mark.parametrize("name", ["bm", "ou", "shiryaev"])
def test_continuity_at_barriers(kernels, name):
    prob = sk.BarrierProblem(kernels[name], 0.9, 1.3)
    for b in (0.0, 0.9):
        left, right = sk.value_function(prob, np.nextafter(b, -1)), sk.value_function(prob, np.nextafter(b, 2))
        assert abs(left - right) < 1e-10


@pytest.mark.parametrize("family, params", FAMILIES)
@pytest.mark.parametrize("kappa", [1.1, 1.5, 3.0])
@pytest.mark.parametrize("q", [0.2, 1.0])
@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_smooth_fit(family, params, kappa, q, a):
    k = sk.kernel_for(sk.make_diffusion(family, params), q)
    s0, sa = sk.smooth_fit_diagnostics(sk.BarrierProblem(k, a, kappa))
    assert abs(sa - 1.0) <= 1e-9
    assert abs(s0 - kappa) <= 1e-9


def test_bm_analytic_slope():
    q, kap, a = 0.5, 1.2, 1.0
    r = math.sqrt(2 * q)
    slope = lambda x: (r * math.sinh(r * x) + kap * r * math.sinh(r * (a - x))) / (r * math.sinh(r * a))  # noqa: E731
    assert slope(a) == pytest.approx(1.0, rel=1e-15)
    assert slope(0.0) == pytest.approx(kap, rel=1e-15)


def test_varsigma_bm(bm_kernel):
    for a in (0.2, 0.6, 1.5):
        assert sk.varsigma(bm_kernel, 1.2, a) == pytest.approx(math.cosh(a) - 1.2, rel=1e-12)


@pytest.mark.parametrize("name", ["bm", "ou", "shiryaev"])
def test_varsigma_limit_at_zero(kernels, name):
    k = kernels[name]
    lim = varsigma_at_zero(k, 1.5)
    assert lim == pytest.approx(-(0.5) * 2 * k.q * k.W1(0.0, 0.0), rel=1e-12)
    assert sk.varsigma(k, 1.5, 1e-7) == pytest.approx(lim, rel=1e-5)


@pytest.mark.parametrize("name", ["bm", "ou", "shiryaev"])
def test_slope_sign_matches_varsigma(kernels, name):
    k = kernels[name]
    for a in (0.2, 0.6, 1.5, 3.0):
        prob = sk.BarrierProblem(k, a, 1.5)
        sv = sk.varsigma(k, 1.5, a)
        for x in np.linspace(0, a, 5):
            assert np.sign(sk.value_slope_in_barrier(prob, x)) == -np.sign(sv)


@pytest.mark.parametrize("name", ["bm", "ou"])
def test_slope_in_barrier_vs_central_difference(kernels, name):
    k = kernels[name]
    h = 1e-5
    for a in (0.4, 1.0, 2.0):
        for x in (0.0, 0.3, a):
            v = lambda b: sk.value_function(sk.BarrierProblem(k, b, 1.5), x)  # noqa: E731
            if x < a:
                fd = (v(a + h) - v(a - h)) / (2 * h)
            else:
                # barriers below x put it on the linear branch; stay on the in-band side
                fd = (-3 * v(a) + 4 * v(a + h) - v(a + 2 * h)) / (2 * h)
            got = sk.value_slope_in_barrier(sk.BarrierProblem(k, a, 1.5), x)
            assert abs(got - fd) <= 1e-6 * abs(fd)


def test_slope_above_barrier(ou_kernel):
    prob = sk.BarrierProblem(ou_kernel, 1.0, 1.5)
    assert sk.value_slope_in_barrier(prob, 2.0) == sk.value_slope_in_barrier(prob, 1.0)
    with pytest.raises(DomainError):
        sk.value_slope_in_barrier(prob, -0.1)


def test_optimal_barrier_bm(bm_kernel):
    assert abs(sk.optimal_barrier(bm_kernel, 1.2) - math.acosh(1.2)) <= 1e-9


def test_optimal_barrier_ou(ou_kernel):
    a = sk.optimal_barrier(ou_kernel, 1.5)
    assert a == pytest.approx(0.58531, abs=1e-5)
    assert abs(sk.varsigma(ou_kernel, 1.5, a)) <= 1e-8


def test_optimal_barrier_shrinks_with_cost(bm_kernel):
    roots = [sk.optimal_barrier(bm_kernel, k) for k in (1.5, 1.1, 1.01, 1.001)]
    assert all(a > b > 0 for a, b in zip(roots, roots[1:]))
    assert roots[-1] == pytest.approx(math.acosh(1.001), abs=1e-9)


def test_no_bracket_reports_last_value(ou_kernel):
    with pytest.raises(NoBracket) as info:
        sk.optimal_barrier(ou_kernel, 1.5, sk.BarrierSearchConfig(a_max=0.1))
    assert info.value.last_value < 0


@pytest.mark.parametrize("name", ["ou", "shiryaev"])
def test_envelope_and_unimodality(kernels, name):
    k = kernels[name]
    a_star = sk.optimal_barrier(k, 1.5)
    best = sk.BarrierProblem(k, a_star, 1.5)
    grid = np.linspace(0.05, 3 * a_star, 25)
    for x in (0.0, a_star / 2, a_star):
        for a in grid:
            assert sk.value_function(best, x) >= sk.value_function(sk.BarrierProblem(k, a, 1.5), x) - 1e-9
    for a in grid:
        sv = sk.varsigma(k, 1.5, a)
        slope = sk.value_slope_in_barrier(sk.BarrierProblem(k, a, 1.5), 0.2)
        if a < a_star - 1e-8:
            assert sv < 0 and slope > 0
        elif a > a_star + 1e-8:
            assert sv > 0 and slope < 0


def test_value_curve(ou_kernel):
    xs, vs = sk.value_curve(sk.BarrierProblem(ou_kernel, 1.0, 1.5), 41, 0.5)
    assert xs[0] == -0.5 and xs[-1] == 1.5
    assert np.all(np.diff(xs) > 0) and np.all(np.isfinite(vs))
    assert np.all(np.diff(vs) > 0)


def test_problem_validation(ou_kernel):
    with pytest.raises(InvalidParameter):
        sk.BarrierProblem(ou_kernel, 0.0, 1.5)
    with pytest.raises(InvalidParameter):
        sk.BarrierProblem(ou_kernel, 1.0, 0.9)
    with pytest.raises(InvalidParameter):
        sk.optimal_barrier(ou_kernel, 1.0)
