import math

import numpy as np
import pytest

import scalekernel as sk
from scalekernel.eigen import Backend, OdeConfig, closed_form_eigenpair, numeric_eigenpair, scale_density
from scalekernel.errors import AssumptionViolation, UnsupportedFamily

GRID = np.linspace(-3.0, 3.0, 25)


def test_bm_closed_form(bm):
    pair = closed_form_eigenpair(bm, 0.5)
    p, m, dp, dm = pair.evaluate(GRID)
    np.testing.assert_allclose(p, np.exp(GRID), rtol=1e-15)
    np.testing.assert_allclose(m, np.exp(-GRID), rtol=1e-15)
    assert pair.c_q == pytest.approx(2.0)


def test_bm_with_drift_solves_the_ode():
    spec = sk.make_diffusion("bm", (-0.4, 1.3))
    pair = closed_form_eigenpair(spec, 0.7)
    np.testing.assert_allclose(pair.wronskian_over_scale(GRID), pair.c_q, rtol=1e-12)
    numeric = numeric_eigenpair(spec, 0.7)
    x, y = np.meshgrid(GRID, GRID[::-1])
    assert np.allclose(sk.ScaleKernel(pair).W(x, y), sk.ScaleKernel(numeric).W(x, y), rtol=1e-8, atol=1e-10)


def test_ou_constant_and_density(ou):
    pair = closed_form_eigenpair(ou, 0.5)
    assert pair.c_q == pytest.approx(2.0, rel=1e-14)
    np.testing.assert_allclose(pair.s_prime(GRID), np.exp(GRID ** 2), rtol=1e-15)


@pytest.mark.parametrize("family, params, q", [("ou", (1.0,), 0.5), ("ou", (2.5,), 0.2), ("shiryaev", (1.0, 0.5), 0.5), ("shiryaev", (0.4, 1.5), 2.0)])
def test_closed_form_pair_shape(family, params, q):
    pair = closed_form_eigenpair(sk.make_diffusion(family, params), q)
    xs = np.linspace(-2.0, 3.0, 21)
    p, m, dp, dm = pair.evaluate(xs)
    assert np.all(p > 0) and np.all(m > 0) and np.all(dp > 0) and np.all(dm < 0)
    w = pair.wronskian_over_scale(xs)
    assert np.max(np.abs(w / pair.c_q - 1)) < 1e-8
    assert pair.c_q > 0


@pytest.mark.parametrize("family, params", [("ou", (1.0,)), ("shiryaev", (1.0, 0.5))])
def test_closed_form_ode_residual(family, params):
    # phi'' by finite differences of phi', compared with the equation itself
    spec = sk.make_diffusion(family, params)
    q = 0.5
    pair = closed_form_eigenpair(spec, q)
    xs = np.linspace(-1.5, 2.5, 50)
    h = 1e-3
    for idx_v, idx_d in ((0, 2), (1, 3)):
        d = lambda t: pair.evaluate(t)[idx_d]  # noqa: E731
        d2 = (-d(xs + 2 * h) + 8 * d(xs + h) - 8 * d(xs - h) + d(xs - 2 * h)) / (12 * h)
        phi, dphi = pair.evaluate(xs)[idx_v], pair.evaluate(xs)[idx_d]
        res = 0.5 * d2 + spec.drift(xs) * dphi - q * phi
        assert np.max(np.abs(res) / (q * np.abs(phi))) < 1e-7


def test_closed_form_rejects_custom():
    spec = sk.make_diffusion("custom", (lambda x: -x, lambda x: 1.0))
    with pytest.raises(UnsupportedFamily):
        closed_form_eigenpair(spec, 0.5)


# left of about -2 the log-Shiryaev scale density explodes (s' ~ exp(2 e^{-x}))
# and any IVP basis loses digits to cancellation there
@pytest.mark.parametrize("family, params, lo", [("bm", (0.0, 1.0), -3.0), ("ou", (1.0,), -3.0), ("shiryaev", (1.0, 0.5), -2.0)])
def test_numeric_wronskian_constancy(family, params, lo):
    pair = numeric_eigenpair(sk.make_diffusion(family, params), 0.5)
    xs = np.linspace(lo, 3.0, 41)
    assert np.max(np.abs(pair.wronskian_over_scale(xs) - pair.c_q)) / pair.c_q < 1e-8
    assert pair.backend is Backend.ODE_IVP


def test_scale_density_values(bm, ou, shiryaev):
    assert scale_density(bm, 2.0) == 1.0
    assert scale_density(ou, 1.5) == pytest.approx(math.exp(2.25))
    for spec in (bm, ou, shiryaev):
        assert scale_density(spec, 0.0) == 1.0


def test_custom_scale_density_by_quadrature():
    spec = sk.make_diffusion("custom", (lambda x: -2.0 * x, lambda x: 1.0))
    assert scale_density(spec, 1.2) == pytest.approx(math.exp(2.0 * 1.44), rel=1e-9)
    assert scale_density(spec, 0.0) == 1.0


def test_numeric_rejects_degenerate_volatility():
    spec = sk.make_diffusion("custom", (lambda x: 0.0, lambda x: x - 1.0))
    with pytest.raises(AssumptionViolation):
        numeric_eigenpair(spec, 0.5, OdeConfig(x_min=-2.0, x_max=2.0))


def test_rotated_basis_gives_same_W(ou):
    base = sk.ScaleKernel(numeric_eigenpair(ou, 0.5))
    rot = sk.ScaleKernel(numeric_eigenpair(ou, 0.5, OdeConfig(initial=((0.3, 2.0), (1.5, -0.4)))))
    x, y = np.meshgrid(np.linspace(-2, 2, 9), np.linspace(-2, 2, 9))
    mask = np.abs(x - y) > 1e-3
    wb, wr = base.W(x, y)[mask], rot.W(x, y)[mask]
    assert np.max(np.abs(wr / wb - 1)) < 1e-9
