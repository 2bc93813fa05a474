import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import scalekernel as sk
from scalekernel.errors import CoefficientDomainError, InvalidParameter
from scalekernel.model import Family, coefficients


def test_ou_coefficients():
    spec = sk.make_diffusion("ou", (1.0,))
    assert spec.family is Family.ORNSTEIN_UHLENBECK
    xs = np.linspace(-3, 3, 13)
    np.testing.assert_array_equal(spec.drift(xs), -xs)
    np.testing.assert_array_equal(spec.volatility(xs), np.ones_like(xs))


def test_bm_coefficients():
    spec = sk.make_diffusion("bm", (0.0, 1.0))
    assert coefficients(spec, 4.2) == (0.0, 1.0)


def test_shiryaev_coefficients():
    spec = sk.make_diffusion("shiryaev", (1.0, 0.5))
    for x in (-2.0, 0.0, 0.7, 3.0):
        assert spec.drift(x) == pytest.approx(math.exp(-x) - 1.0, rel=1e-15, abs=1e-16)
        assert spec.volatility(x) == 1.0


@pytest.mark.parametrize(
    "spec, x, expected",
    [
        (("ou", (2.0,)), 3.0, (-6.0, 1.0)),
        (("shiryaev", (1.0, 0.5)), 0.0, (0.0, 1.0)),
        (("bm", (0.3, 2.0)), -7.0, (0.3, 2.0)),
    ],
)
def test_coefficient_examples(spec, x, expected):
    assert coefficients(sk.make_diffusion(*spec), x) == expected


@pytest.mark.parametrize(
    "family, params",
    [("ou", (0.0,)), ("ou", (-1.0,)), ("bm", (0.0, 0.0)), ("bm", (1.0, -2.0)),
     ("shiryaev", (0.0, 1.0)), ("shiryaev", (1.0, -0.5)), ("ou", (1.0, 2.0)), ("ou", (math.nan,))],
)
def test_invalid_parameters(family, params):
    with pytest.raises(InvalidParameter):
        sk.make_diffusion(family, params)


def test_unknown_family():
    with pytest.raises(InvalidParameter):
        sk.make_diffusion("gbm", (1.0,))


def test_custom_failure_is_domain_error():
    spec = sk.make_diffusion("custom", (lambda x: 0.0, lambda x: math.sqrt(x)))
    with pytest.raises(CoefficientDomainError):
        coefficients(spec, -1.0)


def test_custom_accepts_scalar_only_callables():
    spec = sk.make_diffusion("custom", (lambda x: -math.tanh(x), lambda x: 1.0 + 0.1 * math.cos(x)))
    xs = np.array([-1.0, 0.0, 2.0])
    np.testing.assert_allclose(spec.drift(xs), -np.tanh(xs))


@given(st.floats(-50, 50), st.floats(0.01, 5.0))
def test_coefficients_are_pure(x, theta):
    spec = sk.make_diffusion("ou", (theta,))
    assert coefficients(spec, x) == coefficients(spec, x)


def test_validate_ou_precondition():
    rep = sk.validate(sk.make_diffusion("ou", (1.0,)), 0.5, 0.0, 5.0, 101)
    assert rep.positivity_ok and rep.local_integrability_ok
    assert rep.p2_precondition_ok and rep.constant_volatility and rep.barrier_certified


def test_validate_positive_drift_fails_precondition():
    rep = sk.validate(sk.make_diffusion("bm", (1.0, 1.0)), 0.5, 0.0, 5.0, 101)
    assert not rep.p2_precondition_ok
    assert any("mu > 0" in m for m in rep.messages)


def test_validate_degenerate_volatility():
    spec = sk.make_diffusion("custom", (lambda x: 0.0, lambda x: x))
    rep = sk.validate(spec, 1.0, -1.0, 1.0, 21)
    assert not rep.positivity_ok
    assert not rep.ok


def test_validate_flags_nonconstant_volatility():
    spec = sk.make_diffusion("custom", (lambda x: -x, lambda x: 1.0 + 0.5 * math.sin(x) ** 2))
    rep = sk.validate(spec, 1.0, -2.0, 2.0, 21, a_max=3.0)
    assert rep.p2_precondition_ok
    assert not rep.constant_volatility and not rep.barrier_certified
    assert any("not constant" in m for m in rep.messages)


@pytest.mark.parametrize("q", [0.05, 0.5, 3.0])
@pytest.mark.parametrize("spec", [("ou", (1.0,)), ("ou", (0.2,)), ("shiryaev", (1.0, 0.5)), ("shiryaev", (0.3, 2.0))])
def test_named_families_meet_precondition(spec, q):
    rep = sk.validate(sk.make_diffusion(*spec), q, 0.0, 10.0, 201)
    assert rep.p2_precondition_ok


def test_validate_bad_arguments():
    spec = sk.make_diffusion("ou", (1.0,))
    for args in ((0.0, 0.0, 1.0, 10), (0.5, 1.0, 0.0, 10), (0.5, 0.0, 1.0, 2)):
        with pytest.raises(InvalidParameter):
            sk.validate(spec, *args)
