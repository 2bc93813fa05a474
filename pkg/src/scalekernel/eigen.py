"""Fundamental solutions of ``(G - q) f = 0`` and the scale density.

Two backends produce an :class:`EigenPair`:

* ``closed_form_eigenpair`` -- analytic pairs for Brownian motion with drift,
  Ornstein-Uhlenbeck and the log-Shiryaev diffusion;
* ``numeric_eigenpair`` -- any two independent solutions integrated from a
  base point.  They are not the monotone canonical pair, but every scale
  function value built from them is the same because numerator and
  Wronskian constant pick up the same determinant under a change of basis.

The scale density is anchored at 0: ``s'(x) = exp(-int_0^x 2 mu / sigma^2)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from . import specialfn as sf
from .errors import AssumptionViolation, DomainError, IntegrationFailure, InvalidParameter, QuadratureNonConvergence, UnsupportedFamily
from .model import DiffusionSpec, Family


class Backend(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    ODE_IVP = "ode_ivp"


@dataclass(frozen=True)
class OdeConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_step: float = np.inf
    base_point: float = 0.0
    # None: family default, see default_span
    x_min: float | None = None
    x_max: float | None = None
    # initial (value, slope) of the increasing-slot and decreasing-slot solutions
    initial: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 1.0), (1.0, 0.0))

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InvalidParameter("ODE tolerances must be positive")
        lo = -np.inf if self.x_min is None else self.x_min
        hi = np.inf if self.x_max is None else self.x_max
        if not lo <= self.base_point <= hi:
            raise InvalidParameter("base_point must lie in [x_min, x_max]")


def default_span(spec: DiffusionSpec) -> tuple[float, float]:
    """Integration span used when :class:`OdeConfig` leaves it open.

    To the left the log-Shiryaev solutions grow like ``exp((nu/l) e^(-2 l x))``;
    the span stops where that exponent reaches 200.
    """
    if spec.family is Family.SHIRYAEV_LOG:
        nu, ell = spec.params
        return max(-10.0, -math.log(200.0 * ell / nu) / (2.0 * ell)), 10.0
    return -10.0, 10.0


Quad4 = tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True)
class EigenPair:
    """Two solutions of the Sturm-Liouville equation with their Wronskian constant.

    ``evaluate(x)`` returns ``(phi_plus, phi_minus, phi_plus', phi_minus')``.
    For the closed-form backend these are the canonical increasing and
    decreasing positive solutions; for the ODE backend any independent pair
    with ``c_q > 0``.
    """

    spec: DiffusionSpec
    q: float
    c_q: float
    backend: Backend
    _eval: Callable[[np.ndarray], Quad4] = field(repr=False, compare=False)
    _s_prime: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)

    def evaluate(self, x) -> Quad4:
        x = np.asarray(x, dtype=float)
        out = self._eval(x)
        return tuple(np.asarray(o, dtype=float) for o in out)  # type: ignore[return-value]

    __call__ = evaluate

    def s_prime(self, x):
        out = np.asarray(self._s_prime(np.asarray(x, dtype=float)), dtype=float)
        return out if out.ndim else float(out)

    def wronskian_over_scale(self, x) -> np.ndarray:
        """``[phi+' phi- - phi-' phi+] / s'``; constant (= ``c_q``) in exact arithmetic."""
        p, m, dp, dm = self.evaluate(x)
        return (dp * m - dm * p) / self.s_prime(x)


def scale_density(spec: DiffusionSpec, x):
    """``s'(x) = exp(-int_0^x 2 mu(u) / sigma(u)^2 du)``."""
    xa = np.asarray(x, dtype=float)
    fam, p = spec.family, spec.params
    if fam is Family.BROWNIAN_DRIFT:
        out = np.exp(-2.0 * p[0] * xa / p[1] ** 2)
    elif fam is Family.ORNSTEIN_UHLENBECK:
        out = np.exp(p[0] * xa * xa)
    elif fam is Family.SHIRYAEV_LOG:
        nu, ell = p
        out = np.exp(2.0 * nu * xa + nu / ell * np.expm1(-2.0 * ell * xa))
    else:
        out = np.vectorize(lambda t: math.exp(-_custom_log_scale_integral(spec, t)))(xa)
    return out if out.ndim else float(out)


def _custom_log_scale_integral(spec: DiffusionSpec, x: float) -> float:
    if x == 0.0:
        return 0.0

    def f(u):
        sig = float(spec.volatility(u))
        return 2.0 * float(spec.drift(u)) / (sig * sig)

    out = integrate.quad(f, 0.0, x, epsabs=1e-12, epsrel=1e-10, limit=200, full_output=1)
    if len(out) == 4:
        raise QuadratureNonConvergence(f"scale density integral to x={x} failed: {out[3].splitlines()[0]}")
    return out[0]


# ---------------------------------------------------------------- closed form


def closed_form_eigenpair(
    spec: DiffusionSpec, q: float, quad: sf.QuadratureConfig = sf.DEFAULT_QUAD
) -> EigenPair:
    if not q > 0:
        raise InvalidParameter(f"q must be positive, got {q}")
    q = float(q)
    fam = spec.family
    if fam is Family.BROWNIAN_DRIFT:
        return _bm_pair(spec, q)
    if fam is Family.ORNSTEIN_UHLENBECK:
        return _ou_pair(spec, q, quad)
    if fam is Family.SHIRYAEV_LOG:
        return _shiryaev_pair(spec, q, quad)
    raise UnsupportedFamily(f"no closed-form eigenfunctions for family {fam.value}")


def _bm_pair(spec: DiffusionSpec, q: float) -> EigenPair:
    mu, sigma = spec.params
    s2 = sigma * sigma
    disc = math.sqrt(mu * mu + 2.0 * q * s2)
    r_up = (-mu + disc) / s2
    r_dn = (-mu - disc) / s2

    def ev(x):
        ep, em = np.exp(r_up * x), np.exp(r_dn * x)
        return ep, em, r_up * ep, r_dn * em

    return EigenPair(spec, q, r_up - r_dn, Backend.CLOSED_FORM, ev, lambda x: scale_density(spec, x))


def _ou_pair(spec: DiffusionSpec, q: float, quad: sf.QuadratureConfig) -> EigenPair:
    (theta,) = spec.params
    v = -q / theta
    k = math.sqrt(2.0 * theta)

    # exp(theta x^2 / 2) D_v(-+ k x) == exp(z^2/4) D_v(z) with z = -+ k x
    def point(x):
        s = sf.scaled_parabolic_D
        return (
            s(v, -k * x, quad),
            s(v, k * x, quad),
            -k * v * s(v - 1.0, -k * x, quad),
            k * v * s(v - 1.0, k * x, quad),
        )

    vec = np.vectorize(point, otypes=[float] * 4)
    c_q = 2.0 * math.sqrt(theta * math.pi) / sf.gamma(q / theta)
    return EigenPair(spec, q, c_q, Backend.CLOSED_FORM, vec, lambda x: scale_density(spec, x))


def _shiryaev_pair(spec: DiffusionSpec, q: float, quad: sf.QuadratureConfig) -> EigenPair:
    nu, ell = spec.params
    r = math.sqrt(nu * nu + 2.0 * q)
    a = (r - nu) / (2.0 * ell)
    b = (r + ell) / ell
    lam = nu - r

    # U gives the increasing solution and M the decreasing one: M(., ., z)
    # blows up as x -> -inf (z -> inf) while U stays bounded there.
    def point(x):
        z = nu / ell * math.exp(-2.0 * ell * x)
        e = math.exp(lam * x)
        u = sf.tricomi_U(a, b, z, quad)
        du = -a * sf.tricomi_U(a + 1.0, b + 1.0, z, quad)
        m = sf.kummer_M(a, b, z)
        dm = a / b * sf.kummer_M(a + 1.0, b + 1.0, z)
        dz = -2.0 * ell * z
        return e * u, e * m, e * (lam * u + dz * du), e * (lam * m + dz * dm)

    vec = np.vectorize(point, otypes=[float] * 4)
    p, m, dp, dm = point(0.0)
    c_q = (dp * m - dm * p) / float(scale_density(spec, 0.0))
    return EigenPair(spec, q, c_q, Backend.CLOSED_FORM, vec, lambda x: scale_density(spec, x))


# ---------------------------------------------------------------- ODE backend


def numeric_eigenpair(spec: DiffusionSpec, q: float, cfg: OdeConfig = OdeConfig()) -> EigenPair:
    """Integrate two independent solutions from ``cfg.base_point`` over ``[x_min, x_max]``."""
    if not q > 0:
        raise InvalidParameter(f"q must be positive, got {q}")
    q = float(q)
    (p0, dp0), (m0, dm0) = cfg.initial
    x0 = cfg.base_point
    s0 = float(scale_density(spec, x0))
    c_q = (dp0 * m0 - dm0 * p0) / s0
    if not c_q > 0:
        raise InvalidParameter("initial data must form a positively oriented basis")

    def rhs(x, y):
        mu = float(spec.drift(x))
        sig = float(spec.volatility(x))
        if not sig > 0:
            raise AssumptionViolation(f"sigma({x}) = {sig} is not positive")
        inv = 2.0 / (sig * sig)
        return [
            y[1], inv * (q * y[0] - mu * y[1]),
            y[3], inv * (q * y[2] - mu * y[3]),
            -inv * mu,
        ]

    d_lo, d_hi = default_span(spec)
    lo = d_lo if cfg.x_min is None else cfg.x_min
    hi = d_hi if cfg.x_max is None else cfg.x_max
    if not lo <= x0 <= hi:
        raise InvalidParameter(f"base point {x0} outside the span [{lo}, {hi}]")
    y0 = [p0, dp0, m0, dm0, math.log(s0)]
    sols = {}
    for side, end in (("up", hi), ("down", lo)):
        if end == x0:
            continue
        res = integrate.solve_ivp(
            rhs, (x0, end), y0, method="DOP853", dense_output=True,
            rtol=cfg.rel_tol, atol=cfg.abs_tol, max_step=cfg.max_step,
        )
        if not res.success:
            raise IntegrationFailure(f"eigenfunction integration towards {end} failed: {res.message}")
        sols[side] = res.sol

    base = np.array(y0, dtype=float)

    def states(x):
        x = np.asarray(x, dtype=float)
        if np.any((x < lo) | (x > hi)):
            raise DomainError(f"x outside the integration span [{lo}, {hi}]")
        flat = x.ravel()
        out = np.empty((5, flat.size))
        up = flat > x0
        dn = flat < x0
        out[:, ~(up | dn)] = base[:, None]
        if up.any():
            out[:, up] = sols["up"](flat[up])
        if dn.any():
            out[:, dn] = sols["down"](flat[dn])
        return out.reshape((5,) + x.shape)

    def ev(x):
        st = states(x)
        return st[0], st[2], st[1], st[3]

    if spec.family is Family.CUSTOM:
        s_prime = lambda x: np.exp(states(x)[4])  # noqa: E731
    else:
        s_prime = lambda x: scale_density(spec, x)  # noqa: E731
    return EigenPair(spec, q, c_q, Backend.ODE_IVP, ev, s_prime)


def eigenpair(spec: DiffusionSpec, q: float, backend: Backend | str | None = None, **kw) -> EigenPair:
    """Closed form when available, ODE otherwise (or as requested)."""
    if backend is None:
        backend = Backend.ODE_IVP if spec.family is Family.CUSTOM else Backend.CLOSED_FORM
    backend = Backend(backend)
    if backend is Backend.CLOSED_FORM:
        return closed_form_eigenpair(spec, q, **kw)
    return numeric_eigenpair(spec, q, **kw)
