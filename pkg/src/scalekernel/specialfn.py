"""Real-argument special functions for the closed-form eigenfunctions.

Parabolic cylinder and Hermite functions of negative order come from their
Laplace-type integral representation; Tricomi's ``U`` from its integral
representation; Kummer's ``M`` from the power series.  Integrals are done by
QUADPACK (``scipy.integrate.quad``): the algebraic endpoint singularity at
``s = 0`` goes through the ``alg`` weight (QAWS), the rest through adaptive
Gauss-Kronrod on a finite piece plus the infinite tail (QAGI).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import DomainError, OrderDomainError, ParameterPole, QuadratureNonConvergence

_SQRT2 = math.sqrt(2.0)
_MAX_SERIES_TERMS = 100_000


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadratureConfig()


def gamma(x: float) -> float:
    """Gamma function for real arguments (poles raise :class:`ParameterPole`)."""
    if x <= 0 and float(x).is_integer():
        raise ParameterPole(f"Gamma has a pole at {x}")
    return math.gamma(x)


def _quad(f, lo, hi, cfg: QuadratureConfig, **kw) -> float:
    out = integrate.quad(
        f, lo, hi, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions,
        full_output=1, **kw,
    )
    if len(out) == 4 and out[2].get("ier", 0) not in (0,):
        raise QuadratureNonConvergence(f"quad on [{lo}, {hi}] failed: {out[3].splitlines()[0]}")
    val, err = out[0], out[1]
    if not math.isfinite(val):
        raise QuadratureNonConvergence(f"quad on [{lo}, {hi}] produced {val}")
    return val


def _split_integral(alpha: float, log_tail, peak: float, cfg: QuadratureConfig) -> float:
    """``int_0^inf s**(alpha-1) * exp(log_tail(s)) ds`` for smooth ``log_tail``.

    ``peak`` is a rough location of the bulk, used to place break points.
    """
    head = _quad(lambda s: math.exp(log_tail(s)), 0.0, 1.0, cfg, weight="alg", wvar=(alpha - 1.0, 0.0))
    mid_hi = max(2.0, peak + 12.0)
    g = lambda s: math.exp((alpha - 1.0) * math.log(s) + log_tail(s))  # noqa: E731
    pts = [peak] if 1.0 < peak < mid_hi else None
    mid = _quad(g, 1.0, mid_hi, cfg, points=pts)
    tail = _quad(g, mid_hi, np.inf, cfg)
    return head + mid + tail


@lru_cache(maxsize=65536)
def _hermite_parts(v: float, y: float, cfg: QuadratureConfig) -> tuple[float, float]:
    """Return ``(m, L)`` with ``H_v(y) = m * exp(L)``."""
    if not v < 0:
        raise OrderDomainError(f"integral representation needs v < 0, got v={v}")
    alpha = -v
    if y < 0:
        # exponent -s^2 - 2 s y = -(s + y)^2 + y^2, factor the y^2 out
        shift = y * y
        peak = -y
        log_tail = lambda s: -(s + y) * (s + y)  # noqa: E731
    else:
        shift = 0.0
        peak = 0.0
        log_tail = lambda s: -s * (s + 2.0 * y)  # noqa: E731
    integral = _split_integral(alpha, log_tail, peak, cfg)
    # 1/Gamma(alpha) through lgamma keeps large orders finite
    return integral, shift - math.lgamma(alpha)


def hermite_H(v: float, x: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Hermite function of negative real order.

    ``H_v(x) = exp(x^2) / Gamma(-v) * int_0^inf s^(-v-1) exp(-(s+x)^2) ds``.
    """
    m, L = _hermite_parts(float(v), float(x), cfg)
    return m * math.exp(L)


def _pcf_parts(v: float, x: float, cfg: QuadratureConfig) -> tuple[float, float]:
    """``(m, L)`` with ``D_v(x) = m * exp(L)``."""
    m, L = _hermite_parts(v, x / _SQRT2, cfg)
    return m, L - 0.5 * v * math.log(2.0) - 0.25 * x * x


def parabolic_D(v: float, x: float, cfg: QuadratureConfig = DEFAULT_QUAD, derivative: bool = False) -> float:
    """Parabolic cylinder function ``D_v(x) = 2^(-v/2) e^(-x^2/4) H_v(x/sqrt 2)``, ``v < 0``.

    With ``derivative=True`` returns ``D_v'(x) = v D_{v-1}(x) - (x/2) D_v(x)``.
    """
    v, x = float(v), float(x)
    m, L = _pcf_parts(v, x, cfg)
    if not derivative:
        return m * math.exp(L)
    m1, L1 = _pcf_parts(v - 1.0, x, cfg)
    return v * m1 * math.exp(L1) - 0.5 * x * m * math.exp(L)


def scaled_parabolic_D(v: float, x: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``exp(x^2/4) * D_v(x)``, finite well beyond where ``D_v`` alone overflows."""
    m, L = _pcf_parts(float(v), float(x), cfg)
    return m * math.exp(L + 0.25 * x * x)


def _kummer_series(a: float, b: float, z: float) -> float:
    total = 1.0
    term = 1.0
    n = 0
    while n < _MAX_SERIES_TERMS:
        term *= (a + n) * z / ((b + n) * (n + 1))
        n += 1
        new = total + term
        # stop once past the largest term and the sum has stagnated
        if new == total and abs(term) <= abs(total) * 1e-17 and n > abs(z):
            return new
        total = new
        if term == 0.0:
            return total
    raise QuadratureNonConvergence(f"Kummer series did not converge for a={a}, b={b}, z={z}")


def kummer_M(a: float, b: float, z: float) -> float:
    """Confluent hypergeometric function of the first kind, ``1F1(a; b; z)``.

    Summed as a power series; negative ``z`` goes through Kummer's
    transformation ``M(a,b,z) = e^z M(b-a,b,-z)`` so that the series never
    alternates.
    """
    a, b, z = float(a), float(b), float(z)
    if b <= 0 and b.is_integer():
        raise ParameterPole(f"M(a, b, z) has a pole at b={b}")
    if z < 0:
        return math.exp(z) * _kummer_series(b - a, b, -z)
    return _kummer_series(a, b, z)


def kummer_M_prime(a: float, b: float, z: float) -> float:
    """``dM/dz = (a/b) M(a+1, b+1, z)``."""
    return a / b * kummer_M(a + 1.0, b + 1.0, z)


@lru_cache(maxsize=65536)
def _tricomi_cached(a: float, b: float, z: float, cfg: QuadratureConfig) -> float:
    c = b - a - 1.0
    if z >= 1.0:
        # int e^-s s^(a-1) (1 + s/z)^c ds
        log_tail = lambda s: -s + c * math.log1p(s / z)  # noqa: E731
        prefactor = -a * math.log(z)
    else:
        # (1 + s/z)^c = z^-c (z + s)^c avoids huge intermediate powers for small z
        log_tail = lambda s: -s + c * math.log(z + s)  # noqa: E731
        prefactor = -(a + c) * math.log(z)
    peak = max(0.0, a - 1.0 + max(c, 0.0))
    integral = _split_integral(a, log_tail, peak, cfg)
    return integral * math.exp(prefactor - math.lgamma(a))


def tricomi_U(a: float, b: float, z: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Confluent hypergeometric function of the second kind for ``a > 0``, ``z > 0``.

    ``U(a,b,z) = 1/Gamma(a) int_0^inf e^(-z t) t^(a-1) (1+t)^(b-a-1) dt``.
    """
    a, b, z = float(a), float(b), float(z)
    if not a > 0:
        raise DomainError(f"integral representation of U needs a > 0, got a={a}")
    if not z > 0:
        raise DomainError(f"integral representation of U needs z > 0, got z={z}")
    return _tricomi_cached(a, b, z, cfg)


def tricomi_U_prime(a: float, b: float, z: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``dU/dz = -a U(a+1, b+1, z)``."""
    return -a * tricomi_U(a + 1.0, b + 1.0, z, cfg)
