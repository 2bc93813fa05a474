"""Expected NPV of the double barrier strategy and the optimal upper barrier.

The strategy pays every unit of surplus above ``a`` as dividends and injects
capital, at unit cost ``kappa > 1``, to keep the surplus at or above 0.
Inside the band its value is

    V(x) = [W1(0, x) - kappa W1(a, x)] / W12(0, a),    0 <= x <= a,

extended linearly with slope ``kappa`` below 0 and slope 1 above ``a``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateKernel, DomainError, InvalidParameter, NoBracket
from .scale import ScaleKernel

_TINY = 1e-300


@dataclass(frozen=True)
class BarrierProblem:
    kernel: ScaleKernel
    a: float
    kappa: float

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidParameter(f"upper barrier must be positive, got a={self.a}")
        if not self.kappa > 1:
            raise InvalidParameter(f"injection cost must exceed 1, got kappa={self.kappa}")

    @property
    def q(self) -> float:
        return self.kernel.q


@dataclass(frozen=True)
class BarrierSearchConfig:
    a_max: float = 50.0
    grid_growth: float = 1.5
    root_tol: float = 1e-10
    max_iters: int = 200
    a_start: float = 1e-3

    def __post_init__(self):
        if not (self.a_max > 0 and self.grid_growth > 1 and self.root_tol > 0):
            raise InvalidParameter("need a_max > 0, grid_growth > 1, root_tol > 0")


def _denominator(kernel: ScaleKernel, a: float) -> float:
    d = float(kernel.W12(0.0, a))
    if not d > _TINY:
        raise DegenerateKernel(f"W12(0, {a}) = {d!r} is not positive; eigenfunction backend failed")
    return d


def boundary_values(prob: BarrierProblem) -> tuple[float, float]:
    """``(V(0), V(a))``."""
    k, a, kap = prob.kernel, prob.a, prob.kappa
    d = _denominator(k, a)
    v0 = (float(k.W1(0.0, 0.0)) - kap * float(k.W1(a, 0.0))) / d
    va = (float(k.W1(0.0, a)) - kap * float(k.W1(a, a))) / d
    return v0, va


def value_function(prob: BarrierProblem, x):
    """Expected NPV of the double barrier strategy started at surplus ``x``."""
    k, a, kap = prob.kernel, prob.a, prob.kappa
    xa = np.asarray(x, dtype=float)
    d = _denominator(k, a)
    inside = np.clip(xa, 0.0, a)
    band = (np.asarray(k.W1(0.0, inside)) - kap * np.asarray(k.W1(a, inside))) / d
    out = np.where(xa < 0.0, band + kap * xa, np.where(xa > a, band + (xa - a), band))
    return float(out) if out.ndim == 0 else out


def varsigma(kernel: ScaleKernel, kappa: float, a):
    """``W122(0, a) + kappa W112(a, a)``; its sign is minus the sign of dV/da.

    Written through the reduction identities as
    ``(2q/sigma^2)[W1(0,a) - kappa s'(a)] - (2 mu(a)/sigma^2) W12(0,a)``.
    """
    a = np.asarray(a, dtype=float)
    mu = np.asarray(kernel.spec.drift(a), dtype=float)
    sig = np.asarray(kernel.spec.volatility(a), dtype=float)
    s2 = sig * sig
    out = 2.0 * kernel.q / s2 * (np.asarray(kernel.W1(0.0, a)) - kappa * np.asarray(kernel.pair.s_prime(a)))
    out = out - 2.0 * mu / s2 * np.asarray(kernel.W12(0.0, a))
    return float(out) if out.ndim == 0 else out


def varsigma_at_zero(kernel: ScaleKernel, kappa: float) -> float:
    """Limit of ``varsigma`` as ``a -> 0+``: ``-(kappa - 1) (2q/sigma(0)^2) s'(0)``."""
    sig = float(kernel.spec.volatility(0.0))
    return -(kappa - 1.0) * 2.0 * kernel.q / (sig * sig) * float(kernel.pair.s_prime(0.0))


def value_slope_in_barrier(prob: BarrierProblem, x):
    """``d/da V^a(x)``; for ``x > a`` equal to the value at ``x = a``."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("barrier sensitivity is defined for x >= 0")
    k, a = prob.kernel, prob.a
    d = _denominator(k, a)
    factor = -varsigma(k, prob.kappa, a) / (d * d)
    out = np.asarray(k.W1(0.0, np.minimum(xa, a))) * factor
    return float(out) if out.ndim == 0 else out


def smooth_fit_diagnostics(prob: BarrierProblem) -> tuple[float, float]:
    """One-sided slopes ``(V'(0+), V'(a-))`` of the in-band formula.

    In-band ``V'(x) = [W12(0, x) - kappa W12(a, x)] / W12(0, a)``.
    """
    k, a, kap = prob.kernel, prob.a, prob.kappa
    d = _denominator(k, a)
    slope0 = (float(k.W12(0.0, 0.0)) - kap * float(k.W12(a, 0.0))) / d
    slope_a = (float(k.W12(0.0, a)) - kap * float(k.W12(a, a))) / d
    return slope0, slope_a


def optimal_barrier(kernel: ScaleKernel, kappa: float, cfg: BarrierSearchConfig = BarrierSearchConfig()) -> float:
    """First zero of ``varsigma`` where it turns positive.

    A geometric grid from ``cfg.a_start`` brackets the sign change, then
    bisection narrows it to ``cfg.root_tol``.
    """
    if not kappa > 1:
        raise InvalidParameter(f"injection cost must exceed 1, got kappa={kappa}")
    lo, f_lo = 0.0, varsigma_at_zero(kernel, kappa)
    a = cfg.a_start
    hi = None
    for _ in range(cfg.max_iters):
        f = varsigma(kernel, kappa, a)
        if f > 0:
            hi = a
            break
        lo, f_lo = a, f
        if a >= cfg.a_max:
            break
        a = min(a * cfg.grid_growth, cfg.a_max)
    if hi is None:
        raise NoBracket(
            f"varsigma stays non-positive up to a={lo:g} (last value {f_lo:.6g}); "
            "raise a_max or check the model satisfies mu <= 0, mu' < q",
            lo, f_lo,
        )
    for _ in range(cfg.max_iters):
        if hi - lo <= cfg.root_tol:
            break
        mid = 0.5 * (lo + hi)
        if varsigma(kernel, kappa, mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def value_curve(prob: BarrierProblem, n: int = 101, pad: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """``(x, V(x))`` on an even grid spanning ``[-pad, a + pad]``."""
    xs = np.linspace(-pad, prob.a + pad, n)
    return xs, np.asarray(value_function(prob, xs))

