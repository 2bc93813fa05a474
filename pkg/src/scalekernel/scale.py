"""Bivariate q-scale function and its partial derivatives.

``W(x, y) = [phi+(x) phi-(y) - phi-(x) phi+(y)] / c_q``.  Superscripts name
the differentiated arguments: ``W1 = dW/dx``, ``W12 = d2W/dxdy``,
``W122 = d3W/dxdy2`` and ``W112 = d3W/dx2dy``.  Second derivatives of the
eigenfunctions never get computed numerically: both solve the
Sturm-Liouville equation, so ``phi'' = (2 q phi - 2 mu phi') / sigma^2``
reduces every higher derivative to ``W``, ``W1``, ``W12`` and coefficients.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .eigen import EigenPair
from .errors import IntegrationFailure, InvalidParameter, OrderingError

#: Relative error budget of the product form before switching to the ODE row.
CANCELLATION_LIMIT = 1e-6
_EPS = np.finfo(float).eps


class Order(str, enum.Enum):
    W = "W"
    W1 = "W1"
    W12 = "W12"
    W122 = "W122"
    W112 = "W112"
    W11 = "W11"


class DerivMode(str, enum.Enum):
    REDUCTION = "reduction"
    DIRECT_ODE = "direct_ode"


@dataclass(frozen=True)
class ExitFunctionals:
    """Discounted two-sided exit transforms from ``y`` out of ``(x, z)``."""

    up: float
    down: float


@dataclass(frozen=True)
class ScaleKernel:
    pair: EigenPair
    deriv_mode: DerivMode = DerivMode.REDUCTION
    ode_rtol: float = 1e-12
    ode_atol: float = 1e-14

    @property
    def q(self) -> float:
        return self.pair.q

    @property
    def spec(self):
        return self.pair.spec

    def _coef(self, x):
        mu = np.asarray(self.spec.drift(x), dtype=float)
        sig = np.asarray(self.spec.volatility(x), dtype=float)
        return mu, sig * sig

    def _parts(self, x, y):
        px, mx, dpx, dmx = self.pair.evaluate(x)
        py, my, dpy, dmy = self.pair.evaluate(y)
        return (px, mx, dpx, dmx), (py, my, dpy, dmy)

    def W(self, x, y):
        (px, mx, _, _), (py, my, _, _) = self._parts(x, y)
        return _scalar((px * my - mx * py) / self.pair.c_q)

    def W1(self, u, z):
        (_, _, dpu, dmu), (pz, mz, _, _) = self._parts(u, z)
        return _scalar((dpu * mz - dmu * pz) / self.pair.c_q)

    def W12(self, u, z):
        (_, _, dpu, dmu), (_, _, dpz, dmz) = self._parts(u, z)
        return _scalar((dpu * dmz - dmu * dpz) / self.pair.c_q)

    def W11(self, u, z):
        mu, s2 = self._coef(u)
        return _scalar(2.0 * self.q / s2 * self.W(u, z) - 2.0 * mu / s2 * self.W1(u, z))

    def W122(self, u, z):
        mu, s2 = self._coef(z)
        return _scalar(2.0 * self.q / s2 * self.W1(u, z) - 2.0 * mu / s2 * self.W12(u, z))

    def W112(self, u, z):
        mu, s2 = self._coef(u)
        return _scalar(-2.0 * self.q / s2 * self.W1(z, u) - 2.0 * mu / s2 * self.W12(u, z))

    def cancellation(self, x, y, order: Order = Order.W) -> np.ndarray:
        """Estimated relative error of the product form at ``(x, y)``."""
        (px, mx, dpx, dmx), (py, my, _, _) = self._parts(x, y)
        if Order(order) is Order.W1:
            px, mx = dpx, dmx
        a, b = px * my, mx * py
        with np.errstate(divide="ignore", invalid="ignore"):
            return (np.abs(a) + np.abs(b)) * _EPS / np.abs(a - b)


def _scalar(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


def eval_W(kernel: ScaleKernel, x, y, order: Order | str = Order.W):
    """Evaluate ``W`` or one of its partial derivatives (broadcasting over x, y)."""
    order = Order(order)
    fn = getattr(kernel, order.value)
    out = fn(x, y)
    if kernel.deriv_mode is DerivMode.DIRECT_ODE and order in (Order.W, Order.W1):
        xb, yb = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        est = np.atleast_1d(kernel.cancellation(xb, yb, order))
        bad = np.flatnonzero(~(est <= CANCELLATION_LIMIT) & (xb.ravel() != yb.ravel()))
        if bad.size:
            out = np.array(out, dtype=float, copy=True).reshape(-1)
            xf, yf = xb.ravel(), yb.ravel()
            for i in bad:
                out[i] = stabilized_W_row(kernel, xf[i], [yf[i]], order)[0]
            out = _scalar(out.reshape(xb.shape))
    return out


def stabilized_W_row(kernel: ScaleKernel, x: float, y_targets, order: Order | str = Order.W) -> np.ndarray:
    """``y -> W(x, y)`` (or ``W1(x, y)``) by integrating the ODE in ``y`` from ``y = x``.

    Uses the diagonal data ``W(x,x) = 0``, ``d/dy W(x,y)|_{y=x} = -s'(x)``, or
    ``W1(x,x) = s'(x)``, ``W12(x,x) = 0``.  No difference of large products is
    ever formed, so widely separated arguments keep full relative accuracy.
    """
    order = Order(order)
    if order not in (Order.W, Order.W1):
        raise InvalidParameter("stabilized rows support orders W and W1 only")
    ys = np.asarray(y_targets, dtype=float)
    if ys.ndim != 1:
        raise InvalidParameter("y_targets must be one-dimensional")
    x = float(x)
    sp = float(kernel.pair.s_prime(x))
    start = [0.0, -sp] if order is Order.W else [sp, 0.0]
    spec, q = kernel.spec, kernel.q

    def rhs(t, w):
        mu = float(spec.drift(t))
        sig = float(spec.volatility(t))
        return [w[1], 2.0 / (sig * sig) * (q * w[0] - mu * w[1])]

    out = np.empty_like(ys)
    at_x = ys == x
    out[at_x] = start[0]
    for mask, end in ((ys > x, np.max(ys, initial=x)), (ys < x, np.min(ys, initial=x))):
        if not mask.any():
            continue
        targets = ys[mask]
        order_idx = np.argsort(targets) if end > x else np.argsort(-targets)
        res = integrate.solve_ivp(
            rhs, (x, end), start, method="DOP853", t_eval=targets[order_idx],
            rtol=kernel.ode_rtol, atol=kernel.ode_atol,
        )
        if not res.success:
            raise IntegrationFailure(f"stabilized row from {x} to {end} failed: {res.message}")
        vals = np.empty(targets.size)
        vals[order_idx] = res.y[0]
        out[mask] = vals
    return out


def exit_functionals(kernel: ScaleKernel, x: float, y: float, z: float) -> ExitFunctionals:
    """``E_y[e^{-q tau_z}; tau_z < tau_x]`` and ``E_y[e^{-q tau_x}; tau_x < tau_z]``."""
    if not (x < y < z):
        raise OrderingError(f"need x < y < z, got ({x}, {y}, {z})")
    w_zx = eval_W(kernel, z, x)
    up = eval_W(kernel, y, x) / w_zx
    down = eval_W(kernel, z, y) / w_zx
    return ExitFunctionals(float(up), float(down))
