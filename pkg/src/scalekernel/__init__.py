"""Bivariate q-scale functions of one-dimensional diffusions and the double
barrier dividend / capital-injection strategy built on them.

Modules
-------
model      diffusion coefficients and assumption checks
specialfn  gamma, Hermite, parabolic cylinder and confluent hypergeometric functions
eigen      fundamental solutions of the Sturm-Liouville equation
scale      ``W(x, y)`` and its partial derivatives, exit functionals
valuation  value of the double barrier strategy and its optimal barrier
mc         Monte Carlo oracle for the above
cli        command-line front-end
"""
from .eigen import Backend, EigenPair, OdeConfig, closed_form_eigenpair, eigenpair, numeric_eigenpair, scale_density
from .errors import ScaleKernelError
from .model import DiffusionSpec, Family, make_diffusion, validate
from .scale import DerivMode, ExitFunctionals, Order, ScaleKernel, eval_W, exit_functionals, stabilized_W_row
from .valuation import (
    BarrierProblem,
    BarrierSearchConfig,
    optimal_barrier,
    smooth_fit_diagnostics,
    value_curve,
    value_function,
    value_slope_in_barrier,
    varsigma,
)

__version__ = "0.1.0"


def kernel_for(spec: DiffusionSpec, q: float, backend=None, deriv_mode=DerivMode.REDUCTION, **kw) -> ScaleKernel:
    """Shortcut: eigenpair for ``(spec, q)`` wrapped in a :class:`ScaleKernel`."""
    return ScaleKernel(eigenpair(spec, q, backend, **kw), DerivMode(deriv_mode))


__all__ = [
    "Backend", "BarrierProblem", "BarrierSearchConfig", "DerivMode", "DiffusionSpec", "EigenPair",
    "ExitFunctionals", "Family", "OdeConfig", "Order", "ScaleKernel", "ScaleKernelError",
    "closed_form_eigenpair", "eigenpair", "eval_W", "exit_functionals", "kernel_for", "make_diffusion",
    "numeric_eigenpair", "optimal_barrier", "scale_density", "smooth_fit_diagnostics",
    "stabilized_W_row", "validate", "value_curve", "value_function", "value_slope_in_barrier", "varsigma",
]
