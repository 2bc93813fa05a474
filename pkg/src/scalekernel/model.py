"""Diffusion coefficients and checks of the standing model assumptions.

A diffusion on the whole real line is described by its drift ``mu`` and
volatility ``sigma``.  Three parametric families have closed-form
eigenfunctions elsewhere in the package; ``CUSTOM`` accepts arbitrary
callables and is handled by the ODE backend.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import CoefficientDomainError, InvalidParameter

ArrayLike = float | np.ndarray

#: Step of the central difference used for drift derivatives of custom models.
DRIFT_DIFF_STEP = 1e-5


class Family(str, enum.Enum):
    BROWNIAN_DRIFT = "brownian_drift"
    ORNSTEIN_UHLENBECK = "ornstein_uhlenbeck"
    SHIRYAEV_LOG = "shiryaev_log"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, value: "Family | str") -> "Family":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {
            "bm": cls.BROWNIAN_DRIFT,
            "brownian": cls.BROWNIAN_DRIFT,
            "brownian_drift": cls.BROWNIAN_DRIFT,
            "ou": cls.ORNSTEIN_UHLENBECK,
            "ornstein_uhlenbeck": cls.ORNSTEIN_UHLENBECK,
            "shiryaev": cls.SHIRYAEV_LOG,
            "shiryaev_log": cls.SHIRYAEV_LOG,
            "custom": cls.CUSTOM,
        }
        try:
            return aliases[key]
        except KeyError:
            raise InvalidParameter(f"unknown diffusion family {value!r}") from None


# positional parameter names per family, used by the CLI config as well
PARAM_NAMES: dict[Family, tuple[str, ...]] = {
    Family.BROWNIAN_DRIFT: ("mu", "sigma"),
    Family.ORNSTEIN_UHLENBECK: ("theta",),
    Family.SHIRYAEV_LOG: ("nu", "l"),
    Family.CUSTOM: ("drift", "volatility"),
}


@dataclass(frozen=True)
class DiffusionSpec:
    """Immutable drift/volatility pair tagged with its parametric family.

    ``params`` holds the family parameters in the order of ``PARAM_NAMES``.
    For ``CUSTOM`` the two entries are the coefficient callables.
    """

    family: Family
    params: tuple

    def drift(self, x: ArrayLike) -> ArrayLike:
        fam, p = self.family, self.params
        if fam is Family.BROWNIAN_DRIFT:
            return _full(x, p[0])
        if fam is Family.ORNSTEIN_UHLENBECK:
            return -p[0] * x
        if fam is Family.SHIRYAEV_LOG:
            nu, ell = p
            if np.ndim(x):
                return nu * np.expm1(-2.0 * ell * np.asarray(x, dtype=float))
            return nu * math.expm1(-2.0 * ell * x)
        return _call_custom(p[0], x, "drift")

    def volatility(self, x: ArrayLike) -> ArrayLike:
        fam, p = self.family, self.params
        if fam is Family.BROWNIAN_DRIFT:
            return _full(x, p[1])
        if fam in (Family.ORNSTEIN_UHLENBECK, Family.SHIRYAEV_LOG):
            return _full(x, 1.0)
        return _call_custom(p[1], x, "volatility")

    def drift_derivative(self, x: ArrayLike) -> ArrayLike:
        """Analytic for the named families, central difference otherwise."""
        fam, p = self.family, self.params
        if fam is Family.BROWNIAN_DRIFT:
            return _full(x, 0.0)
        if fam is Family.ORNSTEIN_UHLENBECK:
            return _full(x, -p[0])
        if fam is Family.SHIRYAEV_LOG:
            nu, ell = p
            out = -2.0 * ell * nu * np.exp(-2.0 * ell * np.asarray(x, dtype=float))
            return out if np.ndim(x) else float(out)
        h = DRIFT_DIFF_STEP
        return (np.asarray(self.drift(x + h)) - np.asarray(self.drift(x - h))) / (2.0 * h)

    @property
    def constant_volatility(self) -> bool:
        return self.family is not Family.CUSTOM

    def __str__(self) -> str:
        if self.family is Family.CUSTOM:
            return "custom"
        names = PARAM_NAMES[self.family]
        inner = ", ".join(f"{n}={v:g}" for n, v in zip(names, self.params))
        return f"{self.family.value}({inner})"


def _full(x: ArrayLike, value: float) -> ArrayLike:
    return np.full(np.shape(x), float(value)) if np.ndim(x) else float(value)


def _call_custom(fn: Callable, x: ArrayLike, what: str) -> ArrayLike:
    try:
        if np.ndim(x):
            try:
                out = np.asarray(fn(x), dtype=float)
                if out.shape != np.shape(x):
                    raise TypeError
            except (TypeError, ValueError):
                out = np.array([float(fn(float(xi))) for xi in np.ravel(x)]).reshape(np.shape(x))
        else:
            out = float(fn(x))
    except CoefficientDomainError:
        raise
    except Exception as exc:  # noqa: BLE001 - any failure of user code is a domain error
        raise CoefficientDomainError(f"custom {what} failed at x={x!r}: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise CoefficientDomainError(f"custom {what} is not finite at x={x!r}")
    return out


def make_diffusion(family: Family | str, params: Sequence) -> DiffusionSpec:
    """Build a validated :class:`DiffusionSpec`.

    >>> make_diffusion("ou", [1.0]).drift(2.0)
    -2.0
    """
    fam = Family.parse(family)
    expected = len(PARAM_NAMES[fam])
    params = tuple(params)
    if len(params) != expected:
        raise InvalidParameter(
            f"{fam.value} takes {expected} parameter(s) {PARAM_NAMES[fam]}, got {len(params)}"
        )
    if fam is Family.CUSTOM:
        if not all(callable(p) for p in params):
            raise InvalidParameter("custom diffusion needs two callables (drift, volatility)")
        return DiffusionSpec(fam, params)

    values = tuple(float(p) for p in params)
    if not all(math.isfinite(v) for v in values):
        raise InvalidParameter(f"non-finite parameter in {values}")
    if fam is Family.BROWNIAN_DRIFT and values[1] <= 0:
        raise InvalidParameter(f"sigma must be positive, got {values[1]}")
    if fam is Family.ORNSTEIN_UHLENBECK and values[0] <= 0:
        raise InvalidParameter(f"theta must be positive, got {values[0]}")
    if fam is Family.SHIRYAEV_LOG:
        for name, v in zip(("nu", "l"), values):
            if v <= 0:
                raise InvalidParameter(f"{name} must be positive, got {v}")
    return DiffusionSpec(fam, values)


def coefficients(spec: DiffusionSpec, x: float) -> tuple[float, float]:
    """Return ``(mu(x), sigma(x))`` as plain floats."""
    return float(spec.drift(x)), float(spec.volatility(x))


@dataclass
class ValidationReport:
    positivity_ok: bool
    local_integrability_ok: bool
    p2_precondition_ok: bool
    constant_volatility: bool
    grid: np.ndarray
    p2_grid: np.ndarray
    messages: list[str] = field(default_factory=list)

    @property
    def barrier_certified(self) -> bool:
        """Whether the optimal-barrier existence argument applies."""
        return self.p2_precondition_ok and self.constant_volatility

    @property
    def ok(self) -> bool:
        return self.positivity_ok and self.local_integrability_ok


def validate(
    spec: DiffusionSpec,
    q: float,
    x_lo: float,
    x_hi: float,
    n_grid: int,
    *,
    a_max: float = 10.0,
    windows: Sequence[tuple[float, float]] | None = None,
    tol: float = 1e-8,
) -> ValidationReport:
    """Spot-check non-degeneracy, local integrability and the barrier precondition.

    Findings are reported, never raised.  The precondition ``mu <= 0`` and
    ``mu' < q`` is sampled on ``[0, a_max]`` with ``n_grid`` points;
    integrability of ``(1 + |mu|) / sigma^2`` is checked by quadrature on
    ``windows`` (default: consecutive cells of the validation grid).
    """
    if not q > 0:
        raise InvalidParameter(f"q must be positive, got {q}")
    if not x_lo < x_hi:
        raise InvalidParameter(f"need x_lo < x_hi, got [{x_lo}, {x_hi}]")
    if n_grid < 3:
        raise InvalidParameter("n_grid must be at least 3")

    msgs: list[str] = []
    grid = np.linspace(x_lo, x_hi, n_grid)
    p2_grid = np.linspace(0.0, a_max, n_grid)

    def safe(fn, xs):
        try:
            return np.asarray(fn(xs), dtype=float), None
        except CoefficientDomainError as exc:
            return None, str(exc)

    sig, err = safe(spec.volatility, grid)
    if sig is None:
        positivity_ok = False
        msgs.append(f"volatility evaluation failed: {err}")
    else:
        bad = grid[~(sig > 0)]
        positivity_ok = bad.size == 0
        if not positivity_ok:
            msgs.append(f"sigma <= 0 at {bad.size} grid point(s), first at x={bad[0]:.6g}")

    if windows is None:
        windows = list(zip(grid[:-1], grid[1:]))
    integ_ok = positivity_ok
    if positivity_ok:

        def integrand(s):
            return (1.0 + abs(float(spec.drift(s)))) / float(spec.volatility(s)) ** 2

        for lo, hi in windows:
            with warnings.catch_warnings():
                warnings.simplefilter("error", integrate.IntegrationWarning)
                try:
                    val, _ = integrate.quad(integrand, lo, hi, epsabs=tol, epsrel=tol)
                except (integrate.IntegrationWarning, CoefficientDomainError, ZeroDivisionError) as exc:
                    integ_ok = False
                    msgs.append(f"local integrability failed on [{lo:.6g}, {hi:.6g}]: {exc}")
                    break
            if not math.isfinite(val):
                integ_ok = False
                msgs.append(f"(1+|mu|)/sigma^2 not integrable on [{lo:.6g}, {hi:.6g}]")
                break
    else:
        msgs.append("local integrability not checked: sigma is not positive on the grid")

    constant_vol = False
    p2_ok = False
    mu, err_mu = safe(spec.drift, p2_grid)
    dmu, err_d = safe(spec.drift_derivative, p2_grid)
    sig2, err_s = safe(spec.volatility, p2_grid)
    if mu is None or dmu is None or sig2 is None:
        msgs.append(f"barrier precondition not checked: {err_mu or err_d or err_s}")
    else:
        constant_vol = bool(np.ptp(np.concatenate([sig2, sig if sig is not None else sig2])) == 0.0)
        pos = p2_grid[mu > 0]
        steep = p2_grid[~(dmu < q)]
        p2_ok = pos.size == 0 and steep.size == 0
        if pos.size:
            msgs.append(f"mu > 0 on [0, {a_max:g}], first at x={pos[0]:.6g}")
        if steep.size:
            msgs.append(f"mu' >= q on [0, {a_max:g}], first at x={steep[0]:.6g}")
        if not constant_vol:
            msgs.append("volatility is not constant: optimal-barrier result is uncertified")
    return ValidationReport(
        positivity_ok=positivity_ok,
        local_integrability_ok=integ_ok,
        p2_precondition_ok=p2_ok,
        constant_volatility=constant_vol,
        grid=grid,
        p2_grid=p2_grid,
        messages=msgs,
    )
