"""Monte Carlo oracle for the double barrier strategy and two-sided exits.

Every path is an Euler-Maruyama chain on a fixed grid ``k * dt``.  The
regulated chain projects onto ``[0, a]`` after each step and books the
overshoot as a dividend (above ``a``) or an injection (below 0), discounted
at the step's left endpoint.  The exit chain runs unregulated from ``y`` and
stops at the first grid point outside ``(x, z)``, discounted at that point.

The normal driving step ``k`` of path ``p`` is a pure function of
``(seed, p, k)``, so results never depend on how paths are batched or
threaded.  With ``antithetic`` the odd path ``2i + 1`` replays path ``2i``
with negated normals.

Projection onto a grid-monitored barrier reacts too late, which biases both
estimators by ``O(sqrt(dt))``.  ``boundary_shift`` moves every barrier
towards the interior by ``BETA * sigma(barrier) * sqrt(dt)``, the classical
continuity correction for discretely monitored Brownian barriers, and cuts
the bias to ``O(dt)``.  It is off by default.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..model import DiffusionSpec, Family
from . import kernels_numpy, rng
from ._accel import configure_threads, numba_enabled

_MAX_PATHS = 1 << 32

#: -zeta(1/2) / sqrt(2 pi), mean overshoot of a Gaussian random walk in units of one step's std
BETA = 0.5825971579390106


@dataclass(frozen=True)
class SimConfig:
    dt: float
    horizon: float
    n_paths: int
    seed: int = 0
    antithetic: bool = False
    # largest acceptable e^{-qT}; checked once q is known
    truncation_tol: float = 1e-8
    boundary_shift: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if not self.dt < self.horizon:
            raise ConfigError(f"dt={self.dt} must be smaller than horizon={self.horizon}")
        if isinstance(self.n_paths, bool) or int(self.n_paths) != self.n_paths or not 1 <= self.n_paths < _MAX_PATHS:
            raise ConfigError(f"n_paths must be an integer in [1, 2^32), got {self.n_paths}")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not -(1 << 63) <= self.seed < (1 << 64):
            raise ConfigError(f"seed must be a 64-bit integer, got {self.seed}")
        if not 0 < self.truncation_tol < 1:
            raise ConfigError("truncation_tol must lie in (0, 1)")
        if self.n_steps >= rng.MAX_STEPS:
            raise ConfigError(f"horizon/dt = {self.n_steps} steps exceeds the stream length")

    @property
    def n_steps(self) -> int:
        # tolerate horizon/dt landing a few ulps above an integer
        return max(1, math.ceil(self.horizon / self.dt * (1.0 - 1e-12)))

    def check_truncation(self, q: float) -> float:
        """``e^{-qT}``; raises when it exceeds ``truncation_tol``."""
        if not q > 0:
            raise ConfigError(f"discount rate must be positive, got q={q}")
        tail = math.exp(-q * self.horizon)
        if tail > self.truncation_tol:
            need = -math.log(self.truncation_tol) / q
            raise ConfigError(
                f"e^(-q T) = {tail:.3g} exceeds truncation_tol={self.truncation_tol:g}; "
                f"use horizon >= {need:.6g}"
            )
        return tail


@dataclass(frozen=True)
class PathResult:
    pv_dividends: float
    pv_injections: float
    total_dividends: float
    total_injections: float
    switches: int
    final_state: float
    # sum of the unregulated Euler increments
    increment_sum: float


@dataclass(frozen=True)
class PathBatch:
    """Per-path arrays for a set of path indices (column form of :class:`PathResult`)."""

    paths: np.ndarray
    pv_dividends: np.ndarray
    pv_injections: np.ndarray
    total_dividends: np.ndarray
    total_injections: np.ndarray
    switches: np.ndarray
    final_state: np.ndarray
    increment_sum: np.ndarray

    def __len__(self) -> int:
        return self.paths.size

    def __getitem__(self, i: int) -> PathResult:
        return PathResult(
            float(self.pv_dividends[i]), float(self.pv_injections[i]),
            float(self.total_dividends[i]), float(self.total_injections[i]),
            int(self.switches[i]), float(self.final_state[i]), float(self.increment_sum[i]),
        )


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_paths: int
    # crude bound on what the truncated tail of the horizon could still add
    truncation_bound: float


# ------------------------------------------------------------------ plumbing


def _coefficients(spec: DiffusionSpec):
    """``(kind, c0, c1, sigma)`` for the compiled kernels, or None for custom."""
    fam, p = spec.family, spec.params
    if fam is Family.BROWNIAN_DRIFT:
        return 0, float(p[0]), 0.0, float(p[1])
    if fam is Family.ORNSTEIN_UHLENBECK:
        return 1, 0.0, -float(p[0]), 1.0
    if fam is Family.SHIRYAEV_LOG:
        return 2, float(p[0]), -2.0 * float(p[1]), 1.0
    return None


def _use_numba(spec: DiffusionSpec, backend: str | None) -> bool:
    if backend not in (None, "numba", "numpy"):
        raise ConfigError(f"unknown backend {backend!r}; use 'numba' or 'numpy'")
    if backend == "numpy" or _coefficients(spec) is None:
        return False
    if backend == "numba" and not numba_enabled():
        raise ConfigError("numba backend requested but disabled or not installed")
    return numba_enabled()


def _streams(paths: np.ndarray, antithetic: bool) -> np.ndarray:
    if antithetic:
        return np.unique(paths - (paths & 1))
    return paths


def _lane_index(paths: np.ndarray, src: np.ndarray, antithetic: bool) -> np.ndarray:
    """Position of each requested path in the kernel's path-ordered output."""
    if not antithetic:
        return np.arange(paths.size)
    pos = np.searchsorted(src, paths - (paths & 1))
    return 2 * pos + (paths & 1)


def _check_paths(paths, cfg: SimConfig) -> np.ndarray:
    if paths is None:
        return np.arange(cfg.n_paths, dtype=np.int64)
    arr = np.atleast_1d(np.asarray(paths))
    if arr.ndim != 1 or arr.size == 0 or not np.issubdtype(arr.dtype, np.integer):
        raise ConfigError("paths must be a non-empty 1-d integer array")
    arr = arr.astype(np.int64)
    if arr.min() < 0 or arr.max() >= _MAX_PATHS:
        raise ConfigError("path indices must lie in [0, 2^32)")
    return arr


def _check_problem(a: float, x0: float) -> None:
    if not (math.isfinite(a) and a > 0):
        raise ConfigError(f"upper barrier must be positive, got a={a}")
    if not math.isfinite(x0) or x0 < 0:
        raise ConfigError(f"initial surplus must be >= 0 for simulation, got x0={x0}")


def _shift(spec: DiffusionSpec, x: float, cfg: SimConfig) -> float:
    if not cfg.boundary_shift:
        return 0.0
    return BETA * abs(float(spec.volatility(float(x)))) * math.sqrt(cfg.dt)


def _band(spec, lo, hi, cfg):
    """Barriers the chain is monitored against (shifted inwards on request)."""
    lo2, hi2 = lo + _shift(spec, lo, cfg), hi - _shift(spec, hi, cfg)
    if not lo2 < hi2:
        raise ConfigError(f"dt={cfg.dt} too coarse for boundary_shift on the band ({lo}, {hi})")
    return lo2, hi2


def _run_value(spec, a, x0, q, cfg, paths, full, backend):
    src = _streams(paths, cfg.antithetic)
    n_out = src.size * (2 if cfg.antithetic else 1)
    f = [np.zeros(n_out) for _ in range(4)]
    sw = np.zeros(n_out, dtype=np.int64)
    fin, inc = np.zeros(n_out), np.zeros(n_out)
    k1, k2 = rng.stream_keys(cfg.seed)
    lo, hi = _band(spec, 0.0, float(a), cfg)
    if _use_numba(spec, backend):
        from . import kernels_numba

        configure_threads()
        kind, c0, c1, sig = _coefficients(spec)
        kernels_numba.value_paths(
            src, cfg.antithetic, full, k1, k2, cfg.n_steps, float(cfg.dt), lo, hi, float(x0), float(q),
            kind, c0, c1, sig, f[0], f[1], f[2], f[3], sw, fin, inc,
        )
    else:
        kernels_numpy.value_paths(
            src, cfg.antithetic, full, k1, k2, cfg.n_steps, float(cfg.dt), lo, hi, float(x0), float(q),
            spec.drift, spec.volatility, f[0], f[1], f[2], f[3], sw, fin, inc,
        )
    sel = _lane_index(paths, src, cfg.antithetic)
    return [arr[sel] for arr in (*f, sw, fin, inc)]


# ------------------------------------------------------------------ public API


def simulate_paths(
    spec: DiffusionSpec, a: float, x0: float, q: float, cfg: SimConfig, paths=None, *, backend: str | None = None
) -> PathBatch:
    """Full per-path accounting for ``paths`` (default ``0 .. n_paths-1``).

    With ``cfg.boundary_shift`` the chain lives on the shifted band; a start
    outside it is regulated at ``t = 0`` and booked like any other step.
    """
    _check_problem(a, x0)
    cfg.check_truncation(q)
    idx = _check_paths(paths, cfg)
    pvd, pvi, td, ti, sw, fin, inc = _run_value(spec, a, x0, q, cfg, idx, True, backend)
    return PathBatch(idx, pvd, pvi, td, ti, sw, fin, inc)


def simulate_path(
    spec: DiffusionSpec, a: float, x0: float, q: float, cfg: SimConfig, path_index: int, *, backend: str | None = None
) -> PathResult:
    """One regulated path; identical inputs give a bitwise-identical result."""
    return simulate_paths(spec, a, x0, q, cfg, [int(path_index)], backend=backend)[0]


def _estimate(samples: np.ndarray, antithetic: bool, bound: float) -> McEstimate:
    n = samples.size
    mean = float(np.mean(samples))
    if antithetic and n >= 4 and n % 2 == 0:
        # twins are dependent; the independent units are the pair averages
        units = 0.5 * (samples[0::2] + samples[1::2])
    else:
        units = samples
    m = units.size
    se = float(np.std(units, ddof=1) / math.sqrt(m)) if m > 1 else math.inf
    return McEstimate(mean, se, int(n), float(bound))


def estimate_value(
    spec: DiffusionSpec, a: float, x0: float, q: float, kappa: float, cfg: SimConfig, *, backend: str | None = None
) -> McEstimate:
    """Average of ``pv_dividends - kappa * pv_injections`` over ``cfg.n_paths`` paths."""
    _check_problem(a, x0)
    if not kappa > 1:
        raise ConfigError(f"kappa must exceed 1, got {kappa}")
    tail = cfg.check_truncation(q)
    idx = np.arange(cfg.n_paths, dtype=np.int64)
    pvd, pvi, *_ = _run_value(spec, a, x0, q, cfg, idx, False, backend)
    samples = pvd - kappa * pvi
    return _estimate(samples, cfg.antithetic, tail * (a + kappa * a))


def exit_samples(
    spec: DiffusionSpec, q: float, x: float, y: float, z: float, cfg: SimConfig, paths=None, *, backend: str | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-path ``(e^{-q tau} 1{up}, e^{-q tau} 1{down}, tau)``; ``tau = inf`` if the horizon came first."""
    if not (x < y < z):
        raise ConfigError(f"need x < y < z, got ({x}, {y}, {z})")
    cfg.check_truncation(q)
    idx = _check_paths(paths, cfg)
    src = _streams(idx, cfg.antithetic)
    n_out = src.size * (2 if cfg.antithetic else 1)
    up, dn, tau = np.zeros(n_out), np.zeros(n_out), np.zeros(n_out)
    k1, k2 = rng.stream_keys(cfg.seed)
    lo, hi = _band(spec, float(x), float(z), cfg)
    args = (cfg.n_steps, float(cfg.dt), lo, float(y), hi, float(q))
    if _use_numba(spec, backend):
        from . import kernels_numba

        configure_threads()
        kernels_numba.exit_paths(src, cfg.antithetic, k1, k2, *args, *_coefficients(spec), up, dn, tau)
    else:
        kernels_numpy.exit_paths(src, cfg.antithetic, k1, k2, *args, spec.drift, spec.volatility, up, dn, tau)
    sel = _lane_index(idx, src, cfg.antithetic)
    return up[sel], dn[sel], tau[sel]


def estimate_exit(
    spec: DiffusionSpec, q: float, x: float, y: float, z: float, cfg: SimConfig, *, backend: str | None = None
) -> tuple[McEstimate, McEstimate]:
    """Discounted exit transforms from ``y`` out of ``(x, z)``: ``(up, down)``."""
    up, dn, _ = exit_samples(spec, q, x, y, z, cfg, backend=backend)
    tail = math.exp(-q * cfg.horizon)
    return _estimate(up, cfg.antithetic, tail), _estimate(dn, cfg.antithetic, tail)
