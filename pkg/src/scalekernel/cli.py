"""Command-line front-end.

Usage::

    scalekernel <command> CONFIG.toml [--output PATH] [--manifest PATH]

Commands: value-curve, optimal-barrier, exit-prob, verify, simulate,
scale-table.  The config is TOML with a strict schema (unknown keys are
errors); see ``SCHEMA`` for every key and its default.  Results go to a CSV
file (or stdout) and every run writes a JSON run manifest next to it.

Exit status: 0 success, 1 any error, 2 Monte Carlo verification failed
(``|z| > 3``).
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import platform
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import tomli

from . import __version__, mc
from .eigen import Backend
from .errors import ParseError, ScaleKernelError, SchemaError
from .model import PARAM_NAMES, DiffusionSpec, Family, make_diffusion, validate
from .scale import ScaleKernel, eval_W, exit_functionals
from .eigen import eigenpair
from .valuation import BarrierProblem, BarrierSearchConfig, optimal_barrier, value_curve, value_function, varsigma

Z_LIMIT = 3.0

_REQUIRED = object()

# section -> key -> (type, default); model.params is checked per family
SCHEMA: dict[str, dict[str, tuple[type | tuple[type, ...], Any]]] = {
    "model": {"family": (str, _REQUIRED), "backend": (str, None)},
    "problem": {"q": (float, _REQUIRED), "kappa": (float, _REQUIRED), "a": (float, None), "x0": (float, 0.5)},
    "search": {"a_max": (float, 50.0), "root_tol": (float, 1e-10)},
    "sim": {
        "dt": (float, 1e-3), "horizon": (float, 40.0), "n_paths": (int, 20000), "seed": (int, 0),
        "antithetic": (bool, True), "boundary_shift": (bool, True), "backend": (str, None),
    },
    "exit": {"x": (float, 0.0), "y": (float, 1.0), "z": (float, 2.0)},
    "grid": {"n": (int, 101), "pad": (float, 0.5), "x": (list, None), "y": (list, None)},
    "verify": {"target": (str, "value")},
    "output": {"path": (str, None), "manifest": (str, None)},
}

VERIFY_TARGETS = ("value", "exit-up", "exit-down")


@dataclass(frozen=True)
class Config:
    spec: DiffusionSpec
    eigen_backend: Backend | None
    q: float
    kappa: float
    a: float | None
    x0: float
    search: BarrierSearchConfig
    sim: mc.SimConfig
    mc_backend: str | None
    exit: tuple[float, float, float]
    grid_n: int
    grid_pad: float
    grid_x: tuple[float, ...] | None
    grid_y: tuple[float, ...] | None
    verify_target: str
    output: str | None
    manifest: str | None
    canonical: str


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_digest: str
    versions: str
    seed: int | None
    wall_time_ms: int


# ------------------------------------------------------------------ config


def _coerce(value, kind, key: str):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"{key} must be a number, got {value!r}", key)
        value = float(value)
        if not math.isfinite(value):
            raise SchemaError(f"{key} must be finite", key)
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"{key} must be an integer, got {value!r}", key)
        return value
    if kind is list:
        if not isinstance(value, list) or not value:
            raise SchemaError(f"{key} must be a non-empty array of numbers", key)
        return [_coerce(v, float, key) for v in value]
    if not isinstance(value, kind):
        raise SchemaError(f"{key} must be of type {kind.__name__}, got {value!r}", key)
    return value


def _section(doc: dict, name: str) -> dict:
    raw = doc.get(name, {})
    if not isinstance(raw, dict):
        raise SchemaError(f"{name} must be a table", name)
    out = {}
    allowed = SCHEMA[name]
    for key, value in raw.items():
        full = f"{name}.{key}"
        if name == "model" and key == "params":
            continue
        if key not in allowed:
            raise SchemaError(f"unknown key {full!r}", full)
        out[key] = _coerce(value, allowed[key][0], full)
    for key, (_, default) in allowed.items():
        if key not in out:
            if default is _REQUIRED:
                raise SchemaError(f"missing required key '{name}.{key}'", f"{name}.{key}")
            out[key] = default
    return out


def _parse_params(doc: dict, family: Family) -> dict:
    raw = doc.get("model", {}).get("params", {})
    if not isinstance(raw, dict):
        raise SchemaError("model.params must be a table", "model.params")
    names = PARAM_NAMES[family]
    for key in raw:
        if key not in names:
            raise SchemaError(f"unknown key 'model.params.{key}' for family {family.value}", f"model.params.{key}")
    out = {}
    for key in names:
        full = f"model.params.{key}"
        if key not in raw:
            if family is Family.BROWNIAN_DRIFT and key == "mu":
                out[key] = 0.0
                continue
            if family is Family.BROWNIAN_DRIFT and key == "sigma":
                out[key] = 1.0
                continue
            raise SchemaError(f"missing required key {full!r}", full)
        out[key] = _coerce(raw[key], float, full)
    return out


def config_from_dict(doc: dict) -> Config:
    """Validate a parsed TOML document against :data:`SCHEMA`."""
    for name in doc:
        if name not in SCHEMA:
            raise SchemaError(f"unknown key {name!r}", name)
    model = _section(doc, "model")
    try:
        family = Family.parse(model["family"])
    except ScaleKernelError as exc:
        raise SchemaError(str(exc), "model.family") from None
    if family is Family.CUSTOM:
        raise SchemaError("family 'custom' needs Python callables and cannot come from a config file", "model.family")
    params = _parse_params(doc, family)
    spec = _wrap(lambda: make_diffusion(family, tuple(params[k] for k in PARAM_NAMES[family])), "model.params")
    eig = None
    if model["backend"] is not None:
        try:
            eig = Backend(model["backend"])
        except ValueError:
            raise SchemaError(f"model.backend must be one of {[b.value for b in Backend]}", "model.backend") from None

    prob = _section(doc, "problem")
    if not prob["q"] > 0:
        raise SchemaError("q must be positive", "problem.q")
    if not prob["kappa"] > 1:
        raise SchemaError("kappa must exceed 1", "problem.kappa")
    if prob["a"] is not None and not prob["a"] > 0:
        raise SchemaError("a must be positive", "problem.a")
    if prob["x0"] < 0:
        raise SchemaError("x0 must be non-negative (simulation starts inside the band or above it)", "problem.x0")

    search = _section(doc, "search")
    search_cfg = _wrap(lambda: BarrierSearchConfig(a_max=search["a_max"], root_tol=search["root_tol"]), "search")

    sim = _section(doc, "sim")
    if sim["backend"] not in (None, "numba", "numpy"):
        raise SchemaError("sim.backend must be 'numba' or 'numpy'", "sim.backend")
    sim_cfg = _wrap(
        lambda: mc.SimConfig(
            sim["dt"], sim["horizon"], sim["n_paths"], sim["seed"], sim["antithetic"],
            boundary_shift=sim["boundary_shift"],
        ),
        "sim",
    )

    ex = _section(doc, "exit")
    if not ex["x"] < ex["y"] < ex["z"]:
        raise SchemaError("exit points must satisfy x < y < z", "exit")

    grid = _section(doc, "grid")
    if grid["n"] < 2:
        raise SchemaError("grid.n must be at least 2", "grid.n")
    if grid["pad"] < 0:
        raise SchemaError("grid.pad must be non-negative", "grid.pad")

    ver = _section(doc, "verify")
    if ver["target"] not in VERIFY_TARGETS:
        raise SchemaError(f"verify.target must be one of {list(VERIFY_TARGETS)}", "verify.target")

    out = _section(doc, "output")
    canonical = json.dumps(
        {
            "model": {"family": family.value, "params": params, "backend": model["backend"]},
            "problem": prob, "search": search, "sim": sim, "exit": ex, "grid": grid, "verify": ver,
        },
        sort_keys=True, separators=(",", ":"),
    )
    return Config(
        spec=spec, eigen_backend=eig, q=prob["q"], kappa=prob["kappa"], a=prob["a"], x0=prob["x0"],
        search=search_cfg, sim=sim_cfg, mc_backend=sim["backend"], exit=(ex["x"], ex["y"], ex["z"]),
        grid_n=grid["n"], grid_pad=grid["pad"],
        grid_x=None if grid["x"] is None else tuple(grid["x"]),
        grid_y=None if grid["y"] is None else tuple(grid["y"]),
        verify_target=ver["target"], output=out["path"], manifest=out["manifest"], canonical=canonical,
    )


def _wrap(build, key: str):
    try:
        return build()
    except ScaleKernelError as exc:
        raise SchemaError(f"{key}: {exc}", key) from None


def parse_config(path: str | Path) -> Config:
    """Read and validate a TOML config file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        col = getattr(exc, "colno", None)
        msg = getattr(exc, "msg", str(exc))
        raise ParseError(f"{path}:{line}:{col}: {msg}", line, col) from None
    return config_from_dict(doc)


def config_digest(cfg: Config) -> str:
    return hashlib.sha256(cfg.canonical.encode()).hexdigest()


# ------------------------------------------------------------------ output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(header: Sequence[str], rows, stream) -> None:
    stream.write(",".join(header) + "\r\n")
    for row in rows:
        stream.write(",".join(_fmt(v) for v in row) + "\r\n")


def _versions() -> str:
    import numba
    import scipy

    return (
        f"scalekernel {__version__}; python {platform.python_version()}; numpy {np.__version__}; "
        f"scipy {scipy.__version__}; numba {numba.__version__}"
    )


# ------------------------------------------------------------------ commands


def _kernel(cfg: Config) -> ScaleKernel:
    return ScaleKernel(eigenpair(cfg.spec, cfg.q, cfg.eigen_backend))


def _barrier(cfg: Config, kernel: ScaleKernel) -> float:
    return cfg.a if cfg.a is not None else optimal_barrier(kernel, cfg.kappa, cfg.search)


def cmd_value_curve(cfg: Config):
    k = _kernel(cfg)
    prob = BarrierProblem(k, _barrier(cfg, k), cfg.kappa)
    xs, vs = value_curve(prob, cfg.grid_n, cfg.grid_pad)
    return ["x (surplus)", "V (npv)"], zip(xs, vs), 0


def cmd_optimal_barrier(cfg: Config):
    k = _kernel(cfg)
    a_star = optimal_barrier(k, cfg.kappa, cfg.search)
    resid = varsigma(k, cfg.kappa, a_star)
    h = max(1e-6, 1e-4 * a_star)
    sign_change = varsigma(k, cfg.kappa, a_star - h) < 0 < varsigma(k, cfg.kappa, a_star + h)
    rep = validate(cfg.spec, cfg.q, -1.0, cfg.search.a_max, 201, a_max=cfg.search.a_max)
    header = [
        "a_star (surplus)", "varsigma_residual (1/surplus)", "sign_change (flag)",
        "p2_precondition (flag)", "constant_volatility (flag)", "certified (flag)",
    ]
    certified = bool(rep.barrier_certified and sign_change)
    if not certified:
        for msg in rep.messages or ["no sign change of varsigma around the returned barrier"]:
            print(f"scalekernel: warning: optimal barrier uncertified: {msg}", file=sys.stderr)
    row = (a_star, resid, bool(sign_change), rep.p2_precondition_ok, rep.constant_volatility, certified)
    return header, [row], 0


def cmd_exit_prob(cfg: Config):
    x, y, z = cfg.exit
    ef = exit_functionals(_kernel(cfg), x, y, z)
    return ["x (surplus)", "y (surplus)", "z (surplus)", "up (discounted prob)", "down (discounted prob)"], [
        (x, y, z, ef.up, ef.down)
    ], 0


def cmd_scale_table(cfg: Config):
    k = _kernel(cfg)
    hi = cfg.a if cfg.a is not None else 1.0
    xs = np.asarray(cfg.grid_x if cfg.grid_x is not None else np.linspace(0.0, hi, 5))
    ys = np.asarray(cfg.grid_y if cfg.grid_y is not None else np.linspace(0.0, hi, 5))
    X, Y = (g.ravel() for g in np.meshgrid(xs, ys, indexing="ij"))
    w = np.atleast_1d(eval_W(k, X, Y, "W"))
    w1 = np.atleast_1d(eval_W(k, X, Y, "W1"))
    w12 = np.atleast_1d(eval_W(k, X, Y, "W12"))
    return ["x (surplus)", "y (surplus)", "W (1)", "W1 (1/surplus)", "W12 (1/surplus^2)"], zip(X, Y, w, w1, w12), 0


def cmd_verify(cfg: Config):
    k = _kernel(cfg)
    if cfg.verify_target == "value":
        prob = BarrierProblem(k, _barrier(cfg, k), cfg.kappa)
        closed = value_function(prob, cfg.x0)
        est = mc.estimate_value(cfg.spec, prob.a, cfg.x0, cfg.q, cfg.kappa, cfg.sim, backend=cfg.mc_backend)
    else:
        x, y, z = cfg.exit
        ef = exit_functionals(k, x, y, z)
        up, down = mc.estimate_exit(cfg.spec, cfg.q, x, y, z, cfg.sim, backend=cfg.mc_backend)
        closed, est = (ef.up, up) if cfg.verify_target == "exit-up" else (ef.down, down)
    zscore = (est.mean - closed) / est.std_error if est.std_error > 0 else (0.0 if est.mean == closed else math.inf)
    code = 0 if abs(zscore) <= Z_LIMIT else 2
    header = ["closed_form (npv)", "mc_mean (npv)", "mc_stderr (npv)", "z_score (1)"]
    return header, [(closed, est.mean, est.std_error, zscore)], code


def cmd_simulate(cfg: Config):
    k_a = cfg.a
    if k_a is None:
        k_a = optimal_barrier(_kernel(cfg), cfg.kappa, cfg.search)
    b = mc.simulate_paths(cfg.spec, k_a, cfg.x0, cfg.q, cfg.sim, backend=cfg.mc_backend)
    header = [
        "path (index)", "pv_dividends (npv)", "pv_injections (npv)", "total_dividends (surplus)",
        "total_injections (surplus)", "switches (count)", "final_state (surplus)", "increment_sum (surplus)",
    ]
    rows = zip(b.paths, b.pv_dividends, b.pv_injections, b.total_dividends, b.total_injections,
               b.switches, b.final_state, b.increment_sum)
    return header, rows, 0


COMMANDS = {
    "value-curve": cmd_value_curve,
    "optimal-barrier": cmd_optimal_barrier,
    "exit-prob": cmd_exit_prob,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "scale-table": cmd_scale_table,
}
STOCHASTIC = {"verify", "simulate"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors share the generic failure code
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="scalekernel", description="Scale functions, double barrier valuation and Monte Carlo checks.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("config", help="TOML problem description")
    p.add_argument("-o", "--output", help="CSV destination ('-' for stdout); overrides output.path")
    p.add_argument("-m", "--manifest", help="run manifest destination; default <output>.manifest.json")
    return p


def run(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit status."""
    t0 = time.perf_counter()
    try:
        args = _parser().parse_args(argv)
    except _UsageError as exc:
        print(f"scalekernel: error: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(args.config)
        header, rows, code = COMMANDS[args.command](cfg)
        buf = io.StringIO(newline="")
        write_csv(header, rows, buf)
    except ScaleKernelError as exc:
        print(f"scalekernel: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    out = args.output if args.output is not None else cfg.output
    manifest_path = args.manifest if args.manifest is not None else cfg.manifest
    manifest = RunManifest(
        command=args.command,
        config_digest=config_digest(cfg),
        versions=_versions(),
        seed=cfg.sim.seed if args.command in STOCHASTIC else None,
        wall_time_ms=int(round((time.perf_counter() - t0) * 1000)),
    )
    blob = json.dumps(asdict(manifest), indent=2) + "\n"
    try:
        if out is None or out == "-":
            sys.stdout.write(buf.getvalue())
            sys.stdout.flush()
            if manifest_path is None:
                sys.stderr.write(blob)
        else:
            Path(out).write_text(buf.getvalue(), encoding="utf-8", newline="")
            if manifest_path is None:
                manifest_path = f"{out}.manifest.json"
        if manifest_path is not None:
            Path(manifest_path).write_text(blob, encoding="utf-8")
    except OSError as exc:
        print(f"scalekernel: cannot write output: {exc}", file=sys.stderr)
        return 1
    if code == 2:
        print(f"scalekernel: verification failed: |z| exceeds {Z_LIMIT:g}", file=sys.stderr)
    return code


def main() -> None:  # pragma: no cover - console script shim
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
