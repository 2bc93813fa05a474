"""Compiled vs numpy Monte Carlo kernels.

    python benchmarks/bench_mc.py [--paths N] [--dt DT] [--repeat R]

Times the regulated-path estimator and the exit estimator on both backends
(same streams, so the estimates must agree) and reports nanoseconds per
path-step.  The numba timings exclude the first, compiling call.
"""
from __future__ import annotations

import argparse
import time

import scalekernel as sk
from scalekernel import mc


def _best(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--paths", type=int, default=2000)
    p.add_argument("--dt", type=float, default=2e-3)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--family", default="ou", choices=["bm", "ou", "shiryaev"])
    args = p.parse_args(argv)

    params = {"bm": (0.0, 1.0), "ou": (1.0,), "shiryaev": (1.0, 0.5)}[args.family]
    spec = sk.make_diffusion(args.family, params)
    cfg = mc.SimConfig(args.dt, 40.0, args.paths, seed=1, antithetic=True)
    steps = args.paths * cfg.n_steps

    # warm-up compiles (or loads from cache)
    mc.estimate_value(spec, 1.0, 0.5, 0.5, 1.5, mc.SimConfig(0.1, 40.0, 4))
    mc.estimate_exit(spec, 0.5, 0.0, 1.0, 2.0, mc.SimConfig(0.1, 40.0, 4))

    print(f"{args.family}: {args.paths} paths x {cfg.n_steps} steps (antithetic)")
    print(f"{'task':<8}{'backend':<8}{'seconds':>10}{'ns/step':>10}{'estimate':>22}")
    for task in ("value", "exit"):
        res = {}
        for backend in ("numba", "numpy"):
            if task == "value":
                run = lambda: mc.estimate_value(spec, 1.0, 0.5, 0.5, 1.5, cfg, backend=backend)  # noqa: E731
            else:
                run = lambda: mc.estimate_exit(spec, 0.5, 0.0, 1.0, 2.0, cfg, backend=backend)[0]  # noqa: E731
            sec, est = _best(run, args.repeat if backend == "numba" else 1)
            res[backend] = (sec, est.mean)
            # exit paths stop early, so ns/step is an upper-bound style figure there
            print(f"{task:<8}{backend:<8}{sec:>10.3f}{sec / steps * 1e9:>10.2f}{est.mean:>22.15f}")
        speedup = res["numpy"][0] / res["numba"][0]
        gap = abs(res["numba"][1] - res["numpy"][1])
        print(f"{task:<8}speedup {speedup:.1f}x, |numba - numpy| = {gap:.1e}")


if __name__ == "__main__":
    main()
