"""Pure-numpy path kernels, vectorized across paths.

Same streams, same output layout and same update order as
``kernels_numba``.  For linear drifts the two backends agree bit for bit;
the log-Shiryaev drift goes through ``expm1``, whose libm and numpy versions
may differ in the last bit.  Coefficients are arbitrary vectorized
callables, which is what lets custom diffusions run here.
"""
from __future__ import annotations

import math

import numpy as np

from . import rng


def _to_path_order(lane_vals: np.ndarray, n: int, width: int) -> np.ndarray:
    # lanes are [own paths..., mirrors...]; paths are interleaved per stream
    return lane_vals.reshape(width, n).T.reshape(-1)


def value_paths(src, anti, full, key1, key2, n_steps, dt, lo, hi, x0, q, drift, vol,
                pv_div, pv_inj, tot_div, tot_inj, switches, final, inc_sum):
    """Regulated Euler paths; see ``kernels_numba.value_paths``."""
    src = np.asarray(src, dtype=np.int64)
    n = src.size
    width = 2 if anti else 1
    nl = width * n
    sq = math.sqrt(dt)
    start = min(max(x0, lo), hi)
    pay0 = max(x0 - hi, 0.0)
    inj0 = max(lo - x0, 0.0)
    u = np.full(nl, start)
    pvd = np.full(nl, pay0)
    pvi = np.full(nl, inj0)
    td = np.full(nl, pay0)
    ti = np.full(nl, inj0)
    inc = np.zeros(nl)
    last = np.full(nl, 1.0 if pay0 > 0.0 else (-1.0 if inj0 > 0.0 else 0.0))
    sw = np.zeros(nl)
    for b in range((n_steps + 1) // 2):
        pair = rng.normals_for_block(key1, key2, src, b)
        for half in range(2):
            k = 2 * b + half
            if k >= n_steps:
                break
            z = pair[half]
            if anti:
                z = np.concatenate([z, -z])
            disc = math.exp(-q * (k * dt))
            step = np.asarray(drift(u), dtype=float) * dt + np.asarray(vol(u), dtype=float) * sq * z
            un = u + step
            ex = np.maximum(un - hi, 0.0)
            un = np.minimum(un, hi)
            de = np.maximum(lo - un, 0.0)
            u = np.maximum(un, lo)
            pvd += disc * ex
            pvi += disc * de
            if full:
                inc += step
                td += ex
                ti += de
                nv = np.where(ex > 0.0, 1.0, np.where(de > 0.0, -1.0, last))
                sw += nv * last < 0.0
                last = nv
    pv_div[:] = _to_path_order(pvd, n, width)
    pv_inj[:] = _to_path_order(pvi, n, width)
    final[:] = _to_path_order(u, n, width)
    if full:
        tot_div[:] = _to_path_order(td, n, width)
        tot_inj[:] = _to_path_order(ti, n, width)
        switches[:] = _to_path_order(sw, n, width).astype(np.int64)
        inc_sum[:] = _to_path_order(inc, n, width)


def exit_paths(src, anti, key1, key2, n_steps, dt, lo, y, hi, q, drift, vol, up, down, tau):
    """Unregulated paths from ``y`` until they leave ``(lo, hi)``; see ``kernels_numba.exit_paths``."""
    src = np.asarray(src, dtype=np.int64)
    n = src.size
    width = 2 if anti else 1
    nl = width * n
    sq = math.sqrt(dt)
    u = np.full(nl, float(y))
    up_l = np.zeros(nl)
    dn_l = np.zeros(nl)
    tau_l = np.full(nl, np.inf)
    alive = np.ones(nl, dtype=bool)
    lane_src = np.tile(src, width)
    lane_sign = np.repeat([1.0, -1.0][:width], n)
    for b in range((n_steps + 1) // 2):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        # one stream may feed two live lanes; draw each stream once
        streams, inv = np.unique(lane_src[idx], return_inverse=True)
        pair = rng.normals_for_block(key1, key2, streams, b)
        for half in range(2):
            k = 2 * b + half
            if k >= n_steps:
                break
            live = idx[alive[idx]]
            if live.size == 0:
                break
            z = pair[half][inv[alive[idx]]] * lane_sign[live]
            ul = u[live]
            ul = ul + (np.asarray(drift(ul), dtype=float) * dt + np.asarray(vol(ul), dtype=float) * sq * z)
            u[live] = ul
            hit_up = ul >= hi
            hit_dn = ul <= lo
            t = (k + 1) * dt
            disc = math.exp(-q * t)
            up_l[live[hit_up]] = disc
            dn_l[live[hit_dn & ~hit_up]] = disc
            gone = live[hit_up | hit_dn]
            tau_l[gone] = t
            alive[gone] = False
    up[:] = _to_path_order(up_l, n, width)
    down[:] = _to_path_order(dn_l, n, width)
    tau[:] = _to_path_order(tau_l, n, width)
