"""Compiled path kernels.

Paths run in lane blocks.  For each pair of steps a block first draws one
64-bit word per stream, turns its two halves into normals on the ziggurat
core and patches the rare misses with the scalar slow path; then every lane
takes a branch-free Euler step followed by projection onto ``[lo, hi]``.

Streams are passed as ``src`` (the even path index owning the stream).  With
``anti`` every stream drives two lanes, the second one with negated normals;
outputs are laid out path-ordered, ``2*i`` and ``2*i + 1`` for stream ``i``.
Each lane depends only on its own stream, so any partition of the streams
into calls or threads gives identical per-path numbers.

Drift is encoded as ``kind`` plus two constants: 0 or 1 -> ``c0 + c1 * x``
(Brownian, OU), 2 -> ``c0 * expm1(c1 * x)`` (log-Shiryaev).  Volatility is
the constant ``sigma``.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .rng import U23, U53, ZIG_F, ZIG_R, ZIG_RATIO, ZIG_X

#: streams per block (the block holds twice as many lanes with ``anti``)
STREAMS = 64

# No NaN/inf/signed-zero semantics are needed, which lets min/max vectorize.
# Contraction to fused multiply-add stays off: LLVM fuses the vector body and
# the scalar remainder differently, so a path's last bits would depend on
# where its lane sits in a block, i.e. on how paths were partitioned.
_FM = {"nnan", "ninf", "nsz"}

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_LOW32 = np.uint64(0xFFFFFFFF)


@njit(inline="always")
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(inline="always")
def _base(key, path):
    # key + ((path << 32) + 1) * GOLDEN; adding index * GOLDEN gives the counter
    return key + ((np.uint64(path) << np.uint64(32)) + np.uint64(1)) * _GOLDEN


@njit(inline="always")
def _u53(c):
    return (np.float64(np.int64(c >> np.uint64(11))) + 0.5) * U53


@njit(cache=True)
def slow_normal(key2, path, step, word):
    """Continue a draw whose first word missed the core (mirrors ``rng.slow_normal``)."""
    c = mix64(_base(key2, path) + np.uint64(step) * _GOLDEN)
    w = np.int64(word)
    while True:
        i = w & 255
        neg = (w >> 8) & 1
        u = (np.float64(w >> 9) + 0.5) * U23
        if u < ZIG_RATIO[i]:
            z = u * ZIG_X[i]
            return -z if neg else z
        if i == 0:
            while True:
                c = mix64(c + _GOLDEN)
                u1 = _u53(c)
                c = mix64(c + _GOLDEN)
                u2 = _u53(c)
                xt = -math.log(u1) / ZIG_R
                yt = -math.log(u2)
                if 2.0 * yt >= xt * xt:
                    z = ZIG_R + xt
                    return -z if neg else z
        x = u * ZIG_X[i]
        c = mix64(c + _GOLDEN)
        if ZIG_F[i] + _u53(c) * (ZIG_F[i + 1] - ZIG_F[i]) < math.exp(-0.5 * x * x):
            return -x if neg else x
        c = mix64(c + _GOLDEN)
        w = np.int64(c & _LOW32)


@njit(inline="always")
def _draw_pair(base, block, n, z0, z1, flag):
    """Core-rectangle normals of steps ``2*block`` and ``2*block+1``; returns miss count.

    The tables are module globals so numba freezes them as constants; as
    arguments they could alias the outputs and every store would force
    reloads.
    """
    bg = np.uint64(block) * _GOLDEN
    nm = 0
    for j in range(n):
        h = np.int64(mix64(base[j] + bg))
        i0 = h & 255
        i1 = (h >> 32) & 255
        u0 = (np.float64((h >> 9) & 0x7FFFFF) + 0.5) * U23
        u1 = (np.float64((h >> 41) & 0x7FFFFF) + 0.5) * U23
        a0 = u0 * ZIG_X[i0]
        a1 = u1 * ZIG_X[i1]
        z0[j] = -a0 if (h >> 8) & 1 else a0
        z1[j] = -a1 if (h >> 40) & 1 else a1
        f = np.int64(u0 >= ZIG_RATIO[i0]) + 2 * np.int64(u1 >= ZIG_RATIO[i1])
        flag[j] = f
        nm += f
    return nm


@njit(inline="always")
def _patch(base, src, key2, block, n, z0, z1, flag):
    bg = np.uint64(block) * _GOLDEN
    for j in range(n):
        f = flag[j]
        if f == 0:
            continue
        h = mix64(base[j] + bg)
        if f & 1:
            z0[j] = slow_normal(key2, src[j], 2 * block, h & _LOW32)
        if f & 2:
            z1[j] = slow_normal(key2, src[j], 2 * block + 1, h >> np.uint64(32))


@njit(cache=True)
def block_normals(src, key1, key2, block):
    """Normals of steps ``2*block``, ``2*block+1`` for each stream (testing hook)."""
    n = src.shape[0]
    base = np.empty(n, np.uint64)
    for j in range(n):
        base[j] = _base(key1, src[j])
    z0 = np.empty(n)
    z1 = np.empty(n)
    flag = np.empty(n, np.int64)
    if _draw_pair(base, block, n, z0, z1, flag):
        _patch(base, src, key2, block, n, z0, z1, flag)
    return z0, z1


@njit(cache=True, parallel=True, fastmath=_FM)
def value_paths(src, anti, full, key1, key2, n_steps, dt, lo, hi, x0, q, kind, c0, c1, sigma,
                pv_div, pv_inj, tot_div, tot_inj, switches, final, inc_sum):
    """Regulated Euler paths; one entry per path in each output array.

    With ``full`` false only ``pv_div``, ``pv_inj`` and ``final`` are
    tracked (the other outputs are left untouched), which roughly halves the
    cost of the Euler sweep.
    """
    n_src = src.shape[0]
    width = 2 if anti else 1
    n_blocks = (n_src + STREAMS - 1) // STREAMS
    sdt = sigma * math.sqrt(dt)
    start = min(max(x0, lo), hi)
    pay0 = max(x0 - hi, 0.0)
    inj0 = max(lo - x0, 0.0)
    last0 = 1.0 if pay0 > 0.0 else (-1.0 if inj0 > 0.0 else 0.0)
    for bi in prange(n_blocks):
        s0 = bi * STREAMS
        n = min(STREAMS, n_src - s0)
        nl = width * n
        bsrc = src[s0:s0 + n]
        base = np.empty(n, np.uint64)
        for j in range(n):
            base[j] = _base(key1, bsrc[j])
        u = np.full(nl, start)
        pvd = np.full(nl, pay0)
        pvi = np.full(nl, inj0)
        td = np.full(nl, pay0)
        ti = np.full(nl, inj0)
        inc = np.zeros(nl)
        step = np.empty(nl)
        # last regulation phase: +1 dividends, -1 injections, 0 none yet
        last = np.full(nl, last0)
        sw = np.zeros(nl)
        z0 = np.empty(nl)
        z1 = np.empty(nl)
        flag = np.empty(n, np.int64)
        for b in range((n_steps + 1) // 2):
            if _draw_pair(base, b, n, z0, z1, flag):
                _patch(base, bsrc, key2, b, n, z0, z1, flag)
            if anti:
                for j in range(n):
                    z0[n + j] = -z0[j]
                    z1[n + j] = -z1[j]
            for half in range(2):
                k = 2 * b + half
                if k >= n_steps:
                    break
                z = z0 if half == 0 else z1
                disc = math.exp(-q * (k * dt))
                if kind == 2:
                    for j in range(nl):
                        step[j] = c0 * math.expm1(c1 * u[j]) * dt + sdt * z[j]
                else:
                    for j in range(nl):
                        step[j] = (c0 + c1 * u[j]) * dt + sdt * z[j]
                if full:
                    for j in range(nl):
                        d = step[j]
                        inc[j] += d
                        un = u[j] + d
                        ex = max(un - hi, 0.0)
                        un = min(un, hi)
                        de = max(lo - un, 0.0)
                        un = max(un, lo)
                        pvd[j] += disc * ex
                        pvi[j] += disc * de
                        td[j] += ex
                        ti[j] += de
                        lv = last[j]
                        nv = 1.0 if ex > 0.0 else (-1.0 if de > 0.0 else lv)
                        sw[j] += 1.0 if nv * lv < 0.0 else 0.0
                        last[j] = nv
                        u[j] = un
                else:
                    for j in range(nl):
                        un = u[j] + step[j]
                        ex = max(un - hi, 0.0)
                        un = min(un, hi)
                        de = max(lo - un, 0.0)
                        u[j] = max(un, lo)
                        pvd[j] += disc * ex
                        pvi[j] += disc * de
        for j in range(nl):
            # lane j < n is the stream's own path, lane n + j its mirror
            o = width * (s0 + (j % n)) + (j // n)
            pv_div[o] = pvd[j]
            pv_inj[o] = pvi[j]
            final[o] = u[j]
            if full:
                tot_div[o] = td[j]
                tot_inj[o] = ti[j]
                switches[o] = np.int64(sw[j])
                inc_sum[o] = inc[j]


@njit(cache=True, parallel=True, fastmath=_FM)
def exit_paths(src, anti, key1, key2, n_steps, dt, lo, y, hi, q, kind, c0, c1, sigma,
               up, down, tau):
    """Unregulated paths from ``y`` until the first step ending outside ``(lo, hi)``.

    Writes the indicators discounted at the step end where the crossing is
    seen, and the exit time (``inf`` when the horizon comes first).
    """
    n_src = src.shape[0]
    width = 2 if anti else 1
    sdt = sigma * math.sqrt(dt)
    for jj in prange(n_src * width):
        i = jj // width
        sign = -1.0 if jj - i * width == 1 else 1.0
        p = src[i]
        base = _base(key1, p)
        u = y
        up[jj] = 0.0
        down[jj] = 0.0
        tau[jj] = np.inf
        for k in range(n_steps):
            b = k >> 1
            h = mix64(base + np.uint64(b) * _GOLDEN)
            w = np.int64(h & _LOW32) if (k & 1) == 0 else np.int64(h >> np.uint64(32))
            ix = w & 255
            v = (np.float64(w >> 9) + 0.5) * U23
            if v < ZIG_RATIO[ix]:
                z = -(v * ZIG_X[ix]) if (w >> 8) & 1 else v * ZIG_X[ix]
            else:
                z = slow_normal(key2, p, k, w)
            if kind == 2:
                mu = c0 * math.expm1(c1 * u)
            else:
                mu = c0 + c1 * u
            u = u + (mu * dt + sdt * (sign * z))
            if u >= hi or u <= lo:
                t = (k + 1) * dt
                if u >= hi:
                    up[jj] = math.exp(-q * t)
                else:
                    down[jj] = math.exp(-q * t)
                tau[jj] = t
                break
