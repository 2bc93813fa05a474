"""Counter-based normal variates keyed by ``(seed, path, step)``.

Every 64-bit draw is ``mix64(key + counter * GOLDEN)`` with the SplitMix64
finalizer, so any draw can be produced without touching its neighbours and
streams of different paths never overlap: the counter is
``(path << 32) + block + 1`` and ``GOLDEN`` is odd.  One draw feeds two
consecutive Euler steps, 32 bits each, through a 256-layer ziggurat
(Marsaglia-Tsang layout): 8 bits pick the layer, 1 bit the sign and 23 bits
the abscissa.  Draws that miss the rectangle core continue on a second
stream keyed by ``(seed, path, step)``.

This module holds the tables and a numpy implementation; ``kernels_numba``
mirrors it bit for bit.
"""
from __future__ import annotations

import math

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
SEED_SALT = np.uint64(0xD1B54A32D192ED03)

ZIG_LAYERS = 256
ZIG_R = 3.6541528853610088
ZIG_V = 4.92867323399e-3
U23 = 1.0 / 8388608.0
U53 = 1.0 / 9007199254740992.0
MAX_STEPS = 1 << 33


def _ziggurat_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # layer edges x[1] = R > x[2] > ... > x[C] = 0; x[0] is the base strip width
    x = np.zeros(ZIG_LAYERS + 1)
    f = math.exp(-0.5 * ZIG_R * ZIG_R)
    x[0] = ZIG_V / f
    x[1] = ZIG_R
    for i in range(2, ZIG_LAYERS):
        x[i] = math.sqrt(-2.0 * math.log(ZIG_V / x[i - 1] + f))
        f = math.exp(-0.5 * x[i] * x[i])
    ratio = x[1:] / x[:-1]
    dens = np.exp(-0.5 * x * x)
    return x, ratio, dens


ZIG_X, ZIG_RATIO, ZIG_F = _ziggurat_tables()


def mix64(z):
    """SplitMix64 output function (works on numpy uint64 scalars and arrays)."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * MIX1
        z = (z ^ (z >> np.uint64(27))) * MIX2
    return z ^ (z >> np.uint64(31))


def stream_keys(seed: int) -> tuple[np.uint64, np.uint64]:
    """Primary and fallback keys derived from a 64-bit seed."""
    s = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(over="ignore"):
        return mix64(s + GOLDEN), mix64(s ^ SEED_SALT)


def _counter(path, index):
    with np.errstate(over="ignore"):
        return ((np.asarray(path, dtype=np.uint64) << np.uint64(32)) + np.uint64(index) + np.uint64(1)) * GOLDEN


def block_draw(key: np.uint64, path, block: int):
    """64-bit draw feeding steps ``2*block`` and ``2*block + 1``."""
    with np.errstate(over="ignore"):
        return mix64(key + _counter(path, block))


def _uniform53(c: np.uint64) -> float:
    return (float(c >> np.uint64(11)) + 0.5) * U53


def slow_normal(key2: np.uint64, path: int, step: int, word: int) -> float:
    """Finish a ziggurat draw whose first 32-bit word missed the core."""
    with np.errstate(over="ignore"):
        c = mix64(key2 + _counter(path, step))
    w = int(word)
    while True:
        i = w & 255
        neg = (w >> 8) & 1
        u = ((w >> 9) + 0.5) * U23
        if u < ZIG_RATIO[i]:
            z = u * ZIG_X[i]
            return -z if neg else z
        if i == 0:
            while True:
                with np.errstate(over="ignore"):
                    c = mix64(c + GOLDEN)
                    u1 = _uniform53(c)
                    c = mix64(c + GOLDEN)
                    u2 = _uniform53(c)
                xt = -math.log(u1) / ZIG_R
                yt = -math.log(u2)
                if 2.0 * yt >= xt * xt:
                    z = ZIG_R + xt
                    return -z if neg else z
        x = u * ZIG_X[i]
        with np.errstate(over="ignore"):
            c = mix64(c + GOLDEN)
        if ZIG_F[i] + _uniform53(c) * (ZIG_F[i + 1] - ZIG_F[i]) < math.exp(-0.5 * x * x):
            return -x if neg else x
        with np.errstate(over="ignore"):
            c = mix64(c + GOLDEN)
        w = int(c & np.uint64(0xFFFFFFFF))


def fast_normals(words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Core-rectangle normals for 32-bit words; second output flags misses."""
    words = words.astype(np.uint64, copy=False)
    i = (words & np.uint64(255)).astype(np.intp)
    neg = ((words >> np.uint64(8)) & np.uint64(1)).astype(bool)
    u = ((words >> np.uint64(9)).astype(np.float64) + 0.5) * U23
    z = u * ZIG_X[i]
    z = np.where(neg, -z, z)
    return z, ~(u < ZIG_RATIO[i])


def source_paths(paths: np.ndarray, antithetic: bool) -> tuple[np.ndarray, np.ndarray]:
    """Stream owner and sign for each path (odd paths mirror their even twin)."""
    paths = np.asarray(paths, dtype=np.int64)
    if not antithetic:
        return paths, np.ones(paths.shape)
    return paths - (paths & 1), np.where(paths & 1, -1.0, 1.0)


def normals_for_block(key1, key2, src: np.ndarray, block: int) -> tuple[np.ndarray, np.ndarray]:
    """Normals for steps ``2*block`` and ``2*block+1`` of every path in ``src``."""
    h = block_draw(key1, src.astype(np.uint64), block)
    lo = h & np.uint64(0xFFFFFFFF)
    hi = h >> np.uint64(32)
    out = []
    for half, words in enumerate((lo, hi)):
        z, miss = fast_normals(words)
        for j in np.flatnonzero(miss):
            z[j] = slow_normal(key2, int(src[j]), 2 * block + half, int(words[j]))
        out.append(z)
    return out[0], out[1]


def normal_stream(seed: int, path: int, n_steps: int) -> np.ndarray:
    """All ``n_steps`` normals of one path (reference implementation)."""
    k1, k2 = stream_keys(seed)
    src = np.array([path], dtype=np.int64)
    z = np.empty(n_steps + (n_steps & 1))
    for b in range((n_steps + 1) // 2):
        z0, z1 = normals_for_block(k1, k2, src, b)
        z[2 * b], z[2 * b + 1] = z0[0], z1[0]
    return z[:n_steps]
