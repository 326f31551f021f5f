"""Hot kernels: batched fitness evaluation and the two move quantizers.

Each kernel exists twice: an ``@njit`` loop version and a numpy version.
``fitness_batch``, ``nnd_batch`` and ``nbn_batch`` dispatch on
``ccpsor._accel.USE_NUMBA`` at call time, so :func:`use_backend` can flip
between them inside one process. Both versions perform the floating point
operations in the same order and agree bit for bit on integer grids.

Fitness rows are ``[repel, closure, expanse, uniformity, total]``.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from functools import lru_cache

import numpy as np

from . import _accel
from ._accel import njit
from .geometry import convex_hull, inconv

QUAD = 0
GRID3X3 = 1

SN_ARRAY = np.array(
    [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)], dtype=np.int64
)
SN_ANGLES = np.arctan2(SN_ARRAY[:, 1], SN_ARRAY[:, 0]).astype(np.float64)
TWO_PI = 2.0 * math.pi


@contextmanager
def use_backend(name: str):
    """Temporarily force ``"numba"`` or ``"numpy"``."""
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    if name == "numba" and not _accel.HAS_NUMBA:
        raise RuntimeError("numba is not importable")
    old = _accel.USE_NUMBA
    _accel.USE_NUMBA = name == "numba"
    try:
        yield
    finally:
        _accel.USE_NUMBA = old


def backend() -> str:
    return "numba" if _accel.USE_NUMBA else "numpy"


@lru_cache(maxsize=None)
def vicinity_ring(r: int):
    """Cells at Chebyshev distance exactly ``r``, counterclockwise from angle 0.

    Returns ``(offsets, angles)``; angles are raw ``atan2`` values.
    """
    cells = [(dx, dy) for dx in range(-r, r + 1) for dy in range(-r, r + 1) if max(abs(dx), abs(dy)) == r]
    cells.sort(key=lambda c: math.atan2(c[1], c[0]) % TWO_PI)
    offsets = np.array(cells, dtype=np.int64)
    angles = np.arctan2(offsets[:, 1], offsets[:, 0]).astype(np.float64)
    offsets.setflags(write=False)
    angles.setflags(write=False)
    return offsets, angles


# ---------------------------------------------------------------- numba side


@njit
def _std4(a, b, c, d):
    m = (a + b + c + d) / 4.0
    return math.sqrt(((a - m) ** 2 + (b - m) ** 2 + (c - m) ** 2 + (d - m) ** 2) / 4.0)


@njit
def _bin_quad(dx, dy, q):
    # q = [N11 (NW), N12 (NE), N21 (SW), N22 (SE)]
    if dx == 0 and dy == 0:
        for k in range(4):
            q[k] += 0.25
    elif dx == 0:
        if dy > 0:
            q[0] += 0.5
            q[1] += 0.5
        else:
            q[2] += 0.5
            q[3] += 0.5
    elif dy == 0:
        if dx > 0:
            q[1] += 0.5
            q[3] += 0.5
        else:
            q[0] += 0.5
            q[2] += 0.5
    else:
        row = 0 if dy > 0 else 1
        col = 0 if dx < 0 else 1
        q[2 * row + col] += 1.0


@njit
def _bin_3x3(dx, dy, g):
    # rows north->south, columns west->east; the middle band is the prey's own row/column
    r = 0 if dy > 0 else (1 if dy == 0 else 2)
    c = 0 if dx < 0 else (1 if dx == 0 else 2)
    g[3 * r + c] += 1.0


@njit
def _cross_nb(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


@njit
def _hull_nb(xs, ys, n, sx, sy, hx, hy):
    for a in range(n):
        sx[a] = xs[a]
        sy[a] = ys[a]
    for a in range(1, n):
        kx = sx[a]
        ky = sy[a]
        b = a - 1
        while b >= 0 and (sx[b] > kx or (sx[b] == kx and sy[b] > ky)):
            sx[b + 1] = sx[b]
            sy[b + 1] = sy[b]
            b -= 1
        sx[b + 1] = kx
        sy[b + 1] = ky
    u = 0
    for a in range(n):
        if u == 0 or sx[a] != sx[u - 1] or sy[a] != sy[u - 1]:
            sx[u] = sx[a]
            sy[u] = sy[a]
            u += 1
    if u <= 2:
        for a in range(u):
            hx[a] = sx[a]
            hy[a] = sy[a]
        return u
    k = 0
    for a in range(u):
        while k >= 2 and _cross_nb(hx[k - 2], hy[k - 2], hx[k - 1], hy[k - 1], sx[a], sy[a]) <= 0:
            k -= 1
        hx[k] = sx[a]
        hy[k] = sy[a]
        k += 1
    t = k + 1
    for a in range(u - 2, -1, -1):
        while k >= t and _cross_nb(hx[k - 2], hy[k - 2], hx[k - 1], hy[k - 1], sx[a], sy[a]) <= 0:
            k -= 1
        hx[k] = sx[a]
        hy[k] = sy[a]
        k += 1
    return k - 1


@njit
def _inconv_nb(px, py, hx, hy, m):
    if m == 1:
        return 0.5 if (px == hx[0] and py == hy[0]) else 1.0
    if m == 2:
        if _cross_nb(hx[0], hy[0], hx[1], hy[1], px, py) != 0:
            return 1.0
        if min(hx[0], hx[1]) <= px <= max(hx[0], hx[1]) and min(hy[0], hy[1]) <= py <= max(hy[0], hy[1]):
            return 0.5
        return 1.0
    on_line = False
    for k in range(m):
        k2 = k + 1 if k + 1 < m else 0
        c = _cross_nb(hx[k], hy[k], hx[k2], hy[k2], px, py)
        if c < 0:
            return 1.0
        if c == 0:
            on_line = True
    return 0.5 if on_line else 0.0


@njit
def _fitness_batch_nb(cands, others, prey, d_min, mode, out):
    M = cands.shape[0]
    K = others.shape[0]
    N = K + 1
    px = prey[0]
    py = prey[1]

    s_oth = 0.0
    q0 = np.zeros(4)
    g0 = np.zeros(9)
    xs = np.empty(N, dtype=np.int64)
    ys = np.empty(N, dtype=np.int64)
    for k in range(K):
        dx = others[k, 0] - px
        dy = others[k, 1] - py
        s_oth += math.sqrt(dx * dx + dy * dy)
        _bin_quad(dx, dy, q0)
        _bin_3x3(dx, dy, g0)
        xs[k + 1] = others[k, 0]
        ys[k + 1] = others[k, 1]
    sx = np.empty(N, dtype=np.int64)
    sy = np.empty(N, dtype=np.int64)
    hx = np.empty(2 * N + 1, dtype=np.int64)
    hy = np.empty(2 * N + 1, dtype=np.int64)
    q = np.empty(4)
    g = np.empty(9)

    for m in range(M):
        cx = cands[m, 0]
        cy = cands[m, 1]
        nnd = np.inf
        for k in range(K):
            dx = cx - others[k, 0]
            dy = cy - others[k, 1]
            d = math.sqrt(dx * dx + dy * dy)
            if d < nnd:
                nnd = d
        repel = math.exp(-2.0 * (nnd - d_min)) if nnd < d_min else 1.0

        dcx = cx - px
        dcy = cy - py
        expanse = (s_oth + math.sqrt(dcx * dcx + dcy * dcy)) / N

        if mode == 0:
            q[:] = q0
            _bin_quad(dcx, dcy, q)
            unif = _std4(q[0], q[1], q[2], q[3])
        else:
            g[:] = g0
            _bin_3x3(dcx, dcy, g)
            unif = _std4(g[1], g[3], g[5], g[7]) + _std4(g[0], g[2], g[6], g[8])

        xs[0] = cx
        ys[0] = cy
        nh = _hull_nb(xs, ys, N, sx, sy, hx, hy)
        closure = _inconv_nb(px, py, hx, hy, nh)

        out[m, 0] = repel
        out[m, 1] = closure
        out[m, 2] = expanse
        out[m, 3] = unif
        out[m, 4] = repel * (closure + expanse + unif)


@njit
def _nnd_batch_nb(v, sn, sn_ang, out):
    for m in range(v.shape[0]):
        vx = v[m, 0]
        vy = v[m, 1]
        if vx == 0.0 and vy == 0.0:
            out[m, 0] = 0
            out[m, 1] = 0
            continue
        a = math.atan2(vy, vx)
        best = 0
        bd = np.inf
        for k in range(8):
            d = abs(a - sn_ang[k])
            if d > math.pi:
                d = 2.0 * math.pi - d
            if d < bd:
                bd = d
                best = k
        out[m, 0] = sn[best, 0]
        out[m, 1] = sn[best, 1]


@njit
def _nbn_batch_nb(prop, rx, ry, r, ring, ring_ang, width, height, out):
    for m in range(prop.shape[0]):
        dx = prop[m, 0] - rx
        dy = prop[m, 1] - ry
        if max(abs(dx), abs(dy)) <= r:
            x = prop[m, 0]
            y = prop[m, 1]
        else:
            a = math.atan2(dy, dx)
            best = 0
            bd = np.inf
            for k in range(ring.shape[0]):
                d = abs(a - ring_ang[k])
                if d > math.pi:
                    d = 2.0 * math.pi - d
                if d < bd:
                    bd = d
                    best = k
            x = rx + ring[best, 0]
            y = ry + ring[best, 1]
        out[m, 0] = min(max(x, 0), width - 1)
        out[m, 1] = min(max(y, 0), height - 1)


# ---------------------------------------------------------------- numpy side


def _std4_np(a, b, c, d):
    m = (a + b + c + d) / 4.0
    return np.sqrt(((a - m) ** 2 + (b - m) ** 2 + (c - m) ** 2 + (d - m) ** 2) / 4.0)


def _quad_bins_np(dx, dy):
    """(M, 4) quadrant contributions for offsets ``dx, dy`` from the prey."""
    q = np.zeros((dx.shape[0], 4))
    centre = (dx == 0) & (dy == 0)
    vert = (dx == 0) & ~centre
    horiz = (dy == 0) & ~centre
    strict = (dx != 0) & (dy != 0)
    q[centre] += 0.25
    q[vert & (dy > 0), 0:2] += 0.5
    q[vert & (dy < 0), 2:4] += 0.5
    q[np.ix_(horiz & (dx > 0), [1, 3])] += 0.5
    q[np.ix_(horiz & (dx < 0), [0, 2])] += 0.5
    row = np.where(dy > 0, 0, 1)
    col = np.where(dx < 0, 0, 1)
    idx = np.nonzero(strict)[0]
    q[idx, 2 * row[idx] + col[idx]] += 1.0
    return q


def _grid_bins_np(dx, dy):
    g = np.zeros((dx.shape[0], 9))
    r = np.where(dy > 0, 0, np.where(dy == 0, 1, 2))
    c = np.where(dx < 0, 0, np.where(dx == 0, 1, 2))
    g[np.arange(dx.shape[0]), 3 * r + c] += 1.0
    return g


def _fitness_batch_np(cands, others, prey, d_min, mode, out):
    K = others.shape[0]
    N = K + 1
    px, py = int(prey[0]), int(prey[1])

    s_oth = 0.0
    for k in range(K):
        dx = int(others[k, 0]) - px
        dy = int(others[k, 1]) - py
        s_oth += math.sqrt(dx * dx + dy * dy)

    if K:
        ddx = cands[:, None, 0] - others[None, :, 0]
        ddy = cands[:, None, 1] - others[None, :, 1]
        nnd = np.sqrt((ddx * ddx + ddy * ddy).astype(np.float64)).min(axis=1)
    else:
        nnd = np.full(cands.shape[0], np.inf)
    repel = np.ones(cands.shape[0])
    close = nnd < d_min
    repel[close] = np.exp(-2.0 * (nnd[close] - d_min))

    dcx = cands[:, 0] - px
    dcy = cands[:, 1] - py
    expanse = (s_oth + np.sqrt((dcx * dcx + dcy * dcy).astype(np.float64))) / N

    odx = others[:, 0] - px
    ody = others[:, 1] - py
    if mode == QUAD:
        q = _quad_bins_np(odx, ody).sum(axis=0) + _quad_bins_np(dcx, dcy)
        unif = _std4_np(q[:, 0], q[:, 1], q[:, 2], q[:, 3])
    else:
        g = _grid_bins_np(odx, ody).sum(axis=0) + _grid_bins_np(dcx, dcy)
        unif = _std4_np(g[:, 1], g[:, 3], g[:, 5], g[:, 7]) + _std4_np(g[:, 0], g[:, 2], g[:, 6], g[:, 8])

    rest = [tuple(p) for p in others.tolist()]
    closure = np.array([inconv((px, py), convex_hull([tuple(c)] + rest)) for c in cands.tolist()])

    out[:, 0] = repel
    out[:, 1] = closure
    out[:, 2] = expanse
    out[:, 3] = unif
    out[:, 4] = repel * (closure + expanse + unif)


def _nnd_batch_np(v, sn, sn_ang, out):
    a = np.arctan2(v[:, 1], v[:, 0])
    d = np.abs(a[:, None] - sn_ang[None, :])
    d = np.where(d > math.pi, 2.0 * math.pi - d, d)
    best = np.argmin(d, axis=1)
    out[:] = sn[best]
    out[(v[:, 0] == 0.0) & (v[:, 1] == 0.0)] = 0


def _nbn_batch_np(prop, rx, ry, r, ring, ring_ang, width, height, out):
    dx = prop[:, 0] - rx
    dy = prop[:, 1] - ry
    inside = np.maximum(np.abs(dx), np.abs(dy)) <= r
    a = np.arctan2(dy, dx).astype(np.float64)
    d = np.abs(a[:, None] - ring_ang[None, :])
    d = np.where(d > math.pi, 2.0 * math.pi - d, d)
    best = np.argmin(d, axis=1)
    res = np.where(inside[:, None], prop, np.array([rx, ry]) + ring[best])
    out[:, 0] = np.clip(res[:, 0], 0, width - 1)
    out[:, 1] = np.clip(res[:, 1], 0, height - 1)


# ---------------------------------------------------------------- dispatch


def fitness_batch(cands, others, prey, d_min: float = 1.0, mode: int = QUAD) -> np.ndarray:
    """Fitness breakdown of each candidate composed with ``others``.

    ``cands`` is ``(M, 2)``, ``others`` the ``(K, 2)`` real predators of the
    other subpopulations. Returns an ``(M, 5)`` float array.
    """
    cands = np.ascontiguousarray(cands, dtype=np.int64).reshape(-1, 2)
    others = np.ascontiguousarray(others, dtype=np.int64).reshape(-1, 2)
    prey = np.asarray(prey, dtype=np.int64)
    out = np.empty((cands.shape[0], 5))
    if _accel.USE_NUMBA:
        _fitness_batch_nb(cands, others, prey, float(d_min), int(mode), out)
    else:
        _fitness_batch_np(cands, others, prey, float(d_min), int(mode), out)
    return out


def nnd_batch(v) -> np.ndarray:
    """Quantize each row of ``v`` to the nearest-angle unit step (zero stays zero)."""
    v = np.ascontiguousarray(v, dtype=np.float64).reshape(-1, 2)
    out = np.empty(v.shape, dtype=np.int64)
    if _accel.USE_NUMBA:
        _nnd_batch_nb(v, SN_ARRAY, SN_ANGLES, out)
    else:
        _nnd_batch_np(v, SN_ARRAY, SN_ANGLES, out)
    return out


def nbn_batch(prop, real, r: int, width: int, height: int) -> np.ndarray:
    """Project proposals into the Chebyshev-``r`` vicinity of ``real``, then into the world."""
    prop = np.ascontiguousarray(prop, dtype=np.int64).reshape(-1, 2)
    ring, ring_ang = vicinity_ring(int(r))
    out = np.empty(prop.shape, dtype=np.int64)
    rx, ry = int(real[0]), int(real[1])
    if _accel.USE_NUMBA:
        _nbn_batch_nb(prop, rx, ry, int(r), ring, ring_ang, int(width), int(height), out)
    else:
        _nbn_batch_np(prop, rx, ry, int(r), ring, ring_ang, int(width), int(height), out)
    return out
