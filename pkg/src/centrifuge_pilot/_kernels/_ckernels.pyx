# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pixel-loop kernels.

Each function here has a bit-identical twin in ``_pykernels``; the two are
cross-checked by the test suite.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fmod, sqrt
from libc.stdlib cimport malloc, free

cnp.import_array()

# round(tan(22.5 deg) * 2**15); 67.5 deg bound is its reciprocal
DEF TG22 = 13573


def median_u8(const cnp.uint8_t[:, ::1] img, int k):
    """k x k median with edge replication (Huang's sliding histogram)."""
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef int half = k // 2
    cdef int rank = (k * k) // 2
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out_arr = np.empty((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    cdef int hist[256]
    cdef Py_ssize_t y, x, yy, xx, ry, cx_add, cx_del
    cdef int med, below, v
    cdef int *rows = <int *> malloc(k * sizeof(int))
    try:
        for y in range(h):
            for yy in range(k):
                ry = y + yy - half
                rows[yy] = 0 if ry < 0 else (h - 1 if ry >= h else ry)
            for v in range(256):
                hist[v] = 0
            for yy in range(k):
                for xx in range(-half, half + 1):
                    cx_add = 0 if xx < 0 else (w - 1 if xx >= w else xx)
                    hist[img[rows[yy], cx_add]] += 1
            # med is the smallest value whose cumulative count exceeds rank;
            # below counts window values strictly less than med
            med = 0
            below = 0
            while below + hist[med] <= rank:
                below += hist[med]
                med += 1
            out[y, 0] = med
            for x in range(1, w):
                cx_del = x - half - 1
                cx_del = 0 if cx_del < 0 else cx_del
                cx_add = x + half
                cx_add = w - 1 if cx_add >= w else cx_add
                for yy in range(k):
                    v = img[rows[yy], cx_del]
                    hist[v] -= 1
                    if v < med:
                        below -= 1
                    v = img[rows[yy], cx_add]
                    hist[v] += 1
                    if v < med:
                        below += 1
                while below > rank:
                    med -= 1
                    below -= hist[med]
                while below + hist[med] <= rank:
                    below += hist[med]
                    med += 1
                out[y, x] = med
    finally:
        free(rows)
    return out_arr


def nms_hysteresis(const cnp.int32_t[:, ::1] mag, const cnp.int32_t[:, ::1] gx,
                   const cnp.int32_t[:, ::1] gy, int low, int high):
    """Non-maximum suppression (4 direction bins) then 8-connected hysteresis."""
    cdef Py_ssize_t h = mag.shape[0], w = mag.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] cand_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] cand = cand_arr
    cdef Py_ssize_t y, x, n, top, sy, sx, ny, nx
    cdef long long ax, ay, tg22x, tg67x
    cdef int m, prev, nxt, dy, dx
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            m = mag[y, x]
            if m < low or m == 0:
                continue
            ax = gx[y, x]
            ay = gy[y, x]
            if ax < 0:
                ax = -ax
            if ay < 0:
                ay = -ay
            tg22x = ax * TG22
            tg67x = tg22x + (ax << 16)
            ay = ay << 15
            if ay < tg22x:
                prev = mag[y, x - 1]
                nxt = mag[y, x + 1]
            elif ay > tg67x:
                prev = mag[y - 1, x]
                nxt = mag[y + 1, x]
            elif (gx[y, x] < 0) == (gy[y, x] < 0):
                prev = mag[y - 1, x - 1]
                nxt = mag[y + 1, x + 1]
            else:
                prev = mag[y - 1, x + 1]
                nxt = mag[y + 1, x - 1]
            if m > prev and m >= nxt:
                cand[y, x] = 2 if m >= high else 1

    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    cdef Py_ssize_t *stack = <Py_ssize_t *> malloc(h * w * sizeof(Py_ssize_t))
    try:
        for y in range(h):
            for x in range(w):
                if cand[y, x] != 2 or out[y, x]:
                    continue
                top = 0
                stack[top] = y * w + x
                top += 1
                out[y, x] = 1
                while top > 0:
                    top -= 1
                    n = stack[top]
                    sy = n // w
                    sx = n - sy * w
                    for dy in range(-1, 2):
                        ny = sy + dy
                        if ny < 0 or ny >= h:
                            continue
                        for dx in range(-1, 2):
                            nx = sx + dx
                            if nx < 0 or nx >= w:
                                continue
                            if cand[ny, nx] and not out[ny, nx]:
                                out[ny, nx] = 1
                                stack[top] = ny * w + nx
                                top += 1
    finally:
        free(stack)
    return out_arr


def hough_vote(const cnp.int64_t[::1] xs, const cnp.int64_t[::1] ys,
               const cnp.float64_t[::1] ux, const cnp.float64_t[::1] uy,
               Py_ssize_t acc_h, Py_ssize_t acc_w, double dp, int r_min, int r_max):
    """Cast center votes along +/- gradient for every radius in [r_min, r_max].

    A ray never votes twice in a row for the same cell.
    """
    cdef cnp.ndarray[cnp.int32_t, ndim=2] acc_arr = np.zeros((acc_h, acc_w), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] acc = acc_arr
    cdef Py_ssize_t e, n = xs.shape[0], ci, cj, cell, prev
    cdef int r, s
    cdef double sign, cx, cy
    for e in range(n):
        for s in range(2):
            sign = 1.0 if s == 0 else -1.0
            prev = -1
            for r in range(r_min, r_max + 1):
                cx = xs[e] + (sign * r) * ux[e]
                cy = ys[e] + (sign * r) * uy[e]
                ci = <Py_ssize_t> floor(cx / dp + 0.5)
                cj = <Py_ssize_t> floor(cy / dp + 0.5)
                if ci < 0 or cj < 0 or ci >= acc_w or cj >= acc_h:
                    prev = -1
                    continue
                cell = cj * acc_w + ci
                if cell != prev:
                    acc[cj, ci] += 1
                    prev = cell
    return acc_arr


# neighbour offsets, counterclockwise on screen starting east (row axis down)
cdef int DR[8]
cdef int DC[8]
DR[:] = [0, -1, -1, -1, 0, 1, 1, 1]
DC[:] = [1, 1, 0, -1, -1, -1, 0, 1]


cdef inline int _dir(Py_ssize_t r0, Py_ssize_t c0, Py_ssize_t r1, Py_ssize_t c1):
    cdef int d
    for d in range(8):
        if r0 + DR[d] == r1 and c0 + DC[d] == c1:
            return d
    return -1


def outer_borders(const cnp.uint8_t[:, ::1] mask):
    """Suzuki-Abe border following (8-connectivity); returns outermost outer borders.

    Each border is an (N, 2) int64 array of (x, y) points in raster order of
    its starting pixel.
    """
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] f_arr = np.zeros((h + 2, w + 2), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] f = f_arr
    cdef Py_ssize_t i, j, i1, j1, i2, j2, i3, j3, i4, j4, rr, cc
    cdef int nbd = 1, lnbd, d, d0, k, found, east_zero
    cdef bint is_outer
    for i in range(h):
        for j in range(w):
            if mask[i, j]:
                f[i + 1, j + 1] = 1
    # border id -> (is_outer, parent); id 1 is the frame (a hole border)
    kinds = [False, False]
    parents = [0, 0]
    result = []
    for i in range(1, h + 1):
        lnbd = 1
        for j in range(1, w + 1):
            if f[i, j] == 0:
                continue
            if f[i, j] == 1 and f[i, j - 1] == 0:
                is_outer = True
                i2 = i
                j2 = j - 1
            elif f[i, j] >= 1 and f[i, j + 1] == 0:
                is_outer = False
                i2 = i
                j2 = j + 1
                if f[i, j] > 1:
                    lnbd = f[i, j]
            else:
                if f[i, j] != 1:
                    lnbd = f[i, j] if f[i, j] > 0 else -f[i, j]
                continue
            nbd += 1
            if is_outer:
                parent = parents[lnbd] if kinds[lnbd] else lnbd
            else:
                parent = lnbd if kinds[lnbd] else parents[lnbd]
            kinds.append(is_outer)
            parents.append(parent)
            pts = []
            d0 = _dir(i, j, i2, j2)
            found = -1
            for k in range(8):
                d = (d0 - k + 8) % 8
                if f[i + DR[d], j + DC[d]] != 0:
                    found = d
                    break
            if found < 0:
                f[i, j] = -nbd
                pts.append((j - 1, i - 1))
            else:
                i1 = i + DR[found]
                j1 = j + DC[found]
                i2 = i1
                j2 = j1
                i3 = i
                j3 = j
                while True:
                    pts.append((j3 - 1, i3 - 1))
                    d0 = _dir(i3, j3, i2, j2)
                    east_zero = 0
                    for k in range(1, 9):
                        d = (d0 + k) % 8
                        rr = i3 + DR[d]
                        cc = j3 + DC[d]
                        if f[rr, cc] != 0:
                            i4 = rr
                            j4 = cc
                            break
                        if d == 0:
                            east_zero = 1
                    if east_zero:
                        f[i3, j3] = -nbd
                    elif f[i3, j3] == 1:
                        f[i3, j3] = nbd
                    if i4 == i and j4 == j and i3 == i1 and j3 == j1:
                        break
                    i2 = i3
                    j2 = j3
                    i3 = i4
                    j3 = j4
            if is_outer and parent == 1:
                result.append(np.array(pts, dtype=np.int64))
            if f[i, j] != 1:
                lnbd = f[i, j] if f[i, j] > 0 else -f[i, j]
    return result


def clahe_interp(const cnp.uint8_t[:, ::1] img, const cnp.uint8_t[:, :, ::1] luts,
                 const cnp.intp_t[::1] y0, const cnp.intp_t[::1] y1, const cnp.float64_t[::1] wy,
                 const cnp.intp_t[::1] x0, const cnp.intp_t[::1] x1, const cnp.float64_t[::1] wx):
    """Bilinear blend of the four surrounding tile mappings, rounded half up."""
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1], y, x
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out_arr = np.empty((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    cdef double top, bot, val, a, b
    cdef int v
    for y in range(h):
        for x in range(w):
            v = img[y, x]
            a = 1.0 - wx[x]
            b = wx[x]
            top = a * luts[y0[y], x0[x], v] + b * luts[y0[y], x1[x], v]
            bot = a * luts[y1[y], x0[x], v] + b * luts[y1[y], x1[x], v]
            val = floor((1.0 - wy[y]) * top + wy[y] * bot + 0.5)
            if val < 0:
                val = 0
            elif val > 255:
                val = 255
            out[y, x] = <cnp.uint8_t> val
    return out_arr


def hsv_range_masks(const cnp.uint8_t[:, :, ::1] rgb, const cnp.float64_t[:, ::1] bounds,
                    const cnp.uint8_t[:, ::1] keep):
    """Per-range membership masks straight from RGB8.

    ``bounds`` rows are (h_lo, h_hi, s_lo, s_hi, v_lo, v_hi); hue wraps when
    h_lo > h_hi. Pixels with ``keep == 0`` are never set. The HSV arithmetic
    mirrors the numpy conversion operation for operation.
    """
    cdef Py_ssize_t h = rgb.shape[0], w = rgb.shape[1], nr = bounds.shape[0], y, x, k
    cdef cnp.ndarray[cnp.uint8_t, ndim=3] out_arr = np.zeros((nr, h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, :, ::1] out = out_arr
    cdef double r, g, b, mx, mn, delta, hue, sat, val, m
    cdef bint hue_ok
    for y in range(h):
        for x in range(w):
            if not keep[y, x]:
                continue
            r = rgb[y, x, 0]
            g = rgb[y, x, 1]
            b = rgb[y, x, 2]
            mx = r if r > g else g
            mx = mx if mx > b else b
            mn = r if r < g else g
            mn = mn if mn < b else b
            delta = mx - mn
            if delta > 0:
                if mx == r:
                    # numpy's floored modulo
                    m = fmod((g - b) / delta, 6.0)
                    if m != 0:
                        if m < 0:
                            m = m + 6.0
                    else:
                        m = 0.0
                    hue = m
                elif mx == g:
                    hue = (b - r) / delta + 2.0
                else:
                    hue = (r - g) / delta + 4.0
                hue = hue * 60.0
                if hue >= 360.0:
                    hue = hue - 360.0
            else:
                hue = 0.0
            sat = delta / mx if mx > 0 else 0.0
            val = mx / 255.0
            for k in range(nr):
                if bounds[k, 0] <= bounds[k, 1]:
                    hue_ok = hue >= bounds[k, 0] and hue <= bounds[k, 1]
                else:
                    hue_ok = hue >= bounds[k, 0] or hue <= bounds[k, 1]
                if (hue_ok and sat >= bounds[k, 2] and sat <= bounds[k, 3]
                        and val >= bounds[k, 4] and val <= bounds[k, 5]):
                    out[k, y, x] = 1
    return out_arr
