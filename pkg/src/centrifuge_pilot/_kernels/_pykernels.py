"""Pure-Python/numpy twins of the compiled kernels.

Same signatures and bit-identical results as ``_ckernels``; used when the
extension is not built or when ``CENTRIFUGE_PILOT_PURE=1``.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

TG22 = 13573

_ROW_CHUNK = 64


def median_u8(img, k):
    half = k // 2
    h, w = img.shape
    padded = np.pad(img, half, mode="edge")
    out = np.empty((h, w), dtype=np.uint8)
    kk = k * k
    mid = kk // 2
    for y0 in range(0, h, _ROW_CHUNK):
        y1 = min(h, y0 + _ROW_CHUNK)
        win = sliding_window_view(padded[y0:y1 + 2 * half], (k, k))
        flat = win.reshape(win.shape[0], win.shape[1], kk)
        out[y0:y1] = np.partition(flat, mid, axis=-1)[..., mid]
    return out


def nms_hysteresis(mag, gx, gy, low, high):
    h, w = mag.shape
    cand = np.zeros((h, w), dtype=np.uint8)
    if h < 3 or w < 3:
        return cand
    m = mag[1:-1, 1:-1]
    ax = np.abs(gx[1:-1, 1:-1]).astype(np.int64)
    ay = np.abs(gy[1:-1, 1:-1]).astype(np.int64) << 15
    tg22x = ax * TG22
    tg67x = tg22x + (ax << 16)
    horiz = ay < tg22x
    vert = ~horiz & (ay > tg67x)
    diag = ~horiz & ~vert
    same = (gx[1:-1, 1:-1] < 0) == (gy[1:-1, 1:-1] < 0)

    def nb(dy, dx):
        return mag[1 + dy:h - 1 + dy, 1 + dx:w - 1 + dx]

    prev = np.where(horiz, nb(0, -1),
                    np.where(vert, nb(-1, 0),
                             np.where(diag & same, nb(-1, -1), nb(-1, 1))))
    nxt = np.where(horiz, nb(0, 1),
                   np.where(vert, nb(1, 0),
                            np.where(diag & same, nb(1, 1), nb(1, -1))))
    keep = (m >= low) & (m != 0) & (m > prev) & (m >= nxt)
    inner = cand[1:-1, 1:-1]
    inner[keep] = 1
    inner[keep & (m >= high)] = 2

    labels, n = ndimage.label(cand > 0, structure=np.ones((3, 3), dtype=bool))
    if n == 0:
        return np.zeros((h, w), dtype=np.uint8)
    strong_labels = np.zeros(n + 1, dtype=bool)
    strong_labels[labels[cand == 2]] = True
    strong_labels[0] = False
    return strong_labels[labels].astype(np.uint8)


def hough_vote(xs, ys, ux, uy, acc_h, acc_w, dp, r_min, r_max):
    acc = np.zeros((acc_h, acc_w), dtype=np.int32)
    if len(xs) == 0:
        return acc
    radii = np.arange(r_min, r_max + 1, dtype=np.float64)
    xs = xs.astype(np.float64)[:, None]
    ys = ys.astype(np.float64)[:, None]
    for sign in (1.0, -1.0):
        sr = sign * radii[None, :]
        cx = xs + sr * ux[:, None]
        cy = ys + sr * uy[:, None]
        ci = np.floor(cx / dp + 0.5).astype(np.int64)
        cj = np.floor(cy / dp + 0.5).astype(np.int64)
        valid = (ci >= 0) & (cj >= 0) & (ci < acc_w) & (cj < acc_h)
        cell = np.where(valid, cj * acc_w + ci, -1)
        vote = valid.copy()
        # in-bounds samples along a ray are contiguous, so comparing with the
        # previous radius is the same as comparing with the previous vote
        vote[:, 1:] &= cell[:, 1:] != cell[:, :-1]
        np.add.at(acc.reshape(-1), cell[vote], 1)
    return acc


_DR = (0, -1, -1, -1, 0, 1, 1, 1)
_DC = (1, 1, 0, -1, -1, -1, 0, 1)
_DIR = {(dr, dc): d for d, (dr, dc) in enumerate(zip(_DR, _DC))}


def outer_borders(mask):
    h, w = mask.shape
    f = np.zeros((h + 2, w + 2), dtype=np.int32)
    f[1:-1, 1:-1] = mask != 0
    nz = f != 0
    # only pixels touching a 4-neighbour zero can start a border or carry a label
    touch = nz & ~(np.roll(nz, 1, 0) & np.roll(nz, -1, 0) & np.roll(nz, 1, 1) & np.roll(nz, -1, 1))
    ii, jj = np.nonzero(touch)
    fl = f.tolist()
    kinds = [False, False]
    parents = [0, 0]
    result = []
    nbd = 1
    lnbd = 1
    row = -1
    for i, j in zip(ii.tolist(), jj.tolist()):
        if i != row:
            row = i
            lnbd = 1
        v = fl[i][j]
        if v == 1 and fl[i][j - 1] == 0:
            is_outer = True
            i2, j2 = i, j - 1
        elif v >= 1 and fl[i][j + 1] == 0:
            is_outer = False
            i2, j2 = i, j + 1
            if v > 1:
                lnbd = v
        else:
            if v != 1:
                lnbd = abs(v)
            continue
        nbd += 1
        if is_outer:
            parent = parents[lnbd] if kinds[lnbd] else lnbd
        else:
            parent = lnbd if kinds[lnbd] else parents[lnbd]
        kinds.append(is_outer)
        parents.append(parent)
        pts = []
        d0 = _DIR[(i2 - i, j2 - j)]
        found = -1
        for k in range(8):
            d = (d0 - k) % 8
            if fl[i + _DR[d]][j + _DC[d]] != 0:
                found = d
                break
        if found < 0:
            fl[i][j] = -nbd
            pts.append((j - 1, i - 1))
        else:
            i1, j1 = i + _DR[found], j + _DC[found]
            i2, j2 = i1, j1
            i3, j3 = i, j
            while True:
                pts.append((j3 - 1, i3 - 1))
                d0 = _DIR[(i2 - i3, j2 - j3)]
                east_zero = False
                for k in range(1, 9):
                    d = (d0 + k) % 8
                    rr, cc = i3 + _DR[d], j3 + _DC[d]
                    if fl[rr][cc] != 0:
                        i4, j4 = rr, cc
                        break
                    if d == 0:
                        east_zero = True
                if east_zero:
                    fl[i3][j3] = -nbd
                elif fl[i3][j3] == 1:
                    fl[i3][j3] = nbd
                if i4 == i and j4 == j and i3 == i1 and j3 == j1:
                    break
                i2, j2 = i3, j3
                i3, j3 = i4, j4
        if is_outer and parent == 1:
            result.append(np.array(pts, dtype=np.int64))
        if fl[i][j] != 1:
            lnbd = abs(fl[i][j])
    return result


def clahe_interp(img, luts, y0, y1, wy, x0, x1, wx):
    v = img.astype(np.intp)
    r0 = y0[:, None]
    r1 = y1[:, None]
    c0 = x0[None, :]
    c1 = x1[None, :]
    a = (1.0 - wx)[None, :]
    b = wx[None, :]
    top = a * luts[r0, c0, v] + b * luts[r0, c1, v]
    bot = a * luts[r1, c0, v] + b * luts[r1, c1, v]
    out = (1.0 - wy)[:, None] * top + wy[:, None] * bot
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def hsv_range_masks(rgb, bounds, keep):
    r = rgb[..., 0].astype(np.float64)
    g = rgb[..., 1].astype(np.float64)
    b = rgb[..., 2].astype(np.float64)
    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = mx - mn
    chroma = delta > 0
    safe = np.where(chroma, delta, 1.0)
    hue = np.where(mx == r, np.mod((g - b) / safe, 6.0),
                   np.where(mx == g, (b - r) / safe + 2.0, (r - g) / safe + 4.0))
    hue *= 60.0
    hue[~chroma] = 0.0
    hue[hue >= 360.0] -= 360.0
    sat = np.divide(delta, mx, out=np.zeros_like(mx), where=mx > 0)
    val = mx / 255.0
    kept = keep != 0
    out = np.zeros((len(bounds),) + rgb.shape[:2], dtype=np.uint8)
    for k, (h_lo, h_hi, s_lo, s_hi, v_lo, v_hi) in enumerate(np.asarray(bounds).tolist()):
        if h_lo <= h_hi:
            hue_ok = (hue >= h_lo) & (hue <= h_hi)
        else:
            hue_ok = (hue >= h_lo) | (hue <= h_hi)
        out[k] = hue_ok & (sat >= s_lo) & (sat <= s_hi) & (val >= v_lo) & (val <= v_hi) & kept
    return out
