"""Hot pixel-loop kernels with a compiled core and a pure-Python fallback.

The compiled module is preferred at import; set ``CENTRIFUGE_PILOT_PURE=1``
to force the fallback. Both expose the same six functions:

``median_u8(img, k)``
    k x k median filter of a C-contiguous uint8 image, edge-replicated.
``nms_hysteresis(mag, gx, gy, low, high)``
    Canny thinning and hysteresis on int32 gradient planes.
``hough_vote(xs, ys, ux, uy, acc_h, acc_w, dp, r_min, r_max)``
    Gradient-direction center voting into an int32 accumulator.
``outer_borders(mask)``
    Suzuki-Abe outermost borders of a uint8 mask as (x, y) point arrays.
``clahe_interp(img, luts, y0, y1, wy, x0, x1, wx)``
    Bilinear blend of per-tile CLAHE mappings.
``hsv_range_masks(rgb, bounds, keep)``
    HSV box membership masks computed straight from RGB8.
"""

import os

from . import _pykernels as python_backend

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and os.environ.get("CENTRIFUGE_PILOT_PURE", "") in ("", "0"):
    backend = compiled_backend
    BACKEND_NAME = "compiled"
else:
    backend = python_backend
    BACKEND_NAME = "python"


def available_backends():
    """Name -> module for every importable backend."""
    out = {"python": python_backend}
    if compiled_backend is not None:
        out["compiled"] = compiled_backend
    return out


def median_u8(img, k):
    return backend.median_u8(img, k)


def nms_hysteresis(mag, gx, gy, low, high):
    return backend.nms_hysteresis(mag, gx, gy, low, high)


def hough_vote(xs, ys, ux, uy, acc_h, acc_w, dp, r_min, r_max):
    return backend.hough_vote(xs, ys, ux, uy, acc_h, acc_w, dp, r_min, r_max)


def outer_borders(mask):
    return backend.outer_borders(mask)


def clahe_interp(img, luts, y0, y1, wy, x0, x1, wx):
    return backend.clahe_interp(img, luts, y0, y1, wy, x0, x1, wx)


def hsv_range_masks(rgb, bounds, keep):
    return backend.hsv_range_masks(rgb, bounds, keep)
