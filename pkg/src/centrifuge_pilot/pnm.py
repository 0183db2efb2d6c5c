"""Binary PGM (P5) and PPM (P6) image I/O, maxval 255."""

import os

import numpy as np

from .errors import ParameterError


def _tokens(data, count):
    """Read ``count`` whitespace-separated header tokens, skipping # comments."""
    out = []
    pos = 0
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise ParameterError("truncated PNM header")
        if data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        out.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return out, pos + 1


def decode(data):
    """Decode P5/P6 bytes to a uint8 array (H, W) or (H, W, 3)."""
    (magic, w, h, maxval), pos = _tokens(data, 4)
    if magic not in (b"P5", b"P6"):
        raise ParameterError(f"unsupported PNM magic {magic!r}")
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise ParameterError("malformed PNM header") from exc
    if maxval != 255:
        raise ParameterError("only maxval 255 is supported")
    if w < 1 or h < 1:
        raise ParameterError("image dimensions must be positive")
    channels = 3 if magic == b"P6" else 1
    size = w * h * channels
    raster = data[pos:pos + size]
    if len(raster) != size:
        raise ParameterError("truncated PNM raster")
    arr = np.frombuffer(raster, dtype=np.uint8)
    return arr.reshape((h, w, 3) if channels == 3 else (h, w)).copy()


def encode(img):
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise ParameterError("PNM encoding needs uint8 pixels")
    if img.ndim == 2:
        magic = b"P5"
    elif img.ndim == 3 and img.shape[2] == 3:
        magic = b"P6"
    else:
        raise ParameterError(f"cannot encode image of shape {img.shape}")
    h, w = img.shape[:2]
    return magic + b"\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img).tobytes()


def read(path):
    with open(path, "rb") as fh:
        return decode(fh.read())


def write(path, img):
    data = encode(img)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(data)
