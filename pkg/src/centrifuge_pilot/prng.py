"""SplitMix64 streams and fixed-point Gaussian samples.

Everything random in the package comes from here so that a seed means the
same bytes on every platform: the generator is pure 64-bit integer
arithmetic, and normals are built from integer lookup tables rather than
calls into the platform's libm.
"""

import math

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

_TABLE_BITS = 16
_FRAC_BITS = 16
_SIGMA_BITS = 8


def splitmix64(seed, index):
    """Output number ``index`` (0-based) of a SplitMix64 stream seeded with ``seed``."""
    z = (seed + _GOLDEN * (index + 1)) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64_array(seed, start, count):
    """Vectorised :func:`splitmix64` for indices start .. start+count-1."""
    with np.errstate(over="ignore"):
        idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
        z = np.uint64(seed & MASK64) + np.uint64(_GOLDEN) * idx
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def _box_muller_tables():
    # radius and cosine factors at the midpoints of 2**16 uniform cells, in
    # 16-bit fixed point; rounding to integers here is what makes everything
    # downstream independent of libm
    n = 1 << _TABLE_BITS
    scale = 1 << _FRAC_BITS
    mid = [(k + 0.5) / n for k in range(n)]
    radius = np.array([round(scale * math.sqrt(-2.0 * math.log(u))) for u in mid], dtype=np.int64)
    cosine = np.array([round(scale * math.cos(2.0 * math.pi * u)) for u in mid], dtype=np.int64)
    return radius, cosine


RADIUS_TABLE, COSINE_TABLE = _box_muller_tables()


def _normal_fixed(bits):
    i1 = (bits >> np.uint64(48)).astype(np.intp)
    i2 = ((bits >> np.uint64(32)) & np.uint64(0xFFFF)).astype(np.intp)
    return RADIUS_TABLE[i1] * COSINE_TABLE[i2]  # scaled by 2**32


def standard_normal(seed, start, count):
    """N(0, 1) samples, one per stream output; exact multiples of 2**-32."""
    return _normal_fixed(splitmix64_array(seed, start, count)).astype(np.float64) * 2.0 ** -32


def gaussian_noise(seed, shape, sigma):
    """Integer-valued N(0, sigma) field.

    sigma is quantised to 1/256 gray level and each sample is rounded half up
    with an arithmetic shift, so no floating point is involved.
    """
    n = int(np.prod(shape))
    sigma_q = int(round(sigma * (1 << _SIGMA_BITS)))
    shift = 2 * _FRAC_BITS + _SIGMA_BITS
    prod = _normal_fixed(splitmix64_array(seed, 0, n)) * sigma_q
    return ((prod + (1 << (shift - 1))) >> shift).reshape(shape)


class Stream:
    """Sequential draws from one SplitMix64 stream."""

    def __init__(self, seed):
        self.seed = int(seed) & MASK64
        self.index = 0

    def next_u64(self):
        v = splitmix64(self.seed, self.index)
        self.index += 1
        return v

    def uniform(self, lo=0.0, hi=1.0):
        u = (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)
        return lo + (hi - lo) * u

    def integer(self, n):
        """Uniform integer in [0, n)."""
        return self.next_u64() % n

    def choice(self, seq):
        return seq[self.integer(len(seq))]

    def normal(self):
        v = float(standard_normal(self.seed, self.index, 1)[0])
        self.index += 1
        return v
