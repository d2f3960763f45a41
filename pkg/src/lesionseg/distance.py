"""Exact Euclidean distance transform.

Two separable passes in squared-integer space: a 1-D distance along each row,
then a lower envelope of parabolas down each column (Meijster, Roerdink and
Hesselink's formulation, whose separator uses integer floor division and is
therefore exact). Square roots are taken only at the very end.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .imgcore import BinaryMask, FloatImage, as_mask


@njit(cache=True)
def _row_pass(fg, inf):
    H, W = fg.shape
    g = np.empty((H, W), dtype=np.int64)
    for y in range(H):
        d = inf
        for x in range(W):
            if not fg[y, x]:
                d = 0
            elif d < inf:
                d += 1
            g[y, x] = d
        d = inf
        for x in range(W - 1, -1, -1):
            if not fg[y, x]:
                d = 0
            elif d < inf:
                d += 1
            if d < g[y, x]:
                g[y, x] = d
    return g


@njit(cache=True)
def _column_pass(g):
    H, W = g.shape
    out = np.empty((H, W), dtype=np.int64)
    s = np.empty(H, dtype=np.int64)  # parabola apex rows on the envelope
    t = np.empty(H, dtype=np.int64)  # first row each parabola owns
    for x in range(W):
        q = 0
        s[0] = 0
        t[0] = 0
        for u in range(1, H):
            gu = g[u, x] * g[u, x]
            while q >= 0:
                gs = g[s[q], x] * g[s[q], x]
                if (t[q] - s[q]) ** 2 + gs <= (t[q] - u) ** 2 + gu:
                    break
                q -= 1
            if q < 0:
                q = 0
                s[0] = u
            else:
                gs = g[s[q], x] * g[s[q], x]
                sep = (u * u - s[q] * s[q] + gu - gs) // (2 * (u - s[q]))
                w = 1 + sep
                if w < H:
                    q += 1
                    s[q] = u
                    t[q] = w
        for u in range(H - 1, -1, -1):
            gs = g[s[q], x]
            out[u, x] = (u - s[q]) ** 2 + gs * gs
            if u == t[q]:
                q -= 1
    return out


def edt_squared(mask: BinaryMask) -> np.ndarray:
    """Squared distance to the nearest background pixel, as int64.

    Without any background pixel every entry is ``(width + height)**2``.
    """
    fg = as_mask(mask)
    H, W = fg.shape
    sentinel = H + W
    if fg.all():
        return np.full((H, W), sentinel * sentinel, dtype=np.int64)
    g = _row_pass(np.ascontiguousarray(fg), sentinel)
    return _column_pass(g)


def edt(mask: BinaryMask) -> FloatImage:
    """Euclidean distance from each pixel to the nearest background (False) pixel.

    Background pixels map to 0. A mask with no background at all maps every
    pixel to ``width + height``, a finite value larger than any real distance.
    """
    return np.sqrt(edt_squared(mask).astype(np.float64))
