"""Rank-order (median) filtering."""

from __future__ import annotations

import numpy as np
from numba import njit

from .imgcore import GrayImage, RgbImage, as_gray, as_rgb, merge_channels, split_channels


@njit(cache=True)
def _median_rows(padded, radius, H, W):
    out = np.empty((H, W), dtype=np.uint8)
    hist = np.zeros(256, dtype=np.int64)
    k = 2 * radius + 1
    rank = (k * k) // 2 + 1  # window size is odd: the median is the rank-th smallest
    for y in range(H):
        hist[:] = 0
        for yy in range(y, y + k):
            for xx in range(k):
                hist[padded[yy, xx]] += 1
        for x in range(W):
            if x > 0:
                for yy in range(y, y + k):
                    hist[padded[yy, x - 1]] -= 1
                    hist[padded[yy, x + k - 1]] += 1
            acc = 0
            v = 0
            while True:
                acc += hist[v]
                if acc >= rank:
                    break
                v += 1
            out[y, x] = v
    return out


def median_filter_gray(img: GrayImage, radius: int) -> GrayImage:
    """Median over the ``(2r+1) x (2r+1)`` window with edge replication.

    A sliding 256-bin histogram is updated column by column along each row.
    """
    gray = as_gray(img)
    radius = int(radius)
    if radius < 0:
        raise ValueError(f"median radius must be >= 0, got {radius}")
    if radius == 0:
        return gray.copy()
    padded = np.pad(gray, radius, mode="edge")
    return _median_rows(padded, radius, gray.shape[0], gray.shape[1])


def median_filter_rgb(img: RgbImage, radius: int) -> RgbImage:
    """Channel-wise median filter."""
    r, g, b = split_channels(as_rgb(img))
    return merge_channels(
        median_filter_gray(r, radius),
        median_filter_gray(g, radius),
        median_filter_gray(b, radius),
    )
