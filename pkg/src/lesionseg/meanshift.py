"""Joint spatial/colour mean-shift filtering with a coarse-to-fine pyramid.

Each pixel starts at its own position and colour and repeatedly moves to the
mean (position and colour) of the input pixels that lie within
``spatial_bandwidth`` of it spatially (Chebyshev distance) and within
``color_bandwidth`` in colour (L-infinity over channels). Iteration stops when
the joint shift drops below ``convergence_eps`` or after ``max_iterations``,
and the pixel takes the colour it converged to.

With ``pyramid_levels > 0`` the image is first box-downsampled by two that
many times and filtered at the coarsest scale. Going back up, each level is
initialised by nearest-neighbour upsampling of the level below. Pixels where
that initialisation is unreliable (upsampled colour more than
``color_bandwidth`` away from a 3x3 neighbour's upsampled colour, or from the
pixel's own input colour) are re-filtered from scratch; the others start
their iteration at the coarse colour, which normally passes the convergence
test after one update. Every output pixel is therefore a fixed point of the
finest-level update to within ``convergence_eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .imgcore import RgbImage, as_rgb


@dataclass(frozen=True)
class MeanShiftParams:
    spatial_bandwidth: int = 21
    color_bandwidth: float = 40.0
    pyramid_levels: int = 2
    max_iterations: int = 10
    convergence_eps: float = 1.0

    def __post_init__(self):
        if self.spatial_bandwidth < 1:
            raise ValueError("spatial_bandwidth must be >= 1")
        if self.color_bandwidth < 1:
            raise ValueError("color_bandwidth must be >= 1")
        if self.pyramid_levels < 0:
            raise ValueError("pyramid_levels must be >= 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    @classmethod
    def from_config(cls, cfg) -> "MeanShiftParams":
        return cls(cfg.spatial_bandwidth, cfg.color_bandwidth, cfg.pyramid_levels,
                   cfg.max_iterations, cfg.convergence_eps)


@njit(cache=True)
def _shift_gray(src, start, scale, sp, sr, max_iter, eps):
    # Single-channel specialisation on integers: ``src`` holds the level's
    # values times ``scale`` (box averages are multiples of 1/scale), so the
    # colour test and the window sums are exact integer arithmetic.
    H, W = src.shape
    out = np.empty((H, W))
    for y in range(H):
        for x in range(W):
            py = float(y)
            px = float(x)
            col = start[y, x]
            for _ in range(max_iter):
                y0 = max(0, int(math.ceil(py - sp)))
                y1 = min(H - 1, int(math.floor(py + sp)))
                x0 = max(0, int(math.ceil(px - sp)))
                x1 = min(W - 1, int(math.floor(px + sp)))
                # clamped to the value range so huge bandwidths cannot overflow
                lo = np.int32(max(-1.0, math.ceil((col - sr) * scale)))
                hi = np.int32(min(256.0 * scale, math.floor((col + sr) * scale)))
                cnt = 0
                sy = 0
                sx = 0
                sv = 0
                for qy in range(y0, y1 + 1):
                    rc = np.int32(0)
                    rx = np.int32(0)
                    rv = np.int64(0)
                    for qx in range(x0, x1 + 1):
                        v = src[qy, qx]
                        w = np.int32(1) if (v >= lo and v <= hi) else np.int32(0)
                        rc += w
                        rx += w * np.int32(qx)
                        rv += w * v
                    cnt += rc
                    sy += rc * qy
                    sx += rx
                    sv += rv
                if cnt == 0:
                    break
                ny = sy / cnt
                nx = sx / cnt
                nv = sv / cnt / scale
                shift = max(abs(ny - py), abs(nx - px), abs(nv - col))
                py = ny
                px = nx
                col = nv
                if shift < eps:
                    break
            out[y, x] = col
    return out


@njit(cache=True)
def _shift_color(src, start, sp, sr, max_iter, eps):
    H, W, C = src.shape
    out = np.empty((H, W, C))
    col = np.empty(C)
    acc = np.empty(C)
    for y in range(H):
        for x in range(W):
            py = float(y)
            px = float(x)
            for c in range(C):
                col[c] = start[y, x, c]
            for _ in range(max_iter):
                y0 = max(0, int(math.ceil(py - sp)))
                y1 = min(H - 1, int(math.floor(py + sp)))
                x0 = max(0, int(math.ceil(px - sp)))
                x1 = min(W - 1, int(math.floor(px + sp)))
                cnt = 0.0
                sy = 0.0
                sx = 0.0
                for c in range(C):
                    acc[c] = 0.0
                for qy in range(y0, y1 + 1):
                    for qx in range(x0, x1 + 1):
                        inside = True
                        for c in range(C):
                            if abs(src[qy, qx, c] - col[c]) > sr:
                                inside = False
                                break
                        if inside:
                            cnt += 1.0
                            sy += qy
                            sx += qx
                            for c in range(C):
                                acc[c] += src[qy, qx, c]
                if cnt == 0.0:
                    break
                ny = sy / cnt
                nx = sx / cnt
                shift = max(abs(ny - py), abs(nx - px))
                for c in range(C):
                    v = acc[c] / cnt
                    shift = max(shift, abs(v - col[c]))
                    col[c] = v
                py = ny
                px = nx
                if shift < eps:
                    break
            for c in range(C):
                out[y, x, c] = col[c]
    return out


def _downsample(img: np.ndarray) -> np.ndarray:
    H, W = img.shape[:2]
    ph, pw = H % 2, W % 2
    if ph or pw:
        img = np.pad(img, ((0, ph), (0, pw), (0, 0)), mode="edge")
    h2, w2 = img.shape[0] // 2, img.shape[1] // 2
    return img.reshape(h2, 2, w2, 2, -1).mean(axis=(1, 3))


def _upsample(img: np.ndarray, shape) -> np.ndarray:
    H, W = shape
    yi = np.minimum(np.arange(H) // 2, img.shape[0] - 1)
    xi = np.minimum(np.arange(W) // 2, img.shape[1] - 1)
    return img[yi][:, xi]


def _unreliable(init: np.ndarray, src: np.ndarray, sr: float) -> np.ndarray:
    H, W = init.shape[:2]
    flag = np.abs(init - src).max(axis=2) > sr
    padded = np.pad(init, ((1, 1), (1, 1), (0, 0)), mode="edge")
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy or dx:
                nb = padded[1 + dy:1 + dy + H, 1 + dx:1 + dx + W]
                flag |= np.abs(init - nb).max(axis=2) > sr
    return flag


def _filter_level(src, start, depth: int, p: MeanShiftParams):
    """Mean-shift every pixel of ``src``, starting each from its colour in ``start``.

    ``depth`` is the pyramid level of ``src``; its values are multiples of
    ``4 ** -depth``.
    """
    args = (float(p.spatial_bandwidth), float(p.color_bandwidth),
            int(p.max_iterations), float(p.convergence_eps))
    if src.shape[2] == 1:
        scale = 4.0 ** depth
        ints = np.rint(src[..., 0] * scale).astype(np.int32)
        out = _shift_gray(ints, np.ascontiguousarray(start[..., 0]), scale, *args)
        return out[..., None]
    return _shift_color(np.ascontiguousarray(src), np.ascontiguousarray(start), *args)


def mean_shift_filter(img: RgbImage, p: MeanShiftParams = MeanShiftParams()) -> RgbImage:
    rgb = as_rgb(img)
    gray_input = bool((rgb[..., 0] == rgb[..., 1]).all() and (rgb[..., 1] == rgb[..., 2]).all())
    # identical channels give identical windows, so filter one and replicate
    base = rgb[..., :1] if gray_input else rgb
    levels = [np.ascontiguousarray(base, dtype=np.float64)]
    for _ in range(p.pyramid_levels):
        if min(levels[-1].shape[:2]) < 2:
            break
        levels.append(np.ascontiguousarray(_downsample(levels[-1])))

    depth = len(levels) - 1
    result = _filter_level(levels[-1], levels[-1], depth, p)
    for src in reversed(levels[:-1]):
        depth -= 1
        init = _upsample(result, src.shape[:2])
        # unreliable pixels restart from their own colour; the rest start at
        # the coarse mode and usually settle after a single update
        redo = _unreliable(init, src, p.color_bandwidth)
        init[redo] = src[redo]
        result = _filter_level(src, init, depth, p)

    out = np.clip(np.floor(result + 0.5), 0, 255).astype(np.uint8)
    return np.repeat(out, 3, axis=2) if gray_input else out
