"""Inpainting of masked pixels (hair) from the surrounding skin.

Two schemes are provided:

* ``telea`` -- fast-marching inpainting. Arrival times are propagated inwards
  from the mask boundary with the upwind quadratic update; each pixel is
  filled when it is finalised, as a normalised weighted average of the known
  pixels within ``radius``. The weight of a known pixel ``q`` for the pixel
  ``p`` being filled is the product of a direction factor
  ``|(p - q) . N| / |p - q|`` (``N`` the unit arrival-time gradient at ``p``),
  a distance factor ``1 / |p - q|**2`` and a level-set factor
  ``1 / (1 + |T(p) - T(q)|)``.
* ``diffusion`` -- harmonic (Laplace) fill by Jacobi relaxation, the PDE
  alternative to fast marching.

Both are averaging schemes: pixels outside the mask are never touched and
filled values stay within the range of the unmasked input.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .imgcore import BinaryMask, GrayImage, RgbImage, as_gray, as_mask, as_rgb

KNOWN, BAND, INSIDE = 0, 1, 2

_DIR_EPS = 1e-6

METHODS = ("telea", "diffusion")

_DY4 = np.array([1, -1, 0, 0])
_DX4 = np.array([0, 0, 1, -1])


@njit(cache=True)
def _heap_push(keys, ids, size, key, ident):
    i = size
    keys[i] = key
    ids[i] = ident
    while i > 0:
        parent = (i - 1) // 2
        if keys[parent] < keys[i] or (keys[parent] == keys[i] and ids[parent] <= ids[i]):
            break
        keys[parent], keys[i] = keys[i], keys[parent]
        ids[parent], ids[i] = ids[i], ids[parent]
        i = parent
    return size + 1


@njit(cache=True)
def _heap_pop(keys, ids, size):
    key = keys[0]
    ident = ids[0]
    size -= 1
    keys[0] = keys[size]
    ids[0] = ids[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        child = left
        right = left + 1
        if right < size and (
            keys[right] < keys[left] or (keys[right] == keys[left] and ids[right] < ids[left])
        ):
            child = right
        if keys[i] < keys[child] or (keys[i] == keys[child] and ids[i] <= ids[child]):
            break
        keys[child], keys[i] = keys[i], keys[child]
        ids[child], ids[i] = ids[i], ids[child]
        i = child
    return key, ident, size


@njit(cache=True)
def _solve_arrival(T, flag, y, x):
    H, W = T.shape
    a = np.inf
    if x > 0 and flag[y, x - 1] == KNOWN:
        a = T[y, x - 1]
    if x < W - 1 and flag[y, x + 1] == KNOWN and T[y, x + 1] < a:
        a = T[y, x + 1]
    b = np.inf
    if y > 0 and flag[y - 1, x] == KNOWN:
        b = T[y - 1, x]
    if y < H - 1 and flag[y + 1, x] == KNOWN and T[y + 1, x] < b:
        b = T[y + 1, x]
    if a == np.inf and b == np.inf:
        return np.inf
    if a == np.inf:
        return b + 1.0
    if b == np.inf:
        return a + 1.0
    d = a - b
    if abs(d) >= 1.0:
        return min(a, b) + 1.0
    return 0.5 * (a + b + math.sqrt(2.0 - d * d))


@njit(cache=True)
def _arrival_gradient(T, flag, y, x):
    H, W = T.shape
    tp = T[y, x]
    has_l = x > 0 and flag[y, x - 1] != INSIDE
    has_r = x < W - 1 and flag[y, x + 1] != INSIDE
    if has_l and has_r:
        gx = 0.5 * (T[y, x + 1] - T[y, x - 1])
    elif has_r:
        gx = T[y, x + 1] - tp
    elif has_l:
        gx = tp - T[y, x - 1]
    else:
        gx = 0.0
    has_u = y > 0 and flag[y - 1, x] != INSIDE
    has_d = y < H - 1 and flag[y + 1, x] != INSIDE
    if has_u and has_d:
        gy = 0.5 * (T[y + 1, x] - T[y - 1, x])
    elif has_d:
        gy = T[y + 1, x] - tp
    elif has_u:
        gy = tp - T[y - 1, x]
    else:
        gy = 0.0
    return gx, gy


@njit(cache=True)
def _fill_pixel(img, T, flag, y, x, radius, half, inv_d2, ux, uy):
    # half[k]: half-width of the disk row at vertical offset k - radius;
    # inv_d2, ux, uy: 1/|r|^2 and the unit vector of r = p - q per offset
    H, W, C = img.shape
    gx, gy = _arrival_gradient(T, flag, y, x)
    gn = math.sqrt(gx * gx + gy * gy)
    if gn > 0.0:
        nx = gx / gn
        ny = gy / gn
    else:
        nx = 0.0
        ny = 0.0
    # with no usable gradient every direction counts fully
    floor = _DIR_EPS if gn > 0.0 else 1.0
    acc = np.zeros(C)
    wsum = 0.0
    tp = T[y, x]
    for k in range(2 * radius + 1):
        qy = y - radius + k
        if qy < 0 or qy >= H:
            continue
        ky = 2 * radius - k  # row of ry = y - qy in the offset tables
        x0 = max(0, x - half[k])
        x1 = min(W - 1, x + half[k])
        for qx in range(x0, x1 + 1):
            # branch-free: unknown pixels get weight 0 (their T may be inf)
            known = 1.0 if flag[qy, qx] == KNOWN else 0.0
            kx = x - qx + radius
            direction = max(abs(ux[ky, kx] * nx + uy[ky, kx] * ny), floor)
            w = known * direction * inv_d2[ky, kx] / (1.0 + abs(T[qy, qx] - tp))
            wsum += w
            for c in range(C):
                acc[c] += w * img[qy, qx, c]
    if wsum > 0.0:
        for c in range(C):
            img[y, x, c] = acc[c] / wsum


def _offset_tables(radius: int):
    r = np.arange(-radius, radius + 1)
    ry, rx = np.meshgrid(r, r, indexing="ij")
    d2 = (rx * rx + ry * ry).astype(np.float64)
    dist = np.sqrt(d2)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_d2 = np.where(d2 > 0, 1.0 / d2, 0.0)
        ux = np.where(d2 > 0, rx / dist, 0.0)
        uy = np.where(d2 > 0, ry / dist, 0.0)
    half = np.floor(np.sqrt(radius * radius - r * r)).astype(np.int64)
    return half, inv_d2, ux, uy


@njit(cache=True)
def _telea(img, mask, radius, half, inv_d2, ux, uy):
    H, W, C = img.shape
    T = np.full((H, W), np.inf)
    flag = np.full((H, W), KNOWN, dtype=np.int8)
    n_inside = 0
    for y in range(H):
        for x in range(W):
            if mask[y, x]:
                flag[y, x] = INSIDE
                n_inside += 1
            else:
                T[y, x] = 0.0

    cap = 5 * n_inside + 1
    keys = np.empty(cap)
    ids = np.empty(cap, dtype=np.int64)
    size = 0
    order = np.empty(n_inside, dtype=np.int64)
    n_filled = 0

    for y in range(H):
        for x in range(W):
            if flag[y, x] == INSIDE:
                t = _solve_arrival(T, flag, y, x)
                if t < np.inf:
                    T[y, x] = t
                    flag[y, x] = BAND
                    size = _heap_push(keys, ids, size, t, y * W + x)

    while size > 0:
        t, ident, size = _heap_pop(keys, ids, size)
        y = ident // W
        x = ident % W
        if flag[y, x] == KNOWN or t > T[y, x]:
            continue
        flag[y, x] = KNOWN
        _fill_pixel(img, T, flag, y, x, radius, half, inv_d2, ux, uy)
        order[n_filled] = ident
        n_filled += 1
        for k in range(4):
            ny = y + _DY4[k]
            nx = x + _DX4[k]
            if ny < 0 or ny >= H or nx < 0 or nx >= W or flag[ny, nx] == KNOWN:
                continue
            tn = _solve_arrival(T, flag, ny, nx)
            if tn < T[ny, nx]:
                T[ny, nx] = tn
                flag[ny, nx] = BAND
                size = _heap_push(keys, ids, size, tn, ny * W + nx)
    return T, order[:n_filled]


def _check_args(shape, mask, radius):
    m = as_mask(mask, shape)
    if radius is not None and int(radius) < 1:
        raise ValueError(f"inpainting radius must be >= 1, got {radius}")
    return m


def telea_fill(img: np.ndarray, mask: BinaryMask, radius: int):
    """Run fast-marching inpainting on an ``(H, W, C)`` array of any channel count.

    Returns:
        ``(filled, arrival, order)``: the filled float image, the arrival-time
        field (``inf`` where the front never arrived) and the raster indices of
        masked pixels in the order they were filled.
    """
    work = np.array(img, dtype=np.float64, order="C")
    m = np.ascontiguousarray(as_mask(mask, work.shape))
    T, order = _telea(work, m, int(radius), *_offset_tables(int(radius)))
    return work, T, order


def _to_uint8(arr: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(arr + 0.5), 0, 255).astype(np.uint8)


def inpaint_telea(img: GrayImage, mask: BinaryMask, radius: int = 20) -> GrayImage:
    """Fill masked pixels by fast marching from the mask boundary.

    Unmasked pixels come back bit-exact. Masked pixels that the front cannot
    reach (a mask covering the whole image) keep their input values.

    Raises:
        ValueError: mask shape differs from the image, or ``radius < 1``.
    """
    gray = as_gray(img)
    m = _check_args(gray.shape, mask, radius)
    if not m.any():
        return gray.copy()
    filled, _, _ = telea_fill(gray[..., None], m, radius)
    out = gray.copy()
    out[m] = _to_uint8(filled[..., 0])[m]
    return out


@njit(cache=True)
def _jacobi(values, mask, iterations, history):
    H, W = values.shape
    n = 0
    for y in range(H):
        for x in range(W):
            if mask[y, x]:
                n += 1
    ys = np.empty(n, dtype=np.int64)
    xs = np.empty(n, dtype=np.int64)
    k = 0
    for y in range(H):
        for x in range(W):
            if mask[y, x]:
                ys[k] = y
                xs[k] = x
                k += 1
    nxt = np.empty(n)
    for it in range(iterations):
        for i in range(n):
            y = ys[i]
            x = xs[i]
            s = 0.0
            c = 0
            if y > 0:
                s += values[y - 1, x]
                c += 1
            if y < H - 1:
                s += values[y + 1, x]
                c += 1
            if x > 0:
                s += values[y, x - 1]
                c += 1
            if x < W - 1:
                s += values[y, x + 1]
                c += 1
            nxt[i] = s / c if c else values[y, x]
        change = 0.0
        for i in range(n):
            d = abs(nxt[i] - values[ys[i], xs[i]])
            if d > change:
                change = d
            values[ys[i], xs[i]] = nxt[i]
        history[it] = change


def diffusion_fill(img: GrayImage, mask: BinaryMask, iterations: int):
    """Harmonic fill of one channel; returns the float field and the max change per sweep."""
    gray = as_gray(img)
    m = as_mask(mask, gray.shape)
    iterations = int(iterations)
    if iterations < 1:
        raise ValueError(f"diffusion needs at least one iteration, got {iterations}")
    values = gray.astype(np.float64)
    history = np.zeros(iterations)
    if not m.any() or m.all():
        return values, history

    known = (~m).astype(np.float64)
    padded_v = np.pad(values * known, 1)
    padded_k = np.pad(known, 1)
    H, W = gray.shape
    s = np.zeros_like(values)
    c = np.zeros_like(values)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            s += padded_v[1 + dy:1 + dy + H, 1 + dx:1 + dx + W]
            c += padded_k[1 + dy:1 + dy + H, 1 + dx:1 + dx + W]
    global_mean = values[~m].mean()
    init = np.where(c > 0, s / np.maximum(c, 1), global_mean)
    values[m] = init[m]

    _jacobi(values, np.ascontiguousarray(m), iterations, history)
    return values, history


def inpaint_diffusion(img: GrayImage, mask: BinaryMask, iterations: int = 300) -> GrayImage:
    """Fill masked pixels with the discrete harmonic interpolant of their surroundings.

    Masked pixels start at the mean of their unmasked 8-neighbours (or the
    mean of all unmasked pixels when they have none) and are then relaxed
    with ``iterations`` Jacobi sweeps of the 4-neighbour average; unmasked
    pixels act as a fixed boundary.
    """
    gray = as_gray(img)
    m = as_mask(mask, gray.shape)
    values, _ = diffusion_fill(gray, m, iterations)
    out = gray.copy()
    out[m] = _to_uint8(values)[m]
    return out


def inpaint_rgb(img: RgbImage, mask: BinaryMask, radius: int = 20, method: str = "telea",
                iterations: int = 300) -> RgbImage:
    """Apply the chosen scalar inpainting to each channel.

    For ``telea`` the fill order and weights depend only on the mask, so the
    three channels are marched together in one pass.
    """
    rgb = as_rgb(img)
    if method not in METHODS:
        raise ValueError(f"unknown inpainting method {method!r}; expected one of {METHODS}")
    m = _check_args(rgb.shape, mask, radius)
    if not m.any():
        return rgb.copy()
    out = rgb.copy()
    if method == "telea":
        filled, _, _ = telea_fill(rgb, m, radius)
        out[m] = _to_uint8(filled)[m]
    else:
        for c in range(3):
            out[..., c] = inpaint_diffusion(rgb[..., c], m, iterations)
    return out
