"""Connected-component labelling and marker-controlled watershed flooding.

Label maps are ``int32`` arrays. In a watershed result ``-1`` marks boundary
pixels where two regions meet, and positive values are region ids. Before
flooding, ``0`` means "not yet labelled".
"""

from __future__ import annotations

from typing import Tuple

import numpy as np
from numba import njit

from .imgcore import BinaryMask, GrayImage, as_gray, as_mask

LabelMap = np.ndarray

BOUNDARY = -1
UNKNOWN = 0

_DY8 = np.array([-1, -1, -1, 0, 0, 1, 1, 1])
_DX8 = np.array([-1, 0, 1, -1, 1, -1, 0, 1])
_DY4 = np.array([-1, 0, 0, 1])
_DX4 = np.array([0, -1, 1, 0])


@njit(cache=True)
def _label(mask, dy, dx):
    H, W = mask.shape
    labels = np.zeros((H, W), dtype=np.int32)
    stack = np.empty(H * W, dtype=np.int64)
    count = 0
    for y0 in range(H):
        for x0 in range(W):
            if not mask[y0, x0] or labels[y0, x0] != 0:
                continue
            count += 1
            labels[y0, x0] = count
            top = 0
            stack[top] = y0 * W + x0
            top += 1
            while top > 0:
                top -= 1
                p = stack[top]
                y = p // W
                x = p % W
                for k in range(dy.shape[0]):
                    ny = y + dy[k]
                    nx = x + dx[k]
                    if 0 <= ny < H and 0 <= nx < W and mask[ny, nx] and labels[ny, nx] == 0:
                        labels[ny, nx] = count
                        stack[top] = ny * W + nx
                        top += 1
    return labels, count


def connected_components(mask: BinaryMask, connectivity: int = 8) -> Tuple[LabelMap, int]:
    """Label foreground components; ids ``1..k`` follow raster-scan discovery order.

    Background pixels get label 0.
    """
    m = np.ascontiguousarray(as_mask(mask))
    if connectivity == 8:
        dy, dx = _DY8, _DX8
    elif connectivity == 4:
        dy, dx = _DY4, _DX4
    else:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    labels, count = _label(m, dy, dx)
    return labels, int(count)


def largest_component(mask: BinaryMask) -> BinaryMask:
    """Keep the biggest 8-connected component; equal sizes go to the first discovered."""
    labels, count = connected_components(mask)
    if count <= 1:
        return labels > 0
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    sizes[0] = 0
    return labels == int(np.argmax(sizes))


@njit(cache=True)
def _flood(relief, labels):
    # bucket queue over the 256 relief levels, FIFO inside a level
    H, W = relief.shape
    n = H * W
    head = np.full(256, -1, dtype=np.int64)
    tail = np.full(256, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    queued = np.zeros(n, dtype=np.bool_)
    level = 256

    for y in range(H):
        for x in range(W):
            if labels[y, x] <= 0:
                continue
            for k in range(4):
                ny = y + _DY4[k]
                nx = x + _DX4[k]
                if 0 <= ny < H and 0 <= nx < W and labels[ny, nx] == 0:
                    q = ny * W + nx
                    if queued[q]:
                        continue
                    queued[q] = True
                    v = relief[ny, nx]
                    if tail[v] < 0:
                        head[v] = q
                    else:
                        nxt[tail[v]] = q
                    tail[v] = q
                    if v < level:
                        level = v

    while level < 256:
        p = head[level]
        if p < 0:
            level += 1
            continue
        head[level] = nxt[p]
        if head[level] < 0:
            tail[level] = -1
        y = p // W
        x = p % W
        found = 0
        conflict = False
        for k in range(4):
            ny = y + _DY4[k]
            nx = x + _DX4[k]
            if 0 <= ny < H and 0 <= nx < W:
                lab = labels[ny, nx]
                if lab > 0:
                    if found == 0:
                        found = lab
                    elif lab != found:
                        conflict = True
        if conflict or found == 0:
            labels[y, x] = -1
            continue
        labels[y, x] = found
        for k in range(4):
            ny = y + _DY4[k]
            nx = x + _DX4[k]
            if 0 <= ny < H and 0 <= nx < W and labels[ny, nx] == 0:
                q = ny * W + nx
                if queued[q]:
                    continue
                queued[q] = True
                v = relief[ny, nx]
                if tail[v] < 0:
                    head[v] = q
                else:
                    nxt[tail[v]] = q
                tail[v] = q
                if v < level:
                    level = v
    return labels


def watershed(gradient: GrayImage, markers: LabelMap) -> LabelMap:
    """Marker-controlled watershed by priority flooding (Meyer).

    Unlabelled 4-neighbours of the markers are queued by relief value, ties in
    insertion order. A popped pixel joins the region of its labelled
    neighbours when they all agree and becomes a ``-1`` boundary otherwise;
    only labelled pixels extend the front. Unlabelled pockets that are sealed
    off by boundary pixels, and so never reached, are also set to ``-1``.

    Args:
        gradient: 8-bit relief to flood.
        markers: ``0`` for pixels to flood, positive ids for seeds. At least two
            distinct ids are required.

    Returns:
        A new label map with no ``0`` left; seed pixels keep their ids.
    """
    relief = np.ascontiguousarray(as_gray(gradient))
    mk = np.asarray(markers)
    if mk.shape != relief.shape:
        raise ValueError(f"markers shape {mk.shape} does not match relief shape {relief.shape}")
    if len(np.unique(mk[mk > 0])) < 2:
        raise ValueError("watershed needs at least two distinct positive marker labels")
    labels = np.where(mk > 0, mk, 0).astype(np.int32)
    labels = _flood(relief, np.ascontiguousarray(labels))
    labels[labels == 0] = BOUNDARY
    return labels
