"""Flat grayscale and binary morphology with disk and square structuring elements.

All operators sample outside the image by edge replication. Erosion is the
minimum of ``img(p + q)`` over the element's offsets ``q`` and dilation the
maximum, so a constant image is left unchanged by every operator here.

Symmetric elements whose rows are contiguous runs (disks, squares) are
evaluated row-wise: the horizontal running extreme of every half-width the
element needs is built incrementally, then one shifted extreme per element
row is folded in. Arbitrary offset sets fall back to a direct offset scan.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .imgcore import BinaryMask, GrayImage, as_gray, as_mask

Offsets = Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class StructuringElement:
    """A flat neighbourhood given as ``(dx, dy)`` displacements around the anchor (0, 0)."""

    shape: str
    size: int
    offsets: Offsets = field(repr=False)

    def __post_init__(self):
        if not self.offsets:
            raise ValueError("structuring element must contain at least one offset")
        if (0, 0) not in self.offsets:
            raise ValueError("structuring element must contain its anchor (0, 0)")

    @classmethod
    def disk(cls, radius: int) -> "StructuringElement":
        """All offsets with ``dx**2 + dy**2 <= radius**2``."""
        radius = int(radius)
        if radius < 0:
            raise ValueError(f"disk radius must be >= 0, got {radius}")
        r2 = radius * radius
        offs = tuple(
            (dx, dy)
            for dy in range(-radius, radius + 1)
            for dx in range(-radius, radius + 1)
            if dx * dx + dy * dy <= r2
        )
        return cls("disk", radius, offs)

    @classmethod
    def square(cls, side: int) -> "StructuringElement":
        """All offsets with ``|dx|, |dy| <= side // 2``."""
        side = int(side)
        if side < 1:
            raise ValueError(f"square side must be >= 1, got {side}")
        h = side // 2
        offs = tuple((dx, dy) for dy in range(-h, h + 1) for dx in range(-h, h + 1))
        return cls("square", side, offs)

    @cached_property
    def extent(self) -> Tuple[int, int]:
        """Largest ``|dy|`` and ``|dx|``."""
        return (
            max(abs(dy) for _, dy in self.offsets),
            max(abs(dx) for dx, _ in self.offsets),
        )

    @cached_property
    def row_runs(self) -> Optional[Dict[int, int]]:
        """Map ``dy -> w`` when every row is the full run ``-w..w``, else None."""
        rows: Dict[int, set] = {}
        for dx, dy in self.offsets:
            rows.setdefault(dy, set()).add(dx)
        runs = {}
        for dy, dxs in rows.items():
            w = max(dxs)
            if dxs != set(range(-w, w + 1)):
                return None
            runs[dy] = w
        return runs

    def is_symmetric(self) -> bool:
        offs = set(self.offsets)
        return all((-dx, -dy) in offs for dx, dy in offs)


def disk(radius: int) -> StructuringElement:
    return StructuringElement.disk(radius)


def square(side: int) -> StructuringElement:
    return StructuringElement.square(side)


def _rank_extreme(arr: np.ndarray, se: StructuringElement, reduce: Callable) -> np.ndarray:
    H, W = arr.shape
    ry, rx = se.extent
    padded = np.pad(arr, ((ry, ry), (rx, rx)), mode="edge")

    runs = se.row_runs
    out = None
    if runs is not None:
        needed = set(runs.values())
        by_width = {}
        cur = padded[:, rx:rx + W]
        if 0 in needed:
            by_width[0] = cur
        for w in range(1, max(needed) + 1):
            cur = reduce(cur, reduce(padded[:, rx - w:rx - w + W], padded[:, rx + w:rx + w + W]))
            if w in needed:
                by_width[w] = cur
        for dy, w in runs.items():
            rows = by_width[w][ry + dy:ry + dy + H]
            out = rows.copy() if out is None else reduce(out, rows, out=out)
    else:
        for dx, dy in se.offsets:
            win = padded[ry + dy:ry + dy + H, rx + dx:rx + dx + W]
            out = win.copy() if out is None else reduce(out, win, out=out)
    return out


def _coerce(img):
    arr = np.asarray(img)
    if arr.dtype == np.bool_:
        return as_mask(arr)
    return as_gray(arr)


def erode(img: GrayImage, se: StructuringElement) -> GrayImage:
    return _rank_extreme(_coerce(img), se, np.minimum)


def dilate(img: GrayImage, se: StructuringElement) -> GrayImage:
    return _rank_extreme(_coerce(img), se, np.maximum)


def opening(img: GrayImage, se: StructuringElement) -> GrayImage:
    return dilate(erode(img, se), se)


def closing(img: GrayImage, se: StructuringElement) -> GrayImage:
    return erode(dilate(img, se), se)


# the operator names used throughout the literature
open = opening  # noqa: A001
close = closing


def white_tophat(img: GrayImage, se: StructuringElement) -> GrayImage:
    """Bright detail narrower than ``se``: ``img - opening(img)``."""
    gray = as_gray(img)
    diff = gray.astype(np.int16) - opening(gray, se).astype(np.int16)
    return np.clip(diff, 0, 255).astype(np.uint8)


def black_tophat(img: GrayImage, se: StructuringElement) -> GrayImage:
    """Dark detail narrower than ``se``: ``closing(img) - img``."""
    gray = as_gray(img)
    diff = closing(gray, se).astype(np.int16) - gray.astype(np.int16)
    return np.clip(diff, 0, 255).astype(np.uint8)


def morphological_gradient(img: GrayImage, se: StructuringElement) -> GrayImage:
    gray = as_gray(img)
    return (dilate(gray, se).astype(np.int16) - erode(gray, se).astype(np.int16)).astype(np.uint8)


def erode_b(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    return _rank_extreme(as_mask(mask), se, np.minimum)


def dilate_b(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    return _rank_extreme(as_mask(mask), se, np.maximum)


def open_b(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    return dilate_b(erode_b(mask, se), se)


def close_b(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    return erode_b(dilate_b(mask, se), se)


def mask_boundary(mask: BinaryMask) -> BinaryMask:
    """Foreground pixels removed by a disk(1) erosion."""
    m = as_mask(mask)
    return m & ~erode_b(m, disk(1))
