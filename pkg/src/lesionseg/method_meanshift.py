"""Method 2: border filling, hair removal, pyramid mean shift and OTSU.

Stages::

    gray
      -> border filling: dilate, open, grow from the four corners through
         dark pixels, paint the grown region with a bright value
      -> hair removal: top-hat mask, TELEA inpainting
      -> replicate to three channels, mean-shift filter, back to gray
      -> OTSU (lesion below threshold)
      -> binary closing then opening, largest component

``color_mode = "color"`` keeps the colour image instead: the border and hair
masks are still computed on gray, but filling, inpainting and mean shift run
on the RGB data.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Tuple

import numpy as np
from numba import njit

from .config import PipelineConfig
from .errors import NoLesionError
from .imgcore import (
    BinaryMask, GrayImage, RgbImage, as_gray, as_rgb, gray_to_rgb, rgb_to_gray,
)
from .inpaint import inpaint_rgb, inpaint_telea
from .meanshift import MeanShiftParams, mean_shift_filter
from .morphology import (
    black_tophat, close_b, dilate, dilate_b, disk, open_b, opening, white_tophat,
)
from .threshold import binarize_lesion
from .watershed import largest_component


@njit(cache=True)
def _grow(img, seeds, limit):
    H, W = img.shape
    grown = np.zeros((H, W), dtype=np.bool_)
    queue = np.empty(H * W, dtype=np.int64)
    head = 0
    tail = 0
    for i in range(seeds.shape[0]):
        x = seeds[i, 0]
        y = seeds[i, 1]
        if img[y, x] < limit and not grown[y, x]:
            grown[y, x] = True
            queue[tail] = y * W + x
            tail += 1
    while head < tail:
        p = queue[head]
        head += 1
        y = p // W
        x = p % W
        for k in range(4):
            ny = y + (1 if k == 0 else (-1 if k == 1 else 0))
            nx = x + (1 if k == 2 else (-1 if k == 3 else 0))
            if 0 <= ny < H and 0 <= nx < W and not grown[ny, nx] and img[ny, nx] < limit:
                grown[ny, nx] = True
                queue[tail] = ny * W + nx
                tail += 1
    return grown


def region_grow(img: GrayImage, seeds: Iterable[Tuple[int, int]], max_intensity: int) -> BinaryMask:
    """Breadth-first growth over 4-neighbours admitting pixels darker than ``max_intensity``.

    Seeds are ``(x, y)`` pairs; a seed that is not itself darker than the
    limit contributes nothing.

    Raises:
        ValueError: a seed lies outside the image.
    """
    gray = np.ascontiguousarray(as_gray(img))
    H, W = gray.shape
    pts = np.array(list(seeds), dtype=np.int64).reshape(-1, 2)
    for x, y in pts:
        if not (0 <= x < W and 0 <= y < H):
            raise ValueError(f"seed ({x}, {y}) outside {W}x{H} image")
    return _grow(gray, pts, int(max_intensity))


def corner_seeds(shape: Sequence[int]):
    H, W = shape[:2]
    return [(0, 0), (W - 1, 0), (0, H - 1), (W - 1, H - 1)]


def border_mask(gray: GrayImage, cfg: PipelineConfig = PipelineConfig()) -> BinaryMask:
    """Dark frame pixels reachable from the image corners."""
    g = as_gray(gray)
    work = opening(dilate(g, disk(cfg.border_dilate_radius)), disk(cfg.border_open_radius))
    return region_grow(work, corner_seeds(g.shape), cfg.border_threshold)


def fill_borders(gray: GrayImage, cfg: PipelineConfig = PipelineConfig()) -> GrayImage:
    """Paint the corner-connected dark frame with ``border_fill_value``."""
    g = as_gray(gray)
    out = g.copy()
    out[border_mask(g, cfg)] = cfg.border_fill_value
    return out


def hair_mask_gray(gray: GrayImage, cfg: PipelineConfig = PipelineConfig()) -> BinaryMask:
    tophat = black_tophat if cfg.tophat_polarity == "black" else white_tophat
    hair = tophat(as_gray(gray), disk(cfg.tophat_radius)) > cfg.hair_threshold
    if hair.any() and cfg.hair_dilate_radius:
        hair = dilate_b(hair, disk(cfg.hair_dilate_radius))
    return hair


def preprocess_method2(img: RgbImage, cfg: PipelineConfig = PipelineConfig()) -> RgbImage:
    """Everything up to (not including) mean shift; returns the mean-shift input."""
    rgb = as_rgb(img)
    gray = rgb_to_gray(rgb)
    frame = border_mask(gray, cfg)
    filled = gray.copy()
    filled[frame] = cfg.border_fill_value
    hair = hair_mask_gray(filled, cfg)
    if cfg.color_mode == "gray":
        return gray_to_rgb(inpaint_telea(filled, hair, cfg.inpaint_radius))
    color = rgb.copy()
    color[frame] = cfg.border_fill_value
    return inpaint_rgb(color, hair, cfg.inpaint_radius, "telea")


def segment_method2(img: RgbImage, cfg: PipelineConfig = PipelineConfig()) -> BinaryMask:
    """Segment the lesion in an RGB image with the mean-shift pipeline.

    Raises:
        NoLesionError: the image has no contrast or post-processing leaves nothing.
    """
    shifted = mean_shift_filter(preprocess_method2(img, cfg), MeanShiftParams.from_config(cfg))
    binary = binarize_lesion(rgb_to_gray(shifted), cfg.lesion_polarity)
    se = disk(cfg.post_morph_radius)
    binary = open_b(close_b(binary, se), se)
    if not binary.any():
        raise NoLesionError("nothing left after post-processing")
    return largest_component(binary)
