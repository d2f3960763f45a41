"""Method 1: hair removal followed by marker-controlled watershed segmentation.

Stages::

    median filter (per channel)
      -> hair mask: top-hat per channel, max over channels, fixed threshold,
         binary closing, binary dilation
      -> inpainting of the hair mask
      -> gray, OTSU (lesion below threshold)
      -> markers: open/close cleanup, distance transform for the sure
         foreground, dilation for the sure background
      -> watershed on the morphological gradient of the gray image
      -> lesion regions plus watershed lines, largest component
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .distance import edt
from .errors import NoLesionError
from .filters import median_filter_rgb
from .imgcore import BinaryMask, RgbImage, as_mask, as_rgb, rgb_to_gray, split_channels
from .inpaint import inpaint_rgb
from .morphology import (
    black_tophat, close_b, dilate_b, disk, morphological_gradient, open_b, white_tophat,
)
from .threshold import binarize_lesion
from .watershed import BOUNDARY, LabelMap, connected_components, largest_component, watershed

BACKGROUND_LABEL = 1
FIRST_LESION_LABEL = 2


@dataclass(frozen=True)
class MarkerSet:
    sure_foreground: BinaryMask
    sure_background: BinaryMask
    unknown: BinaryMask
    markers: LabelMap


def build_hair_mask(img: RgbImage, cfg: PipelineConfig = PipelineConfig()) -> BinaryMask:
    rgb = as_rgb(img)
    se = disk(cfg.tophat_radius)
    tophat = black_tophat if cfg.tophat_polarity == "black" else white_tophat
    response = np.zeros(rgb.shape[:2], dtype=np.uint8)
    for channel in split_channels(rgb):
        np.maximum(response, tophat(channel, se), out=response)
    hair = response > cfg.hair_threshold
    if not hair.any():
        return hair
    hair = close_b(hair, disk(cfg.hair_close_radius))
    return dilate_b(hair, disk(cfg.hair_dilate_radius))


def create_markers(lesion_binary: BinaryMask, cfg: PipelineConfig = PipelineConfig()) -> MarkerSet:
    """Derive watershed seeds from a binarised lesion candidate.

    The sure foreground is where the distance to the candidate's edge exceeds
    ``fg_dist_fraction`` of its maximum; the sure background is everything
    outside the candidate dilated by ``bg_dilate_radius``. When that dilation
    swallows the whole frame the background falls back to the complement of
    the candidate itself.

    Raises:
        NoLesionError: the cleaned candidate is empty or fills the frame.
    """
    binary = as_mask(lesion_binary)
    se = disk(cfg.marker_clean_radius)
    cleaned = close_b(open_b(binary, se), se)
    if not cleaned.any():
        raise NoLesionError("no lesion candidate found after OTSU and cleanup")
    if cleaned.all():
        raise NoLesionError("lesion candidate covers the whole image")

    sure_bg = ~dilate_b(cleaned, disk(cfg.bg_dilate_radius))
    if not sure_bg.any():
        sure_bg = ~cleaned
    dist = edt(cleaned)
    sure_fg = dist > cfg.fg_dist_fraction * dist.max()
    unknown = ~(sure_fg | sure_bg)

    labels, _ = connected_components(sure_fg)
    markers = np.where(labels > 0, labels + (FIRST_LESION_LABEL - 1), 0).astype(np.int32)
    markers[sure_bg] = BACKGROUND_LABEL
    return MarkerSet(sure_fg, sure_bg, unknown, markers)


def segment_method1(img: RgbImage, cfg: PipelineConfig = PipelineConfig()) -> BinaryMask:
    """Segment the lesion in an RGB image with the watershed pipeline.

    Raises:
        NoLesionError: nothing separable from the background was found.
    """
    filtered = median_filter_rgb(as_rgb(img), cfg.median_radius)
    hair = build_hair_mask(filtered, cfg)
    clean = inpaint_rgb(filtered, hair, cfg.inpaint_radius, cfg.inpaint_method,
                        cfg.diffusion_iterations)
    gray = rgb_to_gray(clean)
    candidate = binarize_lesion(gray, cfg.lesion_polarity)
    seeds = create_markers(candidate, cfg)
    relief = morphological_gradient(gray, disk(1))
    labels = watershed(relief, seeds.markers)
    lesion = (labels >= FIRST_LESION_LABEL) | (labels == BOUNDARY)
    return largest_component(lesion)
