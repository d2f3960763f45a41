"""Deterministic synthetic dermoscopy-like images with exact ground truth.

Each image is a bright skin field (base 180-220) holding one dark elliptical
lesion (40-90), with per-pixel Gaussian texture noise of sigma 8. Optional
artefacts: thin dark hair strokes drawn over everything, and a dark circular
microscope vignette around the field of view. The ground-truth mask is the
rasterised ellipse (pixel centres inside it) and ignores the artefacts.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .imgcore import save_image, save_mask

NOISE_SIGMA = 8.0
SKIN_RANGE = (180, 220)
LESION_RANGE = (40, 90)
HAIR_RANGE = (20, 50)
VIGNETTE_RANGE = (10, 35)
DEFAULT_SIZE = 256
# per-channel offsets giving the field a warm skin tint
TINT = (12.0, 0.0, -12.0)


@dataclass(frozen=True)
class Ellipse:
    cx: float
    cy: float
    a: float
    b: float
    theta: float

    def rasterize(self, height: int, width: int) -> np.ndarray:
        ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
        dx, dy = xs - self.cx, ys - self.cy
        c, s = np.cos(self.theta), np.sin(self.theta)
        u = c * dx + s * dy
        v = -s * dx + c * dy
        return (u / self.a) ** 2 + (v / self.b) ** 2 <= 1.0


@dataclass
class SyntheticCase:
    image: np.ndarray
    truth: np.ndarray
    ellipse: Ellipse


def random_ellipse(rng: np.random.Generator, size: int) -> Ellipse:
    a = rng.uniform(0.15, 0.28) * size
    return Ellipse(
        cx=size / 2 + rng.uniform(-0.1, 0.1) * size,
        cy=size / 2 + rng.uniform(-0.1, 0.1) * size,
        a=a,
        b=a * rng.uniform(0.6, 1.0),
        theta=rng.uniform(0.0, np.pi),
    )


def _stroke_mask(rng: np.random.Generator, size: int) -> np.ndarray:
    """One quadratic Bezier hair, about two pixels wide."""
    p0 = rng.uniform(0, size, 2)
    angle = rng.uniform(0, 2 * np.pi)
    length = rng.uniform(0.3, 0.8) * size
    p2 = p0 + length * np.array([np.cos(angle), np.sin(angle)])
    bend = rng.uniform(-0.25, 0.25) * length
    mid = (p0 + p2) / 2 + bend * np.array([-np.sin(angle), np.cos(angle)])
    t = np.linspace(0.0, 1.0, int(length * 4) + 2)[:, None]
    pts = (1 - t) ** 2 * p0 + 2 * (1 - t) * t * mid + t ** 2 * p2

    mask = np.zeros((size, size), dtype=bool)
    base = np.floor(pts).astype(int)
    for oy in (-1, 0, 1, 2):
        for ox in (-1, 0, 1, 2):
            px = base[:, 0] + ox
            py = base[:, 1] + oy
            # pixel centre within one pixel of the curve
            near = (px + 0.5 - pts[:, 0]) ** 2 + (py + 0.5 - pts[:, 1]) ** 2 < 1.0
            ok = near & (px >= 0) & (px < size) & (py >= 0) & (py < size)
            mask[py[ok], px[ok]] = True
    return mask


def make_case(rng: np.random.Generator, size: int = DEFAULT_SIZE, hair: bool = False,
              vignette: bool = False) -> SyntheticCase:
    ellipse = random_ellipse(rng, size)
    truth = ellipse.rasterize(size, size)
    skin = rng.uniform(*SKIN_RANGE)
    lesion = rng.uniform(*LESION_RANGE)
    field = np.where(truth, lesion, skin)

    if vignette:
        radius = rng.uniform(0.45, 0.6) * size
        dark = rng.uniform(*VIGNETTE_RANGE)
        ys, xs = np.mgrid[0:size, 0:size]
        r = np.hypot(xs + 0.5 - size / 2, ys + 0.5 - size / 2)
        blend = np.clip((r - radius) / 4.0, 0.0, 1.0)
        field = (1 - blend) * field + blend * dark

    if hair:
        for _ in range(int(rng.integers(15, 31))):
            stroke = _stroke_mask(rng, size)
            field = np.where(stroke, rng.uniform(*HAIR_RANGE), field)

    rgb = field[..., None] + np.asarray(TINT) * (field[..., None] / 255.0)
    rgb = rgb + rng.normal(0.0, NOISE_SIGMA, size=(size, size, 3))
    image = np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)
    return SyntheticCase(image=image, truth=truth, ellipse=ellipse)


def case_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def generate_suite(out_dir, count: int, seed: int, hair: bool = False, vignette: bool = False,
                   size: int = DEFAULT_SIZE, truth_suffix: str = "_segmentation") -> List[Tuple[Path, Path]]:
    """Write ``count`` image/mask pairs named ``synth_0000.png`` / ``synth_0000_segmentation.png``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for i in range(count):
        case = make_case(case_rng(seed, i), size=size, hair=hair, vignette=vignette)
        stem = f"synth_{i:04d}"
        img_path = out / f"{stem}.png"
        truth_path = out / f"{stem}{truth_suffix}.png"
        save_image(case.image, img_path)
        save_mask(case.truth, truth_path)
        written.append((img_path, truth_path))
    return written
