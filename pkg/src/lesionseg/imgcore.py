"""Image value types, colour conversions and raster file I/O.

Images are plain numpy arrays, always row-major ``(height, width[, 3])``:

* gray image  -- ``uint8`` array of shape ``(H, W)``
* RGB image   -- ``uint8`` array of shape ``(H, W, 3)``, channels in R, G, B order
* binary mask -- ``bool`` array of shape ``(H, W)``, foreground is ``True``
* float image -- ``float64`` array of shape ``(H, W)``, finite and non-negative

The ``as_*`` helpers validate an array against those conventions and are used
at every public entry point of the library.
"""

from __future__ import annotations

from pathlib import Path
from typing import Tuple

import numpy as np
from numpy.typing import NDArray
from PIL import Image

GrayImage = NDArray[np.uint8]
RgbImage = NDArray[np.uint8]
BinaryMask = NDArray[np.bool_]
FloatImage = NDArray[np.float64]

# BT.601 luma
GRAY_WEIGHTS = (0.299, 0.587, 0.114)

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_JPEG_MAGIC = b"\xff\xd8\xff"
_PNM_MAGICS = (b"P5", b"P6")


class ImageError(Exception):
    """Base class for raster I/O failures."""


class UnreadableFileError(ImageError):
    """The file does not exist or cannot be opened."""


class UnsupportedFormatError(ImageError):
    """The file is not PNG, binary PGM/PPM or JPEG."""


class CorruptImageError(ImageError):
    """The file claims a supported format but cannot be decoded."""


class UnwritableFileError(ImageError):
    """The destination path cannot be written."""


def _check_2d(arr: np.ndarray, what: str) -> None:
    if arr.ndim != 2:
        raise ValueError(f"{what} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{what} must be at least 1x1, got shape {arr.shape}")


def as_gray(img) -> GrayImage:
    arr = np.asarray(img)
    _check_2d(arr, "gray image")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("gray image values must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def as_rgb(img) -> RgbImage:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"RGB image must have shape (H, W, 3), got {arr.shape}")
    _check_2d(arr[..., 0], "RGB image")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("RGB image values must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def as_mask(mask, shape: Tuple[int, int] | None = None) -> BinaryMask:
    arr = np.asarray(mask)
    _check_2d(arr, "mask")
    if arr.dtype != np.bool_:
        arr = arr != 0
    if shape is not None and arr.shape != tuple(shape[:2]):
        raise ValueError(f"mask shape {arr.shape} does not match image shape {tuple(shape[:2])}")
    return arr


def rgb_to_gray(img: RgbImage) -> GrayImage:
    """Luma conversion ``round(0.299 R + 0.587 G + 0.114 B)``."""
    rgb = as_rgb(img).astype(np.float64)
    r, g, b = GRAY_WEIGHTS
    gray = r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]
    # the weights sum to 1 only up to float rounding; snap near-integers first
    # so that gray -> rgb -> gray is exact
    gray = np.floor(gray + 0.5 + 1e-9)
    return np.clip(gray, 0, 255).astype(np.uint8)


def gray_to_rgb(img: GrayImage) -> RgbImage:
    gray = as_gray(img)
    return np.repeat(gray[..., None], 3, axis=2)


def split_channels(img: RgbImage) -> Tuple[GrayImage, GrayImage, GrayImage]:
    rgb = as_rgb(img)
    return (
        np.ascontiguousarray(rgb[..., 0]),
        np.ascontiguousarray(rgb[..., 1]),
        np.ascontiguousarray(rgb[..., 2]),
    )


def merge_channels(r: GrayImage, g: GrayImage, b: GrayImage) -> RgbImage:
    r, g, b = as_gray(r), as_gray(g), as_gray(b)
    if not (r.shape == g.shape == b.shape):
        raise ValueError(f"channel shapes differ: {r.shape}, {g.shape}, {b.shape}")
    return np.stack([r, g, b], axis=2)


def _sniff(head: bytes) -> str | None:
    if head.startswith(_PNG_MAGIC):
        return "png"
    if head[:2] in _PNM_MAGICS:
        return "pnm"
    if head.startswith(_JPEG_MAGIC):
        return "jpeg"
    return None


def _to_uint8_rgb(im: Image.Image) -> RgbImage:
    if im.mode in ("I;16", "I;16B", "I;16L", "I"):
        arr = np.asarray(im, dtype=np.float64)
        maxval = 65535.0 if arr.max(initial=0) > 255 or im.mode.startswith("I;16") else 255.0
        gray = np.clip(np.floor(arr * (255.0 / maxval) + 0.5), 0, 255).astype(np.uint8)
        return gray_to_rgb(gray)
    if im.mode == "L":
        return gray_to_rgb(np.asarray(im, dtype=np.uint8))
    if im.mode == "1":
        return gray_to_rgb(np.asarray(im, dtype=np.uint8) * np.uint8(255))
    if im.mode != "RGB":
        im = im.convert("RGB")
    return np.array(im, dtype=np.uint8)


def load_image(path) -> RgbImage:
    """Decode a PNG, binary PGM/PPM (or JPEG) file into an RGB array.

    Grayscale sources are replicated to three channels and 16-bit sources are
    scaled down to 8 bits.

    Raises:
        UnreadableFileError: the path is missing or cannot be read.
        UnsupportedFormatError: the content is not a supported raster format.
        CorruptImageError: the header or pixel stream is damaged.
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            head = fh.read(16)
    except OSError as exc:
        raise UnreadableFileError(f"cannot read {path}: {exc}") from exc

    kind = _sniff(head)
    if kind is None:
        raise UnsupportedFormatError(f"{path}: not a PNG, PGM/PPM (P5/P6) or JPEG file")

    try:
        with Image.open(path) as im:
            im.load()
            return _to_uint8_rgb(im)
    except (OSError, SyntaxError, ValueError, Image.DecompressionBombError) as exc:
        raise CorruptImageError(f"{path}: corrupt {kind} data ({exc})") from exc


def _format_for(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".ppm", ".pnm"):
        return "PPM"
    if suffix in (".jpg", ".jpeg"):
        return "JPEG"
    return "PNG"


def save_image(img: RgbImage, path) -> None:
    """Write an RGB image; the format follows the file extension (PNG by default)."""
    path = Path(path)
    rgb = as_rgb(img)
    try:
        Image.fromarray(rgb).save(path, format=_format_for(path))
    except OSError as exc:
        raise UnwritableFileError(f"cannot write {path}: {exc}") from exc


def save_mask(mask: BinaryMask, path) -> None:
    """Write a mask as an 8-bit single-channel raster, foreground 255 and background 0."""
    path = Path(path)
    data = np.where(as_mask(mask), np.uint8(255), np.uint8(0))
    fmt = _format_for(path)
    if fmt == "JPEG":
        raise UnsupportedFormatError("masks must be stored losslessly (PNG or PGM)")
    try:
        Image.fromarray(data).save(path, format=fmt)
    except OSError as exc:
        raise UnwritableFileError(f"cannot write {path}: {exc}") from exc


def load_mask(path) -> BinaryMask:
    """Read a mask file; any non-zero gray value counts as foreground."""
    return rgb_to_gray(load_image(path)) > 0
