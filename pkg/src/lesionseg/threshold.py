"""Global OTSU thresholding.

The between-class variance for a cut at ``t`` (class 0 is ``v <= t``) is::

    w0 * w1 * (mu0 - mu1)**2  ==  (N * s0 - S * n0)**2 / (N**2 * n0 * n1)

where ``n0``/``s0`` are the count and intensity sum of class 0 and ``N``/``S``
the totals. The right-hand form has an integer numerator and denominator, so
candidates are compared exactly by cross-multiplication; ties go to the
smallest ``t``.
"""

from __future__ import annotations

from enum import Enum

import numpy as np
from numpy.typing import NDArray

from .errors import NoLesionError
from .imgcore import BinaryMask, GrayImage, as_gray

Histogram256 = NDArray[np.int64]


class Polarity(str, Enum):
    FOREGROUND_ABOVE = "foreground_above"
    FOREGROUND_BELOW = "foreground_below"


def histogram(img: GrayImage) -> Histogram256:
    gray = as_gray(img)
    return np.bincount(gray.ravel(), minlength=256).astype(np.int64)


def otsu_threshold(hist) -> int:
    """Threshold maximising the between-class variance of a 256-bin histogram.

    A histogram with a single occupied bin returns that bin.

    Raises:
        ValueError: the histogram is empty or malformed.
    """
    counts = [int(c) for c in np.asarray(hist).ravel()]
    if len(counts) != 256:
        raise ValueError(f"histogram must have 256 bins, got {len(counts)}")
    if any(c < 0 for c in counts):
        raise ValueError("histogram counts must be non-negative")
    total = sum(counts)
    if total == 0:
        raise ValueError("cannot threshold an empty histogram")
    total_sum = sum(v * c for v, c in enumerate(counts))

    best_t = None
    best_num, best_den = 0, 1
    n0 = s0 = 0
    for t in range(256):
        n0 += counts[t]
        s0 += t * counts[t]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        num = (total * s0 - total_sum * n0) ** 2
        den = n0 * n1
        # num/den > best_num/best_den, without division
        if best_t is None or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den

    if best_t is None or best_num == 0:
        # one occupied bin: no split separates anything
        return next(v for v, c in enumerate(counts) if c)
    return best_t


def apply_threshold(img: GrayImage, t: int, polarity="foreground_above") -> BinaryMask:
    """Binarise: ``img > t`` (foreground_above) or ``img <= t`` (foreground_below)."""
    gray = as_gray(img)
    polarity = Polarity(polarity)
    if polarity is Polarity.FOREGROUND_ABOVE:
        return gray > t
    return gray <= t


def otsu(img: GrayImage) -> int:
    return otsu_threshold(histogram(img))


def binarize_lesion(gray: GrayImage, polarity="foreground_below") -> BinaryMask:
    """OTSU-binarise ``gray`` with the lesion on the given side of the threshold.

    Raises:
        NoLesionError: the image holds a single intensity, so there is nothing
            to separate.
    """
    hist = histogram(gray)
    if np.count_nonzero(hist) < 2:
        raise NoLesionError("image has no contrast: a single intensity value")
    return apply_threshold(gray, otsu_threshold(hist), polarity)
