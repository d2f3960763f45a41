"""Jaccard (IoU) scoring, batch evaluation and report/overlay output."""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from .config import PipelineConfig
from .errors import NoLesionError
from .imgcore import (
    BinaryMask, ImageError, RgbImage, as_mask, as_rgb, load_image, load_mask,
)
from .method_meanshift import segment_method2
from .method_watershed import segment_method1
from .morphology import mask_boundary

METHODS = ("watershed", "meanshift")
IMAGE_SUFFIXES = (".png", ".ppm", ".pgm", ".jpg", ".jpeg")
CSV_HEADER = ("image_id", "method", "variant", "iou", "runtime_ms", "error")

PRED_COLOR = (0, 255, 0)
TRUTH_COLOR = (255, 0, 0)


class EvaluationError(ValueError):
    """The batch cannot run at all (missing or empty directory, bad method)."""


@dataclass(frozen=True)
class EvalRecord:
    image_id: str
    method: str
    variant: str
    iou: float
    runtime_ms: float
    error: str = ""

    def __post_init__(self):
        if not 0.0 <= self.iou <= 1.0:
            raise ValueError(f"iou must lie in [0, 1], got {self.iou}")


@dataclass
class EvalSummary:
    records: List[EvalRecord] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.records)

    @property
    def mean_iou(self) -> float:
        if not self.records:
            return 0.0
        return float(sum(r.iou for r in self.records) / len(self.records))


def jaccard(pred: BinaryMask, truth: BinaryMask) -> float:
    """``|pred & truth| / |pred | truth|``; two empty masks score 1.0."""
    p = as_mask(pred)
    t = as_mask(truth, p.shape)
    union = np.count_nonzero(p | t)
    if union == 0:
        return 1.0
    return np.count_nonzero(p & t) / union


def segment(img: RgbImage, method: str, cfg: PipelineConfig = PipelineConfig()) -> BinaryMask:
    if method == "watershed":
        return segment_method1(img, cfg)
    if method == "meanshift":
        return segment_method2(img, cfg)
    raise EvaluationError(f"unknown method {method!r}; expected one of {METHODS}")


def variant_of(method: str, cfg: PipelineConfig) -> str:
    return cfg.inpaint_method if method == "watershed" else cfg.color_mode


def list_images(image_dir, truth_suffix: str = "_segmentation") -> List[Path]:
    """Image files in ``image_dir`` sorted by name, skipping ground-truth masks."""
    folder = Path(image_dir)
    if not folder.is_dir():
        raise EvaluationError(f"image directory {folder} does not exist")
    images = [
        p for p in folder.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
        and not (truth_suffix and p.stem.endswith(truth_suffix))
    ]
    return sorted(images, key=lambda p: p.name)


def find_truth(image_path: Path, truth_dir, truth_suffix: str = "_segmentation") -> Optional[Path]:
    """``<stem><suffix>.png`` first, then ``<stem>.png``, never the image itself."""
    folder = Path(truth_dir)
    candidates = [folder / f"{image_path.stem}{truth_suffix}.png", folder / f"{image_path.stem}.png"]
    for cand in candidates:
        if cand.is_file() and cand.resolve() != image_path.resolve():
            return cand
    return None


def _evaluate_one(image_path: Path, truth_dir: Path, method: str, cfg: PipelineConfig) -> EvalRecord:
    variant = variant_of(method, cfg)
    image_id = image_path.stem
    start = time.perf_counter()

    def failed(note: str) -> EvalRecord:
        return EvalRecord(image_id, method, variant, 0.0,
                          (time.perf_counter() - start) * 1000.0, note)

    truth_path = find_truth(image_path, truth_dir, cfg.truth_suffix)
    if truth_path is None:
        return failed("missing ground truth")
    try:
        img = load_image(image_path)
        truth = load_mask(truth_path)
    except ImageError as exc:
        return failed(f"io: {exc}")
    if truth.shape != img.shape[:2]:
        return failed(f"ground truth shape {truth.shape} != image shape {img.shape[:2]}")
    try:
        pred = segment(img, method, cfg)
    except NoLesionError as exc:
        return failed(f"no lesion candidate: {exc}")
    except Exception as exc:  # one bad image must not sink a 200-image batch
        return failed(f"failed: {type(exc).__name__}: {exc}")
    elapsed = (time.perf_counter() - start) * 1000.0
    return EvalRecord(image_id, method, variant, float(jaccard(pred, truth)), elapsed)


def _evaluate_star(args) -> EvalRecord:
    return _evaluate_one(*args)


def evaluate_batch(image_dir, truth_dir, method: str, cfg: PipelineConfig = PipelineConfig(),
                   jobs: int = 1) -> EvalSummary:
    """Segment and score every image in ``image_dir``.

    Per-image failures (unreadable files, missing ground truth, no lesion
    found) become records with IoU 0 and an error note; they never abort the
    batch. Records are sorted by image id whatever the degree of parallelism.

    Raises:
        EvaluationError: unknown method, or a directory that is missing or
            holds no images.
    """
    if method not in METHODS:
        raise EvaluationError(f"unknown method {method!r}; expected one of {METHODS}")
    truth_dir = Path(truth_dir)
    if not truth_dir.is_dir():
        raise EvaluationError(f"ground-truth directory {truth_dir} does not exist")
    images = list_images(image_dir, cfg.truth_suffix)
    if not images:
        raise EvaluationError(f"no images found in {image_dir}")

    tasks = [(p, truth_dir, method, cfg) for p in images]
    if jobs <= 1 or len(tasks) == 1:
        records = [_evaluate_star(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_evaluate_star, tasks))
    records.sort(key=lambda r: r.image_id)
    return EvalSummary(records)


def score_masks(pred_dir, truth_dir, truth_suffix: str = "_segmentation",
                method: str = "watershed", variant: str = "precomputed") -> EvalSummary:
    """Score already-computed mask files in ``pred_dir`` against ``truth_dir``."""
    records = []
    for path in list_images(pred_dir, truth_suffix=""):
        start = time.perf_counter()
        same_name = Path(truth_dir, path.name)
        truth_path = same_name if same_name.is_file() else find_truth(path, truth_dir, truth_suffix)
        note, iou = "", 0.0
        if truth_path is None:
            note = "missing ground truth"
        else:
            try:
                iou = float(jaccard(load_mask(path), load_mask(truth_path)))
            except (ImageError, ValueError) as exc:
                note = f"io: {exc}"
        records.append(EvalRecord(path.stem, method, variant, iou,
                                  (time.perf_counter() - start) * 1000.0, note))
    if not records:
        raise EvaluationError(f"no masks found in {pred_dir}")
    return EvalSummary(sorted(records, key=lambda r: r.image_id))


def write_report(summary: EvalSummary, path, include_runtime: bool = False) -> None:
    """Write the per-image CSV plus a final ``MEAN`` row.

    The ``runtime_ms`` column is left empty unless ``include_runtime`` is set,
    so that reports of the same inputs are byte-identical between runs.
    """
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in summary.records:
                runtime = f"{r.runtime_ms:.3f}" if include_runtime else ""
                writer.writerow([r.image_id, r.method, r.variant, repr(r.iou), runtime, r.error])
            writer.writerow(["MEAN", "", "", repr(summary.mean_iou), "", ""])
    except OSError as exc:
        raise EvaluationError(f"cannot write report {path}: {exc}") from exc


def render_overlay(img: RgbImage, pred: BinaryMask, truth: Optional[BinaryMask] = None) -> RgbImage:
    """Draw the truth boundary in red and the prediction boundary in green (on top)."""
    out = as_rgb(img).copy()
    if truth is not None:
        out[mask_boundary(as_mask(truth, out.shape))] = TRUTH_COLOR
    out[mask_boundary(as_mask(pred, out.shape))] = PRED_COLOR
    return out
