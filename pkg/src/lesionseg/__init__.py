"""Classical skin-lesion segmentation.

Two pipelines are provided: marker-controlled watershed (``segment_method1``)
and pyramid mean shift followed by OTSU (``segment_method2``), plus the
morphology, thresholding, distance-transform and inpainting kernels they are
built from and a Jaccard evaluation harness.
"""

from .config import PipelineConfig
from .errors import NoLesionError
from .evaluation import EvalRecord, EvalSummary, evaluate_batch, jaccard, render_overlay, write_report
from .imgcore import load_image, load_mask, rgb_to_gray, gray_to_rgb, save_image, save_mask
from .method_meanshift import segment_method2
from .method_watershed import segment_method1

__all__ = [
    "PipelineConfig", "NoLesionError",
    "EvalRecord", "EvalSummary", "evaluate_batch", "jaccard", "render_overlay", "write_report",
    "load_image", "load_mask", "save_image", "save_mask", "rgb_to_gray", "gray_to_rgb",
    "segment_method1", "segment_method2",
]

__version__ = "0.1.0"
