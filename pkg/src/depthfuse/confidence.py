"""Stereo confidence from vertical image contrast.

Stereo correspondences are searched along image rows, so only horizontal
intensity transitions (vertical edges) can anchor a match.  The confidence
map marks how close every pixel sits to such an edge: Sobel response,
binarize, blur with a wide Gaussian, then renormalize so the strongest
edge region carries weight 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _filters
from .core import ConfidenceMap, GrayImage


@dataclass(frozen=True)
class ConfidenceParams:
    """Knobs for the edge-based confidence pipeline.

    sobel_threshold applies to Sobel responses normalized to [0, 1].
    The blur is deliberately wide (default 21x21, sigma 5) so pixels whose
    matching window overlaps an edge still receive nonzero confidence.
    """

    sobel_threshold: float = 0.1
    blur_radius: int = 10
    blur_sigma: float = 5.0

    def __post_init__(self):
        if not (np.isfinite(self.sobel_threshold) and self.sobel_threshold > 0):
            raise ValueError("sobel_threshold must be positive")
        if self.blur_radius < 1:
            raise ValueError("blur_radius must be >= 1")
        if not (np.isfinite(self.blur_sigma) and self.blur_sigma > 0):
            raise ValueError("blur_sigma must be positive")


def vertical_sobel(img: GrayImage) -> GrayImage:
    """Absolute horizontal-derivative Sobel response, normalized to [0, 1].

    Detects vertical edges.  Borders are handled by edge replication, and
    the raw response is divided by the kernel gain (4) so a full-range step
    edge produces 1.0.
    """
    if img.height < 3 or img.width < 3:
        raise ValueError("image must be at least 3x3 for the Sobel kernel")
    resp = _filters.sobel_response(img.data, axis=1)
    return GrayImage(np.abs(resp) / _filters.SOBEL_GAIN)


def build_confidence(img: GrayImage, p: ConfidenceParams) -> ConfidenceMap:
    """Edge response -> binarize -> wide Gaussian blur -> renormalize.

    Binarization keeps pixels strictly above the threshold.  If nothing
    passes, the confidence is identically zero (no division by the
    maximum).
    """
    edges = vertical_sobel(img).data
    binary = (edges > p.sobel_threshold).astype(np.float64)
    blurred = _filters.gaussian_blur(binary, p.blur_radius, p.blur_sigma)
    peak = blurred.max()
    if peak <= 0.0:
        return ConfidenceMap(np.zeros_like(blurred))
    return ConfidenceMap(blurred / peak)
