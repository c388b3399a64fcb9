"""Shared raster types, validity masking, and disparity/depth geometry.

All rasters are row-major numpy arrays with the origin at the top-left
pixel.  Missing measurements are encoded with a reserved finite sentinel
(0 for depth, -1 for disparity) so that serialized and in-memory forms
agree; the sentinel never takes part in arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEPTH_INVALID = 0.0
DISPARITY_INVALID = -1.0

# Rec. 601 luma weights used when collapsing color input to luminance.
REC601 = (0.299, 0.587, 0.114)


def _as_grid(data, name: str) -> np.ndarray:
    arr = np.array(data, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GrayImage:
    """Single-channel luminance image with values in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_grid(self.data, "GrayImage.data")
        if not np.all(np.isfinite(arr)):
            raise ValueError("GrayImage values must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("GrayImage values must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class DisparityMap:
    """Per-pixel horizontal disparity in pixels; -1 marks invalid pixels."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_grid(self.data, "DisparityMap.data")
        valid = arr != DISPARITY_INVALID
        if not np.all(np.isfinite(arr[valid])):
            raise ValueError("valid disparities must be finite")
        if valid.any() and arr[valid].min() < 0.0:
            raise ValueError("valid disparities must be >= 0")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel depth in meters; 0 marks invalid pixels."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_grid(self.data, "DepthMap.data")
        valid = arr != DEPTH_INVALID
        if not np.all(np.isfinite(arr[valid])):
            raise ValueError("valid depths must be finite")
        if valid.any() and arr[valid].min() <= 0.0:
            raise ValueError("valid depths must be > 0")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ConfidenceMap:
    """Per-pixel stereo confidence weights in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_grid(self.data, "ConfidenceMap.data")
        if not np.all(np.isfinite(arr)):
            raise ValueError("confidence values must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("confidence values must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class StereoCalibration:
    """Rectified-pair geometry: focal length (px), baseline (m), search range."""

    focal_length: float
    baseline: float
    max_disparity: int = 64
    subpixel_denominator: int = 16

    def __post_init__(self):
        if not (np.isfinite(self.focal_length) and self.focal_length > 0):
            raise ValueError("focal_length must be positive")
        if not (np.isfinite(self.baseline) and self.baseline > 0):
            raise ValueError("baseline must be positive")
        if self.max_disparity < 1:
            raise ValueError("max_disparity must be >= 1")
        if self.subpixel_denominator < 1:
            raise ValueError("subpixel_denominator must be >= 1")

    @property
    def focal_baseline(self) -> float:
        return self.focal_length * self.baseline


def valid_mask(m: DepthMap | DisparityMap) -> np.ndarray:
    """Boolean mask, true exactly where the map holds a measurement."""
    if isinstance(m, DepthMap):
        return m.data != DEPTH_INVALID
    if isinstance(m, DisparityMap):
        return m.data != DISPARITY_INVALID
    raise TypeError(f"expected DepthMap or DisparityMap, got {type(m).__name__}")


def disparity_to_depth(d: DisparityMap, cal: StereoCalibration) -> DepthMap:
    """Triangulate depth = focal * baseline / disparity.

    Zero or invalid disparity has no finite depth and maps to the invalid
    sentinel instead of raising.
    """
    src = d.data
    ok = (src != DISPARITY_INVALID) & (src > 0.0)
    out = np.full(src.shape, DEPTH_INVALID)
    out[ok] = cal.focal_baseline / src[ok]
    return DepthMap(out)


def depth_to_disparity(z: DepthMap, cal: StereoCalibration) -> DisparityMap:
    """Inverse triangulation: disparity = focal * baseline / depth."""
    src = z.data
    ok = src != DEPTH_INVALID
    out = np.full(src.shape, DISPARITY_INVALID)
    out[ok] = cal.focal_baseline / src[ok]
    return DisparityMap(out)


def luminance_from_rgb(rgb: np.ndarray) -> GrayImage:
    """Collapse an (H, W, 3) array with channels in [0, 1] to Rec. 601 luminance."""
    arr = np.asarray(rgb, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) array, got shape {arr.shape}")
    y = REC601[0] * arr[:, :, 0] + REC601[1] * arr[:, :, 1] + REC601[2] * arr[:, :, 2]
    return GrayImage(np.clip(y, 0.0, 1.0))
