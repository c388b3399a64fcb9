"""Small separable-filter helpers shared by the confidence and feature code.

All filters use replicate padding at the borders and plain float64
arithmetic so results are bit-stable across runs.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

# 3x3 Sobel as two separable taps: smoothing across, central difference along.
_SOBEL_SMOOTH = np.array([1.0, 2.0, 1.0])
_SOBEL_DIFF = np.array([-1.0, 0.0, 1.0])

# Peak magnitude of the 3x3 Sobel response on a unit-range image.
SOBEL_GAIN = 4.0


def correlate1d_replicate(a: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    """Correlate `a` with `taps` along `axis`, replicating edge values."""
    taps = np.asarray(taps, dtype=np.float64)
    pad = len(taps) // 2
    widths = [(0, 0)] * a.ndim
    widths[axis] = (pad, pad)
    padded = np.pad(a, widths, mode="edge")
    windows = sliding_window_view(padded, len(taps), axis=axis)
    return windows @ taps


def sobel_response(img: np.ndarray, axis: int) -> np.ndarray:
    """Signed 3x3 Sobel derivative along `axis` (0 = rows, 1 = columns)."""
    smooth_axis = 1 - axis
    smoothed = correlate1d_replicate(img, _SOBEL_SMOOTH, axis=smooth_axis)
    return correlate1d_replicate(smoothed, _SOBEL_DIFF, axis=axis)


def gaussian_kernel(radius: int, sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps over [-radius, radius]."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(a: np.ndarray, radius: int, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with replicate padding."""
    taps = gaussian_kernel(radius, sigma)
    out = correlate1d_replicate(a, taps, axis=0)
    return correlate1d_replicate(out, taps, axis=1)


def box_mean_replicate(a: np.ndarray, radius: int) -> np.ndarray:
    """Mean over (2r+1)^2 windows, borders filled by edge replication."""
    taps = np.full(2 * radius + 1, 1.0 / (2 * radius + 1))
    out = correlate1d_replicate(a, taps, axis=0)
    return correlate1d_replicate(out, taps, axis=1)


def laplacian_replicate(a: np.ndarray) -> np.ndarray:
    """3x3 five-point Laplacian with replicate padding."""
    padded = np.pad(a, 1, mode="edge")
    return (
        padded[:-2, 1:-1]
        + padded[2:, 1:-1]
        + padded[1:-1, :-2]
        + padded[1:-1, 2:]
        - 4.0 * a
    )


def full_window_sums(a: np.ndarray, radius: int) -> np.ndarray:
    """Sums over all fully-contained (2r+1)^2 windows of a 2-D array.

    Returns an (H - 2r, W - 2r) array; entry (i, j) is the sum of the
    window centered at (i + r, j + r).  Uses a zero-padded integral image.
    """
    k = 2 * radius + 1
    s = np.zeros((a.shape[0] + 1, a.shape[1] + 1), dtype=np.float64)
    np.cumsum(a, axis=0, out=s[1:, 1:])
    np.cumsum(s[1:, 1:], axis=1, out=s[1:, 1:])
    return s[k:, k:] - s[:-k, k:] - s[k:, :-k] + s[:-k, :-k]
