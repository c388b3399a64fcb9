"""Semi-dense disparity by local block matching.

Sum-of-absolute-differences over square windows, a uniqueness test against
the second-best candidate, parabolic subpixel refinement quantized to the
subpixel grid, and a left-right consistency filter.  Unmatchable pixels
(borders, ambiguous texture, occlusions) carry the invalid sentinel; the
fusion stage later fills them from the monocular estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._filters import full_window_sums
from .core import (
    DEPTH_INVALID,
    DISPARITY_INVALID,
    ConfidenceMap,
    DepthMap,
    DisparityMap,
    GrayImage,
    StereoCalibration,
    disparity_to_depth,
    valid_mask,
)


@dataclass(frozen=True)
class StereoParams:
    """Block-matching configuration.

    block_radius 4 gives the 9x9 SAD window; disparities are searched in
    [0, max_disparity] and refined on the 1/subpixel_denominator grid.
    """

    block_radius: int = 4
    max_disparity: int = 64
    lr_consistency_tol: float = 1.0
    uniqueness_ratio: float = 0.95
    subpixel_denominator: int = 16

    def __post_init__(self):
        if self.block_radius < 1:
            raise ValueError("block_radius must be >= 1")
        if self.max_disparity < 1:
            raise ValueError("max_disparity must be >= 1")
        if not self.lr_consistency_tol > 0:
            raise ValueError("lr_consistency_tol must be positive")
        if not (0.0 < self.uniqueness_ratio <= 1.0):
            raise ValueError("uniqueness_ratio must lie in (0, 1]")
        if self.subpixel_denominator < 1:
            raise ValueError("subpixel_denominator must be >= 1")


def _sad_cost_volume(left: np.ndarray, right: np.ndarray, radius: int, max_d: int) -> np.ndarray:
    """(max_d+1, H, W) SAD costs; +inf where the window or shift leaves the image."""
    h, w = left.shape
    k = 2 * radius + 1
    costs = np.full((max_d + 1, h, w), np.inf, dtype=np.float32)
    for d in range(max_d + 1):
        if w - d < k:
            break
        diff = np.abs(left[:, d:] - right[:, : w - d])
        sums = full_window_sums(diff, radius)
        costs[d, radius : h - radius, d + radius : w - radius] = sums
    return costs


def match_stereo(left: GrayImage, right: GrayImage, p: StereoParams) -> DisparityMap:
    """Dense left-image disparity by SAD block matching.

    Per pixel the disparity minimizing the window SAD wins (ties go to the
    smaller disparity, biasing toward far depth), then a parabola through
    the costs at (d-1, d, d+1) refines it on the subpixel grid.  A pixel is
    sentinel when its window or any part of the disparity search range
    leaves the image, or when the best cost is not clearly below the
    second-best found outside +-1 px of the winner.
    """
    if left.data.shape != right.data.shape:
        raise ValueError("left and right images must have identical dimensions")
    h, w = left.data.shape
    r = p.block_radius
    max_d = p.max_disparity
    if max_d >= w:
        raise ValueError("max_disparity must be smaller than the image width")

    costs = _sad_cost_volume(left.data, right.data, r, max_d)

    best = np.argmin(costs, axis=0)
    best_cost = np.take_along_axis(costs, best[None], axis=0)[0]

    lo = np.maximum(best - 1, 0)
    hi = np.minimum(best + 1, max_d)
    c_minus = np.take_along_axis(costs, lo[None], axis=0)[0].astype(np.float64)
    c_plus = np.take_along_axis(costs, hi[None], axis=0)[0].astype(np.float64)
    c_best = best_cost.astype(np.float64)

    # Second-best outside the +-1 neighborhood of the winner, for uniqueness.
    for off in (-1, 0, 1):
        idx = np.clip(best + off, 0, max_d)
        np.put_along_axis(costs, idx[None], np.inf, axis=0)
    second = costs.min(axis=0).astype(np.float64)

    # Pixels where the window and the whole search range stay inside.
    region = np.zeros((h, w), dtype=bool)
    if h > 2 * r and w > max_d + 2 * r:
        region[r : h - r, max_d + r : w - r] = True

    unique = np.zeros((h, w), dtype=bool)
    finite = np.isfinite(c_best) & np.isfinite(second)
    unique[finite] = c_best[finite] < p.uniqueness_ratio * second[finite]
    accept = region & unique

    interior = (best >= 1) & (best <= max_d - 1)
    denom = c_minus - 2.0 * c_best + c_plus
    offset = np.zeros((h, w), dtype=np.float64)
    ok = interior & (denom > 0)
    offset[ok] = (c_minus[ok] - c_plus[ok]) / (2.0 * denom[ok])
    np.clip(offset, -0.5, 0.5, out=offset)

    q = float(p.subpixel_denominator)
    refined = np.round((best + offset) * q) / q
    np.clip(refined, 0.0, float(max_d), out=refined)

    out = np.full((h, w), DISPARITY_INVALID)
    out[accept] = refined[accept]
    return DisparityMap(out)


def match_stereo_pair(left: GrayImage, right: GrayImage, p: StereoParams) -> tuple[DisparityMap, DisparityMap]:
    """Disparity maps for both views.

    The right map is computed by matching the horizontally mirrored pair,
    so d_right(x, y) relates right pixel (x, y) to left pixel (x + d, y).
    """
    d_left = match_stereo(left, right, p)
    flipped = match_stereo(
        GrayImage(right.data[:, ::-1]),
        GrayImage(left.data[:, ::-1]),
        p,
    )
    d_right = DisparityMap(flipped.data[:, ::-1])
    return d_left, d_right


def lr_consistency_filter(d_left: DisparityMap, d_right: DisparityMap, tol: float) -> DisparityMap:
    """Invalidate left pixels whose right-view counterpart disagrees.

    A pixel survives iff |d_left(x, y) - d_right(x - round(d_left), y)| <= tol.
    Out-of-bounds or invalid counterparts count as infinite disagreement,
    so an infinite tolerance disables the filter entirely.  Sentinels are
    only ever introduced, never removed.
    """
    if d_left.data.shape != d_right.data.shape:
        raise ValueError("disparity maps must have identical dimensions")
    h, w = d_left.data.shape
    ok_l = valid_mask(d_left)

    xs = np.tile(np.arange(w), (h, 1))
    target = xs - np.round(d_left.data).astype(np.int64)
    in_bounds = ok_l & (target >= 0) & (target < w)

    diff = np.full((h, w), np.inf)
    rows = np.nonzero(in_bounds)[0]
    cols_r = target[in_bounds]
    counterpart = d_right.data[rows, cols_r]
    ok_r = counterpart != DISPARITY_INVALID
    vals = np.abs(d_left.data[in_bounds] - counterpart)
    vals[~ok_r] = np.inf
    diff[in_bounds] = vals

    keep = ok_l & (diff <= tol)
    out = np.where(keep, d_left.data, DISPARITY_INVALID)
    return DisparityMap(out)


def sparse_targets(
    d: DisparityMap,
    wc: ConfidenceMap,
    cal: StereoCalibration,
    min_conf: float,
) -> tuple[np.ndarray, DepthMap]:
    """Confident-pixel mask and the triangulated training targets.

    The mask is true where the disparity is valid and the confidence
    reaches min_conf; the returned depth map carries triangulated depth on
    those pixels and the sentinel elsewhere.
    """
    if d.data.shape != wc.data.shape:
        raise ValueError("disparity and confidence maps must have identical dimensions")
    mask = valid_mask(d) & (wc.data >= min_conf)
    depth = disparity_to_depth(d, cal).data
    out = np.where(mask, depth, DEPTH_INVALID)
    return mask, DepthMap(out)
