"""Fuse dense stereo and monocular depth maps.

Pipeline: rescale the mono map to the stereo range, weight each pixel by
stereo confidence and by the agreement ratio of the normalized estimates,
blend, then smooth with a median filter that ignores invalid pixels.
Stereo-invalid pixels (occlusions, borders) are filled directly from the
scaled mono map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEPTH_INVALID, ConfidenceMap, DepthMap, valid_mask

SCALING_MODES = ("minmax", "average", "none")
WEIGHTING_MODES = ("full", "none")


@dataclass(frozen=True)
class FusionParams:
    """Fusion variant selection.

    scaling_mode "minmax" is the range-matching affine rescale, "average"
    matches the valid-pixel means, "none" leaves the mono map untouched.
    weighting_mode "none" drops the agreement-ratio weight and blends on
    confidence alone.
    """

    scaling_mode: str = "minmax"
    weighting_mode: str = "full"
    median_kernel: int = 5

    def __post_init__(self):
        if self.scaling_mode not in SCALING_MODES:
            raise ValueError(f"scaling_mode must be one of {SCALING_MODES}")
        if self.weighting_mode not in WEIGHTING_MODES:
            raise ValueError(f"weighting_mode must be one of {WEIGHTING_MODES}")
        if self.median_kernel < 1 or self.median_kernel % 2 == 0:
            raise ValueError("median_kernel must be odd and >= 1")


@dataclass(frozen=True)
class ScaleParams:
    """Valid-pixel range statistics used by the mono rescale."""

    r_m: float
    r_s: float
    min_s: float
    max_s: float
    min_m: float
    max_m: float

    def __post_init__(self):
        if self.r_m < 0 or self.r_s < 0:
            raise ValueError("ranges must be non-negative")


@dataclass(frozen=True)
class RatioWeightMap:
    """Agreement weight between normalized mono and stereo estimates, in (0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("RatioWeightMap.data must be 2-D")
        if not np.all(np.isfinite(arr)):
            raise ValueError("ratio weights must be finite")
        if arr.min() <= 0.0 or arr.max() > 1.0:
            raise ValueError("ratio weights must lie in (0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)


def scale_mono(zm: DepthMap, zs: DepthMap, mode: str) -> tuple[DepthMap, ScaleParams]:
    """Rescale the mono map onto the stereo depth range.

    Statistics are taken over valid pixels only; invalid pixels pass
    through untouched.  A constant mono map (zero range) under "minmax"
    collapses every valid pixel to min(stereo), which is the documented
    degenerate branch rather than an error.
    """
    if zm.data.shape != zs.data.shape:
        raise ValueError("depth maps must have identical dimensions")
    if mode not in SCALING_MODES:
        raise ValueError(f"scaling mode must be one of {SCALING_MODES}")
    vm = valid_mask(zm)
    if not vm.any():
        raise ValueError("mono map has no valid pixels")
    mono = zm.data[vm]
    min_m = float(mono.min())
    max_m = float(mono.max())

    vs = valid_mask(zs)
    if mode in ("minmax", "average") and not vs.any():
        raise ValueError(f"stereo map has no valid pixels (required for {mode} scaling)")
    if vs.any():
        stereo = zs.data[vs]
        min_s = float(stereo.min())
        max_s = float(stereo.max())
    else:
        min_s = max_s = float("nan")

    params = ScaleParams(
        r_m=max_m - min_m,
        r_s=(max_s - min_s) if vs.any() else 0.0,
        min_s=min_s,
        max_s=max_s,
        min_m=min_m,
        max_m=max_m,
    )

    out = zm.data.copy()
    if mode == "minmax":
        if params.r_m == 0.0:
            out[vm] = min_s
        else:
            out[vm] = min_s + params.r_s * (out[vm] - min_m) / params.r_m
    elif mode == "average":
        factor = float(zs.data[vs].mean()) / float(mono.mean())
        out[vm] = out[vm] * factor
    return DepthMap(out), params


def compute_ratio_weight(zm_scaled: DepthMap, zs: DepthMap) -> RatioWeightMap:
    """Per-pixel ratio of the normalized estimates, small/large.

    Each map is normalized by its own valid-pixel maximum; the weight is 1
    exactly when the normalized estimates agree (x / x is exactly 1) and
    falls toward 0 as they diverge.  Pixels missing either estimate get
    the neutral weight 1; the blend never consults them.
    """
    if zm_scaled.data.shape != zs.data.shape:
        raise ValueError("depth maps must have identical dimensions")
    vm = valid_mask(zm_scaled)
    vs = valid_mask(zs)
    if not vm.any() or not vs.any():
        raise ValueError("both maps need at least one valid pixel")
    max_m = float(zm_scaled.data[vm].max())
    max_s = float(zs.data[vs].max())
    if max_m <= 0.0 or max_s <= 0.0:
        raise ValueError("depth maxima must be positive")

    both = vm & vs
    n_m = zm_scaled.data[both] / max_m
    n_s = zs.data[both] / max_s
    if n_m.size and (n_m.min() <= 0.0 or n_s.min() <= 0.0):
        raise ValueError("normalized depths must be positive at valid pixels")

    out = np.ones(zs.data.shape, dtype=np.float64)
    out[both] = np.minimum(n_m, n_s) / np.maximum(n_m, n_s)
    return RatioWeightMap(out)


def fuse(
    zs: DepthMap,
    zm_scaled: DepthMap,
    wc: ConfidenceMap,
    ws: RatioWeightMap,
    mode: str,
) -> DepthMap:
    """Blend stereo and scaled mono depth per pixel.

    Stereo-invalid pixels take the mono value verbatim.  Where both are
    valid the confidence-weighted blend applies; with weighting "none" the
    inner agreement blend is dropped.  A pixel valid only in stereo keeps
    the stereo value (the blend has nothing to mix it with).  The result
    is clamped to the [min, max] envelope of the two inputs, which the
    exact blend satisfies anyway; the clamp only absorbs last-ulp
    rounding.
    """
    shape = zs.data.shape
    for other in (zm_scaled.data, wc.data, ws.data):
        if other.shape != shape:
            raise ValueError("all fusion inputs must have identical dimensions")
    if mode not in WEIGHTING_MODES:
        raise ValueError(f"weighting mode must be one of {WEIGHTING_MODES}")

    ms = valid_mask(zs)
    mm = valid_mask(zm_scaled)
    out = np.full(shape, DEPTH_INVALID)

    # Occlusion fill: stereo has nothing, trust mono (sentinel stays sentinel).
    out[~ms] = zm_scaled.data[~ms]
    only_s = ms & ~mm
    out[only_s] = zs.data[only_s]

    both = ms & mm
    s = zs.data[both]
    m = zm_scaled.data[both]
    c = wc.data[both]
    if mode == "full":
        a = ws.data[both]
        inner = a * s + (1.0 - a) * m
    else:
        inner = m
    blended = c * s + (1.0 - c) * inner
    np.clip(blended, np.minimum(s, m), np.maximum(s, m), out=blended)
    out[both] = blended
    return DepthMap(out)


def median_filter(z: DepthMap, kernel: int) -> DepthMap:
    """Median over the valid values in each kernel window.

    Invalid pixels are excluded rather than treated as zeros; a pixel with
    no valid value anywhere in its window stays invalid.  Border windows
    are truncated.  The median of an even count is the lower of the two
    middle order statistics, so every output value is an actual member of
    its window.
    """
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError("kernel must be odd and >= 1")
    if kernel == 1:
        return DepthMap(z.data.copy())
    r = kernel // 2
    h, w = z.data.shape
    src = np.where(valid_mask(z), z.data, np.nan)

    stack = np.full((kernel * kernel, h, w), np.nan)
    layer = 0
    for dy in range(-r, r + 1):
        ys0, ys1 = max(0, -dy), min(h, h - dy)
        yd0, yd1 = max(0, dy), min(h, h + dy)
        for dx in range(-r, r + 1):
            xs0, xs1 = max(0, -dx), min(w, w - dx)
            xd0, xd1 = max(0, dx), min(w, w + dx)
            stack[layer, yd0:yd1, xd0:xd1] = src[ys0:ys1, xs0:xs1]
            layer += 1

    stack.sort(axis=0)  # NaNs sort to the end
    counts = np.sum(~np.isnan(stack), axis=0)
    idx = np.maximum(counts - 1, 0) // 2
    med = np.take_along_axis(stack, idx[None], axis=0)[0]
    out = np.where(counts > 0, med, DEPTH_INVALID)
    return DepthMap(out)


def fuse_pipeline(zs: DepthMap, zm: DepthMap, wc: ConfidenceMap, p: FusionParams) -> DepthMap:
    """scale_mono -> compute_ratio_weight -> fuse -> median_filter.

    The scaled mono map feeds both the occlusion fill and the blend.  The
    ratio weight is only computed when the weighting mode consumes it.
    """
    zm_scaled, _ = scale_mono(zm, zs, p.scaling_mode)
    if p.weighting_mode == "full":
        ws = compute_ratio_weight(zm_scaled, zs)
    else:
        ws = RatioWeightMap(np.ones(zs.data.shape))
    fused = fuse(zs, zm_scaled, wc, ws, p.weighting_mode)
    return median_filter(fused, p.median_kernel)
