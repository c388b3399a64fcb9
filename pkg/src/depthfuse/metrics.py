"""Depth evaluation: the standard six-metric suite plus distribution views.

Metrics are computed over the pixels valid in both maps.  Logarithms are
natural, and reductions run in numpy's deterministic pairwise order so
reports are bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DepthMap, valid_mask

PERCENTILES = (5.0, 25.0, 50.0, 75.0, 95.0)

# Report rows in the conventional presentation order.
METRIC_ROWS = (
    ("threshold_1.25", "delta1"),
    ("threshold_1.25^2", "delta2"),
    ("threshold_1.25^3", "delta3"),
    ("abs_relative_difference", "abs_rel"),
    ("sqr_relative_difference", "sq_rel"),
    ("rmse_linear", "rmse_linear"),
    ("rmse_log", "rmse_log"),
    ("rmse_log_scale_invariant", "scale_invariant_log"),
)


@dataclass(frozen=True)
class MetricsReport:
    """Six-metric evaluation over the N jointly-valid pixels."""

    delta1: float
    delta2: float
    delta3: float
    abs_rel: float
    sq_rel: float
    rmse_linear: float
    rmse_log: float
    scale_invariant_log: float
    n_pixels: int

    def rows(self) -> list[tuple[str, float]]:
        """(label, value) pairs in the standard report row order."""
        return [(label, getattr(self, attr)) for label, attr in METRIC_ROWS]


@dataclass(frozen=True)
class DistanceProfile:
    """Absolute-error percentiles binned by ground-truth distance.

    Bin i < len(edges) - 1 covers [edges[i], edges[i+1]); the final bin
    collects everything at or beyond the last edge.  Empty bins carry NaN
    percentiles and a zero count.
    """

    edges: np.ndarray
    percentiles: np.ndarray  # (n_bins, 5) for the 5/25/50/75/95 levels
    counts: np.ndarray


@dataclass(frozen=True)
class DepthHistogram:
    """Ground-truth pixel counts per depth bin (same binning as the profile)."""

    edges: np.ndarray
    counts: np.ndarray


def _joint_values(pred: DepthMap, gt: DepthMap) -> tuple[np.ndarray, np.ndarray]:
    if pred.data.shape != gt.data.shape:
        raise ValueError("prediction and ground truth must have identical dimensions")
    mask = valid_mask(pred) & valid_mask(gt)
    if not mask.any():
        raise ValueError("no pixels are valid in both maps")
    return pred.data[mask], gt.data[mask]


def evaluate(pred: DepthMap, gt: DepthMap) -> MetricsReport:
    """Compute the six-metric suite over jointly-valid pixels.

    Relative differences divide by the ground truth; the scale-invariant
    log error uses the 1/(2N) outer factor and is unchanged when the
    prediction is scaled by any positive constant.
    """
    y, y_star = _joint_values(pred, gt)
    n = y.size

    ratio = np.maximum(y / y_star, y_star / y)
    delta1 = float(np.mean(ratio < 1.25))
    delta2 = float(np.mean(ratio < 1.25**2))
    delta3 = float(np.mean(ratio < 1.25**3))

    diff = y - y_star
    abs_rel = float(np.mean(np.abs(diff) / y_star))
    sq_rel = float(np.mean(diff * diff / y_star))
    rmse_linear = float(np.sqrt(np.mean(diff * diff)))

    log_diff = np.log(y) - np.log(y_star)
    rmse_log = float(np.sqrt(np.mean(log_diff * log_diff)))

    correction = float(np.mean(-log_diff))
    scale_invariant = float(np.sum((log_diff + correction) ** 2) / (2.0 * n))

    return MetricsReport(
        delta1=delta1,
        delta2=delta2,
        delta3=delta3,
        abs_rel=abs_rel,
        sq_rel=sq_rel,
        rmse_linear=rmse_linear,
        rmse_log=rmse_log,
        scale_invariant_log=scale_invariant,
        n_pixels=int(n),
    )


def _check_edges(edges: np.ndarray) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("edges must be a 1-D array with at least two entries")
    if not np.all(np.diff(edges) > 0):
        raise ValueError("edges must be strictly increasing")
    return edges


def bin_indices(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Right-open bin index per value; the last bin is the overflow bin.

    Values below the first edge land in bin 0 so every value is counted.
    """
    idx = np.searchsorted(edges, values, side="right") - 1
    return np.clip(idx, 0, len(edges) - 1)


def distance_profile(pred: DepthMap, gt: DepthMap, edges) -> DistanceProfile:
    """Absolute-error percentiles of |pred - gt| binned by gt depth."""
    edges = _check_edges(edges)
    y, y_star = _joint_values(pred, gt)
    err = np.abs(y - y_star)
    idx = bin_indices(y_star, edges)

    n_bins = len(edges)
    pct = np.full((n_bins, len(PERCENTILES)), np.nan)
    counts = np.zeros(n_bins, dtype=np.int64)
    for b in range(n_bins):
        sel = err[idx == b]
        counts[b] = sel.size
        if sel.size:
            pct[b] = np.percentile(sel, PERCENTILES, method="linear")
    return DistanceProfile(edges=edges, percentiles=pct, counts=counts)


def depth_histogram(gt: DepthMap, edges) -> DepthHistogram:
    """Valid ground-truth pixel counts per depth bin."""
    edges = _check_edges(edges)
    values = gt.data[valid_mask(gt)]
    counts = np.zeros(len(edges), dtype=np.int64)
    if values.size:
        np.add.at(counts, bin_indices(values, edges), 1)
    return DepthHistogram(edges=edges, counts=counts)
