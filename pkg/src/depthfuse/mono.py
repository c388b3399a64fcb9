"""Self-supervised monocular depth: features, targets, training, prediction.

A per-pixel linear regressor over ten hand-crafted appearance features is
trained with stochastic subgradient descent on the mean-absolute loss
against sparse high-confidence stereo depth, then predicts a dense map.
Externally computed depth maps (e.g. CNN output) can be imported from
files instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _filters
from .core import DepthMap, GrayImage

FEATURE_NAMES = (
    "norm_row",
    "norm_col",
    "local_mean",
    "local_variance",
    "grad_horizontal",
    "grad_vertical",
    "texture_energy_3",
    "texture_energy_5",
    "texture_energy_9",
    "bias",
)
N_FEATURES = len(FEATURE_NAMES)

_STAT_RADIUS = 2  # 5x5 window for local mean / variance
_TEXTURE_RADII = (1, 2, 4)  # 3x3, 5x5, 9x9 texture-energy windows
_MIN_IMAGE = 9  # largest texture-energy window


def extract_features(img: GrayImage) -> np.ndarray:
    """Dense (H, W, 10) feature grid.

    Features: normalized row and column coordinates, local mean and
    variance of luminance (5x5), horizontal and vertical Sobel gradient
    magnitudes, window-averaged Laplacian magnitude at three scales, and a
    constant bias term.  Window statistics use edge replication.
    """
    if img.height < _MIN_IMAGE or img.width < _MIN_IMAGE:
        raise ValueError(f"image must be at least {_MIN_IMAGE}x{_MIN_IMAGE} for feature extraction")
    h, w = img.data.shape
    data = img.data

    rows = np.repeat(np.arange(h, dtype=np.float64)[:, None], w, axis=1) / (h - 1)
    cols = np.repeat(np.arange(w, dtype=np.float64)[None, :], h, axis=0) / (w - 1)

    mean = _filters.box_mean_replicate(data, _STAT_RADIUS)
    mean_sq = _filters.box_mean_replicate(data * data, _STAT_RADIUS)
    variance = np.maximum(mean_sq - mean * mean, 0.0)

    grad_h = np.abs(_filters.sobel_response(data, axis=1)) / _filters.SOBEL_GAIN
    grad_v = np.abs(_filters.sobel_response(data, axis=0)) / _filters.SOBEL_GAIN

    lap = np.abs(_filters.laplacian_replicate(data))
    textures = [_filters.box_mean_replicate(lap, r) for r in _TEXTURE_RADII]

    bias = np.ones((h, w), dtype=np.float64)
    return np.stack(
        [rows, cols, mean, variance, grad_h, grad_v, *textures, bias],
        axis=-1,
    )


@dataclass(frozen=True)
class SslDataset:
    """Sparse training triples drawn from the confident-pixel set.

    coords is (N, 2) as (row, col); features is (N, 10); targets holds
    positive depths in meters.
    """

    coords: np.ndarray
    features: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        if len(self.coords) != len(self.features) or len(self.coords) != len(self.targets):
            raise ValueError("coords, features, and targets must have equal length")
        if len(self.targets) and (not np.all(np.isfinite(self.targets)) or self.targets.min() <= 0):
            raise ValueError("targets must be finite and positive")

    def __len__(self) -> int:
        return len(self.targets)


def build_dataset(
    features: np.ndarray,
    targets: DepthMap,
    c_mask: np.ndarray,
    max_samples: int,
    seed: int,
) -> SslDataset:
    """Seeded uniform subsample of the confident pixels, up to max_samples.

    Pixels must be confident *and* carry a valid target depth (a matched
    disparity of exactly zero triangulates to no depth and is skipped).
    """
    h, w = targets.data.shape
    if features.shape[:2] != (h, w) or c_mask.shape != (h, w):
        raise ValueError("features, targets, and mask dimensions must agree")
    usable = c_mask & (targets.data > 0)
    flat = np.flatnonzero(usable)
    if flat.size == 0:
        raise ValueError("no confident targets")
    rng = np.random.default_rng(seed)
    take = min(int(max_samples), flat.size)
    chosen = rng.choice(flat, size=take, replace=False)
    ys, xs = np.unravel_index(chosen, (h, w))
    coords = np.stack([ys, xs], axis=1)
    return SslDataset(
        coords=coords,
        features=features[ys, xs],
        targets=targets.data[ys, xs],
    )


@dataclass(frozen=True)
class TrainConfig:
    """SGD schedule; the learning rate is multiplied by decay_factor every
    decay_every epochs."""

    epochs: int = 200
    batch_size: int = 1024
    learning_rate: float = 1e-2
    decay_every: int = 50
    decay_factor: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.decay_every < 1:
            raise ValueError("epochs, batch_size, and decay_every must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if not (0 < self.decay_factor <= 1):
            raise ValueError("decay_factor must lie in (0, 1]")


@dataclass(frozen=True)
class RegressorModel:
    """Linear depth model with a positive output floor in meters.

    The floor is an inference-time guard; training fits the linear part so
    subgradients never vanish on clamped pixels.
    """

    weights: np.ndarray
    floor: float = 0.5

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 1 or not np.all(np.isfinite(w)):
            raise ValueError("weights must be a finite 1-D vector")
        if not (np.isfinite(self.floor) and self.floor > 0):
            raise ValueError("floor must be positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


def train(ds: SslDataset, cfg: TrainConfig, floor: float = 0.5) -> tuple[RegressorModel, np.ndarray]:
    """Minimize mean absolute depth error by stochastic subgradient descent.

    The per-epoch loss history holds the full-dataset MAE of the linear
    model after each epoch's updates; with a fixed seed the whole run is
    deterministic.  A non-finite loss aborts with an error (diverged;
    lower the learning rate).
    """
    if len(ds) == 0:
        raise ValueError("dataset is empty")
    x = ds.features
    y = ds.targets
    n, n_feat = x.shape
    w = np.zeros(n_feat)
    rng = np.random.default_rng(cfg.seed)
    history = np.empty(cfg.epochs)

    for epoch in range(cfg.epochs):
        lr = cfg.learning_rate * cfg.decay_factor ** (epoch // cfg.decay_every)
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            resid = x[batch] @ w - y[batch]
            grad = np.sign(resid) @ x[batch] / batch.size
            w -= lr * grad
        mae = float(np.mean(np.abs(x @ w - y)))
        if not np.isfinite(mae):
            raise ValueError(f"training diverged at epoch {epoch}; lower the learning rate")
        history[epoch] = mae
    return RegressorModel(weights=w, floor=floor), history


def predict(model: RegressorModel, features: np.ndarray) -> DepthMap:
    """Dense depth from a feature grid: max(floor, weights . features)."""
    if features.ndim != 3 or features.shape[2] != model.weights.shape[0]:
        raise ValueError(
            f"feature grid has {features.shape[-1] if features.ndim == 3 else '?'} features, "
            f"model expects {model.weights.shape[0]}"
        )
    z = features @ model.weights
    return DepthMap(np.maximum(z, model.floor))


class MonoDepthRegressor:
    """sklearn-style estimator facade over the SSL training loop.

    fit(X, y) takes flat (n_samples, 10) features and positive depth
    targets; predict(X) returns floored depths.  get_params/set_params
    follow the sklearn contract so the regressor composes with pipeline
    and model-selection tooling.
    """

    def __init__(
        self,
        epochs: int = 200,
        batch_size: int = 1024,
        learning_rate: float = 1e-2,
        decay_every: int = 50,
        decay_factor: float = 0.5,
        floor: float = 0.5,
        seed: int = 0,
    ):
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.decay_every = decay_every
        self.decay_factor = decay_factor
        self.floor = floor
        self.seed = seed

    _PARAM_NAMES = (
        "epochs",
        "batch_size",
        "learning_rate",
        "decay_every",
        "decay_factor",
        "floor",
        "seed",
    )

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._PARAM_NAMES}

    def set_params(self, **params) -> "MonoDepthRegressor":
        for name, value in params.items():
            if name not in self._PARAM_NAMES:
                raise ValueError(f"invalid parameter {name!r} for MonoDepthRegressor")
            setattr(self, name, value)
        return self

    def _config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            decay_every=self.decay_every,
            decay_factor=self.decay_factor,
            seed=self.seed,
        )

    def fit(self, X, y) -> "MonoDepthRegressor":
        x = np.asarray(X, dtype=np.float64)
        targets = np.asarray(y, dtype=np.float64)
        if x.ndim != 2 or targets.ndim != 1 or len(x) != len(targets):
            raise ValueError("X must be (n_samples, n_features) with matching 1-D y")
        coords = np.zeros((len(targets), 2), dtype=np.int64)
        ds = SslDataset(coords=coords, features=x, targets=targets)
        self.model_, self.loss_history_ = train(ds, self._config(), floor=self.floor)
        return self

    def fit_dataset(self, ds: SslDataset) -> "MonoDepthRegressor":
        self.model_, self.loss_history_ = train(ds, self._config(), floor=self.floor)
        return self

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        x = np.asarray(X, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.model_.weights.shape[0]:
            raise ValueError("X must be (n_samples, n_features) matching the fitted model")
        return np.maximum(x @ self.model_.weights, self.model_.floor)

    def predict_map(self, features: np.ndarray) -> DepthMap:
        self._check_fitted()
        return predict(self.model_, features)

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise ValueError("MonoDepthRegressor is not fitted; call fit first")


def import_external(path: str | Path) -> DepthMap:
    """Load an externally computed depth map (PFM or 16-bit PNG)."""
    from .io import read_depth_any

    return read_depth_any(Path(path))
