"""Synthetic rectified stereo scenes with exact analytic ground truth.

Scenes are fronto-parallel: a textured background plane plus rectangular
occluders defined in the cyclopean (midway) view.  Both views sample each
surface's continuous value-noise texture directly, shifted by half the
surface disparity per side, so the rendered geometry matches the analytic
disparity field exactly and supports subpixel matching tests.  The
occlusion mask marks left-view pixels hidden or out of frame in the right
view.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import DepthMap, DisparityMap, GrayImage, StereoCalibration


@dataclass(frozen=True)
class Occluder:
    """Fronto-parallel rectangle at constant depth, in cyclopean coordinates.

    The rectangle covers continuous coordinates [x0, x1) x [y0, y1).
    """

    depth: float
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (np.isfinite(self.depth) and self.depth > 0):
            raise ValueError("occluder depth must be positive")
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError("occluder rectangle must have positive extent")


@dataclass(frozen=True)
class SceneSpec:
    """Full description of one synthetic scene."""

    width: int
    height: int
    calibration: StereoCalibration
    background_depth: float
    occluders: tuple[Occluder, ...] = ()
    texture_contrast: float = 0.8
    texture_scale: float = 12.0
    texture_octaves: int = 3
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ValueError("scene must be at least 2x2 pixels")
        if not (np.isfinite(self.background_depth) and self.background_depth > 0):
            raise ValueError("background_depth must be positive")
        if not (0.0 <= self.texture_contrast <= 1.0):
            raise ValueError("texture_contrast must lie in [0, 1]")
        if self.texture_scale <= 1.0:
            raise ValueError("texture_scale must exceed 1 pixel")
        if self.texture_octaves < 1:
            raise ValueError("texture_octaves must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        fb = self.calibration.focal_baseline
        for depth in [self.background_depth] + [o.depth for o in self.occluders]:
            if fb / depth > self.calibration.max_disparity:
                raise ValueError(
                    f"depth {depth} m implies disparity {fb / depth:.2f} px beyond the "
                    f"calibrated maximum {self.calibration.max_disparity}"
                )
        for occ in self.occluders:
            if occ.depth >= self.background_depth:
                raise ValueError("occluders must be closer than the background plane")


def _smoothstep(t: np.ndarray) -> np.ndarray:
    return t * t * (3.0 - 2.0 * t)


class _ValueNoise:
    """Seeded multi-octave value noise, evaluable at arbitrary coordinates."""

    def __init__(self, seed_seq: np.random.SeedSequence, base_scale: float, octaves: int):
        self.base_scale = base_scale
        self.octaves = octaves
        self.rngs = [np.random.default_rng(s) for s in seed_seq.spawn(octaves)]
        self.lattices: list[np.ndarray] = []
        self.origins: list[tuple[int, int]] = []

    def prepare(self, x_min: float, x_max: float, y_min: float, y_max: float):
        """Allocate lattices covering the requested coordinate range."""
        self.lattices = []
        self.origins = []
        for o, rng in enumerate(self.rngs):
            scale = self.base_scale / (2.0**o)
            gx0 = int(np.floor(x_min / scale)) - 1
            gx1 = int(np.floor(x_max / scale)) + 2
            gy0 = int(np.floor(y_min / scale)) - 1
            gy1 = int(np.floor(y_max / scale)) + 2
            self.lattices.append(rng.random((gy1 - gy0 + 1, gx1 - gx0 + 1)))
            self.origins.append((gy0, gx0))

    def sample(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Noise in [0, 1] at the given coordinates (octave-weighted)."""
        total = np.zeros(np.broadcast(x, y).shape)
        norm = 0.0
        for o, (lattice, (gy0, gx0)) in enumerate(zip(self.lattices, self.origins)):
            scale = self.base_scale / (2.0**o)
            amp = 0.5**o
            u = x / scale - gx0
            v = y / scale - gy0
            iu = np.floor(u).astype(np.int64)
            iv = np.floor(v).astype(np.int64)
            fu = _smoothstep(u - iu)
            fv = _smoothstep(v - iv)
            v00 = lattice[iv, iu]
            v01 = lattice[iv, iu + 1]
            v10 = lattice[iv + 1, iu]
            v11 = lattice[iv + 1, iu + 1]
            top = v00 + fu * (v01 - v00)
            bottom = v10 + fu * (v11 - v10)
            total += amp * (top + fv * (bottom - top))
            norm += amp
        return total / norm


class _Surface:
    def __init__(self, depth: float, disparity: float, noise: _ValueNoise, contrast: float):
        self.depth = depth
        self.disparity = disparity
        self.noise = noise
        self.contrast = contrast

    def luminance(self, u: np.ndarray, y: np.ndarray) -> np.ndarray:
        tex = self.noise.sample(u, y)
        return np.clip(0.5 + self.contrast * (tex - 0.5), 0.0, 1.0)


def render(spec: SceneSpec) -> tuple[GrayImage, GrayImage, DepthMap, DisparityMap, np.ndarray]:
    """Render (left, right, gt_depth, gt_disparity, occlusion_mask).

    Ground truth is for the left view.  The occlusion mask is true where a
    left-view pixel's scene point is hidden behind a nearer surface in the
    right view or falls outside the right frame.
    """
    w, h = spec.width, spec.height
    fb = spec.calibration.focal_baseline
    seq = np.random.SeedSequence(spec.seed)
    surface_seqs = seq.spawn(len(spec.occluders) + 2)

    surfaces = []
    d_bg = fb / spec.background_depth
    bg_noise = _ValueNoise(surface_seqs[0], spec.texture_scale, spec.texture_octaves)
    bg_noise.prepare(-d_bg, w + d_bg, -1.0, h + 1.0)
    surfaces.append(_Surface(spec.background_depth, d_bg, bg_noise, spec.texture_contrast))
    for occ, sseq in zip(spec.occluders, surface_seqs[1:-1]):
        d = fb / occ.depth
        noise = _ValueNoise(sseq, spec.texture_scale, spec.texture_octaves)
        noise.prepare(occ.x0 - d, occ.x1 + d, occ.y0 - 1.0, occ.y1 + 1.0)
        surfaces.append(_Surface(occ.depth, d, noise, spec.texture_contrast))

    xs = np.tile(np.arange(w, dtype=np.float64), (h, 1))
    ys = np.tile(np.arange(h, dtype=np.float64)[:, None], (1, w))

    def footprint(surface_idx: int, view_sign: float) -> np.ndarray:
        """Pixels covered by the surface in the given view (+0.5 left, -0.5 right)."""
        if surface_idx == 0:
            return np.ones((h, w), dtype=bool)
        occ = spec.occluders[surface_idx - 1]
        d = surfaces[surface_idx].disparity
        shift = view_sign * d
        return (
            (xs >= occ.x0 + shift)
            & (xs < occ.x1 + shift)
            & (ys >= occ.y0)
            & (ys < occ.y1)
        )

    # Nearest surface wins; paint far-to-near.
    order = sorted(range(len(surfaces)), key=lambda i: -surfaces[i].depth)

    def compose(view_sign: float) -> tuple[np.ndarray, np.ndarray]:
        owner = np.zeros((h, w), dtype=np.int64)
        for idx in order:
            if idx == 0:
                continue
            owner[footprint(idx, view_sign)] = idx
        lum = np.zeros((h, w))
        for idx in range(len(surfaces)):
            sel = owner == idx
            if not sel.any():
                continue
            d = surfaces[idx].disparity
            lum[sel] = surfaces[idx].luminance(xs[sel] - view_sign * d, ys[sel])
        return lum, owner

    left_lum, left_owner = compose(+0.5)
    right_lum, _ = compose(-0.5)

    disp = np.empty((h, w))
    depth = np.empty((h, w))
    for idx in range(len(surfaces)):
        sel = left_owner == idx
        disp[sel] = surfaces[idx].disparity
        depth[sel] = surfaces[idx].depth

    # Right-view coordinate of each left pixel's scene point.
    xr = xs - disp
    occluded = xr < 0.0
    for idx in range(1, len(surfaces)):
        occ = spec.occluders[idx - 1]
        d = surfaces[idx].disparity
        covers = (
            (xr >= occ.x0 - 0.5 * d)
            & (xr < occ.x1 - 0.5 * d)
            & (ys >= occ.y0)
            & (ys < occ.y1)
            & (disp < d)
        )
        occluded |= covers

    noise_rngs = np.random.SeedSequence(spec.seed).spawn(len(spec.occluders) + 2)[-1]
    if spec.noise_sigma > 0:
        view_rngs = [np.random.default_rng(s) for s in noise_rngs.spawn(2)]
        left_lum = left_lum + spec.noise_sigma * view_rngs[0].standard_normal((h, w))
        right_lum = right_lum + spec.noise_sigma * view_rngs[1].standard_normal((h, w))
        left_lum = np.clip(left_lum, 0.0, 1.0)
        right_lum = np.clip(right_lum, 0.0, 1.0)

    return (
        GrayImage(left_lum),
        GrayImage(right_lum),
        DepthMap(depth),
        DisparityMap(disp),
        occluded,
    )


def perturb_oracle_mono(gt_depth: DepthMap, relative_sigma: float, bias: float, seed: int) -> DepthMap:
    """Controllable stand-in for a monocular estimator.

    Valid pixels are scaled by (1 + bias + relative_sigma * g) with seeded
    standard-normal g, clamped to at least 0.1 m.  A dense input yields a
    dense output (occlusions included); invalid pixels pass through.
    """
    if relative_sigma < 0:
        raise ValueError("relative_sigma must be non-negative")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(gt_depth.data.shape)
    factor = 1.0 + bias + relative_sigma * g
    out = gt_depth.data.copy()
    valid = gt_depth.data > 0
    out[valid] = np.maximum(gt_depth.data[valid] * factor[valid], 0.1)
    return DepthMap(out)


@dataclass(frozen=True)
class SuiteParams:
    """Randomized-scene population used by the evaluation suite.

    Depth and occluder ranges are drawn per scene from these bounds; the
    occlusion fraction of each accepted scene lies inside
    occlusion_fraction (specs are redrawn deterministically until it
    does).
    """

    width: int = 512
    height: int = 256
    calibration: StereoCalibration = field(
        default_factory=lambda: StereoCalibration(focal_length=320.0, baseline=0.2, max_disparity=64)
    )
    background_depth_range: tuple[float, float] = (9.0, 14.0)
    occluder_depth_range: tuple[float, float] = (1.6, 3.2)
    occluder_count_range: tuple[int, int] = (1, 3)
    occlusion_fraction: tuple[float, float] = (0.05, 0.20)
    texture_contrast: float = 0.55
    texture_scale: float = 12.0
    texture_octaves: int = 3
    noise_sigma: float = 0.03


def occlusion_fraction(spec: SceneSpec) -> float:
    """Fraction of left-view pixels occluded or out of frame in the right view."""
    *_, mask = render(replace(spec, texture_contrast=0.0, noise_sigma=0.0))
    return float(mask.mean())


def make_scene_spec(params: SuiteParams, seed: int, max_tries: int = 32) -> SceneSpec:
    """Deterministically draw one scene spec whose occlusion fraction is in range."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xA11CE)))
    lo, hi = params.occlusion_fraction
    for _ in range(max_tries):
        n_occ = int(rng.integers(params.occluder_count_range[0], params.occluder_count_range[1] + 1))
        bg = float(rng.uniform(*params.background_depth_range))
        occluders = []
        for _ in range(n_occ):
            depth = float(rng.uniform(*params.occluder_depth_range))
            width = float(rng.uniform(0.12, 0.25) * params.width)
            height = float(rng.uniform(0.35, 0.7) * params.height)
            x0 = float(rng.uniform(0.15 * params.width, 0.85 * params.width - width))
            y0 = float(rng.uniform(0.05 * params.height, 0.95 * params.height - height))
            occluders.append(Occluder(depth=depth, x0=x0, y0=y0, x1=x0 + width, y1=y0 + height))
        spec = SceneSpec(
            width=params.width,
            height=params.height,
            calibration=params.calibration,
            background_depth=bg,
            occluders=tuple(occluders),
            texture_contrast=params.texture_contrast,
            texture_scale=params.texture_scale,
            texture_octaves=params.texture_octaves,
            noise_sigma=params.noise_sigma,
            seed=seed,
        )
        if lo <= occlusion_fraction(spec) <= hi:
            return spec
    raise ValueError(f"could not hit occlusion fraction {params.occlusion_fraction} within {max_tries} draws")


def scene_suite(count: int, params: SuiteParams | None = None) -> list[SceneSpec]:
    """The deterministic scene population for fusion-vs-stereo evaluation."""
    params = params or SuiteParams()
    return [make_scene_spec(params, seed) for seed in range(count)]
