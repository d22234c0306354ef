"""Phosphene layout, intensity quantization and Gaussian splat rendering.

Phosphenes sit on a square grid spanning the bounding square of a circular
field of view; grid points farther than the FOV radius from the display
center are absent. A sampled intensity in [0, 1] is quantized to one of
``levels`` steps; the normalized luminance ``level / (levels - 1)`` controls
both the brightness and the size of the rendered dot: a phosphene with
luminance L is a Gaussian of standard deviation ``sigma * L`` truncated at
``3 * sigma * L``, peaking at L. Level 0 renders nothing.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .geometry import CameraModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhospheneConfig:
    """Phosphene array parameters.

    Attributes:
        count: Nominal phosphene count; the grid side is round(sqrt(count)).
        levels: Number of quantization levels (>= 2).
        sigma_ratio: Gaussian sigma as a fraction of the footprint radius.
        channel: Display channel tag for exported frames.
    """

    count: int = 500
    levels: int = 8
    sigma_ratio: float = 0.5
    channel: str = "green"

    def __post_init__(self):
        if self.count < 1:
            raise ConfigurationError("phosphene count must be >= 1")
        if self.levels < 2:
            raise ConfigurationError("quantization needs at least 2 levels")
        if not 0.0 < self.sigma_ratio <= 2.0:
            raise ConfigurationError("sigma_ratio must be in (0, 2]")


@dataclass(frozen=True)
class PhospheneLayout:
    """Concrete phosphene positions for one (FOV, camera) pairing."""

    fov_deg: float
    fov_radius_px: float
    grid_side: int
    pitch: float
    radius: float
    center_xy: tuple
    centers: np.ndarray = field(repr=False)  # (effective_count, 2) as (x, y)

    @property
    def effective_count(self) -> int:
        return int(self.centers.shape[0])


def fov_radius_px(fov_deg: float, cam: CameraModel) -> float:
    """Pixel radius of a circular FOV of the given angular diameter."""
    if not 0.0 < fov_deg < 180.0:
        raise ConfigurationError("FOV must be in (0, 180) degrees")
    return cam.fx * math.tan(math.radians(fov_deg) / 2.0)


def build_layout(cfg: PhospheneConfig, fov_deg: float, cam: CameraModel) -> PhospheneLayout:
    """Place a square phosphene grid inside a circular FOV on the display.

    Raises:
        ConfigurationError: If the FOV circle does not fit on the display.
    """
    r = fov_radius_px(fov_deg, cam)
    margin = min(cam.cx, cam.width - cam.cx, cam.cy, cam.height - cam.cy)
    if r > margin + 1e-9:
        raise ConfigurationError(
            f"{fov_deg} degree FOV needs a {r:.1f} px radius; display allows {margin:.1f} px"
        )
    side = int(round(math.sqrt(cfg.count)))
    pitch = 2.0 * r / side
    offsets = (np.arange(side) + 0.5 - side / 2.0) * pitch
    gx, gy = np.meshgrid(cam.cx + offsets, cam.cy + offsets)
    centers = np.stack([gx.ravel(), gy.ravel()], axis=1)
    dist = np.hypot(centers[:, 0] - cam.cx, centers[:, 1] - cam.cy)
    centers = centers[dist <= r * (1.0 + 1e-12)]
    return PhospheneLayout(
        fov_deg=float(fov_deg),
        fov_radius_px=r,
        grid_side=side,
        pitch=pitch,
        radius=pitch / 2.0,
        center_xy=(cam.cx, cam.cy),
        centers=centers,
    )


# ---------------------------------------------------------------------------
# Quantization
# ---------------------------------------------------------------------------


def quantize(raw: float, levels: int) -> int:
    """Quantize an intensity in [0, 1] to an integer level in [0, levels - 1].

    Out-of-range input is clamped (with a warning); an intensity of exactly
    1.0 maps to the top level.
    """
    if levels < 2:
        raise ConfigurationError("quantization needs at least 2 levels")
    raw = float(raw)
    if raw < 0.0 or raw > 1.0:
        logger.warning("intensity %.4f outside [0, 1]; clamping", raw)
        raw = min(max(raw, 0.0), 1.0)
    return min(int(raw * levels), levels - 1)


def quantize_array(raw: np.ndarray, levels: int) -> np.ndarray:
    """Vectorized ``quantize``; warns once if any value is out of range."""
    if levels < 2:
        raise ConfigurationError("quantization needs at least 2 levels")
    raw = np.asarray(raw, dtype=np.float64)
    if np.any((raw < 0.0) | (raw > 1.0)):
        logger.warning("intensities outside [0, 1]; clamping")
        raw = np.clip(raw, 0.0, 1.0)
    return np.minimum((raw * levels).astype(np.int64), levels - 1)


def luminance(level: int, levels: int) -> float:
    """Normalized luminance of a quantization level: level / (levels - 1)."""
    if levels < 2:
        raise ConfigurationError("quantization needs at least 2 levels")
    if not 0 <= level <= levels - 1:
        raise ConfigurationError(f"level {level} outside [0, {levels - 1}]")
    return level / (levels - 1)


# ---------------------------------------------------------------------------
# Splatting
# ---------------------------------------------------------------------------


def gaussian_patch(center, lum: float, sigma: float, frame_shape):
    """Truncated Gaussian splat patch for one phosphene.

    Returns ``(rows, cols, patch)`` where ``patch`` is a float32 array to be
    added to ``frame[rows, cols]``, or None when the luminance is zero or
    the support misses the frame entirely. The support is the disc of radius
    ``3 * sigma * lum``; the patch peaks at ``lum`` at the splat center.
    """
    if lum <= 0.0:
        return None
    h, w = frame_shape
    cx, cy = float(center[0]), float(center[1])
    sig = sigma * lum
    support = 3.0 * sig
    x_lo = max(int(math.ceil(cx - support)), 0)
    x_hi = min(int(math.floor(cx + support)), w - 1)
    y_lo = max(int(math.ceil(cy - support)), 0)
    y_hi = min(int(math.floor(cy + support)), h - 1)
    if x_lo > x_hi or y_lo > y_hi:
        return None
    xs = np.arange(x_lo, x_hi + 1, dtype=np.float64) - cx
    ys = np.arange(y_lo, y_hi + 1, dtype=np.float64) - cy
    d2 = ys[:, None] ** 2 + xs[None, :] ** 2
    patch = lum * np.exp(-0.5 * d2 / (sig * sig))
    patch[d2 > support * support] = 0.0
    return slice(y_lo, y_hi + 1), slice(x_lo, x_hi + 1), patch.astype(np.float32)


def render_phosphene(frame: np.ndarray, center, lum: float, sigma: float) -> np.ndarray:
    """Add one phosphene splat to ``frame`` in place, saturating at 1.0.

    A zero luminance is a no-op (the phosphene is absent).
    """
    splat = gaussian_patch(center, lum, sigma, frame.shape)
    if splat is None:
        return frame
    rows, cols, patch = splat
    region = frame[rows, cols]
    region += patch
    np.minimum(region, 1.0, out=region)
    return frame


def build_splat_templates(layout: PhospheneLayout, cfg: PhospheneConfig, frame_shape):
    """Precompute per-phosphene splat patches for every quantization level.

    Returns a list indexed by phosphene holding ``levels`` entries each
    (None at level 0): the work left per frame is a patch addition per lit
    phosphene, with no transcendental evaluations.
    """
    sigma = cfg.sigma_ratio * layout.radius
    templates = []
    for center in layout.centers:
        per_level = [None]
        for level in range(1, cfg.levels):
            lum = luminance(level, cfg.levels)
            per_level.append(gaussian_patch(center, lum, sigma, frame_shape))
        templates.append(per_level)
    return templates
