"""Head-orientation-to-phosphene-frame rendering.

``PhospheneRenderer`` is a scikit-learn style transformer: ``fit`` binds a
panorama and precomputes everything orientation-independent (phosphene
layout, per-phosphene ray stencils, splat patches per quantization level),
``transform`` maps a batch of head quaternions to stimulus frames. Per frame
the work reduces to one 3x3 rotation applied to the cached rays, a bilinear
gather, quantization, and patch additions; no rays are recast and no
Gaussians are evaluated.

``render_naive`` is the slow reference path that recasts every ray on every
frame. Both paths funnel identical ray values through the same arithmetic,
so their frames are bit-identical; this is asserted by the test suite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import ContractViolationError
from .geometry import (
    CameraModel,
    PanoramaMapping,
    default_camera,
    head_to_world_rotation,
)
from .phosphene import (
    PhospheneConfig,
    PhospheneLayout,
    build_layout,
    build_splat_templates,
    fov_radius_px,
    quantize_array,
)
from .validation import check_panorama, check_quaternions


@dataclass(frozen=True)
class StimulusFrame:
    """One rendered display frame with values in [0, 1]."""

    buffer: np.ndarray = field(repr=False)
    timestamp_s: float = 0.0
    condition: str = ""
    channel: str = "green"

    @property
    def width(self) -> int:
        return int(self.buffer.shape[1])

    @property
    def height(self) -> int:
        return int(self.buffer.shape[0])


@dataclass(frozen=True)
class RayTable:
    """Cached unit camera-frame rays, one k x k stencil per phosphene."""

    rays: np.ndarray = field(repr=False)  # (effective_count, stencil**2, 3)
    stencil: int
    fov_deg: float

    @property
    def phosphene_count(self) -> int:
        return int(self.rays.shape[0])


def _stencil_pixels(layout: PhospheneLayout, stencil: int):
    """Pixel coordinates of the k x k sampling stencil of every phosphene.

    The stencil points are the cell centers of a k x k partition of the
    pitch-sized square window around each phosphene center.
    """
    offsets = ((np.arange(stencil) + 0.5) / stencil - 0.5) * layout.pitch
    ox, oy = np.meshgrid(offsets, offsets)
    jj = layout.centers[:, 0][:, None] + ox.ravel()[None, :]
    ii = layout.centers[:, 1][:, None] + oy.ravel()[None, :]
    return jj, ii


def precompute_ray_table(layout: PhospheneLayout, cam: CameraModel, stencil: int = 3) -> RayTable:
    """Cast every stencil ray once; per-frame work is then a single rotation."""
    if stencil < 1:
        raise ContractViolationError("stencil must be >= 1")
    jj, ii = _stencil_pixels(layout, stencil)
    rays = cam.pinhole_rays(jj, ii)
    return RayTable(rays=rays, stencil=stencil, fov_deg=layout.fov_deg)


def apply_fov_mask(frame: np.ndarray, fov_deg: float, cam: CameraModel, margin_px: float = 0.0) -> np.ndarray:
    """Zero all pixels outside the FOV disc (plus a margin); idempotent."""
    r = fov_radius_px(fov_deg, cam) + margin_px
    ys = np.arange(frame.shape[0], dtype=np.float64) - cam.cy
    xs = np.arange(frame.shape[1], dtype=np.float64) - cam.cx
    outside = ys[:, None] ** 2 + xs[None, :] ** 2 > r * r
    frame[outside] = 0.0
    return frame


class PhospheneRenderer(BaseEstimator, TransformerMixin):
    """Render head orientations as phosphene stimulus frames of one panorama.

    Parameters
    ----------
    n_phosphenes : nominal phosphene count (square grid, circularly masked).
    fov_deg : angular diameter of the circular field of view.
    levels : intensity quantization levels.
    sigma_ratio : splat sigma as a fraction of the phosphene radius.
    stencil : side of the k x k panorama sampling stencil per phosphene.
    camera : display intrinsics; defaults to a 960x1080 eye spanning 60 deg.
    quat_order : component order of input quaternions, "wxyz" or "xyzw".
    eye_count : display eyes; both eyes show the same monocular content.
    """

    def __init__(
        self,
        n_phosphenes: int = 500,
        fov_deg: float = 60.0,
        levels: int = 8,
        sigma_ratio: float = 0.5,
        stencil: int = 3,
        camera: CameraModel = None,
        quat_order: str = "wxyz",
        eye_count: int = 1,
    ):
        self.n_phosphenes = n_phosphenes
        self.fov_deg = fov_deg
        self.levels = levels
        self.sigma_ratio = sigma_ratio
        self.stencil = stencil
        self.camera = camera
        self.quat_order = quat_order
        self.eye_count = eye_count

    # ------------------------------------------------------------------
    # fitting
    # ------------------------------------------------------------------

    def fit(self, X, y=None) -> "PhospheneRenderer":
        """Bind panorama ``X`` and precompute layout, ray table and splats."""
        if self.eye_count not in (1, 2):
            raise ContractViolationError("eye_count must be 1 or 2")
        self.camera_ = self.camera if self.camera is not None else default_camera()
        self.config_ = PhospheneConfig(
            count=self.n_phosphenes, levels=self.levels, sigma_ratio=self.sigma_ratio
        )
        self.layout_ = build_layout(self.config_, self.fov_deg, self.camera_)
        self.ray_table_ = precompute_ray_table(self.layout_, self.camera_, self.stencil)
        frame_shape = (self.camera_.height, self.camera_.width)
        self.templates_ = build_splat_templates(self.layout_, self.config_, frame_shape)
        self.set_panorama(X)
        return self

    def set_panorama(self, X) -> "PhospheneRenderer":
        """Swap the panorama without rebuilding orientation-independent state."""
        if not hasattr(self, "camera_"):
            raise NotFittedError("fit the renderer before swapping panoramas")
        self.panorama_ = check_panorama(X)
        self.mapping_ = PanoramaMapping.for_image(self.panorama_)
        return self

    def _check_fitted(self):
        if not hasattr(self, "panorama_"):
            raise NotFittedError("this renderer is not fitted; call fit(panorama) first")

    # ------------------------------------------------------------------
    # rendering
    # ------------------------------------------------------------------

    def _world_from_camera(self, quat) -> np.ndarray:
        return head_to_world_rotation(quat, order=self.quat_order)

    def _frame_from_camera_rays(self, m: np.ndarray, rays: np.ndarray) -> np.ndarray:
        """Shared per-frame arithmetic: rotate, sample, quantize, splat."""
        if rays.shape[0] != self.layout_.effective_count:
            raise ContractViolationError(
                f"ray table holds {rays.shape[0]} phosphenes; layout has "
                f"{self.layout_.effective_count}"
            )
        flat = rays.reshape(-1, 3)
        x, y, z = flat[:, 0], flat[:, 1], flat[:, 2]
        wx = m[0, 0] * x + m[0, 1] * y + m[0, 2] * z
        wy = m[1, 0] * x + m[1, 1] * y + m[1, 2] * z
        wz = m[2, 0] * x + m[2, 1] * y + m[2, 2] * z
        phi = np.arctan2(wy, wx)
        theta = np.arcsin(np.clip(wz, -1.0, 1.0))
        mp = self.mapping_
        xp = np.mod(mp.x0 + phi / (2.0 * math.pi) * mp.width, mp.width)
        xp = np.where(xp >= mp.width, xp - mp.width, xp)
        yp = np.clip(mp.y0 + theta / math.pi * mp.height, 0.0, mp.height - 1.0)
        vals = _bilinear_gather(self.panorama_, xp, yp)
        raw = vals.reshape(-1, rays.shape[1]).mean(axis=1)
        lvls = quantize_array(raw, self.config_.levels)
        frame = np.zeros((self.camera_.height, self.camera_.width), dtype=np.float32)
        for tpl, level in zip(self.templates_, lvls):
            entry = tpl[level]
            if entry is None:
                continue
            rows, cols, patch = entry
            frame[rows, cols] += patch
        np.clip(frame, 0.0, 1.0, out=frame)
        return frame

    def render(self, quat, timestamp_s: float = 0.0) -> StimulusFrame:
        """Render one head orientation using the precomputed ray table."""
        self._check_fitted()
        m = self._world_from_camera(quat)
        buf = self._frame_from_camera_rays(m, self.ray_table_.rays)
        return StimulusFrame(
            buffer=buf,
            timestamp_s=timestamp_s,
            condition=self.condition_id,
            channel=self.config_.channel,
        )

    def render_eyes(self, quat, timestamp_s: float = 0.0):
        """Per-eye frames; monocular content is duplicated when eye_count is 2."""
        frame = self.render(quat, timestamp_s)
        return tuple(frame for _ in range(self.eye_count))

    def render_naive(self, quat) -> np.ndarray:
        """Reference path: recast every stencil ray instead of using the table.

        Kept deliberately table-free so the equivalence tests exercise the
        precompute machinery against per-frame casting.
        """
        self._check_fitted()
        m = self._world_from_camera(quat)
        jj, ii = _stencil_pixels(self.layout_, self.stencil)
        per_phosphene = [
            self.camera_.pinhole_rays(jj[p], ii[p]) for p in range(self.layout_.effective_count)
        ]
        rays = np.stack(per_phosphene, axis=0)
        return self._frame_from_camera_rays(m, rays)

    def transform(self, X) -> np.ndarray:
        """Render a batch of quaternions to an (n, height, width) array."""
        self._check_fitted()
        quats = check_quaternions(X, order=self.quat_order)
        frames = np.empty(
            (quats.shape[0], self.camera_.height, self.camera_.width), dtype=np.float32
        )
        for k, q in enumerate(quats):
            frames[k] = self._frame_from_camera_rays(
                self._world_from_camera(q), self.ray_table_.rays
            )
        return frames

    @property
    def condition_id(self) -> str:
        return f"fov{self.fov_deg:g}_p{self.n_phosphenes}"


def _bilinear_gather(p: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear sampling on pre-wrapped/pre-clamped coordinates."""
    h, w = p.shape
    x0 = np.floor(x)
    y0 = np.floor(y)
    wxf = x - x0
    wyf = y - y0
    x0i = x0.astype(np.int64)
    x1i = x0i + 1
    x1i = np.where(x1i >= w, x1i - w, x1i)
    y0i = y0.astype(np.int64)
    y1i = np.minimum(y0i + 1, h - 1)
    top = (1.0 - wxf) * p[y0i, x0i] + wxf * p[y0i, x1i]
    bottom = (1.0 - wxf) * p[y1i, x0i] + wxf * p[y1i, x1i]
    return (1.0 - wyf) * top + wyf * bottom


def benchmark_render(renderer: PhospheneRenderer, n_frames: int = 100, warmup: int = 10, seed: int = 0) -> np.ndarray:
    """Per-frame render times in milliseconds over random orientations."""
    rng = np.random.default_rng(seed)
    quats = rng.normal(size=(warmup + n_frames, 4))
    times = np.empty(n_frames)
    for k, q in enumerate(quats):
        t0 = time.perf_counter()
        renderer.render(q)
        dt = (time.perf_counter() - t0) * 1e3
        if k >= warmup:
            times[k - warmup] = dt
    return times
