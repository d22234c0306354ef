"""Renderer tests: ray table equivalence, physical invariants, oracles."""

import math

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from spvlab import geometry as geo
from spvlab import phosphene as ph
from spvlab.errors import ContractViolationError
from spvlab.geometry import CameraModel
from spvlab.renderer import (
    PhospheneRenderer,
    apply_fov_mask,
    precompute_ray_table,
)


def small_camera(size=64):
    return CameraModel.from_horizontal_fov(size, size, 60.0)


def gradient_panorama(h=128, rng_seed=1):
    rng = np.random.default_rng(rng_seed)
    base = np.linspace(0, 1, 2 * h)[None, :] * np.linspace(1, 0.2, h)[:, None]
    noise = rng.uniform(0, 0.2, size=(h, 2 * h))
    return np.clip(base + noise, 0.0, 1.0)


# ---------------------------------------------------------------------------
# ray table
# ---------------------------------------------------------------------------


def test_ray_table_cardinality_and_unit_norm():
    cam = geo.default_camera()
    layout = ph.build_layout(ph.PhospheneConfig(count=500), 60.0, cam)
    table = precompute_ray_table(layout, cam, stencil=3)
    assert table.rays.shape == (layout.effective_count, 9, 3)
    norms = np.linalg.norm(table.rays, axis=-1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)


def test_single_phosphene_single_stencil_ray_is_optical_axis():
    cam = geo.default_camera()
    layout = ph.build_layout(ph.PhospheneConfig(count=1), 20.0, cam)
    table = precompute_ray_table(layout, cam, stencil=1)
    assert table.rays.shape == (1, 1, 3)
    np.testing.assert_allclose(table.rays[0, 0], [0.0, 0.0, 1.0], atol=1e-15)


def test_table_and_naive_paths_bit_identical():
    # 64x64 display, <= 50 phosphenes, 20 random orientations
    cam = small_camera(64)
    pano = gradient_panorama(64)
    r = PhospheneRenderer(n_phosphenes=50, fov_deg=40.0, camera=cam).fit(pano)
    rng = np.random.default_rng(42)
    for _ in range(20):
        q = rng.normal(size=4)
        fast = r.render(q).buffer
        slow = r.render_naive(q)
        np.testing.assert_array_equal(fast, slow)


def test_mismatched_table_rejected():
    cam = small_camera()
    pano = gradient_panorama(32)
    r = PhospheneRenderer(n_phosphenes=30, fov_deg=40.0, camera=cam).fit(pano)
    other = ph.build_layout(ph.PhospheneConfig(count=10), 30.0, cam)
    bad = precompute_ray_table(other, cam, stencil=3)
    with pytest.raises(ContractViolationError):
        r._frame_from_camera_rays(np.eye(3), bad.rays)


# ---------------------------------------------------------------------------
# rendering invariants
# ---------------------------------------------------------------------------


def test_unfitted_renderer_refuses_to_render():
    with pytest.raises(NotFittedError):
        PhospheneRenderer().render([1, 0, 0, 0])


def test_frame_range_and_mask_support():
    cam = small_camera(96)
    r = PhospheneRenderer(n_phosphenes=80, fov_deg=40.0, camera=cam).fit(
        np.full((48, 96), 1.0)
    )
    frame = r.render([1, 0, 0, 0]).buffer
    assert frame.min() >= 0.0 and frame.max() <= 1.0
    sigma = r.config_.sigma_ratio * r.layout_.radius
    masked = apply_fov_mask(frame.copy(), 40.0, cam, margin_px=3 * sigma)
    np.testing.assert_array_equal(masked, frame)  # already zero outside
    again = apply_fov_mask(masked.copy(), 40.0, cam, margin_px=3 * sigma)
    np.testing.assert_array_equal(again, masked)  # idempotent


def test_black_panorama_renders_black():
    cam = small_camera()
    r = PhospheneRenderer(n_phosphenes=40, fov_deg=40.0, camera=cam).fit(np.zeros((32, 64)))
    assert not np.any(r.render([1, 0, 0, 0]).buffer)


def test_uniform_panorama_rotation_invariant():
    cam = small_camera()
    r = PhospheneRenderer(n_phosphenes=40, fov_deg=40.0, camera=cam).fit(
        np.full((32, 64), 0.5)
    )
    base = r.render([1, 0, 0, 0]).buffer
    lvls = ph.quantize_array(np.array([0.5]), 8)
    assert lvls[0] == 4
    rng = np.random.default_rng(9)
    for _ in range(5):
        np.testing.assert_array_equal(r.render(rng.normal(size=4)).buffer, base)


def test_hemisphere_panorama_sides_against_per_ray_oracle():
    # panorama: white for azimuth < 0, black for azimuth >= 0; head at the seam
    cam = small_camera(128)
    h, w = 64, 128
    pano = np.zeros((h, w))
    pano[:, : w // 2] = 1.0  # columns left of center x0 = 64 <=> phi < 0
    r = PhospheneRenderer(n_phosphenes=60, fov_deg=50.0, camera=cam).fit(pano)
    frame = r.render([1, 0, 0, 0]).buffer
    # independent per-ray computation of expected levels
    m = geo.head_to_world_rotation([1, 0, 0, 0])
    sigma = r.config_.sigma_ratio * r.layout_.radius
    expected = np.zeros_like(frame)
    for center, tpl in zip(r.layout_.centers, r.templates_):
        offs = ((np.arange(3) + 0.5) / 3 - 0.5) * r.layout_.pitch
        raw = []
        for oy in offs:
            for ox in offs:
                ray = m @ cam.pinhole_ray(center[0] + ox, center[1] + oy)
                phi, theta = geo.ray_to_spherical(ray)
                x, y = geo.spherical_to_pixel(phi, theta, r.mapping_)
                raw.append(geo.sample_panorama(pano, x, y))
        level = ph.quantize(float(np.mean(raw)), 8)
        ph.render_phosphene(expected, center, ph.luminance(level, 8), sigma)
        if abs(center[0] - cam.cx) > r.layout_.pitch:
            assert level == (7 if center[0] < cam.cx else 0)
    np.testing.assert_allclose(frame, expected, atol=1e-6)


def test_yaw_equivariance_matches_column_shifted_panorama():
    cam = small_camera(96)
    pano = gradient_panorama(96, rng_seed=3)
    w = pano.shape[1]
    shift_cols = 24
    dyaw = 2 * math.pi * shift_cols / w
    r1 = PhospheneRenderer(n_phosphenes=60, fov_deg=45.0, camera=cam).fit(pano)
    rotated_head = r1.render(geo.quaternion_from_axis_angle((0, 0, 1), dyaw)).buffer
    r1.set_panorama(np.roll(pano, -shift_cols, axis=1))
    shifted_pano = r1.render([1, 0, 0, 0]).buffer
    np.testing.assert_allclose(rotated_head, shifted_pano, atol=1e-3)


def test_transform_batches_and_matches_render():
    cam = small_camera()
    pano = gradient_panorama(48)
    r = PhospheneRenderer(n_phosphenes=30, fov_deg=40.0, camera=cam).fit(pano)
    rng = np.random.default_rng(5)
    quats = rng.normal(size=(4, 4))
    frames = r.transform(quats)
    assert frames.shape == (4, cam.height, cam.width)
    for q, f in zip(quats, frames):
        np.testing.assert_array_equal(f, r.render(q).buffer)


def test_eye_duplication():
    cam = small_camera()
    r = PhospheneRenderer(n_phosphenes=10, fov_deg=30.0, camera=cam, eye_count=2).fit(
        gradient_panorama(32)
    )
    left, right = r.render_eyes([1, 0, 0, 0])
    np.testing.assert_array_equal(left.buffer, right.buffer)


def test_estimator_params_round_trip():
    r = PhospheneRenderer(n_phosphenes=200, fov_deg=20.0)
    params = r.get_params()
    assert params["n_phosphenes"] == 200 and params["fov_deg"] == 20.0
    r.set_params(fov_deg=40.0)
    assert r.fov_deg == 40.0


def test_fov_disc_diameter_matches_camera_model():
    cam = geo.default_camera()
    r = PhospheneRenderer(n_phosphenes=500, fov_deg=20.0, camera=cam).fit(
        np.full((64, 128), 1.0)
    )
    frame = r.render([1, 0, 0, 0]).buffer
    cols = np.nonzero(frame.any(axis=0))[0]
    diameter = cols[-1] - cols[0] + 1
    expected = 2 * cam.fx * math.tan(math.radians(10.0))
    sigma = r.config_.sigma_ratio * r.layout_.radius
    assert abs(diameter - expected) <= 2 * (3 * sigma) + 2
