"""Phosphene layout, quantization and splat tests."""

import math

import numpy as np
import pytest

from spvlab import phosphene as ph
from spvlab.errors import ConfigurationError
from spvlab.geometry import CameraModel, default_camera


def small_camera(size=64, h_fov_deg=60.0):
    return CameraModel.from_horizontal_fov(size, size, h_fov_deg)


# ---------------------------------------------------------------------------
# configuration and layout
# ---------------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ConfigurationError):
        ph.PhospheneConfig(levels=1)
    with pytest.raises(ConfigurationError):
        ph.PhospheneConfig(count=0)
    with pytest.raises(ConfigurationError):
        ph.PhospheneConfig(sigma_ratio=0.0)


def test_layout_200_at_20_degrees_has_grid_side_14():
    layout = ph.build_layout(ph.PhospheneConfig(count=200), 20.0, default_camera())
    assert layout.grid_side == 14
    assert layout.effective_count <= 196


def test_layout_masks_to_circle_against_brute_force_oracle():
    cam = default_camera()
    cfg = ph.PhospheneConfig(count=500)
    layout = ph.build_layout(cfg, 60.0, cam)
    assert layout.grid_side == 22
    # independent enumeration of kept grid points
    r = cam.fx * math.tan(math.radians(60.0) / 2.0)
    pitch = 2 * r / 22
    kept = []
    for a in range(22):
        for b in range(22):
            x = cam.cx + (b + 0.5 - 11.0) * pitch
            y = cam.cy + (a + 0.5 - 11.0) * pitch
            if math.hypot(x - cam.cx, y - cam.cy) <= r:
                kept.append((x, y))
    assert layout.effective_count == len(kept)
    np.testing.assert_allclose(sorted(map(tuple, layout.centers)), sorted(kept), atol=1e-9)
    # roughly the circle-to-square area ratio of the full grid
    assert abs(layout.effective_count - math.pi / 4 * 484) < 20


def test_single_phosphene_sits_at_display_center():
    cam = default_camera()
    layout = ph.build_layout(ph.PhospheneConfig(count=1), 20.0, cam)
    assert layout.grid_side == 1
    np.testing.assert_allclose(layout.centers, [[cam.cx, cam.cy]])
    assert layout.pitch == 2 * layout.fov_radius_px


def test_fov_wider_than_display_rejected():
    with pytest.raises(ConfigurationError):
        ph.build_layout(ph.PhospheneConfig(), 61.0, default_camera())
    with pytest.raises(ConfigurationError):
        ph.fov_radius_px(180.0, default_camera())


def test_all_phosphenes_inside_fov_radius():
    cam = small_camera()
    layout = ph.build_layout(ph.PhospheneConfig(count=50), 40.0, cam)
    d = np.hypot(layout.centers[:, 0] - cam.cx, layout.centers[:, 1] - cam.cy)
    assert np.all(d <= layout.fov_radius_px * (1 + 1e-12))


# ---------------------------------------------------------------------------
# quantization and luminance
# ---------------------------------------------------------------------------


def test_quantize_bounds_and_midpoints():
    assert ph.quantize(0.0, 8) == 0
    assert ph.quantize(1.0, 8) == 7
    assert ph.quantize(0.49, 8) == 3  # floor(0.49 * 8) = 3
    assert ph.quantize(0.999, 8) == 7


def test_quantize_clamps_out_of_range_with_warning(caplog):
    with caplog.at_level("WARNING"):
        assert ph.quantize(1.5, 8) == 7
        assert ph.quantize(-0.25, 8) == 0
    assert "clamping" in caplog.text


def test_quantize_array_matches_scalar():
    vals = np.linspace(0, 1, 101)
    got = ph.quantize_array(vals, 8)
    want = [ph.quantize(v, 8) for v in vals]
    np.testing.assert_array_equal(got, want)


def test_luminance_values():
    assert ph.luminance(7, 8) == 1.0
    assert ph.luminance(0, 8) == 0.0
    assert ph.luminance(4, 8) == pytest.approx(4 / 7)
    with pytest.raises(ConfigurationError):
        ph.luminance(0, 1)
    with pytest.raises(ConfigurationError):
        ph.luminance(8, 8)


def test_quantize_luminance_idempotent_on_representable_levels():
    for levels in range(2, 17):
        for level in range(levels):
            assert ph.quantize(ph.luminance(level, levels), levels) == level


# ---------------------------------------------------------------------------
# splatting
# ---------------------------------------------------------------------------


def test_zero_luminance_is_noop():
    frame = np.zeros((64, 64), dtype=np.float32)
    before = frame.copy()
    ph.render_phosphene(frame, (32.0, 32.0), 0.0, 4.0)
    np.testing.assert_array_equal(frame, before)


def test_peak_at_center_equals_luminance():
    frame = np.zeros((64, 64), dtype=np.float32)
    lum = 4 / 7
    ph.render_phosphene(frame, (32.0, 32.0), lum, 4.0)
    assert abs(float(frame[32, 32]) - lum) < 1e-6
    assert float(frame.max()) == float(frame[32, 32])


def test_value_at_one_sigma():
    frame = np.zeros((64, 64), dtype=np.float32)
    ph.render_phosphene(frame, (32.0, 32.0), 1.0, 4.0)
    assert abs(float(frame[32, 36]) - math.exp(-0.5)) < 1e-6


def test_support_truncated_at_three_sigma_lum():
    frame = np.zeros((64, 64), dtype=np.float32)
    lum, sigma = 0.5, 4.0
    ph.render_phosphene(frame, (32.0, 32.0), lum, sigma)
    ys, xs = np.nonzero(frame)
    d = np.hypot(xs - 32.0, ys - 32.0)
    assert d.max() <= 3 * sigma * lum + 1e-9


def test_overlapping_splats_saturate_at_one():
    frame = np.zeros((32, 32), dtype=np.float32)
    for _ in range(5):
        ph.render_phosphene(frame, (16.0, 16.0), 1.0, 3.0)
    assert float(frame.max()) == 1.0
    assert float(frame.min()) >= 0.0


def test_splat_grows_with_level():
    cfg = ph.PhospheneConfig(levels=8)
    prev = np.zeros((64, 64), dtype=np.float32)
    prev_area = 0
    for level in range(1, 8):
        frame = np.zeros((64, 64), dtype=np.float32)
        ph.render_phosphene(frame, (32.0, 32.0), ph.luminance(level, 8), 5.0)
        area = int(np.count_nonzero(frame))
        assert area >= prev_area
        assert np.all(frame >= prev - 1e-7)  # brighter level is pointwise brighter
        prev, prev_area = frame, area


def test_templates_match_direct_splatting_bitwise():
    cam = small_camera()
    cfg = ph.PhospheneConfig(count=20, levels=8)
    layout = ph.build_layout(cfg, 40.0, cam)
    templates = ph.build_splat_templates(layout, cfg, (cam.height, cam.width))
    sigma = cfg.sigma_ratio * layout.radius
    rng = np.random.default_rng(2)
    levels = rng.integers(0, 8, size=layout.effective_count)
    direct = np.zeros((cam.height, cam.width), dtype=np.float32)
    for center, level in zip(layout.centers, levels):
        ph.render_phosphene(direct, center, ph.luminance(int(level), 8), sigma)
    via_templates = np.zeros_like(direct)
    for tpl, level in zip(templates, levels):
        entry = tpl[int(level)]
        if entry is None:
            continue
        rows, cols, patch = entry
        region = via_templates[rows, cols]
        region += patch
        np.minimum(region, 1.0, out=region)
    np.testing.assert_array_equal(direct, via_templates)


def test_patch_outside_frame_is_none():
    assert ph.gaussian_patch((-50.0, -50.0), 1.0, 3.0, (32, 32)) is None
