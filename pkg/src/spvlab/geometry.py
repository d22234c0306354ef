"""Projection geometry: quaternions, pinhole rays, and equirectangular mapping.

Conventions
-----------
World frame (also the panorama frame unless a panorama rotation is given):
  +x is the forward direction (azimuth 0, panorama center column),
  +y is the lateral direction at azimuth +90 degrees,
  +z is the pole axis, oriented so that positive elevation maps to larger
     panorama row indices (visually "down" when row 0 is the top of the image).

Camera (screen) frame: +x right along columns, +y down along rows, +z along
the optical axis. At the reference head pose the camera is aligned to the
world by the fixed permutation ``CAMERA_ALIGNMENT`` (optical axis forward,
columns lateral, rows along the pole axis), so the reference view is the
panorama center and a pure yaw pans azimuth linearly.

Spherical coordinates of a direction v: azimuth phi = atan2(vy, vx) in
[-pi, pi], elevation theta = asin(vz / |v|) in [-pi/2, pi/2]. At the poles
(vx = vy = 0) the azimuth degenerates; atan2(0, 0) = 0 is used there.

Panorama mapping for a W x H equirectangular image with center (x0, y0):
x_pan = x0 + phi / (2 pi) * W wrapped into [0, W), and
y_pan = y0 + theta / pi * H clamped to [0, H - 1].

Quaternions are unit 4-vectors, scalar-first ``(a, b, c, d)`` for
a + b i + c j + d k by default; scalar-last input is accepted via
``order="xyzw"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidOrientationError, InvalidRayError

_QUAT_EPS = 1e-12
_RAY_EPS = 1e-12

# Camera-to-world basis change at the reference head pose (a proper rotation,
# det = +1): camera x -> world y, camera y -> world z, camera z -> world x.
CAMERA_ALIGNMENT = np.array(
    [
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
    ]
)


# ---------------------------------------------------------------------------
# Quaternions
# ---------------------------------------------------------------------------


def normalize_quaternion(quat, order: str = "wxyz") -> np.ndarray:
    """Return the unit quaternion as a scalar-first float64 array.

    Args:
        quat: Sequence of 4 components.
        order: "wxyz" for scalar-first input, "xyzw" for scalar-last.

    Raises:
        InvalidOrientationError: If the quaternion norm is (near) zero.
    """
    q = np.asarray(quat, dtype=np.float64).reshape(4)
    if order == "xyzw":
        q = q[[3, 0, 1, 2]]
    elif order != "wxyz":
        raise ConfigurationError(f"unknown quaternion order {order!r}")
    norm = math.sqrt(float(np.dot(q, q)))
    if norm < _QUAT_EPS:
        raise InvalidOrientationError("quaternion norm is zero; orientation undefined")
    return q / norm


def quat_to_rotation(quat, order: str = "wxyz") -> np.ndarray:
    """Convert a quaternion to a 3x3 rotation matrix.

    The input is normalized first, so the result is orthonormal with
    determinant +1 to floating-point precision for any nonzero input.

    Args:
        quat: Sequence of 4 components, scalar-first by default.
        order: Component order of the input, "wxyz" or "xyzw".

    Returns:
        The rotation matrix R such that R @ v rotates a column vector v.
    """
    w, x, y, z = normalize_quaternion(quat, order=order)
    return np.array(
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    )


def quat_multiply(p, q) -> np.ndarray:
    """Hamilton product p * q of two scalar-first quaternions."""
    pw, px, py, pz = np.asarray(p, dtype=np.float64).reshape(4)
    qw, qx, qy, qz = np.asarray(q, dtype=np.float64).reshape(4)
    return np.array(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ]
    )


def quaternion_from_axis_angle(axis, angle_rad: float) -> np.ndarray:
    """Unit quaternion (scalar-first) for a rotation about ``axis``."""
    a = np.asarray(axis, dtype=np.float64).reshape(3)
    norm = math.sqrt(float(np.dot(a, a)))
    if norm < _RAY_EPS:
        raise InvalidOrientationError("rotation axis has zero length")
    a = a / norm
    half = 0.5 * float(angle_rad)
    s = math.sin(half)
    return np.array([math.cos(half), s * a[0], s * a[1], s * a[2]])


def quaternion_from_euler(
    yaw: float, pitch: float, roll: float, degrees: bool = False
) -> np.ndarray:
    """Compose a head quaternion from yaw, pitch and roll.

    Yaw is a rotation about the world pole axis (positive pans the view
    toward larger panorama columns), pitch about the lateral axis (positive
    looks up), roll about the forward axis.
    """
    if degrees:
        yaw, pitch, roll = (math.radians(v) for v in (yaw, pitch, roll))
    qz = quaternion_from_axis_angle((0.0, 0.0, 1.0), yaw)
    qy = quaternion_from_axis_angle((0.0, 1.0, 0.0), pitch)
    qx = quaternion_from_axis_angle((1.0, 0.0, 0.0), roll)
    return quat_multiply(quat_multiply(qz, qy), qx)


def head_to_world_rotation(quat, order: str = "wxyz") -> np.ndarray:
    """Camera-to-world rotation for a head orientation quaternion.

    The identity quaternion corresponds to the reference pose: optical axis
    on the forward world axis (panorama center), image columns lateral,
    image rows along the pole axis.
    """
    return quat_to_rotation(quat, order=order) @ CAMERA_ALIGNMENT


# ---------------------------------------------------------------------------
# Camera model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics for one eye of the display.

    Attributes:
        width, height: Display resolution in pixels.
        fx, fy: Focal lengths in pixels.
        cx, cy: Principal point in pixel coordinates.
    """

    width: int
    height: int
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ConfigurationError("camera dimensions must be positive")
        if self.fx <= 0 or self.fy <= 0:
            raise ConfigurationError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ConfigurationError("principal point must lie inside the image")

    @classmethod
    def from_horizontal_fov(cls, width: int, height: int, h_fov_deg: float) -> "CameraModel":
        """Camera whose display spans ``h_fov_deg`` degrees horizontally."""
        if not 0.0 < h_fov_deg < 180.0:
            raise ConfigurationError("horizontal FOV must be in (0, 180) degrees")
        f = (width / 2.0) / math.tan(math.radians(h_fov_deg) / 2.0)
        return cls(width=width, height=height, fx=f, fy=f, cx=width / 2.0, cy=height / 2.0)

    def pinhole_ray(self, j: float, i: float) -> np.ndarray:
        """Unit camera-frame ray through pixel (column j, row i)."""
        x = (j - self.cx) / self.fx
        y = (i - self.cy) / self.fy
        z = 1.0
        n = math.sqrt(x * x + y * y + z * z)
        return np.array([x / n, y / n, z / n])

    def pinhole_rays(self, jj, ii) -> np.ndarray:
        """Vectorized ``pinhole_ray``: arrays of columns/rows -> (..., 3) unit rays."""
        jj = np.asarray(jj, dtype=np.float64)
        ii = np.asarray(ii, dtype=np.float64)
        x = (jj - self.cx) / self.fx
        y = (ii - self.cy) / self.fy
        z = np.ones_like(x)
        n = np.sqrt(x * x + y * y + z * z)
        return np.stack([x / n, y / n, z / n], axis=-1)


def default_camera() -> CameraModel:
    """960x1080 per-eye display spanning 60 degrees horizontally."""
    return CameraModel.from_horizontal_fov(960, 1080, 60.0)


def compute_ray(pixel, cam: CameraModel, world_to_camera=None, panorama_to_world=None) -> np.ndarray:
    """Cast a screen pixel to a unit direction in the panorama frame.

    The direction is ``P^T . C^T . Kinv . (j, i, 1)^T`` where C maps world
    to camera coordinates and P maps panorama to world coordinates; both
    default to the identity.

    Args:
        pixel: (j, i) screen coordinates, column first.
        cam: Camera intrinsics; the pixel must lie inside the image.
        world_to_camera: Optional 3x3 rotation (e.g. the transpose of
            ``head_to_world_rotation``).
        panorama_to_world: Optional 3x3 rotation of the panorama basis.

    Returns:
        Unit direction (3,) in the panorama frame.
    """
    j, i = float(pixel[0]), float(pixel[1])
    if not (0 <= j < cam.width and 0 <= i < cam.height):
        raise ConfigurationError(f"pixel ({j}, {i}) is outside the image")
    v = cam.pinhole_ray(j, i)
    if world_to_camera is not None:
        v = np.asarray(world_to_camera, dtype=np.float64).T @ v
    if panorama_to_world is not None:
        v = np.asarray(panorama_to_world, dtype=np.float64).T @ v
    return v


# ---------------------------------------------------------------------------
# Spherical coordinates and panorama mapping
# ---------------------------------------------------------------------------


def ray_to_spherical(ray):
    """Spherical coordinates (phi, theta) of a direction vector.

    Accepts a single (3,) vector or an (..., 3) batch. Azimuth is
    atan2(vy, vx); elevation is asin(vz / |v|). The azimuth at the exact
    poles follows atan2(0, 0) = 0.

    Raises:
        InvalidRayError: If any vector has (near-)zero length.
    """
    v = np.asarray(ray, dtype=np.float64)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    norm = np.sqrt(x * x + y * y + z * z)
    if np.any(norm < _RAY_EPS):
        raise InvalidRayError("zero-length direction has no spherical coordinates")
    phi = np.arctan2(y, x)
    theta = np.arcsin(np.clip(z / norm, -1.0, 1.0))
    if v.ndim == 1:
        return float(phi), float(theta)
    return phi, theta


def spherical_to_ray(phi, theta) -> np.ndarray:
    """Unit direction for azimuth/elevation; inverse of ``ray_to_spherical``."""
    phi = np.asarray(phi, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    ct = np.cos(theta)
    ray = np.stack([ct * np.cos(phi), ct * np.sin(phi), np.sin(theta)], axis=-1)
    return ray


@dataclass(frozen=True)
class PanoramaMapping:
    """Equirectangular mapping parameters for a W x H panorama.

    ``x0``/``y0`` default to the image center. A full-sphere panorama has
    W = 2 H; other aspect ratios are accepted but cover the sphere unevenly.
    """

    width: int
    height: int
    x0: float = None  # type: ignore[assignment]
    y0: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ConfigurationError("panorama dimensions must be positive")
        if self.x0 is None:
            object.__setattr__(self, "x0", self.width / 2.0)
        if self.y0 is None:
            object.__setattr__(self, "y0", self.height / 2.0)

    @classmethod
    def for_image(cls, panorama: np.ndarray) -> "PanoramaMapping":
        h, w = panorama.shape[:2]
        return cls(width=w, height=h)


def spherical_to_pixel(phi, theta, mapping: PanoramaMapping):
    """Map azimuth/elevation to panorama pixel coordinates.

    x wraps into [0, W); y is clamped to [0, H - 1]. Scalar inputs return
    floats, arrays return arrays.
    """
    phi = np.asarray(phi, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    x = mapping.x0 + phi / (2.0 * math.pi) * mapping.width
    x = np.mod(x, mapping.width)
    # float mod can land exactly on W for tiny negative inputs
    x = np.where(x >= mapping.width, x - mapping.width, x)
    y = mapping.y0 + theta / math.pi * mapping.height
    y = np.clip(y, 0.0, mapping.height - 1.0)
    if phi.ndim == 0 and theta.ndim == 0:
        return float(x), float(y)
    return x, y


def pixel_to_spherical(x, y, mapping: PanoramaMapping):
    """Azimuth/elevation of a panorama pixel; inverse of ``spherical_to_pixel``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    phi = (x - mapping.x0) / mapping.width * (2.0 * math.pi)
    theta = (y - mapping.y0) / mapping.height * math.pi
    if x.ndim == 0 and y.ndim == 0:
        return float(phi), float(theta)
    return phi, theta


def sample_panorama(panorama: np.ndarray, x, y):
    """Bilinear sample of a single-channel panorama.

    Horizontal coordinates wrap (column W - 1 interpolates toward column 0);
    vertical coordinates clamp to the first/last row. Integer coordinates
    return the exact pixel value.
    """
    p = np.asarray(panorama)
    if p.ndim != 2:
        raise ConfigurationError("panorama must be a single-channel 2-D array")
    h, w = p.shape
    x = np.mod(np.asarray(x, dtype=np.float64), w)
    x = np.where(x >= w, x - w, x)
    y = np.clip(np.asarray(y, dtype=np.float64), 0.0, h - 1.0)
    x0 = np.floor(x)
    y0 = np.floor(y)
    wx = x - x0
    wy = y - y0
    x0i = x0.astype(np.int64)
    x1i = x0i + 1
    x1i = np.where(x1i >= w, x1i - w, x1i)
    y0i = y0.astype(np.int64)
    y1i = np.minimum(y0i + 1, h - 1)
    top = (1.0 - wx) * p[y0i, x0i] + wx * p[y0i, x1i]
    bottom = (1.0 - wx) * p[y1i, x0i] + wx * p[y1i, x1i]
    val = (1.0 - wy) * top + wy * bottom
    if np.ndim(val) == 0:
        return float(val)
    return val
