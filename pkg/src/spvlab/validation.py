"""Input validation helpers for array-facing APIs."""

from __future__ import annotations

import logging

import numpy as np

from .errors import ConfigurationError

logger = logging.getLogger(__name__)


def check_panorama(X) -> np.ndarray:
    """Validate and return a panorama as a float64 single-channel array.

    Values must lie in [0, 1] up to a small tolerance; a full-sphere
    equirectangular image has width = 2 * height (a mismatch only logs a
    warning since partial panoramas are still sampleable).
    """
    p = np.asarray(X, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] < 2 or p.shape[1] < 2:
        raise ConfigurationError("panorama must be a 2-D array with at least 2x2 pixels")
    if not np.all(np.isfinite(p)):
        raise ConfigurationError("panorama contains non-finite values")
    lo, hi = float(p.min()), float(p.max())
    if lo < -1e-6 or hi > 1.0 + 1e-6:
        raise ConfigurationError(f"panorama values must lie in [0, 1]; got [{lo:.3g}, {hi:.3g}]")
    if lo < 0.0 or hi > 1.0:
        p = np.clip(p, 0.0, 1.0)
    h, w = p.shape
    if w != 2 * h:
        logger.warning("panorama is %dx%d; a full sphere expects width = 2 * height", w, h)
    return p


def check_quaternions(X, order: str = "wxyz") -> np.ndarray:
    """Coerce input to an (n, 4) float64 array of quaternion components."""
    q = np.asarray(X, dtype=np.float64)
    if q.ndim == 1:
        q = q[None, :]
    if q.ndim != 2 or q.shape[1] != 4:
        raise ConfigurationError("expected a quaternion (4,) or a batch (n, 4)")
    if order not in ("wxyz", "xyzw"):
        raise ConfigurationError(f"unknown quaternion order {order!r}")
    return q
