"""Synthetic targets, source profiles, and test aberrations.

Targets are placed at the quarter-grid point by default so the first-order
image lands away from the undiffracted DC spike at pixel (0, 0).
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .field import TWO_PI, PhaseMap, RealImage


def quadrant_point(shape: tuple[int, int]) -> tuple[int, int]:
    """Default off-DC target center: (height//4, width//4)."""
    return shape[0] // 4, shape[1] // 4


def uniform_square(
    shape: tuple[int, int],
    square_size: int,
    center: tuple[int, int] | None = None,
) -> RealImage:
    """Unit-intensity square of the given side length on a zero background."""
    h, w = shape
    if square_size < 1:
        raise ValidationError("square_size must be >= 1")
    cy, cx = center if center is not None else quadrant_point(shape)
    top = cy - square_size // 2
    left = cx - square_size // 2
    if top < 0 or left < 0 or top + square_size > h or left + square_size > w:
        raise ValidationError(
            f"square of size {square_size} at center ({cy}, {cx}) "
            f"does not fit a {h}x{w} grid"
        )
    img = np.zeros(shape, dtype=np.float64)
    img[top : top + square_size, left : left + square_size] = 1.0
    return RealImage(img)


def uniform_source(shape: tuple[int, int]) -> RealImage:
    """Flat unit illumination (an expanded beam)."""
    return RealImage(np.ones(shape, dtype=np.float64))


def gaussian_source(shape: tuple[int, int], waist: float) -> RealImage:
    """Gaussian beam intensity ``exp(-2 r^2 / waist^2)`` centered on the grid.

    ``waist`` is the 1/e^2 intensity radius in pixels.
    """
    if not waist > 0.0:
        raise ValidationError("gaussian waist must be > 0")
    h, w = shape
    y = np.arange(h, dtype=np.float64) - (h - 1) / 2.0
    x = np.arange(w, dtype=np.float64) - (w - 1) / 2.0
    r2 = y[:, None] ** 2 + x[None, :] ** 2
    return RealImage(np.exp(-2.0 * r2 / waist**2))


def quadratic_phase(shape: tuple[int, int], span: float = TWO_PI) -> PhaseMap:
    """Defocus-like aberration: phase grows quadratically with radius.

    The excursion from the grid center to the farthest corner equals
    ``span`` radians (2*pi by default).
    """
    if not span > 0.0:
        raise ValidationError("phase span must be > 0")
    h, w = shape
    y = np.arange(h, dtype=np.float64) - (h - 1) / 2.0
    x = np.arange(w, dtype=np.float64) - (w - 1) / 2.0
    r2 = y[:, None] ** 2 + x[None, :] ** 2
    return PhaseMap(span * r2 / r2.max())
