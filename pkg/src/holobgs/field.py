"""Complex-field container types and 2D discrete Fourier transforms.

Conventions, fixed package-wide:

* Grids are 2D row-major numpy arrays indexed ``[row, col]`` = ``[y, x]``,
  top-left origin.
* ``dft2`` / ``idft2`` use the unitary normalization: both directions carry
  a ``1/sqrt(width*height)`` factor, so total energy (sum of ``|pixel|**2``)
  is preserved in either direction.
* The DC component lives at index ``(0, 0)``. Use :func:`center_dc` /
  :func:`uncenter_dc` to move between this layout and a display layout with
  DC at the image center.
* Phases are wrapped to ``[0, 2*pi)``; the phase of an exactly-zero pixel
  is 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ValidationError

TWO_PI = 2.0 * np.pi


def wrap_phase(values: np.ndarray) -> np.ndarray:
    """Wrap phases (radians) into [0, 2*pi).

    ``np.mod`` can round a tiny negative input up to exactly ``2*pi``;
    those pixels are folded back to 0 so the half-open range holds.
    """
    wrapped = np.mod(np.asarray(values, dtype=np.float64), TWO_PI)
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True, order="C")
    out.flags.writeable = False
    return out


def _check_2d(arr: np.ndarray, kind: str) -> None:
    if arr.ndim != 2:
        raise ValidationError(f"{kind} expects a 2D grid, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"{kind} grid must be non-empty, got shape {arr.shape}")


@dataclass(frozen=True)
class ComplexField:
    """2D grid of complex amplitudes; the working state of the iterations."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.complex128)
        _check_2d(arr, "ComplexField")
        if arr.shape[0] < 2 or arr.shape[1] < 2:
            raise ValidationError(
                f"ComplexField needs width >= 2 and height >= 2, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError("ComplexField values must be finite (no NaN/Inf)")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True)
class RealImage:
    """2D grid of nonnegative reals: an intensity (or amplitude) image."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        _check_2d(arr, "RealImage")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("RealImage values must be finite (no NaN/Inf)")
        if np.any(arr < 0.0):
            raise ValidationError("RealImage values must be >= 0")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def is_zero(self) -> bool:
        return not np.any(self.data > 0.0)


@dataclass(frozen=True)
class PhaseMap:
    """2D grid of phases in radians, stored canonically wrapped to [0, 2*pi)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        _check_2d(arr, "PhaseMap")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("PhaseMap values must be finite (no NaN/Inf)")
        object.__setattr__(self, "data", _freeze(wrap_phase(arr)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @classmethod
    def zero(cls, shape: tuple[int, int]) -> "PhaseMap":
        return cls(np.zeros(shape, dtype=np.float64))


@dataclass(frozen=True)
class BinaryPattern:
    """2D grid of {0, 1} mirror states; the hologram sent to the device."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        _check_2d(arr, "BinaryPattern")
        if not np.all((arr == 0) | (arr == 1)):
            raise ValidationError("BinaryPattern values must be exactly 0 or 1")
        object.__setattr__(self, "data", _freeze(arr.astype(np.uint8)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def complement(self) -> "BinaryPattern":
        return BinaryPattern(1 - self.data)


def _same_shape(a, b, what: str) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"{what}: shapes {a.shape} and {b.shape} do not match"
        )


def dft2(f: ComplexField) -> ComplexField:
    """Forward 2D DFT, unitary normalization, DC at index (0, 0)."""
    return ComplexField(np.fft.fft2(f.data, norm="ortho"))


def idft2(f: ComplexField) -> ComplexField:
    """Inverse 2D DFT; exact inverse of :func:`dft2`."""
    return ComplexField(np.fft.ifft2(f.data, norm="ortho"))


def amplitude(f: ComplexField) -> RealImage:
    """Per-pixel modulus of the field."""
    return RealImage(np.abs(f.data))


def phase(f: ComplexField) -> PhaseMap:
    """Per-pixel argument wrapped to [0, 2*pi); zero-amplitude pixels get 0."""
    return PhaseMap(np.angle(f.data))


def combine(amp: RealImage, ph: PhaseMap) -> ComplexField:
    """Build the field ``amp * exp(i*ph)`` pixel by pixel."""
    _same_shape(amp, ph, "combine")
    return ComplexField(amp.data * np.exp(1j * ph.data))


def center_dc(arr: np.ndarray) -> np.ndarray:
    """Quadrant-swap view moving the DC pixel (0, 0) to the image center.

    Display/I-O convenience only; all transforms keep DC at (0, 0).
    """
    return np.fft.fftshift(arr)


def uncenter_dc(arr: np.ndarray) -> np.ndarray:
    """Inverse of :func:`center_dc`."""
    return np.fft.ifftshift(arr)
