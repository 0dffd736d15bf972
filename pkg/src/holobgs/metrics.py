"""Fourier-plane reconstruction and the convergence/quality metrics.

The forward model treats the mirror plane and the target plane as the two
focal planes of a lens, so the reconstructed intensity is the squared
modulus of the DFT of the illuminated pattern.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, ValidationError
from .field import BinaryPattern, ComplexField, PhaseMap, RealImage, dft2, _freeze

TRACE_CSV_HEADER = "iteration,field_change,first_order_std,rms_error"


def _fmt(value: float) -> str:
    """Render a float with 12 significant digits (deterministic)."""
    return format(float(value), ".12g")


@dataclass(frozen=True)
class TraceRecord:
    """Metrics for one iteration of a GS/BGS run."""

    iteration: int
    field_change: float
    first_order_std: float
    rms_error: float

    def __post_init__(self):
        if self.iteration < 1:
            raise ValidationError("iteration indices start at 1")
        for name in ("field_change", "first_order_std", "rms_error"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0.0:
                raise ValidationError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class ConvergenceTrace:
    """Per-iteration record of the metrics of a run."""

    records: tuple[TraceRecord, ...]

    def __post_init__(self):
        records = tuple(self.records)
        if records and records[0].iteration != 1:
            raise ValidationError("trace must start at iteration 1")
        for prev, cur in zip(records, records[1:]):
            if cur.iteration <= prev.iteration:
                raise ValidationError("trace iterations must strictly increase")
        object.__setattr__(self, "records", records)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i) -> TraceRecord:
        return self.records[i]

    @property
    def field_changes(self) -> np.ndarray:
        return np.array([r.field_change for r in self.records])

    @property
    def first_order_stds(self) -> np.ndarray:
        return np.array([r.first_order_std for r in self.records])

    @property
    def rms_errors(self) -> np.ndarray:
        return np.array([r.rms_error for r in self.records])

    def to_csv(self) -> str:
        lines = [TRACE_CSV_HEADER]
        for r in self.records:
            lines.append(
                f"{r.iteration},{_fmt(r.field_change)},"
                f"{_fmt(r.first_order_std)},{_fmt(r.rms_error)}"
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        from .imageio import atomic_write_bytes

        atomic_write_bytes(Path(path), self.to_csv().encode("ascii"))


@dataclass(frozen=True)
class RegionMask:
    """{0,1} membership flags for the first-order / target-support region."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValidationError(f"RegionMask expects a 2D grid, got shape {arr.shape}")
        if not np.all((arr == 0) | (arr == 1)):
            raise ValidationError("RegionMask values must be exactly 0 or 1")
        arr = arr.astype(np.uint8)
        if not np.any(arr):
            raise ValidationError("RegionMask must have at least one pixel set")
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

    @property
    def pixel_count(self) -> int:
        return int(self.data.sum())


def reconstruct(
    pattern: BinaryPattern,
    source: RealImage,
    aberration: PhaseMap | None = None,
) -> RealImage:
    """Simulate the Fourier-plane intensity produced by a mirror pattern.

    Returns ``|DFT(sqrt(source) * pattern * exp(i*aberration))|**2`` with the
    DC term at pixel (0, 0). Omitting ``aberration`` means a flat wavefront.
    """
    if pattern.shape != source.shape:
        raise DimensionMismatchError(
            f"reconstruct: pattern {pattern.shape} vs source {source.shape}"
        )
    plane = np.sqrt(source.data) * pattern.data
    if aberration is not None:
        if aberration.shape != pattern.shape:
            raise DimensionMismatchError(
                f"reconstruct: aberration {aberration.shape} vs pattern {pattern.shape}"
            )
        plane = plane * np.exp(1j * aberration.data)
    far = dft2(ComplexField(plane))
    # overflow surfaces as a ValidationError from the finiteness check
    with np.errstate(over="ignore"):
        intensity = np.abs(far.data) ** 2
    return RealImage(intensity)


def target_support_mask(target: RealImage, threshold_fraction: float = 0.5) -> RegionMask:
    """Pixels where ``target >= threshold_fraction * max(target)``.

    This is the concrete definition of the first-order region used by the
    convergence metrics; the maximum pixel always qualifies, so the mask is
    never empty.
    """
    if not (0.0 < threshold_fraction <= 1.0):
        raise ValidationError(
            f"threshold_fraction must lie in (0, 1], got {threshold_fraction}"
        )
    if target.is_zero():
        raise ValidationError("target_support_mask: target is identically zero")
    peak = float(target.data.max())
    return RegionMask((target.data >= threshold_fraction * peak).astype(np.uint8))


def _masked(img: RealImage, mask: RegionMask, what: str) -> np.ndarray:
    if img.shape != mask.shape:
        raise DimensionMismatchError(f"{what}: image {img.shape} vs mask {mask.shape}")
    return img.data[mask.data == 1]


def first_order_std(recon: RealImage, mask: RegionMask) -> float:
    """Population std of the reconstruction over the mask, divided by its mean.

    The ratio is invariant under positive rescaling of the reconstruction, so
    it compares runs without an absolute intensity calibration.
    """
    vals = _masked(recon, mask, "first_order_std")
    mean = float(vals.mean())
    if mean <= 0.0:
        raise ValidationError(
            "first_order_std: reconstruction has zero mean over the mask region"
        )
    return float(vals.std() / mean)


def rms_error(recon: RealImage, target: RealImage, mask: RegionMask) -> float:
    """RMS difference over the mask after normalizing both to unit mask mean."""
    r = _masked(recon, mask, "rms_error")
    t = _masked(target, mask, "rms_error")
    r_mean = float(r.mean())
    t_mean = float(t.mean())
    if r_mean <= 0.0 or t_mean <= 0.0:
        raise ValidationError("rms_error: zero energy over the mask region")
    diff = r / r_mean - t / t_mean
    return float(np.sqrt(np.mean(diff**2)))


def off_mask_intensity(img: RealImage, mask: RegionMask) -> float:
    """Total intensity outside the mask; a surrounding-noise proxy."""
    if img.shape != mask.shape:
        raise DimensionMismatchError(
            f"off_mask_intensity: image {img.shape} vs mask {mask.shape}"
        )
    return float(img.data[mask.data == 0].sum())
