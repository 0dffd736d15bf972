"""GS and BGS iteration engines, final binarization, and phase compensation.

Both engines alternate between the mirror plane and the target plane through
the unitary DFT, replacing the amplitude in each plane while keeping the
evolving phase. The binarized variant (BGS) additionally gates the mirror
plane with the binary threshold ``theta`` each round, so the iteration sees
the same on/off constraint the physical device imposes; plain GS applies the
threshold only once, after the loop.

Targets and sources passed to :func:`run` are *intensities*; the engine takes
per-pixel square roots to obtain the amplitudes the update steps work on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, NumericalError, ValidationError
from .field import (
    BinaryPattern,
    ComplexField,
    PhaseMap,
    RealImage,
    combine,
    dft2,
    idft2,
    phase,
    wrap_phase,
)
from .metrics import (
    ConvergenceTrace,
    TraceRecord,
    first_order_std,
    reconstruct,
    rms_error,
    target_support_mask,
)


class Algorithm(str, enum.Enum):
    GS = "gs"
    BGS = "bgs"


class ThetaConvention(str, enum.Enum):
    """Which phase half-range switches a mirror on inside the BGS gate.

    ON_BELOW_PI is the primary rule (theta(x) = 1 for x < pi, 0 otherwise,
    so theta(pi) = 0). ON_AT_OR_ABOVE_PI is the complementary reading and is
    kept selectable rather than silently reconciled.
    """

    ON_BELOW_PI = "on_below_pi"
    ON_AT_OR_ABOVE_PI = "on_at_or_above_pi"


class CompensationSign(str, enum.Enum):
    ADD = "add"
    SUBTRACT = "subtract"


@dataclass(frozen=True)
class IterationConfig:
    """Knobs for a GS/BGS run.

    ``convergence_tolerance`` is the relative L2 change of the working field
    between consecutive iterations below which the loop stops early (when
    ``stop_early`` is set). ``initial_phase_seed`` switches the step-1 seed
    from zero phase to seeded pseudo-random phase for speckle studies.
    """

    algorithm: Algorithm
    max_iterations: int = 30
    convergence_tolerance: float = 1e-4
    theta_convention: ThetaConvention = ThetaConvention.ON_BELOW_PI
    initial_phase_seed: int | None = None
    stop_early: bool = True

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        object.__setattr__(
            self, "theta_convention", ThetaConvention(self.theta_convention)
        )
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not self.convergence_tolerance > 0.0:
            raise ValidationError("convergence_tolerance must be > 0")


@dataclass(frozen=True)
class AlgorithmState:
    """Final working field of a run plus its per-iteration trace."""

    A: ComplexField
    iteration: int
    trace: ConvergenceTrace
    converged: bool


def _check_step_shapes(A: ComplexField, source_amp: RealImage, target_amp: RealImage):
    if A.shape != source_amp.shape or A.shape != target_amp.shape:
        raise DimensionMismatchError(
            f"step: field {A.shape}, source {source_amp.shape}, "
            f"target {target_amp.shape} must all match"
        )


def gs_step(
    A: ComplexField, source_amp: RealImage, target_amp: RealImage
) -> ComplexField:
    """One GS round: keep phases, impose the source and target amplitudes.

    ``source_amp`` and ``target_amp`` are amplitudes, not intensities.
    """
    _check_step_shapes(A, source_amp, target_amp)
    B = combine(source_amp, phase(A))
    C = dft2(B)
    D = combine(target_amp, phase(C))
    return idft2(D)


def binary_phase_gate(
    ph: PhaseMap, convention: ThetaConvention = ThetaConvention.ON_BELOW_PI
) -> np.ndarray:
    """The theta gate: a {0.0, 1.0} array selecting the on half of the phase range."""
    if ThetaConvention(convention) is ThetaConvention.ON_BELOW_PI:
        return (ph.data < np.pi).astype(np.float64)
    return (ph.data >= np.pi).astype(np.float64)


def bgs_step(
    A: ComplexField,
    source_amp: RealImage,
    target_amp: RealImage,
    cfg: IterationConfig,
) -> ComplexField:
    """One BGS round: the mirror plane is the source amplitude gated by theta.

    Identical to :func:`gs_step` except the mirror-plane field is
    ``source_amp * theta(phase(A))`` -- real and nonnegative, the phase
    information surviving only through which pixels stay on.
    """
    _check_step_shapes(A, source_amp, target_amp)
    gate = binary_phase_gate(phase(A), cfg.theta_convention)
    B = ComplexField(source_amp.data * gate)
    C = dft2(B)
    D = combine(target_amp, phase(C))
    return idft2(D)


def binarize_field(A: ComplexField, correction: PhaseMap) -> BinaryPattern:
    """Threshold the corrected field phase into mirror states.

    A pixel is set to 1 when ``wrap(phase(A) + correction)`` is smaller than
    pi, and 0 otherwise.
    """
    if A.shape != correction.shape:
        raise DimensionMismatchError(
            f"binarize_field: field {A.shape} vs correction {correction.shape}"
        )
    total = wrap_phase(phase(A).data + correction.data)
    return BinaryPattern((total < np.pi).astype(np.uint8))


def compensate_and_binarize(
    A: ComplexField,
    aberration: PhaseMap,
    sign: CompensationSign = CompensationSign.SUBTRACT,
) -> BinaryPattern:
    """Binarize with the measured aberration folded into the threshold.

    ``SUBTRACT`` (default) pre-distorts opposite to the measured map, which
    is what cancels the aberration when the optical train applies it on top;
    ``ADD`` applies the map as-is for setups whose map is already negated.
    """
    if A.shape != aberration.shape:
        raise DimensionMismatchError(
            f"compensate_and_binarize: field {A.shape} vs aberration {aberration.shape}"
        )
    if CompensationSign(sign) is CompensationSign.ADD:
        correction = aberration
    else:
        correction = PhaseMap(-aberration.data)
    return binarize_field(A, correction)


def initial_field(target_amp: RealImage, seed: int | None = None) -> ComplexField:
    """Step-1 seed: inverse-transform the target amplitude.

    Zero phase by default; a seed switches to reproducible uniform random
    phase in [0, 2*pi).
    """
    if seed is None:
        ph = PhaseMap.zero(target_amp.shape)
    else:
        rng = np.random.default_rng(seed)
        ph = PhaseMap(rng.uniform(0.0, 2.0 * np.pi, size=target_amp.shape))
    return idft2(combine(target_amp, ph))


def field_change(new: ComplexField, old: ComplexField) -> float:
    """Relative L2 change ``|new - old| / |old|`` used by the stop check."""
    if new.shape != old.shape:
        raise DimensionMismatchError(
            f"field_change: shapes {new.shape} and {old.shape} do not match"
        )
    denom = float(np.linalg.norm(old.data))
    if denom == 0.0:
        return float(np.linalg.norm(new.data))
    return float(np.linalg.norm(new.data - old.data) / denom)


def run(
    target: RealImage, source: RealImage, cfg: IterationConfig
) -> tuple[AlgorithmState, BinaryPattern]:
    """Run the configured algorithm against a target/source intensity pair.

    Seeds the working field from the target amplitude, iterates
    :func:`gs_step` or :func:`bgs_step` until the relative field change drops
    to ``cfg.convergence_tolerance`` (when ``cfg.stop_early``) or
    ``cfg.max_iterations`` is reached, and binarizes the final field with a
    zero correction map.

    Each trace record carries the field change plus the first-order std and
    RMS error of the reconstruction of the pattern binarized *at that
    iteration*, so GS and BGS are compared on the hologram each would
    actually display, not on their internal complex fields.
    """
    if target.shape != source.shape:
        raise DimensionMismatchError(
            f"run: target {target.shape} vs source {source.shape}"
        )
    if target.is_zero():
        raise ValidationError("run: target is identically zero")
    if source.is_zero():
        raise ValidationError("run: source is identically zero")

    target_amp = RealImage(np.sqrt(target.data))
    source_amp = RealImage(np.sqrt(source.data))
    mask = target_support_mask(target)
    zero_correction = PhaseMap.zero(target.shape)

    A = initial_field(target_amp, cfg.initial_phase_seed)
    records: list[TraceRecord] = []
    converged = False
    for i in range(1, cfg.max_iterations + 1):
        try:
            if cfg.algorithm is Algorithm.BGS:
                A_new = bgs_step(A, source_amp, target_amp, cfg)
            else:
                A_new = gs_step(A, source_amp, target_amp)
            change = field_change(A_new, A)
            pattern = binarize_field(A_new, zero_correction)
            recon = reconstruct(pattern, source)
            records.append(
                TraceRecord(
                    iteration=i,
                    field_change=change,
                    first_order_std=first_order_std(recon, mask),
                    rms_error=rms_error(recon, target, mask),
                )
            )
        except ValidationError as exc:
            raise NumericalError(f"iteration {i} failed: {exc}") from exc
        A = A_new
        if cfg.stop_early and change <= cfg.convergence_tolerance:
            converged = True
            break

    state = AlgorithmState(
        A=A, iteration=len(records), trace=ConvergenceTrace(tuple(records)),
        converged=converged,
    )
    return state, binarize_field(A, zero_correction)
