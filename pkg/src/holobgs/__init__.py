"""Binary DMD hologram generation via Gerchberg-Saxton iteration.

Compiles target intensity images into {0,1} micromirror patterns with either
the classic GS algorithm or its binarized variant (BGS), simulates the
Fourier-plane reconstruction, and applies aberration-phase compensation.
"""

from .algorithms import (
    Algorithm,
    AlgorithmState,
    CompensationSign,
    IterationConfig,
    ThetaConvention,
    bgs_step,
    binarize_field,
    binary_phase_gate,
    compensate_and_binarize,
    field_change,
    gs_step,
    initial_field,
    run,
)
from .errors import (
    DimensionMismatchError,
    FileFormatError,
    NumericalError,
    UnsupportedBitDepthError,
    ValidationError,
)
from .field import (
    TWO_PI,
    BinaryPattern,
    ComplexField,
    PhaseMap,
    RealImage,
    amplitude,
    center_dc,
    combine,
    dft2,
    idft2,
    phase,
    uncenter_dc,
    wrap_phase,
)
from .imageio import (
    ImageFileFormat,
    load_intensity,
    load_pattern,
    load_phase_map,
    save_intensity,
    save_pattern,
)
from .manifest import RunManifest
from .metrics import (
    ConvergenceTrace,
    RegionMask,
    TraceRecord,
    first_order_std,
    off_mask_intensity,
    reconstruct,
    rms_error,
    target_support_mask,
)
from .synth import (
    gaussian_source,
    quadrant_point,
    quadratic_phase,
    uniform_source,
    uniform_square,
)

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "AlgorithmState",
    "BinaryPattern",
    "CompensationSign",
    "ComplexField",
    "ConvergenceTrace",
    "DimensionMismatchError",
    "FileFormatError",
    "ImageFileFormat",
    "IterationConfig",
    "NumericalError",
    "PhaseMap",
    "RealImage",
    "RegionMask",
    "RunManifest",
    "ThetaConvention",
    "TraceRecord",
    "TWO_PI",
    "UnsupportedBitDepthError",
    "ValidationError",
    "amplitude",
    "bgs_step",
    "binarize_field",
    "binary_phase_gate",
    "center_dc",
    "combine",
    "compensate_and_binarize",
    "dft2",
    "field_change",
    "first_order_std",
    "gaussian_source",
    "gs_step",
    "idft2",
    "initial_field",
    "load_intensity",
    "load_pattern",
    "load_phase_map",
    "off_mask_intensity",
    "phase",
    "quadrant_point",
    "quadratic_phase",
    "reconstruct",
    "rms_error",
    "run",
    "save_intensity",
    "save_pattern",
    "target_support_mask",
    "uncenter_dc",
    "uniform_source",
    "uniform_square",
    "wrap_phase",
    "__version__",
]
