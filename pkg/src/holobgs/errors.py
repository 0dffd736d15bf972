"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError -> 1, file errors
(FileNotFoundError / FileFormatError / OSError) -> 2, NumericalError -> 3.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition or invariant."""


class DimensionMismatchError(ValidationError):
    """Operands that must share a grid shape do not."""


class FileFormatError(Exception):
    """A file exists but cannot be parsed as the expected format."""


class UnsupportedBitDepthError(FileFormatError):
    """The file parses but uses a bit depth outside 8/16-bit grayscale."""


class NumericalError(ArithmeticError):
    """Non-finite values appeared during iteration or reconstruction."""
