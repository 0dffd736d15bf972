"""Deterministic file I/O for targets, sources, phase maps, and patterns.

Formats:

* PGM (P5, 8- or 16-bit grayscale) and PNG (8- or 16-bit grayscale) carry
  quantized intensities; loading divides by the format's max value so pixel
  values land in [0, 1].
* CSV-float grids carry unquantized values verbatim (comma-separated rows,
  shortest round-trip float formatting on save), so save/load is exact.
* PBM (P4) carries binary mirror patterns, one bit per pixel, rows padded to
  byte boundaries with zero bits. Bit 1 means "mirror on" here, overriding
  PBM's usual 1=black reading; the file remains parseable by any netpbm tool.
* Phase maps load from CSV-float (radians, wrapped) or from grayscale, where
  full scale maps to 2*pi.

Quantization on save rounds half-up; 16-bit samples are big-endian in PGM as
netpbm requires. All writers are atomic (write to a temp file, then rename).
"""

from __future__ import annotations

import enum
import io
import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FileFormatError, UnsupportedBitDepthError, ValidationError
from .field import BinaryPattern, PhaseMap, RealImage, TWO_PI


class ImageFileFormat(str, enum.Enum):
    PGM = "pgm"
    PNG = "png"
    PBM = "pbm"
    CSV = "csv"

    @classmethod
    def from_path(cls, path) -> "ImageFileFormat":
        suffix = Path(path).suffix.lower().lstrip(".")
        try:
            return cls(suffix)
        except ValueError:
            raise ValidationError(
                f"cannot infer image format from extension {suffix!r} "
                f"(expected one of pgm/png/pbm/csv)"
            ) from None


def atomic_write_bytes(path, payload: bytes) -> None:
    """Write a file by writing a sibling temp file and renaming it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# netpbm parsing helpers


def _read_pnm_tokens(blob: bytes, count: int, path) -> tuple[list[int], int]:
    """Parse `count` whitespace/comment-separated integers after the magic.

    Returns the integers and the payload offset (one whitespace byte past the
    last header token, per the netpbm spec).
    """
    tokens: list[int] = []
    pos = 2  # past the 2-byte magic
    if blob[pos : pos + 1] not in (b" ", b"\t", b"\n", b"\r", b"#"):
        raise FileFormatError(f"{path}: malformed header after magic")
    while len(tokens) < count:
        if pos >= len(blob):
            raise FileFormatError(f"{path}: truncated header")
        c = blob[pos : pos + 1]
        if c == b"#":
            nl = blob.find(b"\n", pos)
            if nl < 0:
                raise FileFormatError(f"{path}: unterminated header comment")
            pos = nl + 1
        elif c.isspace():
            pos += 1
        else:
            end = pos
            while end < len(blob) and not blob[end : end + 1].isspace():
                end += 1
            token = blob[pos:end]
            if not token.isdigit():
                raise FileFormatError(f"{path}: malformed header token {token!r}")
            tokens.append(int(token))
            pos = end
    if pos >= len(blob) or not blob[pos : pos + 1].isspace():
        raise FileFormatError(f"{path}: header not terminated by whitespace")
    return tokens, pos + 1


def _load_pgm_raw(path) -> tuple[np.ndarray, int]:
    blob = Path(path).read_bytes()
    if blob[:2] != b"P5":
        raise FileFormatError(f"{path}: expected binary PGM magic 'P5', got {blob[:2]!r}")
    (width, height, maxval), offset = _read_pnm_tokens(blob, 3, path)
    if width < 1 or height < 1:
        raise FileFormatError(f"{path}: invalid dimensions {width}x{height}")
    if maxval < 1:
        raise FileFormatError(f"{path}: invalid maxval {maxval}")
    if maxval > 65535:
        raise UnsupportedBitDepthError(f"{path}: maxval {maxval} exceeds 16-bit range")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = width * height * dtype.itemsize
    payload = blob[offset:]
    if len(payload) != expected:
        raise FileFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    raw = np.frombuffer(payload, dtype=dtype).reshape(height, width).astype(np.int64)
    if raw.max(initial=0) > maxval:
        raise FileFormatError(f"{path}: sample exceeds declared maxval {maxval}")
    return raw, maxval


def _save_pgm_raw(raw: np.ndarray, maxval: int, path) -> None:
    height, width = raw.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    atomic_write_bytes(path, header + raw.astype(dtype).tobytes())


def _load_png_raw(path) -> tuple[np.ndarray, int]:
    try:
        with Image.open(path) as im:
            mode = im.mode
            arr = np.asarray(im)
    except UnidentifiedImageError as exc:
        raise FileFormatError(f"{path}: not a valid PNG file") from exc
    if mode == "L":
        return arr.astype(np.int64), 255
    if mode in ("I;16", "I"):
        raw = arr.astype(np.int64)
        if raw.min(initial=0) < 0 or raw.max(initial=0) > 65535:
            raise UnsupportedBitDepthError(
                f"{path}: sample values outside 16-bit range"
            )
        return raw, 65535
    raise UnsupportedBitDepthError(
        f"{path}: expected 8- or 16-bit grayscale PNG, got mode {mode!r}"
    )


def _save_png_raw(raw: np.ndarray, maxval: int, path) -> None:
    if maxval == 255:
        im = Image.fromarray(raw.astype(np.uint8), mode="L")
    else:
        im = Image.fromarray(raw.astype(np.uint16))
    buf = io.BytesIO()
    im.save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())


def _load_csv_grid(path) -> np.ndarray:
    rows: list[list[float]] = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: non-numeric cell") from exc
            if len(rows[-1]) != len(rows[0]):
                raise FileFormatError(
                    f"{path}:{lineno}: ragged row ({len(rows[-1])} cells, "
                    f"expected {len(rows[0])})"
                )
    if not rows:
        raise FileFormatError(f"{path}: empty CSV grid")
    grid = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(grid)):
        raise FileFormatError(f"{path}: CSV grid contains non-finite values")
    return grid


def _save_csv_grid(grid: np.ndarray, path) -> None:
    lines = [",".join(repr(float(v)) for v in row) for row in grid]
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


# ---------------------------------------------------------------------------
# intensity images


def _quantize(data: np.ndarray, maxval: int, normalize: bool) -> np.ndarray:
    if normalize:
        peak = float(data.max())
        scaled = data / peak if peak > 0.0 else np.zeros_like(data)
    else:
        scaled = np.clip(data, 0.0, 1.0)
    return np.floor(scaled * maxval + 0.5).astype(np.int64)


def load_intensity(path, format: ImageFileFormat | None = None) -> RealImage:
    """Load an intensity image; quantized formats are scaled into [0, 1]."""
    fmt = ImageFileFormat(format) if format is not None else ImageFileFormat.from_path(path)
    if fmt is ImageFileFormat.CSV:
        grid = _load_csv_grid(path)
        if np.any(grid < 0.0):
            raise FileFormatError(f"{path}: negative intensity values")
        return RealImage(grid)
    if fmt is ImageFileFormat.PBM:
        return RealImage(load_pattern(path).data.astype(np.float64))
    if fmt is ImageFileFormat.PGM:
        raw, maxval = _load_pgm_raw(path)
    else:
        raw, maxval = _load_png_raw(path)
    return RealImage(raw.astype(np.float64) / maxval)


def save_intensity(
    img: RealImage,
    path,
    format: ImageFileFormat | None = None,
    normalize: bool = False,
    bit_depth: int = 8,
) -> None:
    """Save an intensity image.

    With ``normalize`` the image's own maximum maps to full scale; otherwise
    values are clamped to [0, 1] before quantizing. Rounding is half-up.
    CSV output ignores quantization and stores the float values exactly.
    """
    fmt = ImageFileFormat(format) if format is not None else ImageFileFormat.from_path(path)
    if fmt is ImageFileFormat.CSV:
        _save_csv_grid(img.data, path)
        return
    if fmt is ImageFileFormat.PBM:
        save_pattern(BinaryPattern(_quantize(img.data, 1, normalize)), path)
        return
    if bit_depth not in (8, 16):
        raise ValidationError(f"bit_depth must be 8 or 16, got {bit_depth}")
    maxval = 255 if bit_depth == 8 else 65535
    raw = _quantize(img.data, maxval, normalize)
    if fmt is ImageFileFormat.PGM:
        _save_pgm_raw(raw, maxval, path)
    else:
        _save_png_raw(raw, maxval, path)


# ---------------------------------------------------------------------------
# phase maps


def load_phase_map(path, format: ImageFileFormat | None = None) -> PhaseMap:
    """Load a phase map; grayscale full scale maps to 2*pi, CSV is radians.

    Values are wrapped into [0, 2*pi), so a full-scale gray pixel wraps to 0.
    """
    fmt = ImageFileFormat(format) if format is not None else ImageFileFormat.from_path(path)
    if fmt is ImageFileFormat.CSV:
        return PhaseMap(_load_csv_grid(path))
    if fmt is ImageFileFormat.PGM:
        raw, maxval = _load_pgm_raw(path)
    elif fmt is ImageFileFormat.PNG:
        raw, maxval = _load_png_raw(path)
    else:
        raise ValidationError(f"phase maps load from CSV or grayscale, not {fmt.value}")
    return PhaseMap(raw.astype(np.float64) / maxval * TWO_PI)


# ---------------------------------------------------------------------------
# binary patterns (PBM P4)


def save_pattern(p: BinaryPattern, path) -> None:
    """Write a mirror pattern as binary PBM; bit 1 = mirror on, rows padded."""
    header = f"P4\n{p.width} {p.height}\n".encode("ascii")
    packed = np.packbits(p.data, axis=1)
    atomic_write_bytes(path, header + packed.tobytes())


def load_pattern(path) -> BinaryPattern:
    """Read a binary PBM mirror pattern written by :func:`save_pattern`."""
    blob = Path(path).read_bytes()
    if blob[:2] != b"P4":
        raise FileFormatError(f"{path}: expected binary PBM magic 'P4', got {blob[:2]!r}")
    (width, height), offset = _read_pnm_tokens(blob, 2, path)
    if width < 1 or height < 1:
        raise FileFormatError(f"{path}: invalid dimensions {width}x{height}")
    row_bytes = (width + 7) // 8
    expected = row_bytes * height
    payload = blob[offset:]
    if len(payload) != expected:
        raise FileFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    packed = np.frombuffer(payload, dtype=np.uint8).reshape(height, row_bytes)
    bits = np.unpackbits(packed, axis=1)[:, :width]
    return BinaryPattern(bits)
