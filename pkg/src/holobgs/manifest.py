"""Run manifests: one JSON file that pins everything a command needs.

Every CLI command writes a ``manifest.json`` next to its outputs; feeding it
back through ``holobgs rerun`` reproduces the run byte for byte. Paths are
resolved to absolute form when the manifest is built so the record does not
depend on the working directory of the original invocation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import ValidationError

MANIFEST_FILENAME = "manifest.json"


def _resolve(path: str | None) -> str | None:
    return None if path is None else str(Path(path).resolve())


@dataclass(frozen=True)
class RunManifest:
    """Complete, serializable description of one CLI invocation."""

    command: str
    output_dir: str
    algorithm: str | None = None
    max_iterations: int = 30
    convergence_tolerance: float = 1e-4
    stop_early: bool = False
    theta_convention: str = "on_below_pi"
    source_profile: str = "uniform"
    gaussian_waist: float | None = None
    target_offset: tuple[int, int] = (0, 0)
    compensation_sign: str = "subtract"
    seed: int | None = None
    target_path: str | None = None
    targets_dir: str | None = None
    pattern_path: str | None = None
    phase_map_path: str | None = None
    field_size: int | None = None
    square_sizes: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.command not in ("generate", "reconstruct", "benchmark", "compare"):
            raise ValidationError(f"unknown command {self.command!r}")
        object.__setattr__(self, "output_dir", _resolve(self.output_dir))
        object.__setattr__(self, "target_path", _resolve(self.target_path))
        object.__setattr__(self, "targets_dir", _resolve(self.targets_dir))
        object.__setattr__(self, "pattern_path", _resolve(self.pattern_path))
        object.__setattr__(self, "phase_map_path", _resolve(self.phase_map_path))
        object.__setattr__(self, "target_offset", tuple(self.target_offset))
        if self.square_sizes is not None:
            object.__setattr__(self, "square_sizes", tuple(self.square_sizes))

    def to_json(self) -> str:
        payload = asdict(self)
        payload["target_offset"] = list(self.target_offset)
        if self.square_sizes is not None:
            payload["square_sizes"] = list(self.square_sizes)
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"manifest is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ValidationError("manifest JSON must be an object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(payload) - known
        if unknown:
            raise ValidationError(f"manifest has unknown fields: {sorted(unknown)}")
        return cls(**payload)

    @classmethod
    def load(cls, path) -> "RunManifest":
        return cls.from_json(Path(path).read_text(encoding="ascii"))

    def write(self, path) -> None:
        from .imageio import atomic_write_bytes

        atomic_write_bytes(Path(path), self.to_json().encode("ascii"))
