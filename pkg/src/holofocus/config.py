"""Experiment configuration: a flat ``key = value`` file plus CLI overrides."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

from .losses import CandidateSet
from .network import AutoencoderSpec
from .optics import OpticalConfig
from .strategies import ReconstructionConfig, StrategyKind

__all__ = ["ExperimentConfig", "load_config", "parse_config_text", "default_output_root"]

OUTPUT_ENV = "HOLOFOCUS_OUTPUT"


def default_output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "runs"))


@dataclass
class ExperimentConfig:
    sample: str = "builtin:target"
    wavelength: float = 532e-9
    pitch: float = 2e-6
    size: int = 128
    z: float = 5e-3
    zmin: float = 4.5e-3
    zmax: float = 5.5e-3
    zstep: float = 1e-4
    strategy: str = "reverse-attention"
    z_index: int | None = None
    epochs: int = 1500
    seed: int = 0
    learning_rate: float = 1e-3
    widths: tuple[int, ...] = (16, 32, 64, 128)
    kernel_size: int = 3
    leaky_slope: float = 0.1
    precision: str = "float32"
    alpha: float = 0.9
    phase_object: bool = False
    noise_std: float = 0.0
    normalize: bool = True
    pad: int = 1
    output: str = field(default_factory=lambda: str(default_output_root()))

    def __post_init__(self):
        if self.zstep <= 0:
            raise ValueError("zstep must be positive")
        if self.zmin > self.zmax:
            raise ValueError("zmin must not exceed zmax")
        if self.precision not in ("float32", "float64"):
            raise ValueError("precision must be float32 or float64")
        StrategyKind(self.strategy)

    @property
    def optical(self) -> OpticalConfig:
        return OpticalConfig(self.wavelength, self.pitch, (self.size, self.size))

    def candidates(self, true_distance: float | None = None) -> CandidateSet:
        return CandidateSet.from_range(self.zmin, self.zmax, self.zstep,
                                       self.z if true_distance is None else true_distance)

    @property
    def architecture(self) -> AutoencoderSpec:
        return AutoencoderSpec(widths=tuple(self.widths), kernel_size=self.kernel_size,
                               leaky_slope=self.leaky_slope)

    @property
    def reconstruction(self) -> ReconstructionConfig:
        return ReconstructionConfig(epochs=self.epochs, learning_rate=self.learning_rate,
                                    seed=self.seed, architecture=self.architecture,
                                    dtype=self.precision)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["widths"] = list(self.widths)
        return d

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def _coerce(name: str, raw: str):
    f = {f.name: f for f in dataclasses.fields(ExperimentConfig)}.get(name)
    if f is None:
        raise KeyError(f"unknown config key {name!r}")
    raw = raw.strip()
    default = getattr(ExperimentConfig(), name)
    if name == "z_index":
        return None if raw.lower() in ("", "none") else int(raw)
    if isinstance(default, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if isinstance(default, tuple):
        return tuple(int(v) for v in raw.replace(",", " ").split())
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, raw = line.split("=", 1)
        key = key.strip().replace("-", "_")
        values[key] = _coerce(key, raw)
    return values


def load_config(path: str | Path | None = None, **overrides) -> ExperimentConfig:
    values = parse_config_text(Path(path).read_text()) if path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)
