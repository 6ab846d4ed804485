"""Image, CSV and manifest persistence for the runner."""

from __future__ import annotations

import csv
import json
import platform
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image

__all__ = [
    "TRACE_COLUMNS",
    "QUADRATIC_SUMMARY_COLUMNS",
    "EVALUATE_COLUMNS",
    "read_image",
    "write_png16",
    "read_png16",
    "write_phase_png",
    "write_csv",
    "read_csv",
    "write_json",
    "read_json",
    "versions",
]

TRACE_COLUMNS = ("epoch", "z", "loss", "weight", "total")
QUADRATIC_SUMMARY_COLUMNS = ("n", "seed", "ground_index", "lipschitz", "step_size",
                             "k_ground", "k_reverse_attention", "ratio",
                             "final_error_ground", "final_error_reverse_attention")
EVALUATE_COLUMNS = ("run", "psnr", "ssim")

U16 = 65535


def read_image(path: str | Path) -> np.ndarray:
    """Grayscale raster (PNG, PGM, ...) as float64 scaled by its bit depth to [0, 1]."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such image: {path}")
    try:
        with Image.open(path) as im:
            if im.mode in ("RGB", "RGBA", "P", "LA", "CMYK"):
                im = im.convert("L")
            arr = np.array(im)
    except Exception as exc:  # Pillow raises a zoo of types
        raise ValueError(f"unreadable image {path}: {exc}") from exc
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    if arr.dtype == bool:
        return arr.astype(np.float64)
    if arr.dtype.kind in "iu":
        return arr.astype(np.float64) / U16
    arr = arr.astype(np.float64)
    peak = arr.max()
    return arr / peak if peak > 0 else arr


def write_png16(path: str | Path, values: np.ndarray, vmax: float | None = None) -> float:
    """Store ``values / vmax`` (clipped to [0, 1]) as 16-bit PNG; returns ``vmax``."""
    values = np.asarray(values, dtype=np.float64)
    vmax = float(values.max()) if vmax is None else float(vmax)
    scaled = np.clip(values / vmax, 0.0, 1.0) if vmax > 0 else np.zeros_like(values)
    Image.fromarray(np.round(scaled * U16).astype(np.uint16)).save(path)
    return vmax


def read_png16(path: str | Path, vmax: float = 1.0) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.array(im).astype(np.float64)
    return arr / U16 * vmax


def write_phase_png(path: str | Path, phase: np.ndarray) -> None:
    """[-pi, pi] -> [0, 65535]."""
    write_png16(path, (np.asarray(phase) + np.pi) / (2.0 * np.pi), vmax=1.0)


def write_csv(path: str | Path, rows: Iterable[dict], columns: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="raise")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_json(path: str | Path, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=2, default=_jsonable, allow_nan=True) + "\n")


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def versions() -> dict:
    from . import __version__
    import PIL

    return {"holofocus": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "pillow": PIL.__version__}
