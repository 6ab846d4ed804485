"""Scalar diffraction with the angular spectrum method.

Frequencies use the plain DFT layout (DC at index 0), so transfer functions
multiply ``np.fft.fft2`` output directly with no shifting.  Evanescent
frequencies are zeroed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .tensor import ShapeError, Tensor

__all__ = [
    "OpticalConfig",
    "ComplexField",
    "PropagationKernel",
    "Hologram",
    "make_kernel",
    "propagate",
    "synthesize_hologram",
    "transmittance_from_image",
    "normalize_hologram",
    "propagate_pair",
    "propagate_stack",
    "differentiable_propagate",
    "intensity",
    "rayleigh_sommerfeld_sum",
]


@dataclass(frozen=True)
class OpticalConfig:
    wavelength: float = 532e-9
    pixel_pitch: float = 2e-6
    grid: tuple[int, int] = (128, 128)

    def __post_init__(self):
        if self.wavelength <= 0 or self.pixel_pitch <= 0:
            raise ValueError("wavelength and pixel_pitch must be positive")
        if len(self.grid) != 2 or min(self.grid) < 2:
            raise ValueError(f"grid must be two dims >= 2, got {self.grid}")
        object.__setattr__(self, "grid", (int(self.grid[0]), int(self.grid[1])))

    def padded(self, factor: int) -> "OpticalConfig":
        return OpticalConfig(self.wavelength, self.pixel_pitch,
                             (self.grid[0] * factor, self.grid[1] * factor))


@dataclass
class ComplexField:
    real: np.ndarray
    imag: np.ndarray
    config: OpticalConfig

    def __post_init__(self):
        self.real = np.asarray(self.real, dtype=np.float64)
        self.imag = np.asarray(self.imag, dtype=np.float64)
        if self.real.shape != self.imag.shape or self.real.shape != self.config.grid:
            raise ShapeError("ComplexField", self.real.shape, self.imag.shape, self.config.grid)

    @classmethod
    def from_complex(cls, values: np.ndarray, config: OpticalConfig) -> "ComplexField":
        values = np.asarray(values)
        return cls(values.real.copy(), values.imag.copy(), config)

    @property
    def values(self) -> np.ndarray:
        return self.real + 1j * self.imag

    @property
    def amplitude(self) -> np.ndarray:
        return np.hypot(self.real, self.imag)

    @property
    def phase(self) -> np.ndarray:
        return np.arctan2(self.imag, self.real)


@dataclass(frozen=True)
class PropagationKernel:
    distance: float
    transfer: np.ndarray = field(repr=False)
    config: OpticalConfig

    def conj(self) -> "PropagationKernel":
        return PropagationKernel(-self.distance, np.conj(self.transfer), self.config)


@dataclass
class Hologram:
    intensity: np.ndarray
    config: OpticalConfig
    true_distance: float | None = None

    def __post_init__(self):
        self.intensity = np.asarray(self.intensity, dtype=np.float64)
        if self.intensity.shape != self.config.grid:
            raise ShapeError("Hologram", self.intensity.shape, self.config.grid)
        if np.any(self.intensity < 0):
            raise ValueError("hologram intensity must be non-negative")


def frequency_grid(config: OpticalConfig) -> tuple[np.ndarray, np.ndarray]:
    """Spatial frequencies (cycles/m) on the DFT layout, shape ``config.grid``."""
    h, w = config.grid
    fy = np.fft.fftfreq(h, d=config.pixel_pitch)
    fx = np.fft.fftfreq(w, d=config.pixel_pitch)
    return np.meshgrid(fx, fy, indexing="xy")


@lru_cache(maxsize=64)
def _transfer(wavelength: float, pitch: float, grid: tuple[int, int], z: float) -> np.ndarray:
    fx, fy = frequency_grid(OpticalConfig(wavelength, pitch, grid))
    arg = 1.0 - (wavelength * fx) ** 2 - (wavelength * fy) ** 2
    propagating = arg >= 0
    phase = (2.0 * np.pi * z / wavelength) * np.sqrt(np.where(propagating, arg, 0.0))
    transfer = np.where(propagating, np.exp(1j * phase), 0.0)
    transfer.setflags(write=False)
    return transfer


def make_kernel(config: OpticalConfig, z: float) -> PropagationKernel:
    """Angular-spectrum transfer function for a propagation distance ``z`` (m)."""
    z = float(z)
    return PropagationKernel(z, _transfer(config.wavelength, config.pixel_pitch,
                                          config.grid, z), config)


def _pad(values: np.ndarray, factor: int, fill: complex = 0.0) -> np.ndarray:
    h, w = values.shape
    ph, pw = h * (factor - 1), w * (factor - 1)
    return np.pad(values, ((ph // 2, ph - ph // 2), (pw // 2, pw - pw // 2)),
                  constant_values=fill)


def _crop(values: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    h, w = shape
    oh = (values.shape[0] - h) // 2
    ow = (values.shape[1] - w) // 2
    return values[oh:oh + h, ow:ow + w]


def propagate(fld: ComplexField, z: float, pad: int = 1, fill: complex = 0.0) -> ComplexField:
    """Free-space propagation over ``z`` metres; negative ``z`` back-propagates.

    ``pad`` > 1 embeds the field in a grid that many times larger, filled
    with ``fill``, and crops back afterwards; this suppresses circular
    wrap-around.  Use ``fill=1`` for objects sitting in a unit plane wave.
    """
    values = fld.values
    config = fld.config
    if pad > 1:
        values = _pad(values, pad, fill)
        config = config.padded(pad)
    kernel = make_kernel(config, z)
    out = np.fft.ifft2(kernel.transfer * np.fft.fft2(values))
    if pad > 1:
        out = _crop(out, fld.config.grid)
    return ComplexField.from_complex(out, fld.config)


def transmittance_from_image(image: np.ndarray, config: OpticalConfig, alpha: float = 0.9,
                             phase_object: bool = False) -> ComplexField:
    """Object transmittance from a grayscale image, bright pixels = object.

    Amplitude mode gives ``t = 1 - alpha * img``; phase mode gives
    ``t = exp(j * alpha * pi * img)``.  The image is min-max normalized first.
    """
    img = np.asarray(image, dtype=np.float64)
    span = img.max() - img.min()
    img = (img - img.min()) / span if span > 0 else np.zeros_like(img)
    if phase_object:
        return ComplexField.from_complex(np.exp(1j * alpha * np.pi * img), config)
    return ComplexField(1.0 - alpha * img, np.zeros_like(img), config)


def synthesize_hologram(transmittance: ComplexField, z: float, pad: int = 1,
                        noise_std: float = 0.0, rng: np.random.Generator | None = None) -> Hologram:
    """In-line hologram of a thin object lit by a unit plane wave.

    With the reference fixed to 1 the object-plane field is the transmittance
    itself; the sensor records ``|propagate(t, z)|**2``.
    """
    amp = transmittance.amplitude
    if amp.max() > 1.0 + 1e-12:
        raise ValueError("transmittance magnitude must not exceed 1")
    intensity = propagate(transmittance, z, pad=pad, fill=1.0).amplitude ** 2
    if noise_std > 0:
        rng = np.random.default_rng() if rng is None else rng
        intensity = np.clip(intensity + rng.normal(0.0, noise_std, intensity.shape), 0.0, None)
    return Hologram(intensity, transmittance.config, true_distance=float(z))


def normalize_hologram(intensity: np.ndarray) -> np.ndarray:
    """Divide by the mean so every sample lands on a comparable loss scale."""
    intensity = np.asarray(intensity, dtype=np.float64)
    return intensity / intensity.mean()


# -- differentiable path -------------------------------------------------------------

def propagate_pair(fld: Tensor, kernel: PropagationKernel) -> Tensor:
    """Angular-spectrum propagation of a paired-channel field tensor.

    ``fld`` has shape ``(..., 2, H, W)`` with channel 0 real, channel 1
    imaginary.  The map is complex-linear; its adjoint is the same map with
    the conjugate transfer function, which is what the backward pass applies.
    """
    if fld.ndim < 3 or fld.shape[-3] != 2 or fld.shape[-2:] != kernel.config.grid:
        raise ShapeError("propagate_pair", fld.shape, (2, *kernel.config.grid))
    transfer = kernel.transfer
    dtype = fld.dtype

    def apply(pair: np.ndarray, h: np.ndarray) -> np.ndarray:
        c = pair[..., 0, :, :] + 1j * pair[..., 1, :, :]
        out = np.fft.ifft2(h * np.fft.fft2(c))
        return np.stack([out.real, out.imag], axis=-3).astype(dtype, copy=False)

    conj = np.conj(transfer)
    return Tensor._from_op(apply(fld.data, transfer), (fld,),
                           lambda g: (apply(g, conj),), "propagate")


def propagate_stack(fld: Tensor, kernels: list[PropagationKernel]) -> Tensor:
    """Propagate one ``(1, 2, H, W)`` field to every kernel's distance at once.

    Returns ``(n, 2, H, W)``.  The forward FFT of the input is shared by all
    candidates and the backward pass sums the candidates' adjoints in the
    frequency domain, so n candidates cost n + 1 FFTs each way.
    """
    if not kernels:
        raise ShapeError("propagate_stack", fld.shape, detail="no kernels")
    grid = kernels[0].config.grid
    if fld.ndim != 4 or fld.shape[:2] != (1, 2) or fld.shape[-2:] != grid:
        raise ShapeError("propagate_stack", fld.shape, (1, 2, *grid))
    transfer = np.stack([k.transfer for k in kernels])
    dtype = fld.dtype
    c = fld.data[0, 0] + 1j * fld.data[0, 1]
    out = np.fft.ifft2(transfer * np.fft.fft2(c)[None])
    data = np.stack([out.real, out.imag], axis=1).astype(dtype, copy=False)
    conj = np.conj(transfer)

    def backward(g):
        spec = np.sum(conj * np.fft.fft2(g[:, 0] + 1j * g[:, 1]), axis=0)
        back = np.fft.ifft2(spec)
        return (np.stack([back.real, back.imag])[None].astype(dtype, copy=False),)

    return Tensor._from_op(data, (fld,), backward, "propagate_stack")


def differentiable_propagate(real: Tensor, imag: Tensor,
                             kernel: PropagationKernel) -> tuple[Tensor, Tensor]:
    """(real, imag) pair in, (real, imag) pair out; see ``propagate_pair``."""
    from .tensor import concat, reshape

    if real.shape != imag.shape:
        raise ShapeError("differentiable_propagate", real.shape, imag.shape)
    lead = real.shape[:-2]
    shape = (*lead, 1, *real.shape[-2:])
    pair = concat([reshape(real, shape), reshape(imag, shape)], axis=-3)
    out = propagate_pair(pair, kernel)
    return reshape(out[..., 0, :, :], real.shape), reshape(out[..., 1, :, :], real.shape)


def intensity(fld: Tensor) -> Tensor:
    """|field|**2 of a paired-channel tensor, summing the channel axis."""
    from .tensor import square, sum as tsum

    return tsum(square(fld), axis=-3)


# -- brute-force oracle ------------------------------------------------------------

def rayleigh_sommerfeld_sum(values: np.ndarray, config: OpticalConfig, z: float,
                            out_shape: tuple[int, int] | None = None) -> np.ndarray:
    """Direct first-kind Rayleigh-Sommerfeld diffraction sum (no FFT).

    Each source pixel is a point source of area ``pitch**2``; the output grid
    shares the source pixel centres.  O(N^2) in pixels: for small grids only.
    """
    values = np.asarray(values, dtype=np.complex128)
    h, w = values.shape
    oh, ow = out_shape or (h, w)
    p = config.pixel_pitch
    k = 2.0 * np.pi / config.wavelength
    ys, xs = np.nonzero(values)
    src = values[ys, xs]
    ys = (ys - (h - 1) / 2.0) * p
    xs = (xs - (w - 1) / 2.0) * p
    oy = (np.arange(oh) - (oh - 1) / 2.0) * p
    ox = (np.arange(ow) - (ow - 1) / 2.0) * p
    out = np.zeros((oh, ow), dtype=np.complex128)
    for i, yo in enumerate(oy):
        dy2 = (yo - ys) ** 2
        for j, xo in enumerate(ox):
            r = np.sqrt((xo - xs) ** 2 + dy2 + z * z)
            kernel = (z / (2.0 * np.pi)) * np.exp(1j * k * r) / r ** 2 * (1.0 / r - 1j * k)
            out[i, j] = np.sum(src * kernel) * p * p
    return out
