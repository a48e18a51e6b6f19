"""Per-channel 2D DFT of feature maps and the spectral point clouds built from it.

The transform is the unnormalized forward DFT:
    coefficient(u, v) = sum_{y,x} s[y, x] * exp(-2i*pi*(u*y/H + v*x/W))
evaluated per channel. Amplitude and phase of those coefficients, pooled across
spatial positions (and optionally channels), form the empirical distributions
the transport layer compares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ShapeError, ValueRangeError

MODES = ("scalar", "channel_vector")
CLOUD_KINDS = ("amplitude", "phase", "feature")

# Direct matrix-product DFT up to this edge length; FFT above. Both paths
# must agree to 1e-6 relative.
DIRECT_DFT_LIMIT = 64
DEFAULT_EPS_REL = 1e-8

_DFT_MATRICES: dict = {}


@dataclass(frozen=True, eq=False)
class ComplexSpectrum:
    """Unnormalized forward DFT coefficients, channel-major (C, H, W)."""

    coefficients: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.coefficients, dtype=np.complex128))
        if arr.ndim != 3:
            raise ShapeError(f"spectrum must be (C, H, W), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueRangeError("spectrum contains non-finite coefficients")
        object.__setattr__(self, "coefficients", arr)

    @property
    def channels(self) -> int:
        return self.coefficients.shape[0]

    @property
    def height(self) -> int:
        return self.coefficients.shape[1]

    @property
    def width(self) -> int:
        return self.coefficients.shape[2]


@dataclass(frozen=True, eq=False)
class PointCloud:
    """An empirical distribution: n points in d dimensions, plus what they measure."""

    points: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in CLOUD_KINDS:
            raise ConfigurationError(f"unknown cloud kind {self.kind!r}")
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ShapeError(f"point cloud must be (n, d) with n, d >= 1, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueRangeError("point cloud contains non-finite values")
        object.__setattr__(self, "points", pts)

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _dft_matrix(n: int) -> np.ndarray:
    mat = _DFT_MATRICES.get(n)
    if mat is None:
        freq = np.arange(n, dtype=np.float64)
        mat = np.exp(-2j * np.pi * np.outer(freq, freq) / n)
        _DFT_MATRICES[n] = mat
    return mat


def _as_chw(data) -> np.ndarray:
    arr = np.asarray(getattr(data, "data", data), dtype=np.float64)
    if arr.ndim != 3:
        raise ShapeError(f"expected a (C, H, W) feature map, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueRangeError("feature map contains non-finite values")
    return arr


def dft2(fmap) -> ComplexSpectrum:
    """Unnormalized forward 2D DFT of each channel of a feature map."""
    data = _as_chw(fmap)
    _, height, width = data.shape
    if max(height, width) <= DIRECT_DFT_LIMIT:
        coeff = _dft_matrix(height) @ data @ _dft_matrix(width).T
    else:
        coeff = np.fft.fft2(data, axes=(1, 2))
    return ComplexSpectrum(coeff)


def _layout(values: np.ndarray, mode: str) -> np.ndarray:
    if mode == "scalar":
        return values.reshape(-1, 1)
    if mode == "channel_vector":
        c, h, w = values.shape
        return values.transpose(1, 2, 0).reshape(h * w, c)
    raise ConfigurationError(f"unknown mode {mode!r}, expected one of {MODES}")


def amplitude_points(spectrum: ComplexSpectrum, mode: str = "channel_vector") -> PointCloud:
    """Coefficient magnitudes as a point cloud.

    scalar mode: one 1-d point per (channel, u, v); channel_vector mode: one
    C-d point per (u, v) stacking channel magnitudes.
    """
    return PointCloud(_layout(np.abs(spectrum.coefficients), mode), "amplitude")


def phase_points(
    spectrum: ComplexSpectrum, mode: str = "channel_vector", eps_rel: float = DEFAULT_EPS_REL
) -> PointCloud:
    """Coefficient phases in (-pi, pi] as a point cloud.

    Coefficients with magnitude below eps_rel times the channel's max
    amplitude get phase 0: atan2 on numerically-zero coefficients is noise.
    """
    if eps_rel < 0:
        raise ConfigurationError(f"eps_rel must be >= 0, got {eps_rel}")
    coeff = spectrum.coefficients
    amplitude = np.abs(coeff)
    phase = np.arctan2(coeff.imag, coeff.real)
    phase[phase == -np.pi] = np.pi
    ceiling = amplitude.max(axis=(1, 2), keepdims=True)
    phase = np.where(amplitude < eps_rel * ceiling, 0.0, phase)
    return PointCloud(_layout(phase, mode), "phase")


def feature_points(fmap, mode: str = "channel_vector") -> PointCloud:
    """Raw feature values as a point cloud, no transform applied."""
    return PointCloud(_layout(_as_chw(fmap), mode), "feature")
