"""Oriented Gabor bank, dual-tree directional decomposition and the 8x8 bottleneck.

Each orientation yields one complex response. Its real part is treated as the
``g`` tree and its imaginary part as the ``h`` tree of a Hilbert pair, so four
orientations give the eight directional maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .core import ParameterError, ShapeError, as_tensor
from .metrics import coefficient_of_variation

ORIENTATIONS = (np.pi / 2, np.pi, 3 * np.pi / 2, 0.0)
BOTTLENECK = 8
REFERENCE_RESOLUTION = 64


@dataclass(frozen=True)
class GaborKernel:
    theta: float
    sigma: float
    wavelength: float
    size: int
    real_part: np.ndarray
    imag_part: np.ndarray

    @property
    def complex(self):
        return self.real_part + 1j * self.imag_part


@dataclass(frozen=True)
class DirectionalStack:
    maps: np.ndarray  # (8, H, W), ordered g/h per orientation
    tree_labels: tuple
    orientation_labels: tuple

    def magnitude(self):
        """Per-orientation modulus sqrt(g^2 + h^2), shape (4, H, W)."""
        g, h = self.maps[0::2], self.maps[1::2]
        return np.hypot(g, h)

    def real_tree(self):
        return self.maps[0::2]


@dataclass(frozen=True)
class BottleneckFeatures:
    grid: np.ndarray  # (8, 8, C)
    source_resolution: int
    compression_factor: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "compression_factor", self.source_resolution / REFERENCE_RESOLUTION
        )


def gabor_raw(theta, size, sigma, wavelength, aspect=None):
    """Evaluate the complex Gabor function on a centred ``size x size`` pixel grid.

    ``aspect`` < 1 squeezes the envelope across the carrier direction; ``None``
    keeps the isotropic envelope.
    """
    half = size // 2
    y, x = np.mgrid[-half : half + 1, -half : half + 1].astype(np.float64)
    along = x * np.cos(theta) + y * np.sin(theta)
    across = -x * np.sin(theta) + y * np.cos(theta)
    if aspect is None:
        env = np.exp(-(along**2 + across**2) / (2 * sigma**2))
    else:
        env = np.exp(-(along**2 + (aspect * across) ** 2) / (2 * sigma**2))
    return env * np.exp(2j * np.pi * along / wavelength), env


def make_gabor_bank(size=9, sigma=2.0, wavelength=4.0, aspect=None):
    """Four unit-norm zero-mean Gabor kernels at theta = pi/2, pi, 3pi/2, 0.

    The DC leak of the cosine part is removed with an envelope-shaped
    correction before normalisation, so constant images give zero response.
    """
    if size % 2 != 1 or size < 1:
        raise ParameterError(f"kernel size must be odd, got {size}")
    if sigma <= 0 or wavelength <= 0:
        raise ParameterError("sigma and wavelength must be positive")
    bank = []
    for theta in ORIENTATIONS:
        k, env = gabor_raw(theta, size, sigma, wavelength, aspect)
        re = k.real - env * (k.real.sum() / env.sum())
        im = k.imag - k.imag.mean()
        norm = np.sqrt(np.sum(re**2) + np.sum(im**2))
        bank.append(GaborKernel(theta, sigma, wavelength, size, re / norm, im / norm))
    return bank


def scaled_bank(compression, size=9, sigma=2.0, wavelength=4.0):
    """Bank dilated by ``compression`` so it sees the same physical scale at any resolution."""
    s = max(float(compression), 1e-12)
    n = int(round(size * s))
    n += 1 - n % 2
    return make_gabor_bank(max(n, 3), sigma * s, wavelength * s)


def _correlate_reflect(image, kernel):
    half = kernel.shape[0] // 2
    padded = np.pad(image, half, mode="reflect")
    return fftconvolve(padded, kernel[::-1, ::-1], mode="valid")


def decompose(image, bank):
    """Correlate ``image`` with each conjugate kernel under reflection padding.

    Returns eight maps: (real, imag) of the response for every orientation.
    """
    image = as_tensor(image)
    if image.ndim != 2:
        raise ShapeError("decompose expects a 2-D image")
    size = bank[0].size
    if min(image.shape) < size:
        raise ShapeError(f"image {image.shape} smaller than kernel size {size}")
    maps, trees, thetas = [], [], []
    for kern in bank:
        resp = _correlate_reflect(image, np.conj(kern.complex))
        maps += [resp.real, resp.imag]
        trees += ["g", "h"]
        thetas += [kern.theta, kern.theta]
    return DirectionalStack(np.stack(maps), tuple(trees), tuple(thetas))


def adaptive_avg_pool(maps, out=BOTTLENECK):
    """Adaptive average pooling of (C, H, W) maps to (C, out, out)."""
    maps = np.asarray(maps, dtype=np.float64)
    _, h, w = maps.shape
    if h < out or w < out:
        raise ShapeError(f"spatial extent {h}x{w} is below {out}x{out}")
    res = np.empty(maps.shape[:1] + (out, out))
    for i in range(out):
        r0, r1 = (i * h) // out, -((-(i + 1) * h) // out)
        for j in range(out):
            c0, c1 = (j * w) // out, -((-(j + 1) * w) // out)
            res[:, i, j] = maps[:, r0:r1, c0:c1].mean(axis=(1, 2))
    return res


def bottleneck(stack, source_resolution):
    """Pool every map of ``stack`` (a DirectionalStack or a (C,H,W) array) to 8x8."""
    maps = stack.maps if isinstance(stack, DirectionalStack) else stack
    pooled = adaptive_avg_pool(maps)
    return BottleneckFeatures(np.moveaxis(pooled, 0, -1), int(source_resolution))


def bottleneck_features(image, size=9, sigma=2.0, wavelength=4.0):
    """Scale-adaptive front end: dilated bank, modulus maps, 8x8 pooling.

    Kernels are dilated by k = resolution / 64 and responses divided by k,
    which undoes the 1/k amplitude of a unit-norm dilated 2-D kernel.
    """
    image = as_tensor(image)
    res = image.shape[0]
    k = res / REFERENCE_RESOLUTION
    stack = decompose(image, scaled_bank(k, size, sigma, wavelength))
    return bottleneck(stack.magnitude() / k, res)


def fixed_scale_activation(image, size=9, sigma=2.0, wavelength=4.0):
    """Baseline: fixed-pixel bank at native resolution, no pooling; mean modulus."""
    stack = decompose(image, make_gabor_bank(size, sigma, wavelength))
    return float(np.mean(stack.magnitude()))


def _cv(values):
    return coefficient_of_variation(values) / 100.0


def cross_resolution_cv(images, baseline=False, **bank_kw):
    """Coefficient of variation (population std / mean) of the mean activation per resolution.

    ``baseline=True`` swaps the bottleneck front end for :func:`fixed_scale_activation`.
    """
    if len(images) < 2:
        raise ParameterError("need at least two resolutions")
    if baseline:
        acts = [fixed_scale_activation(im, **bank_kw) for im in images]
    else:
        acts = [float(np.mean(np.abs(bottleneck_features(im, **bank_kw).grid))) for im in images]
    return _cv(acts)
