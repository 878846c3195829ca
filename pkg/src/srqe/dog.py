"""Difference-of-Gaussians scale space and patch extraction.

The content path represents structure as absolute band-pass responses on a
scale/octave grid: within an octave, the input is filtered with the
difference of two unit-mass Gaussians at scales sigma and k*sigma (sigma=0
keeps the unfiltered image); the octave's last signal, decimated by two,
seeds the next octave. Responses are dense maps, not keypoints.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve

from .errors import (
    ConfigurationError,
    DegenerateInputError,
    InsufficientResolutionError,
    InvalidInputError,
)

DEFAULT_SIGMAS = (0.0, 1.0, 1.6, 2.56, 4.096)
DEFAULT_K = 1.6


def gaussian_kernel(sigma: float, radius: int, normalize: bool = True) -> np.ndarray:
    """Sampled isotropic Gaussian on [-radius, radius]^2.

    With normalize=True the samples are rescaled to unit sum so that flat
    regions stay flat under filtering.
    """
    if sigma <= 0:
        raise InvalidInputError("sigma must be positive")
    coords = np.arange(-radius, radius + 1, dtype=np.float64)
    sq = coords[:, None] ** 2 + coords[None, :] ** 2
    kernel = np.exp(-sq / (2.0 * sigma**2)) / (2.0 * math.pi * sigma**2)
    if normalize:
        kernel /= kernel.sum()
    return kernel


def dog_kernel(sigma: float, k: float, radius: int) -> np.ndarray:
    """Difference of two unit-mass Gaussians at scales sigma and k*sigma.

    Each Gaussian is discretely normalized before subtraction, so the result
    sums to zero (within float error). The radius must cover the wider
    Gaussian: at least ceil(3*k*sigma).
    """
    if sigma <= 0:
        raise InvalidInputError("sigma must be positive")
    if k <= 1:
        raise InvalidInputError("scale ratio k must exceed 1")
    min_radius = math.ceil(3.0 * k * sigma)
    if radius < min_radius:
        raise ConfigurationError(
            f"radius {radius} truncates the k*sigma Gaussian; need >= {min_radius}"
        )
    return gaussian_kernel(sigma, radius) - gaussian_kernel(k * sigma, radius)


@dataclass
class DoGPyramid:
    """Absolute band-pass responses keyed by (scale z, octave o), 1-based."""

    signals: dict[tuple[int, int], np.ndarray]
    sigma_list: tuple[float, ...]
    k: float

    def signal(self, z: int, o: int) -> np.ndarray:
        return self.signals[(z, o)]


def _decimate2(signal: np.ndarray) -> np.ndarray:
    """Every second pixel, floor semantics (odd trailing row/col dropped)."""
    h, w = signal.shape
    return signal[: (h // 2) * 2 : 2, : (w // 2) * 2 : 2]


def build_pyramid(
    image: np.ndarray,
    z_count: int,
    o_count: int,
    sigma_list=DEFAULT_SIGMAS,
    k: float = DEFAULT_K,
    min_patch_size: int | None = None,
) -> DoGPyramid:
    """Z x O grid of absolute DoG responses of a grayscale image.

    The first z_count entries of sigma_list are used at every octave; an
    entry of 0 means the unfiltered input. Boundary handling is reflection.
    When min_patch_size is given, the image must measure at least
    2**o_count * min_patch_size per side so every octave can host patches.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise InvalidInputError("build_pyramid expects a single-channel image")
    if z_count < 1 or o_count < 1:
        raise InvalidInputError("scale and octave counts must be >= 1")
    if z_count > len(sigma_list):
        raise InvalidInputError(
            f"z_count {z_count} exceeds the {len(sigma_list)}-entry sigma ladder"
        )
    if min_patch_size is not None:
        need = (2**o_count) * min_patch_size
        if min(img.shape) < need:
            raise InsufficientResolutionError(
                f"image {img.shape} is smaller than {need}px required for "
                f"{o_count} octaves of {min_patch_size}px patches"
            )

    sigmas = tuple(float(s) for s in sigma_list[:z_count])
    signals: dict[tuple[int, int], np.ndarray] = {}
    current = img
    for o in range(1, o_count + 1):
        last = current
        for z, sigma in enumerate(sigmas, start=1):
            if sigma == 0.0:
                response = current.copy()
            else:
                kernel = dog_kernel(sigma, k, math.ceil(3.0 * k * sigma))
                response = np.abs(convolve(current, kernel, mode="reflect"))
            signals[(z, o)] = response
            last = response
        current = _decimate2(last)
    return DoGPyramid(signals=signals, sigma_list=sigmas, k=k)


@dataclass
class PatchSet:
    """Vectorized zero-mean patches plus what is needed to undo extraction."""

    patch_size: int
    patches: np.ndarray  # (n, patch_size**2)
    positions: np.ndarray  # (n, 2) top-left row/col
    means: np.ndarray  # (n,) removed per-patch means
    exhausted: bool = False  # fewer patches than requested by a selection


def extract_patches(signal: np.ndarray, patch_size: int, stride: int) -> PatchSet:
    """Grid patches at the given stride, mean-subtracted and vectorized."""
    sig = np.asarray(signal, dtype=np.float64)
    if sig.ndim != 2:
        raise InvalidInputError("extract_patches expects a 2-D signal")
    if patch_size < 1 or stride < 1:
        raise InvalidInputError("patch_size and stride must be positive")
    h, w = sig.shape
    if h < patch_size or w < patch_size:
        raise InvalidInputError(
            f"signal {sig.shape} is smaller than the {patch_size}px patch"
        )
    rows = range(0, h - patch_size + 1, stride)
    cols = range(0, w - patch_size + 1, stride)
    patches = np.empty((len(rows) * len(cols), patch_size * patch_size))
    positions = np.empty((len(patches), 2), dtype=np.intp)
    i = 0
    for r in rows:
        for c in cols:
            patches[i] = sig[r : r + patch_size, c : c + patch_size].ravel()
            positions[i] = (r, c)
            i += 1
    means = patches.mean(axis=1)
    flat_rows = np.ptp(patches, axis=1) == 0.0
    patches -= means[:, None]
    # a constant patch minus its mean is identically zero; don't leave
    # summation residue behind
    patches[flat_rows] = 0.0
    return PatchSet(patch_size=patch_size, patches=patches, positions=positions, means=means)


def reconstruct_patches(patch_set: PatchSet, shape: tuple[int, int]) -> np.ndarray:
    """Place patches back (means restored); inverse of a stride=size grid."""
    out = np.zeros(shape)
    p = patch_set.patch_size
    for vec, (r, c), mean in zip(patch_set.patches, patch_set.positions, patch_set.means):
        out[r : r + p, c : c + p] = vec.reshape(p, p) + mean
    return out


def select_training_patches(patch_set: PatchSet, count: int) -> PatchSet:
    """The count patches with the largest standard deviation.

    Returns everything (flagged exhausted, with a warning) when fewer are
    available; raises DegenerateInputError if no patch carries any signal.
    """
    if len(patch_set.patches) == 0:
        raise InvalidInputError("empty patch set")
    if count < 1:
        raise InvalidInputError("count must be positive")
    stds = patch_set.patches.std(axis=1)
    if not np.any(stds > 0):
        raise DegenerateInputError("every candidate patch is flat; nothing to train on")
    exhausted = len(patch_set.patches) < count
    if exhausted:
        warnings.warn(
            f"only {len(patch_set.patches)} patches available, {count} requested",
            stacklevel=2,
        )
        order = np.argsort(-stds, kind="stable")
    else:
        order = np.argsort(-stds, kind="stable")[:count]
    return PatchSet(
        patch_size=patch_set.patch_size,
        patches=patch_set.patches[order],
        positions=patch_set.positions[order],
        means=patch_set.means[order],
        exhausted=exhausted,
    )
