"""Image loading, resizing and colour conversion.

Images are held as plain numpy arrays: shape (H, W, 3) for RGB or (H, W)
for grayscale, float64 values in [0, 1], row-major. All downstream modules
consume this representation.
"""

from __future__ import annotations

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, InvalidInputError

# Rec. 601 luma weights for the grayscale content path.
_LUMA = np.array([0.299, 0.587, 0.114])


def load_image(path, target_size: int) -> np.ndarray:
    """Decode a PNG/JPEG file and return a target_size x target_size RGB array.

    Values are scaled to [0, 1] and the resize is bilinear (pixel-center
    aligned, no antialias filter). Raises DecodeError for unreadable files
    and InvalidInputError for zero-dimension images or target sizes.
    """
    if target_size <= 0:
        raise InvalidInputError(f"target_size must be positive, got {target_size}")
    try:
        with Image.open(path) as im:
            im = im.convert("RGB")
            raw = np.asarray(im, dtype=np.float64)
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"cannot decode image file {path!r}: {exc}") from exc
    if raw.size == 0:
        raise InvalidInputError(f"image {path!r} has a zero dimension")
    return resize_bilinear(raw / 255.0, target_size, target_size)


def resize_bilinear(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with half-pixel center alignment.

    Source coordinates are (dst + 0.5) * scale - 0.5, clamped to the valid
    range, which matches the common align_corners=False convention.
    """
    if out_h <= 0 or out_w <= 0:
        raise InvalidInputError("output dimensions must be positive")
    img = np.asarray(image, dtype=np.float64)
    in_h, in_w = img.shape[:2]
    if in_h == 0 or in_w == 0:
        raise InvalidInputError("input image has a zero dimension")
    if (in_h, in_w) == (out_h, out_w):
        return img.copy()

    def axis_coords(n_in, n_out):
        x = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        x = np.clip(x, 0.0, n_in - 1.0)
        lo = np.floor(x).astype(np.intp)
        hi = np.minimum(lo + 1, n_in - 1)
        return lo, hi, x - lo

    y0, y1, wy = axis_coords(in_h, out_h)
    x0, x1, wx = axis_coords(in_w, out_w)
    wy = wy.reshape(-1, 1) if img.ndim == 2 else wy.reshape(-1, 1, 1)
    wx = wx.reshape(1, -1) if img.ndim == 2 else wx.reshape(1, -1, 1)

    top = img[y0][:, x0] * (1 - wx) + img[y0][:, x1] * wx
    bot = img[y1][:, x0] * (1 - wx) + img[y1][:, x1] * wx
    return top * (1 - wy) + bot * wy


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Collapse an RGB array to single-channel luma; grayscale passes through."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] == 3:
        return img @ _LUMA
    raise InvalidInputError(f"expected (H, W) or (H, W, 3) array, got shape {img.shape}")


def validate_image(image: np.ndarray) -> np.ndarray:
    """Check the shared image invariants: finite values inside [0, 1]."""
    img = np.asarray(image)
    if not np.all(np.isfinite(img)):
        raise InvalidInputError("image contains non-finite values")
    if img.size and (img.min() < -1e-9 or img.max() > 1 + 1e-9):
        raise InvalidInputError("image values fall outside [0, 1]")
    return img
