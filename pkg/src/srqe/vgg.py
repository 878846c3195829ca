"""Minimal convolutional forward engine for the VGG16 feature stack.

Only what inference needs: zero-padded same convolution, rectification and
2x2 max pooling, wired into the fixed 13-conv topology. Convolutions run as
one GEMM per kernel tap, so the heavy lifting stays inside BLAS and results
are bit-reproducible for a fixed thread configuration.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .imaging import validate_image
from .weights_io import NORMALIZE_MEAN, NORMALIZE_STD, VGG16_BLOCKS, WeightBundle


def _conv_taps(x: np.ndarray, taps: np.ndarray, bias: np.ndarray | None) -> np.ndarray:
    """Convolution core: taps is the (KH, KW, C_out, C_in) contiguous kernel."""
    c_in, h, w = x.shape
    kh, kw = taps.shape[:2]
    ph, pw = kh // 2, kw // 2
    padded = np.zeros((c_in, h + 2 * ph, w + 2 * pw), dtype=np.float64)
    padded[:, ph : ph + h, pw : pw + w] = x

    # one GEMM per kernel tap; taps are contiguous so BLAS stays engaged
    flat = np.zeros((taps.shape[2], h * w), dtype=np.float64)
    for dy in range(kh):
        for dx in range(kw):
            window = padded[:, dy : dy + h, dx : dx + w].reshape(c_in, h * w)
            flat += taps[dy, dx] @ window
    out = flat.reshape(taps.shape[2], h, w)
    if bias is not None:
        out += bias[:, None, None]
    return out


def conv2d(x: np.ndarray, weight: np.ndarray, bias: np.ndarray | None = None) -> np.ndarray:
    """Same-size 2-D convolution (cross-correlation) with zero padding.

    x: (C_in, H, W); weight: (C_out, C_in, KH, KW) with odd KH, KW;
    bias: (C_out,) or None. Returns (C_out, H, W) in float64.
    """
    x = np.asarray(x, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    if x.ndim != 3 or weight.ndim != 4:
        raise InvalidInputError("conv2d expects (C,H,W) input and (O,C,KH,KW) weight")
    c_in = x.shape[0]
    _, wc_in, kh, kw = weight.shape
    if wc_in != c_in:
        raise ConfigurationError(f"weight expects {wc_in} input channels, image has {c_in}")
    if kh % 2 == 0 or kw % 2 == 0:
        raise ConfigurationError("kernel dimensions must be odd for same padding")
    taps = np.ascontiguousarray(weight.transpose(2, 3, 0, 1))
    b = None if bias is None else np.asarray(bias, dtype=np.float64)
    return _conv_taps(x, taps, b)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def max_pool2(x: np.ndarray) -> np.ndarray:
    """2x2 max pooling with stride 2; odd trailing rows/columns are dropped."""
    c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    trimmed = x[:, : h2 * 2, : w2 * 2]
    return trimmed.reshape(c, h2, 2, w2, 2).max(axis=(2, 4))


def preprocess(image: np.ndarray) -> np.ndarray:
    """[0,1] RGB (H, W, 3) -> standardized (3, H, W). Applied exactly once."""
    img = validate_image(image)
    if img.ndim != 3 or img.shape[2] != 3:
        raise InvalidInputError(f"expected an (H, W, 3) image, got shape {img.shape}")
    chw = np.ascontiguousarray(img.transpose(2, 0, 1), dtype=np.float64)
    mean = np.asarray(NORMALIZE_MEAN)[:, None, None]
    std = np.asarray(NORMALIZE_STD)[:, None, None]
    return (chw - mean) / std


def _prepared_convs(weights: WeightBundle) -> dict:
    """Float64 contiguous taps and biases, computed once per bundle."""
    cache = getattr(weights, "_prepared_convs", None)
    if cache is None:
        weights.validate_vgg16()
        cache = {}
        for block in VGG16_BLOCKS:
            for name, _, _ in block:
                kernel, bias = weights.conv(name)
                taps = np.ascontiguousarray(
                    np.asarray(kernel, dtype=np.float64).transpose(2, 3, 0, 1)
                )
                cache[name] = (taps, np.asarray(bias, dtype=np.float64))
        weights._prepared_convs = cache
    return cache


def extract_features(image: np.ndarray, weights: WeightBundle) -> list[np.ndarray]:
    """Run the five VGG16 blocks and return each block's last rectified conv.

    Output i has shape (C_i, H_i, W_i) with channel widths (64, 128, 256,
    512, 512); spatial size halves between blocks through max pooling.
    """
    convs = _prepared_convs(weights)
    x = preprocess(image)
    taps: list[np.ndarray] = []
    for b, block in enumerate(VGG16_BLOCKS):
        for name, _, _ in block:
            kernel_taps, bias = convs[name]
            x = relu(_conv_taps(x, kernel_taps, bias))
        taps.append(x)
        if b < len(VGG16_BLOCKS) - 1:
            x = max_pool2(x)
    return taps


def layer_mean_activations(image: np.ndarray, weights: WeightBundle) -> list[float]:
    """Mean activation of each of the five tap points (fixture round trips)."""
    return [float(t.mean()) for t in extract_features(image, weights)]
