"""Gram-based style descriptors and training-matrix assembly.

A feature map (C, H, W) is flattened to (C, H*W); its Gram matrix is the
C x C product of that flattening with its own transpose (no normalization
by H*W). Averaging each Gram row yields the per-layer style vector used
both for dictionary training and at inference.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .vgg import extract_features
from .weights_io import WeightBundle

# Smallest tile the conv stack accepts: four poolings must leave >= 2 px.
MIN_TILE = 32

DEFAULT_BLOCKS_PER_LAYER = (4, 4, 9, 16, 16)


def gram(feature: np.ndarray) -> np.ndarray:
    """Channel-by-channel inner products of a (C, H, W) feature map."""
    f = np.asarray(feature, dtype=np.float64)
    if f.ndim != 3 or f.size == 0:
        raise InvalidInputError("gram expects a non-empty (C, H, W) feature map")
    flat = f.reshape(f.shape[0], -1)
    out = flat @ flat.T
    # symmetry holds by construction; checked in test builds only
    assert np.abs(out - out.T).max() <= 1e-5 * max(np.abs(out).max(), 1.0)
    return out


def style_vector(g: np.ndarray) -> np.ndarray:
    """Row means of a square Gram matrix (uniform 1/C weighting)."""
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise InvalidInputError(f"expected a square Gram matrix, got shape {g.shape}")
    return g.mean(axis=1)


def image_style_vectors(image: np.ndarray, weights: WeightBundle) -> list[np.ndarray]:
    """Style vector of a whole image at each of the five layers."""
    return [style_vector(gram(f)) for f in extract_features(image, weights)]


def _tile_grid(image: np.ndarray, grid: int) -> list[np.ndarray]:
    """Split into grid x grid equal square tiles, cropping any remainder."""
    h, w = image.shape[:2]
    side = min(h, w) // grid
    if side < MIN_TILE:
        raise ConfigurationError(
            f"a {grid}x{grid} grid on a {h}x{w} image gives {side}px tiles; "
            f"the network needs at least {MIN_TILE}px"
        )
    return [
        image[r * side : (r + 1) * side, c * side : (c + 1) * side]
        for r in range(grid)
        for c in range(grid)
    ]


def build_style_matrix(
    images: list[np.ndarray],
    weights: WeightBundle,
    blocks_per_layer=DEFAULT_BLOCKS_PER_LAYER,
) -> list[np.ndarray]:
    """Per-layer matrices of tile style vectors for dictionary training.

    Each image is partitioned into blocks_per_layer[l] tiles for layer l
    (counts must be perfect squares); every tile contributes one column, so
    layer l ends with len(images) * blocks_per_layer[l] columns. Layers that
    share a grid size reuse the same forward passes.
    """
    if not images:
        raise InvalidInputError("need at least one training image")
    if len(blocks_per_layer) != 5:
        raise InvalidInputError("blocks_per_layer must have five entries")
    grids = []
    for count in blocks_per_layer:
        g = math.isqrt(int(count))
        if g * g != count:
            raise ConfigurationError(f"block count {count} is not a perfect square")
        grids.append(g)

    columns: list[list[np.ndarray]] = [[] for _ in range(5)]
    for image in images:
        for grid in sorted(set(grids)):
            layers_here = [l for l, g in enumerate(grids) if g == grid]
            for tile in _tile_grid(image, grid):
                feats = extract_features(tile, weights)
                for l in layers_here:
                    columns[l].append(style_vector(gram(feats[l])))
    return [np.column_stack(cols) for cols in columns]
