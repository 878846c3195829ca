"""End-to-end scoring of content/style/stylized triples.

A TripleScorer holds the weight bundle, the coding operators of every
dictionary, and the run configuration. Reference descriptors (the content
image's patch codes, the style image's layer codes) can be computed once
and reused across many stylized candidates of the same pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .dictlearn import Dictionary, load_dictionaries
from .dog import build_pyramid, extract_patches
from .errors import ConfigurationError, InvalidInputError
from .imaging import load_image, resize_bilinear, to_grayscale
from .pooling import QualityTriple, pool_content, pool_overall, pool_overall_combination, pool_style
from .similarity import CodingOperator, content_similarity, make_operator, style_similarity
from .style import image_style_vectors
from .weights_io import LAYER_CHANNELS, WeightBundle, read_weight_file

BACKBONE_NOTE = "plain VGG16 block features (substituted for the DISTS-variant backbone)"


@dataclass
class PairReference:
    """Cached per-pair descriptors: style codes per layer, content codes per key."""

    style_codes: list[np.ndarray]
    content_codes: dict[tuple[int, int], np.ndarray]
    content_shape: tuple[int, int]


class TripleScorer:
    def __init__(
        self,
        config: RunConfig,
        weights: WeightBundle,
        style_dicts: list[Dictionary],
        content_dicts: dict[tuple[int, int], Dictionary],
    ):
        config.validate()
        self.config = config
        self.weights = weights.validate_vgg16()
        self._check_dictionaries(style_dicts, content_dicts)
        self.style_ops: list[CodingOperator] = [make_operator(d) for d in style_dicts]
        self.content_ops: dict[tuple[int, int], CodingOperator] = {
            key: make_operator(d) for key, d in sorted(content_dicts.items())
        }
        self.metadata = {
            "feature_backbone": BACKBONE_NOTE,
            "tau_style": style_dicts[0].tau,
            "tau_content": next(iter(content_dicts.values())).tau,
            "eta": config.eta,
            "similarity_form": config.similarity_form,
        }

    def _check_dictionaries(self, style_dicts, content_dicts):
        cfg = self.config
        if len(style_dicts) != 5:
            raise ConfigurationError(f"expected 5 style dictionaries, got {len(style_dicts)}")
        for layer, (d, channels) in enumerate(zip(style_dicts, LAYER_CHANNELS), start=1):
            if d.dim != channels:
                raise ConfigurationError(
                    f"style dictionary for layer {layer} has dim {d.dim}, expected {channels}"
                )
        expected_keys = {
            (z, o) for z in range(1, cfg.z_count + 1) for o in range(1, cfg.o_count + 1)
        }
        missing = expected_keys - set(content_dicts)
        if missing:
            raise ConfigurationError(f"content dictionaries missing keys {sorted(missing)}")
        want_dim = cfg.patch_size**2
        for key in sorted(expected_keys):
            if content_dicts[key].dim != want_dim:
                raise ConfigurationError(
                    f"content dictionary {key} has atom length {content_dicts[key].dim}; "
                    f"patch size {cfg.patch_size} needs {want_dim}"
                )

    @classmethod
    def from_paths(cls, config: RunConfig) -> "TripleScorer":
        config.validate(require_files=("weights", "style_dict", "content_dict"))
        weights = read_weight_file(config.weights)
        style_dicts = load_dictionaries(config.style_dict)
        content_dicts = load_dictionaries(config.content_dict)
        if not isinstance(style_dicts, list):
            raise ConfigurationError(f"{config.style_dict} holds content dictionaries")
        if not isinstance(content_dicts, dict):
            raise ConfigurationError(f"{config.content_dict} holds style dictionaries")
        return cls(config, weights, style_dicts, content_dicts)

    def style_codes(self, image: np.ndarray) -> list[np.ndarray]:
        """Dense least-squares code of the image's style vector at each layer."""
        vectors = image_style_vectors(image, self.weights)
        return [op.matrix @ vec for op, vec in zip(self.style_ops, vectors)]

    def content_codes(self, image: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
        """Per-(scale, octave) code matrices of the non-overlapping patch grid."""
        cfg = self.config
        gray = to_grayscale(image)
        pyramid = build_pyramid(
            gray,
            cfg.z_count,
            cfg.o_count,
            cfg.sigma_list,
            cfg.k,
            min_patch_size=cfg.patch_size,
        )
        codes = {}
        for key, op in self.content_ops.items():
            patches = extract_patches(pyramid.signal(*key), cfg.patch_size, cfg.patch_size)
            codes[key] = op.encode_many(patches.patches)
        return codes

    def reference(self, content_image: np.ndarray, style_image: np.ndarray) -> PairReference:
        return PairReference(
            style_codes=self.style_codes(style_image),
            content_codes=self.content_codes(content_image),
            content_shape=content_image.shape[:2],
        )

    def score_stylized(self, ref: PairReference, stylized_image: np.ndarray) -> QualityTriple:
        cfg = self.config
        if stylized_image.shape[:2] != ref.content_shape:
            stylized_image = resize_bilinear(stylized_image, *ref.content_shape)

        stylized_style = self.style_codes(stylized_image)
        ss_layers = [
            style_similarity(s, ts, cfg.eta, cfg.similarity_form)
            for s, ts in zip(ref.style_codes, stylized_style)
        ]
        q_style = pool_style(ss_layers)
        if q_style <= 0 and cfg.pooling_mode == "multiplication":
            raise InvalidInputError(
                f"style quality is non-positive ({q_style:.4g}; per-layer "
                f"{[round(v, 4) for v in ss_layers]}), so geometric pooling is "
                "undefined. This usually means the style dictionaries do not "
                "represent these images: train with more images, or raise the "
                "atom counts to at least the layer widths (64,128,256,512,512)."
            )

        stylized_content = self.content_codes(stylized_image)
        cs_grid = {
            key: content_similarity(
                ref.content_codes[key], stylized_content[key], cfg.eta, cfg.similarity_form
            )
            for key in self.content_ops
        }
        q_content = pool_content(cs_grid, cfg.z_count, cfg.o_count, cfg.normalized_pooling)

        if cfg.pooling_mode == "multiplication":
            q_overall = pool_overall(q_content, q_style, cfg.w1, cfg.w2)
        elif cfg.pooling_mode == "summation":
            q_overall = pool_overall_combination(
                q_content, q_style, 0.0, 1.0, cfg.w1, cfg.w2, cfg.w3, cfg.w4
            )
        else:
            q_overall = pool_overall_combination(
                q_content, q_style, cfg.c, cfg.d, cfg.w1, cfg.w2, cfg.w3, cfg.w4
            )

        echo = cfg.as_dict()
        echo["metadata"] = dict(self.metadata)
        return QualityTriple(
            q_content=float(q_content),
            q_style=float(q_style),
            q_overall=float(q_overall),
            config=echo,
            detail={
                "ss_per_layer": [float(v) for v in ss_layers],
                "cs_grid": {f"{z},{o}": float(v) for (z, o), v in sorted(cs_grid.items())},
            },
        )

    def score(self, content_image, style_image, stylized_image) -> QualityTriple:
        return self.score_stylized(self.reference(content_image, style_image), stylized_image)

    def score_files(self, content_path, style_path, stylized_path) -> QualityTriple:
        size = self.config.target_size
        content = load_image(content_path, size)
        style = load_image(style_path, size)
        stylized = load_image(stylized_path, size)
        return self.score(content, style, stylized)


def score_manifest_rows(scorer: TripleScorer, rows: list[dict]) -> list[QualityTriple]:
    """Score manifest rows in order, reusing references for repeated pairs."""
    cache: dict[tuple[str, str], PairReference] = {}
    results = []
    for row in rows:
        pair = (row["content"], row["style"])
        if pair not in cache:
            size = scorer.config.target_size
            cache[pair] = scorer.reference(
                load_image(pair[0], size), load_image(pair[1], size)
            )
        stylized = load_image(row["stylized"], scorer.config.target_size)
        results.append(scorer.score_stylized(cache[pair], stylized))
    return results


def read_manifest(path) -> list[dict]:
    """Parse a `content,style,stylized` manifest CSV."""
    import csv

    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["content", "style", "stylized"]:
            raise InvalidInputError(f"{path}: line 1: bad or missing manifest header")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 3:
                raise InvalidInputError(f"{path}: line {line_no}: expected 3 columns")
            rows.append(
                {"content": row[0].strip(), "style": row[1].strip(), "stylized": row[2].strip()}
            )
    return rows
