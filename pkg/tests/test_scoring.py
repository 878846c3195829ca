"""End-to-end triple scoring against the desk-scale trained setup."""

import dataclasses

import numpy as np
import pytest

from conftest import GOOD_PAIRS
from imagegen import blend
from srqe.dictlearn import load_dictionaries
from srqe.errors import ConfigurationError
from srqe.scoring import TripleScorer
from srqe.weights_io import read_weight_file


def test_identity_transfer_preserves_more_content_than_noise(desk):
    content, style = desk.pair(GOOD_PAIRS[2])
    noise = np.random.default_rng(77).random(content.shape)
    ref = desk.scorer.reference(content, style)
    identity = desk.scorer.score_stylized(ref, content)
    noisy = desk.scorer.score_stylized(ref, noise)
    assert identity.q_content > noisy.q_content


def test_style_image_maximizes_style_quality(desk):
    content, style = desk.pair(GOOD_PAIRS[2])
    noise = np.random.default_rng(77).random(content.shape)
    ref = desk.scorer.reference(content, style)
    candidates = {
        "style-as-stylized": desk.scorer.score_stylized(ref, style),
        "content-as-stylized": desk.scorer.score_stylized(ref, content),
        "noise": desk.scorer.score_stylized(ref, noise),
    }
    best = max(candidates, key=lambda k: candidates[k].q_style)
    assert best == "style-as-stylized"
    # identical style input means every layer similarity saturates near 2
    assert candidates["style-as-stylized"].q_style == pytest.approx(32.0, rel=1e-6)


def test_overall_follows_multiplication_pooling(desk):
    content, style = desk.pair(GOOD_PAIRS[0])
    triple = desk.scorer.score(content, style, blend(content, style, 0.5))
    assert triple.q_overall == pytest.approx(
        triple.q_content**0.4 * triple.q_style**0.6, rel=1e-9
    )
    assert triple.config["metadata"]["feature_backbone"].startswith("plain VGG16")
    assert set(triple.detail["cs_grid"]) == {f"{z},{o}" for z in (1, 2, 3) for o in (1, 2, 3, 4)}


def test_stylized_resized_to_content_dimensions(desk):
    content, style = desk.pair(GOOD_PAIRS[1])
    small = blend(content, style, 0.6)[::2, ::2]  # 64x64 candidate
    ref = desk.scorer.reference(content, style)
    triple = desk.scorer.score_stylized(ref, small)
    assert np.isfinite(triple.q_overall)


def test_scorer_from_paths_matches_in_memory(desk):
    scorer = TripleScorer.from_paths(desk.config)
    content, style = desk.pair(GOOD_PAIRS[0])
    stylized = blend(content, style, 0.25)
    a = scorer.score(content, style, stylized)
    b = desk.scorer.score(content, style, stylized)
    # persisted atoms are float32; the pseudo-inverse amplifies that rounding,
    # so loaded-scorer values agree only to a relative few percent
    assert a.q_overall == pytest.approx(b.q_overall, rel=0.02)
    assert a.q_content == pytest.approx(b.q_content, rel=0.02)


def test_patch_size_mismatch_rejected(desk):
    config = dataclasses.replace(desk.config, patch_size=8)
    weights = read_weight_file(desk.weights_path)
    style_dicts = load_dictionaries(desk.style_dict_path)
    content_dicts = load_dictionaries(desk.content_dict_path)
    with pytest.raises(ConfigurationError, match="patch size"):
        TripleScorer(config, weights, style_dicts, content_dicts)


def test_missing_content_key_rejected(desk):
    weights = read_weight_file(desk.weights_path)
    style_dicts = load_dictionaries(desk.style_dict_path)
    content_dicts = load_dictionaries(desk.content_dict_path)
    del content_dicts[(2, 3)]
    with pytest.raises(ConfigurationError, match="missing"):
        TripleScorer(desk.config, weights, style_dicts, content_dicts)


def test_similarity_form_flag_changes_scale_not_order(desk):
    config = dataclasses.replace(desk.config, similarity_form="ssim-form")
    alt = TripleScorer.from_paths(config)
    content, style = desk.pair(GOOD_PAIRS[2])
    ref_default = desk.scorer.reference(content, style)
    ref_alt = alt.reference(content, style)
    default_styles = [
        desk.scorer.score_stylized(ref_default, blend(content, style, a)).q_style
        for a in (0.25, 0.75)
    ]
    alt_styles = [
        alt.score_stylized(ref_alt, blend(content, style, a)).q_style for a in (0.25, 0.75)
    ]
    assert (default_styles[0] < default_styles[1]) == (alt_styles[0] < alt_styles[1])
    assert alt.score_stylized(ref_alt, style).q_style == pytest.approx(1.0, rel=1e-6)


def test_combination_and_summation_pooling_modes(desk):
    content, style = desk.pair(GOOD_PAIRS[1])
    stylized = blend(content, style, 0.5)
    base = desk.scorer.score(content, style, stylized)

    combo_cfg = dataclasses.replace(desk.config, pooling_mode="combination", c=0.5, d=0.5)
    combo = TripleScorer.from_paths(combo_cfg).score(content, style, stylized)
    expected = 0.5 * (combo.q_content**0.4 * combo.q_style**0.6) + 0.5 * (
        0.4 * combo.q_content + 0.6 * combo.q_style
    )
    assert combo.q_overall == pytest.approx(expected, rel=1e-9)

    summed_cfg = dataclasses.replace(desk.config, pooling_mode="summation")
    summed = TripleScorer.from_paths(summed_cfg).score(content, style, stylized)
    assert summed.q_overall == pytest.approx(
        0.4 * summed.q_content + 0.6 * summed.q_style, rel=1e-9
    )
    assert base.q_overall == pytest.approx(
        base.q_content**0.4 * base.q_style**0.6, rel=1e-9
    )


def test_non_positive_style_product_gets_actionable_error(desk):
    from srqe.errors import InvalidInputError
    from srqe.scoring import PairReference

    content, style = desk.pair(GOOD_PAIRS[0])
    ref = desk.scorer.reference(content, style)
    flipped = PairReference(
        style_codes=[-c for c in desk.scorer.style_codes(content)],
        content_codes=ref.content_codes,
        content_shape=ref.content_shape,
    )
    with pytest.raises(InvalidInputError, match="style quality is non-positive"):
        desk.scorer.score_stylized(flipped, content)


def test_reference_reuse_matches_fresh_scoring(desk):
    content, style = desk.pair(GOOD_PAIRS[3])
    stylized = blend(content, style, 0.5)
    ref = desk.scorer.reference(content, style)
    assert desk.scorer.score_stylized(ref, stylized).q_overall == pytest.approx(
        desk.scorer.score(content, style, stylized).q_overall, rel=1e-12
    )
