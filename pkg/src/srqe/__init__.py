"""Quality scores for arbitrary style transfer image triples.

The library half exposes the scoring pipeline (feature extraction, sparse
coding, similarity pooling), the training tools (dictionary learning) and
the evaluation harness (pairwise-vote fitting and rank criteria); the CLI
half wires them into train/score/eval commands.
"""

from .config import RunConfig, load_config
from .dictlearn import (
    Dictionary,
    SparseCode,
    load_dictionaries,
    odl_train,
    omp_encode,
    save_dictionaries,
    train_content_dicts,
    train_style_dicts,
)
from .dog import (
    DoGPyramid,
    PatchSet,
    build_pyramid,
    dog_kernel,
    extract_patches,
    gaussian_kernel,
    select_training_patches,
)
from .evaluation import (
    BTScores,
    EvalReport,
    WinMatrix,
    bt_fit,
    group_eval,
    hitr,
    krcc,
    plcc_fit,
    srcc,
)
from .imaging import load_image, resize_bilinear, to_grayscale
from .pooling import (
    QualityTriple,
    pool_content,
    pool_overall,
    pool_overall_combination,
    pool_style,
)
from .scoring import TripleScorer
from .similarity import (
    CodingOperator,
    content_similarity,
    encode_content,
    encode_style,
    make_operator,
    style_similarity,
)
from .style import build_style_matrix, gram, style_vector
from .vgg import conv2d, extract_features, max_pool2, relu
from .weights_io import (
    WeightBundle,
    fixture_input,
    random_weight_bundle,
    read_weight_file,
    write_weight_file,
)

__version__ = "0.1.0"

__all__ = [
    "BTScores",
    "CodingOperator",
    "Dictionary",
    "DoGPyramid",
    "EvalReport",
    "PatchSet",
    "QualityTriple",
    "RunConfig",
    "SparseCode",
    "TripleScorer",
    "WeightBundle",
    "WinMatrix",
    "bt_fit",
    "build_pyramid",
    "build_style_matrix",
    "content_similarity",
    "conv2d",
    "dog_kernel",
    "encode_content",
    "encode_style",
    "extract_features",
    "extract_patches",
    "fixture_input",
    "gaussian_kernel",
    "gram",
    "group_eval",
    "hitr",
    "krcc",
    "load_config",
    "load_dictionaries",
    "load_image",
    "make_operator",
    "max_pool2",
    "odl_train",
    "omp_encode",
    "plcc_fit",
    "pool_content",
    "pool_overall",
    "pool_overall_combination",
    "pool_style",
    "random_weight_bundle",
    "read_weight_file",
    "relu",
    "resize_bilinear",
    "save_dictionaries",
    "select_training_patches",
    "srcc",
    "style_vector",
    "to_grayscale",
    "train_content_dicts",
    "train_style_dicts",
    "write_weight_file",
]
