"""Skull-to-face identification through a single shared sparsifying transform.

The library learns one square transform over two paired image domains with
an intra-class coupling penalty on their sparse codes, encodes galleries and
probes through it, and evaluates closed-set identification with
cross-validated CMC metrics.  See the ``stmatch`` CLI for the end-to-end
workflows.
"""

from .config import FeatureSpec, HyperSettings, RunConfig, load_config
from .core import (
    HyperParams,
    SparsityPolicy,
    SparsityScope,
    hard_threshold,
    shared_objective,
    tl_objective,
    transform_objective_gradient,
    update_transform,
)
from .evaluation import (
    CmcCurve,
    EvalReport,
    FoldSplit,
    ProtocolConfig,
    SyntheticConfig,
    compute_cmc,
    evaluate_feature_pairs,
    make_folds,
    raw_nearest_neighbor_rank1,
    synth_generate,
)
from .features import (
    AugmentationPolicy,
    HogParams,
    augment,
    extract_hog,
    extract_raw,
    resize_to_canonical,
)
from .identification import (
    Gallery,
    RankedList,
    build_gallery,
    identify,
    rank_of_true_match,
)
from .manifest import DatasetManifest, ManifestRecord, MatedPair, parse_manifest
from .model import (
    FitReport,
    InitPolicy,
    SharedTransformModel,
    encode,
    fit,
    update_code_face,
    update_code_skull,
)
from .model_io import load_model, save_model
from .pipeline import gallery_from_manifest, run_protocol, train_on_manifest

__version__ = "0.1.0"

__all__ = [
    "AugmentationPolicy",
    "CmcCurve",
    "DatasetManifest",
    "EvalReport",
    "FeatureSpec",
    "FitReport",
    "FoldSplit",
    "Gallery",
    "HogParams",
    "HyperParams",
    "HyperSettings",
    "InitPolicy",
    "ManifestRecord",
    "MatedPair",
    "ProtocolConfig",
    "RankedList",
    "RunConfig",
    "SharedTransformModel",
    "SparsityPolicy",
    "SparsityScope",
    "SyntheticConfig",
    "augment",
    "build_gallery",
    "compute_cmc",
    "encode",
    "evaluate_feature_pairs",
    "extract_hog",
    "extract_raw",
    "fit",
    "gallery_from_manifest",
    "hard_threshold",
    "identify",
    "load_config",
    "load_model",
    "make_folds",
    "parse_manifest",
    "rank_of_true_match",
    "run_protocol",
    "raw_nearest_neighbor_rank1",
    "resize_to_canonical",
    "save_model",
    "shared_objective",
    "synth_generate",
    "tl_objective",
    "train_on_manifest",
    "transform_objective_gradient",
    "update_code_face",
    "update_code_skull",
    "update_transform",
]
