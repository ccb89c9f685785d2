"""Topology-aware losses, barcodes, and metrics for 2D likelihood maps."""

__version__ = "0.1.0"

from .btf import (
    BtfWeights,
    boundary_map,
    btf_forward,
    conv3x3,
    fused_attention,
    load_weights,
    primary_fusion,
    save_weights,
)
from .errors import (
    CategoryError,
    CorpusError,
    FormatError,
    LabelRangeError,
    ProbeTieError,
    ShapeError,
    ToposegError,
    TruncationError,
    ValueRangeError,
)
from .grid import (
    FeatureMap,
    LabelMask,
    LikelihoodMap,
    PixelCoord,
    avg_pool_3x3,
    connected_components,
    max_pool_3x3,
    min_pool_3x3,
)
from .io import (
    decode_map,
    decode_mask,
    decode_tensor,
    encode_map,
    encode_mask,
    encode_tensor,
    read_map,
    read_mask,
    read_tensor,
    write_map,
    write_mask,
    write_tensor,
)
from .losses import (
    SMOOTH,
    FdReport,
    GradMap,
    LossParams,
    LossReport,
    cl_loss,
    dice_loss,
    finite_difference_check,
    per_category_terms,
    per_loss,
    soft_skeleton,
    total_loss,
    warmup_scale,
)
from .matching import Matching, betti_match, comparison_map, induced_assignment
from .metrics import (
    CategoryMetrics,
    MetricReport,
    assd,
    corpus_csv,
    dsc,
    evaluate_corpus,
    evaluate_pair,
    iou,
)
from .persistence import Bar, Barcode, component_roots, gt_barcode, superlevel_barcode

__all__ = [
    "__version__",
    "Bar",
    "Barcode",
    "BtfWeights",
    "CategoryError",
    "CategoryMetrics",
    "CorpusError",
    "FdReport",
    "FeatureMap",
    "FormatError",
    "GradMap",
    "LabelMask",
    "LabelRangeError",
    "LikelihoodMap",
    "LossParams",
    "LossReport",
    "Matching",
    "MetricReport",
    "PixelCoord",
    "ProbeTieError",
    "SMOOTH",
    "ShapeError",
    "ToposegError",
    "TruncationError",
    "ValueRangeError",
    "assd",
    "avg_pool_3x3",
    "betti_match",
    "boundary_map",
    "btf_forward",
    "cl_loss",
    "comparison_map",
    "component_roots",
    "connected_components",
    "conv3x3",
    "corpus_csv",
    "decode_map",
    "decode_mask",
    "decode_tensor",
    "dice_loss",
    "dsc",
    "encode_map",
    "encode_mask",
    "encode_tensor",
    "evaluate_corpus",
    "evaluate_pair",
    "finite_difference_check",
    "fused_attention",
    "gt_barcode",
    "induced_assignment",
    "iou",
    "load_weights",
    "max_pool_3x3",
    "min_pool_3x3",
    "per_category_terms",
    "per_loss",
    "primary_fusion",
    "read_map",
    "read_mask",
    "read_tensor",
    "save_weights",
    "soft_skeleton",
    "superlevel_barcode",
    "total_loss",
    "warmup_scale",
    "write_map",
    "write_mask",
    "write_tensor",
]
