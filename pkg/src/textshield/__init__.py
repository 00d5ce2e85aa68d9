"""Tampered-text detection toolkit.

Deterministic, model-independent machinery for a text-forensics pipeline:
structured completion parsing, the five per-sample rewards with
group-relative advantages, OCR box rectification, annotation encodings, and
a four-metric evaluation harness. Everything here is pure and thread-safe;
file I/O lives in the CLI.
"""

__version__ = "0.1.0"

from .annotations import (
    decode_mask_string,
    encode_mask_string,
    forensic_target,
    load_mask,
    make_grounding_pair,
    min_bbox,
)
from .errors import (
    BadMaskString,
    DataConsistencyError,
    EmptyInput,
    EmptyMask,
    GroupTooSmall,
    IdMismatch,
    IndexOutOfRange,
    NotRealImage,
    NotTampered,
    SchemaError,
    UnknownFormat,
)
from .evaluate import MetricReport, aggregate, emit_report, score_image
from .geometry import diou, iou
from .parsing import ParsedOutput, parse_completion, render_completion
from .records import (
    BBox,
    ForgeryMethod,
    GroundTruthRecord,
    ImageVerdict,
    MaskGrid,
    OcrInstance,
    OcrLayout,
    PredictionRecord,
    validate_record,
)
from .rectify import RectifyConfig, RectifyOutcome, RectifySource, rectify, rectify_batch
from .rewards import (
    RewardVector,
    RewardWeights,
    group_advantages,
    reward_all,
    reward_cls,
    reward_format,
    reward_loc,
    reward_method,
    reward_ocr,
)
from .textmetrics import bleu, cosine_sim, levenshtein, normed_levenshtein, rouge_l, tokenize

__all__ = [
    "__version__",
    "BBox",
    "BadMaskString",
    "DataConsistencyError",
    "EmptyInput",
    "EmptyMask",
    "ForgeryMethod",
    "GroundTruthRecord",
    "GroupTooSmall",
    "IdMismatch",
    "ImageVerdict",
    "IndexOutOfRange",
    "MaskGrid",
    "MetricReport",
    "NotRealImage",
    "NotTampered",
    "OcrInstance",
    "OcrLayout",
    "ParsedOutput",
    "PredictionRecord",
    "RectifyConfig",
    "RectifyOutcome",
    "RectifySource",
    "RewardVector",
    "RewardWeights",
    "SchemaError",
    "UnknownFormat",
    "aggregate",
    "bleu",
    "cosine_sim",
    "decode_mask_string",
    "diou",
    "emit_report",
    "encode_mask_string",
    "forensic_target",
    "group_advantages",
    "iou",
    "levenshtein",
    "load_mask",
    "make_grounding_pair",
    "min_bbox",
    "normed_levenshtein",
    "parse_completion",
    "rectify",
    "rectify_batch",
    "render_completion",
    "reward_all",
    "reward_cls",
    "reward_format",
    "reward_loc",
    "reward_method",
    "reward_ocr",
    "rouge_l",
    "score_image",
    "tokenize",
    "validate_record",
]
