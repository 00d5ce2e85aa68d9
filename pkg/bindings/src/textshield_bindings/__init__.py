"""In-process callables over plain dicts, lists, and scalars.

Everything in and out of this package uses the JSONL field vocabulary
(``verdict``, ``method``, ``text``, ``bbox``, ...), so an RL training loop
can feed reward functions directly without shelling out to the CLI or
touching library types. All functions are pure and safe to call from any
number of threads; results are bit-identical to the CLI pipelines on the
same inputs.

Only this surface is exported: ``bound_reward_all`` / ``bound_batch`` /
``group_advantages`` for rewards, ``rectify`` for box rectification,
``parse_completion`` for completion parsing, and the text-metric primitives.
"""

from __future__ import annotations

from typing import Any, Mapping, Sequence

import textshield
from textshield.errors import (
    DataConsistencyError,
    GroupTooSmall,
    IdMismatch,
    NotTampered,
    SchemaError,
    SchemaViolation,
)
from textshield.parsing import parse_completion as _parse_completion
from textshield.records import (
    prediction_from_obj_lenient,
    validate_record,
)
from textshield.rectify import RectifyConfig
from textshield.rectify import rectify as _rectify
from textshield.rewards import RewardWeights
from textshield.rewards import group_advantages as _group_advantages
from textshield.rewards import reward_all as _reward_all
from textshield.textmetrics import (
    levenshtein,
    normed_levenshtein,
    tokenize,
)
from textshield.textmetrics import bleu as _bleu
from textshield.textmetrics import cosine_sim as _cosine_sim
from textshield.textmetrics import rouge_l as _rouge_l

__version__ = textshield.__version__

__all__ = [
    "__version__",
    "DataConsistencyError",
    "GroupTooSmall",
    "IdMismatch",
    "NotTampered",
    "SchemaError",
    "bleu",
    "bound_batch",
    "bound_reward_all",
    "cosine_sim",
    "group_advantages",
    "levenshtein",
    "normed_levenshtein",
    "parse_completion",
    "rectify",
    "rouge_l",
    "tokenize",
]


def _pred_from_map(pred: Mapping[str, Any]):
    if not isinstance(pred, Mapping):
        raise SchemaError([SchemaViolation("$", "prediction must be a mapping")])
    record, _diags = prediction_from_obj_lenient(pred)
    if record is None:
        raise SchemaError([SchemaViolation("id", "required non-empty string")])
    return record


def bound_reward_all(
    pred: Mapping[str, Any],
    gt: Mapping[str, Any],
    weights: Mapping[str, float] | None = None,
) -> dict[str, Any]:
    """Score one prediction map against one ground-truth map.

    Predictions are read with the same lenient rules as the CLI (malformed
    fields score 0 instead of erroring); the ground truth must satisfy its
    schema. Returns the reward vector as a plain dict.
    """
    gt_record = validate_record(gt, "groundtruth")
    pred_record = _pred_from_map(pred)
    w = RewardWeights(**dict(weights)) if weights else RewardWeights()
    return _reward_all(pred_record, gt_record, w).to_obj()


def group_advantages(rewards: Sequence[float]) -> list[float]:
    """Group-relative advantages: centered, scaled by population std."""
    return _group_advantages(list(rewards))


def bound_batch(
    records: Sequence[Mapping[str, Any]],
    group_size: int,
    weights: Mapping[str, float] | None = None,
) -> dict[str, Any]:
    """Score a batch of ``{"pred": ..., "gt": ...}`` pairs with advantages.

    ``len(records)`` must be divisible by ``group_size`` (>= 2); rewards are
    order-preserving and advantages are computed per consecutive group of
    composites. An empty batch yields empty outputs.
    """
    records = list(records)
    if records and group_size < 2:
        raise GroupTooSmall(f"group_size must be >= 2, got {group_size}")
    if group_size > 0 and len(records) % group_size:
        raise DataConsistencyError(
            f"{len(records)} records are not divisible into groups of {group_size}"
        )
    rewards = [bound_reward_all(r["pred"], r["gt"], weights) for r in records]
    advantages: list[float] = []
    for start in range(0, len(rewards), group_size):
        advantages.extend(
            _group_advantages([r["composite"] for r in rewards[start : start + group_size]])
        )
    return {"rewards": rewards, "advantages": advantages}


def rectify(
    pred: Mapping[str, Any],
    layout: Mapping[str, Any],
    threshold: float = 0.2,
) -> dict[str, Any]:
    """Refine a tampered prediction's box against an OCR layout map."""
    pred_record = _pred_from_map(pred)
    layout_record = validate_record(layout, "ocr")
    outcome = _rectify(pred_record, layout_record, RectifyConfig(match_threshold=threshold))
    return {
        "final_bbox": outcome.final_bbox.as_list(),
        "source": outcome.source.value,
        "matched_index": outcome.matched_index,
        "match_distance": outcome.match_distance,
    }


def parse_completion(raw: str) -> dict[str, Any]:
    """Parse one raw completion into a plain dict; never raises."""
    parsed = _parse_completion(raw)
    answer = parsed.answer
    return {
        "think": parsed.think,
        "answer_raw": parsed.answer_raw,
        "answer": {
            "verdict": answer.verdict.value if answer.verdict else None,
            "method": answer.method.value if answer.method else None,
            "text": answer.text,
            "bbox": answer.bbox.as_list() if answer.bbox else None,
        },
        "tags_ok": parsed.tags_ok,
        "payload_ok": parsed.payload_ok,
        "format_ok": parsed.format_ok,
        "diagnostics": list(parsed.diagnostics),
    }


def bleu(hyp: str, ref: str) -> float:
    """BLEU on canonically tokenized strings."""
    return _bleu(tokenize(hyp), tokenize(ref))


def rouge_l(hyp: str, ref: str) -> float:
    """Rouge-L F1 on canonically tokenized strings."""
    return _rouge_l(tokenize(hyp), tokenize(ref))


def cosine_sim(hyp: str, ref: str) -> float:
    """Token-frequency cosine on canonically tokenized strings."""
    return _cosine_sim(tokenize(hyp), tokenize(ref))
