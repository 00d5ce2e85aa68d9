"""The five per-completion rewards and group-relative advantage normalization.

Classification, forgery method, and format rewards are binary; localization
pays the IoU when it exceeds 0.5 and zero otherwise; OCR pays one minus the
normed Levenshtein distance. Method/localization/OCR apply only when the
ground truth is tampered and are reported as None (excluded from the
composite) elsewhere. Missing applicable prediction fields score 0 rather
than erroring: malformed completions are routine while sampling and must
still receive a defined reward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

from .errors import GroupTooSmall, IdMismatch
from .geometry import iou
from .parsing import ParsedOutput, parse_completion
from .records import BBox, ForgeryMethod, GroundTruthRecord, ImageVerdict, PredictionRecord
from .textmetrics import normed_levenshtein

LOC_IOU_THRESHOLD = 0.5
ADVANTAGE_STD_FLOOR = 1e-8


@dataclass(frozen=True)
class RewardWeights:
    """Non-negative weights for the composite; default is the unweighted sum."""

    cls: float = 1.0
    method: float = 1.0
    loc: float = 1.0
    ocr: float = 1.0
    format: float = 1.0

    def __post_init__(self):
        for name in ("cls", "method", "loc", "ocr", "format"):
            if getattr(self, name) < 0:
                raise ValueError(f"weight {name} must be non-negative")

    @classmethod
    def parse(cls, spec: str) -> "RewardWeights":
        """Parse 'cls=1,method=1,loc=1,ocr=1,format=1' (unmentioned weights keep 1.0)."""
        values: dict[str, float] = {}
        for part in spec.split(","):
            part = part.strip()
            if not part:
                continue
            name, _, val = part.partition("=")
            name = name.strip()
            if name not in ("cls", "method", "loc", "ocr", "format"):
                raise ValueError(f"unknown reward weight {name!r}")
            values[name] = float(val)
        return cls(**values)


DEFAULT_WEIGHTS = RewardWeights()


@dataclass(frozen=True)
class RewardVector:
    """Per-sample scores for the five rewards; None marks an inapplicable component."""

    id: str
    r_cls: int
    r_method: int | None
    r_loc: float | None
    r_ocr: float | None
    r_format: int
    composite: float

    def to_obj(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "r_cls": self.r_cls,
            "r_method": self.r_method,
            "r_loc": self.r_loc,
            "r_ocr": self.r_ocr,
            "r_format": self.r_format,
            "composite": self.composite,
        }


def reward_cls(pred: ImageVerdict | None, gt: ImageVerdict) -> int:
    """1 for the correct three-way classification, 0 otherwise."""
    return 1 if pred is gt else 0


def reward_method(
    pred: ForgeryMethod | None,
    gt: ForgeryMethod | None,
    gt_verdict: ImageVerdict,
) -> int | None:
    """1 for the correct copy-paste/generation call on tampered images; else None."""
    if gt_verdict is not ImageVerdict.TAMPERED:
        return None
    return 1 if pred is not None and pred is gt else 0


def reward_loc(pred: BBox | None, gt: BBox | None, gt_verdict: ImageVerdict) -> float | None:
    """The IoU when it exceeds 0.5 (strictly), 0 otherwise; None off tampered images."""
    if gt_verdict is not ImageVerdict.TAMPERED:
        return None
    if pred is None or gt is None:
        return 0.0
    value = iou(pred, gt)
    return value if value > LOC_IOU_THRESHOLD else 0.0


def reward_ocr(pred_text: str | None, gt_text: str | None, gt_verdict: ImageVerdict) -> float | None:
    """One minus the normed Levenshtein distance; None off tampered images."""
    if gt_verdict is not ImageVerdict.TAMPERED:
        return None
    if pred_text is None or gt_text is None:
        return 0.0
    return 1.0 - normed_levenshtein(pred_text, gt_text)


def reward_format(parsed: ParsedOutput) -> int:
    """1 iff both the tag grammar and the answer JSON are well-formed."""
    return 1 if parsed.format_ok else 0


def reward_all(
    pred: PredictionRecord,
    gt: GroundTruthRecord,
    weights: RewardWeights = DEFAULT_WEIGHTS,
    parsed: ParsedOutput | None = None,
) -> RewardVector:
    """Score one prediction against its ground truth.

    Format compliance comes from ``parsed`` when supplied, else from
    reparsing ``pred.raw_output``; a record with neither is treated as
    canonically rendered and scores 1.
    """
    if pred.id != gt.id:
        raise IdMismatch(f"prediction {pred.id!r} vs ground truth {gt.id!r}")
    if parsed is None and pred.raw_output is not None:
        parsed = parse_completion(pred.raw_output)

    r_cls = reward_cls(pred.verdict, gt.verdict)
    r_method = reward_method(pred.method, gt.method, gt.verdict)
    r_loc = reward_loc(pred.bbox, gt.bbox, gt.verdict)
    r_ocr = reward_ocr(pred.text, gt.text, gt.verdict)
    r_fmt = reward_format(parsed) if parsed is not None else 1

    composite = weights.cls * r_cls + weights.format * r_fmt
    if r_method is not None:
        composite += weights.method * r_method
    if r_loc is not None:
        composite += weights.loc * r_loc
    if r_ocr is not None:
        composite += weights.ocr * r_ocr

    return RewardVector(
        id=pred.id,
        r_cls=r_cls,
        r_method=r_method,
        r_loc=r_loc,
        r_ocr=r_ocr,
        r_format=r_fmt,
        composite=composite,
    )


def group_advantages(rewards: Sequence[float]) -> list[float]:
    """Center and scale a group of composite rewards by its population std.

    Degenerate groups (std below 1e-8) get all-zero advantages instead of a
    division blow-up.
    """
    n = len(rewards)
    if n < 2:
        raise GroupTooSmall(f"need at least 2 completions per group, got {n}")
    mean = sum(rewards) / n
    variance = sum((r - mean) ** 2 for r in rewards) / n
    std = math.sqrt(variance)
    if std < ADVANTAGE_STD_FLOOR:
        return [0.0] * n
    return [(r - mean) / std for r in rewards]
