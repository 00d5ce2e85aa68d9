"""Inference-time OCR box rectification.

A tampered-text prediction's box is replaced by the box of the OCR instance
whose text best matches the predicted text: candidates are instances within
a normed Levenshtein distance of 0.2 (inclusive); among the candidates at
the minimum distance, a unique one wins directly, multiple ones are ranked
by Distance-IoU against the predicted box with ties broken by the lowest
instance index. No candidate means the original box is kept. Only the box
is ever touched.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .errors import IdMismatch, NotTampered
from .geometry import diou
from .records import BBox, ImageVerdict, OcrLayout, PredictionRecord, base_id
from .textmetrics import normed_levenshtein

log = logging.getLogger(__name__)

DEFAULT_MATCH_THRESHOLD = 0.2


class RectifySource(enum.Enum):
    """Where the final box came from."""

    OCR_UNIQUE = "ocr_unique"
    OCR_DIOU = "ocr_diou"
    KEPT_ORIGINAL = "kept_original"


@dataclass(frozen=True)
class RectifyConfig:
    match_threshold: float = DEFAULT_MATCH_THRESHOLD

    def __post_init__(self):
        if not 0.0 <= self.match_threshold <= 1.0:
            raise ValueError(f"match_threshold must be in [0,1], got {self.match_threshold}")


@dataclass(frozen=True)
class RectifyOutcome:
    final_bbox: BBox
    source: RectifySource
    matched_index: int | None = None
    match_distance: float | None = None


def rectify(
    pred: PredictionRecord,
    layout: OcrLayout,
    cfg: RectifyConfig = RectifyConfig(),
) -> RectifyOutcome:
    """Refine one tampered prediction's box against the image's OCR layout.

    Layouts are per image, so a multi-region prediction (``img7#0``) matches
    the layout of its base image (``img7``).
    """
    if pred.verdict is not ImageVerdict.TAMPERED or pred.text is None or pred.bbox is None:
        raise NotTampered(f"record {pred.id!r} has no tampered text prediction to rectify")
    if pred.id != layout.id and base_id(pred.id) != layout.id:
        raise IdMismatch(f"prediction {pred.id!r} vs layout {layout.id!r}")

    distances = [normed_levenshtein(inst.text, pred.text) for inst in layout.instances]
    candidates = [i for i, d in enumerate(distances) if d <= cfg.match_threshold]
    if not candidates:
        return RectifyOutcome(final_bbox=pred.bbox, source=RectifySource.KEPT_ORIGINAL)

    best_distance = min(distances[i] for i in candidates)
    matched = [i for i in candidates if distances[i] == best_distance]
    if len(matched) == 1:
        idx = matched[0]
        return RectifyOutcome(
            final_bbox=layout.instances[idx].bbox,
            source=RectifySource.OCR_UNIQUE,
            matched_index=idx,
            match_distance=best_distance,
        )

    # Ascending index scan with a strict improvement test gives the
    # lowest-index winner on DIoU ties.
    best_idx = matched[0]
    best_diou = diou(layout.instances[best_idx].bbox, pred.bbox)
    for idx in matched[1:]:
        d = diou(layout.instances[idx].bbox, pred.bbox)
        if d > best_diou:
            best_idx, best_diou = idx, d
    return RectifyOutcome(
        final_bbox=layout.instances[best_idx].bbox,
        source=RectifySource.OCR_DIOU,
        matched_index=best_idx,
        match_distance=best_distance,
    )


def _rectify_one(
    pred: PredictionRecord,
    layouts: Mapping[str, OcrLayout],
    cfg: RectifyConfig,
) -> tuple[PredictionRecord, RectifyOutcome | None]:
    applicable = (
        pred.verdict is ImageVerdict.TAMPERED
        and pred.text is not None
        and pred.bbox is not None
    )
    if not applicable:
        if pred.verdict is ImageVerdict.TAMPERED:
            log.warning("record %s: tampered but missing text/bbox; passed through", pred.id)
        return pred, None
    layout = layouts.get(pred.id)
    if layout is None:
        layout = layouts.get(base_id(pred.id))
    if layout is None:
        log.warning("record %s: no OCR layout; original box kept", pred.id)
        return pred, RectifyOutcome(final_bbox=pred.bbox, source=RectifySource.KEPT_ORIGINAL)
    outcome = rectify(pred, layout, cfg)
    return replace(pred, bbox=outcome.final_bbox), outcome


def rectify_batch(
    preds: Iterable[PredictionRecord],
    layouts: Mapping[str, OcrLayout],
    cfg: RectifyConfig = RectifyConfig(),
    jobs: int = 1,
) -> list[tuple[PredictionRecord, RectifyOutcome | None]]:
    """Rectify every applicable record; everything else passes through.

    Order-preserving for any ``jobs`` value. Non-tampered records (and
    tampered ones missing text or bbox) pass through with outcome None;
    tampered records without a layout for their id keep their original box
    with a logged warning.
    """
    preds = list(preds)
    if jobs > 1 and len(preds) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda p: _rectify_one(p, layouts, cfg), preds))
    return [_rectify_one(p, layouts, cfg) for p in preds]
