"""Deterministic synthetic corpus generation.

Builds matched (ground truth, OCR layout, prediction) JSONL triples for
pipeline testing: OCR layout boxes equal the ground-truth boxes, predicted
texts carry character noise at a configured rate, and predicted boxes are
jittered to an exact per-image target IoU. The RNG draw order is part of the
format: identical seeds and parameters always produce byte-identical files.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any

from .parsing import render_completion
from .records import (
    BBox,
    ImageVerdict,
    PredictionRecord,
    SUBSETS,
    method_from_technique,
    prediction_to_obj,
)

IMAGE_SIDE = 1000.0

_TECHNIQUES = (
    "copy-move", "splicing", "rendering", "sr-net", "diffute",
    "textdiffuser-2", "udifftext", "gpt-4o", "anytext-2", "control-net",
)
_LANGUAGES = (
    "en", "zh", "de", "fr", "es", "ja", "ko", "ar",
    "ru", "pt", "it", "nl", "hi", "th", "vi", "tr",
)
_DOMAINS = ("document", "scene-text", "card")
_WORDS = (
    "invoice", "total", "amount", "date", "paid", "receipt", "contract",
    "balance", "account", "signature", "license", "expires", "issued",
    "name", "number", "street", "station", "menu", "price", "ticket",
)
_ARTIFACTS = (
    "blurry stroke edges", "inconsistent font weight", "misaligned baseline",
    "color bleeding around glyphs", "uniform background noise", "sharp halo",
    "mismatched kerning", "resampling artifacts", "clean antialiasing",
)
_CHARSET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"


@dataclass(frozen=True)
class FixtureConfig:
    seed: int = 7
    n: int = 1000
    noise_rate: float = 0.1
    target_iou: float = 0.35
    iou_spread: float = 0.03
    tampered_frac: float = 0.5
    generated_frac: float = 0.25


def _random_text(rng: random.Random, lo: int = 6, hi: int = 24) -> str:
    return "".join(rng.choice(_CHARSET) for _ in range(rng.randint(lo, hi)))


def _corrupt(rng: random.Random, text: str, rate: float) -> str:
    count = int(round(rate * len(text)))
    if count == 0:
        return text
    chars = list(text)
    for pos in rng.sample(range(len(chars)), count):
        chars[pos] = rng.choice([c for c in _CHARSET if c != chars[pos]])
    return "".join(chars)


def _reasoning(rng: random.Random, verdict: ImageVerdict) -> str:
    word = rng.choice(_WORDS)
    artifact = rng.choice(_ARTIFACTS)
    if verdict is ImageVerdict.REAL:
        return f"the text around {word} shows {artifact} consistent with the whole image"
    if verdict is ImageVerdict.GENERATED:
        return f"every region including {word} exhibits {artifact} typical of synthesis"
    return f"the region near {word} shows {artifact} unlike the surrounding text"


def _place_box(rng: random.Random) -> BBox:
    w = rng.uniform(40.0, 200.0)
    h = rng.uniform(20.0, 80.0)
    # Margins of one box dimension on each side keep any jittered copy inside
    # the image.
    x1 = rng.uniform(w, IMAGE_SIDE - 2.0 * w)
    y1 = rng.uniform(h, IMAGE_SIDE - 2.0 * h)
    return BBox(x1, y1, x1 + w, y1 + h)


def _jitter_box(rng: random.Random, box: BBox, cfg: FixtureConfig) -> BBox:
    """Shifted copy of the box with IoU against the original exactly equal to t."""
    if cfg.target_iou >= 1.0:
        return box
    t = rng.gauss(cfg.target_iou, cfg.iou_spread)
    t = min(max(t, 0.05), 0.95)
    # Same-size boxes overlapping on fraction f of their area have
    # IoU = f / (2 - f), so f = 2t / (1 + t); the shift splits between axes.
    f = 2.0 * t / (1.0 + t)
    a = rng.random()
    fx, fy = f ** a, f ** (1.0 - a)
    w, h = box.x2 - box.x1, box.y2 - box.y1
    dx = (1.0 - fx) * w * (1 if rng.random() < 0.5 else -1)
    dy = (1.0 - fy) * h * (1 if rng.random() < 0.5 else -1)
    return BBox(box.x1 + dx, box.y1 + dy, box.x2 + dx, box.y2 + dy)


def generate(cfg: FixtureConfig) -> tuple[list[dict], list[dict], list[dict]]:
    """Build (ground truth, OCR layout, prediction) JSON-ready object lists."""
    if cfg.n < 1:
        raise ValueError("need n >= 1")
    rng = random.Random(cfg.seed)

    n_tampered = int(cfg.n * cfg.tampered_frac)
    n_generated = int(cfg.n * cfg.generated_frac)
    verdicts = (
        [ImageVerdict.TAMPERED] * n_tampered
        + [ImageVerdict.GENERATED] * n_generated
        + [ImageVerdict.REAL] * (cfg.n - n_tampered - n_generated)
    )
    rng.shuffle(verdicts)

    gt_objs: list[dict[str, Any]] = []
    ocr_objs: list[dict[str, Any]] = []
    pred_objs: list[dict[str, Any]] = []

    for i, verdict in enumerate(verdicts):
        rid = f"img{i:05d}"
        subset = SUBSETS[i % len(SUBSETS)]
        language = rng.choice(_LANGUAGES)
        domain = rng.choice(_DOMAINS)
        annotation = _reasoning(rng, verdict)

        gt: dict[str, Any] = {"id": rid, "subset": subset, "verdict": verdict.value}
        instances: list[dict[str, Any]] = []
        pred_method = None
        pred_text = None
        pred_bbox = None

        if verdict is ImageVerdict.TAMPERED:
            technique = rng.choice(_TECHNIQUES)
            method = method_from_technique(technique)
            text = _random_text(rng)
            box = _place_box(rng)
            gt["method"] = method.value
            gt["text"] = text
            gt["bbox"] = box.as_list()
            gt["technique"] = technique
            instances.append({"text": text, "bbox": box.as_list()})
            pred_method = method
            pred_text = _corrupt(rng, text, cfg.noise_rate)
            pred_bbox = _jitter_box(rng, box, cfg)

        gt["reasoning_annotation"] = annotation
        gt["language"] = language
        gt["domain"] = domain

        for _ in range(rng.randint(2, 4)):
            instances.append({"text": _random_text(rng), "bbox": _place_box(rng).as_list()})
        rng.shuffle(instances)
        ocr_objs.append({"id": rid, "instances": instances})

        pred = PredictionRecord(
            id=rid,
            verdict=verdict,
            method=pred_method,
            text=pred_text,
            bbox=pred_bbox,
            reasoning=annotation,
        )
        pred_obj = prediction_to_obj(pred)
        pred_obj["raw_output"] = render_completion(pred)
        pred_objs.append(pred_obj)
        gt_objs.append(gt)

    return gt_objs, ocr_objs, pred_objs
