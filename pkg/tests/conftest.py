"""Shared generators for randomized fixtures."""

from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from textshield.records import BBox, ForgeryMethod, ImageVerdict, PredictionRecord

TAG_SNIPPETS = (
    "",
    "<think>",
    "</think>",
    "<answer>",
    "</answer>",
    "&lt;answer&gt;",
    "a < b > c & d",
)

WORDS = (
    "edge", "blur", "uneven", "stroke", "glyph", "texture", "halo",
    "baseline", "kerning", "noise", "shadow", "contrast",
)


def random_text(rng: random.Random, lo: int = 1, hi: int = 20) -> str:
    n = rng.randint(lo, hi)
    return "".join(chr(rng.choice((rng.randint(32, 126), rng.randint(0x20, 0x2FFF)))) for _ in range(n))


def random_reasoning(rng: random.Random) -> str:
    parts = [rng.choice(WORDS) for _ in range(rng.randint(2, 8))]
    parts.insert(rng.randrange(len(parts)), rng.choice(TAG_SNIPPETS))
    return " ".join(p for p in parts if p)


def random_bbox(rng: random.Random, side: float = 1000.0) -> BBox:
    x1 = rng.uniform(0, side - 2)
    y1 = rng.uniform(0, side - 2)
    return BBox(x1, y1, x1 + rng.uniform(1, side - x1 - 1), y1 + rng.uniform(1, side - y1 - 1))


def boxes_with_iou(num: int, den: int) -> tuple[BBox, BBox]:
    """Unit-height box pair whose IoU is exactly num/den.

    Width w = num + den shifted by d = den - num gives intersection 2*num and
    union 2*den: integer arithmetic until a single exact division.
    """
    from textshield.geometry import iou

    w = num + den
    d = den - num
    a = BBox(0, 0, w, 1)
    b = BBox(d, 0, w + d, 1)
    assert iou(a, b) == num / den
    return a, b


def random_prediction(rng: random.Random, rid: str) -> PredictionRecord:
    verdict = rng.choice(list(ImageVerdict))
    if verdict is ImageVerdict.TAMPERED:
        return PredictionRecord(
            id=rid,
            verdict=verdict,
            method=rng.choice(list(ForgeryMethod)),
            text=random_text(rng),
            bbox=random_bbox(rng),
            reasoning=random_reasoning(rng),
        )
    return PredictionRecord(id=rid, verdict=verdict, reasoning=random_reasoning(rng))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0x7E57)
