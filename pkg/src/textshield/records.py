"""Domain types and JSONL record schemas.

Three record kinds travel through the pipelines as one JSON object per line:
predictions (model answers), ground truth (gold labels), and OCR layouts
(engine output). ``validate_record`` is the strict entry point; it either
returns a fully-typed record or raises ``SchemaError`` listing every
violation. Lenient readers for prediction files (where malformed model
output is routine) live alongside it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

from .errors import SchemaError, SchemaViolation

SUBSETS = ("test", "cis", "ctm", "cl")

# The ten tampering techniques collapse onto the binary method label:
# content-reuse edits are "copy-paste", everything synthesized is "generation".
_COPY_PASTE_TECHNIQUES = frozenset({"copy-move", "splicing"})
_GENERATION_TECHNIQUES = frozenset(
    {
        "rendering",
        "sr-net",
        "diffute",
        "textdiffuser-2",
        "udifftext",
        "gpt-4o",
        "anytext-2",
        "control-net",
    }
)


class ImageVerdict(enum.Enum):
    """Three-way image-level label."""

    REAL = "real"
    GENERATED = "generated"
    TAMPERED = "tampered"


class ForgeryMethod(enum.Enum):
    """How a tampered region was produced."""

    COPY_PASTE = "copy-paste"
    GENERATION = "generation"


_VERDICTS = {v.value: v for v in ImageVerdict}
_METHODS = {m.value: m for m in ForgeryMethod}


def method_from_technique(technique: str) -> ForgeryMethod:
    """Map a named tampering technique onto the binary method label."""
    t = technique.strip().lower()
    if t in _COPY_PASTE_TECHNIQUES:
        return ForgeryMethod.COPY_PASTE
    if t in _GENERATION_TECHNIQUES:
        return ForgeryMethod.GENERATION
    raise ValueError(f"unknown tampering technique: {technique!r}")


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in pixel coordinates, top-left origin, x2/y2 exclusive."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        if not (self.x1 >= 0 and self.y1 >= 0):
            raise ValueError(f"negative coordinates: {self.as_list()}")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"degenerate box (needs x1<x2 and y1<y2): {self.as_list()}")

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    @property
    def center(self) -> tuple[float, float]:
        return (self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]

    @classmethod
    def from_seq(cls, seq) -> "BBox":
        if not isinstance(seq, (list, tuple)) or len(seq) != 4:
            raise ValueError(f"bbox must be a 4-element sequence, got {seq!r}")
        vals = []
        for v in seq:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"bbox coordinates must be numbers, got {v!r}")
            vals.append(float(v))
        return cls(*vals)


@dataclass(frozen=True)
class MaskGrid:
    """Binary pixel grid, row-major; 0 marks a real cell, 1 a tampered cell."""

    width: int
    height: int
    cells: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"mask must be non-empty, got {self.width}x{self.height}")
        if len(self.cells) != self.width * self.height:
            raise ValueError(
                f"cell count {len(self.cells)} != width*height {self.width * self.height}"
            )
        if self.cells.translate(None, b"\x00\x01"):
            raise ValueError("mask cells must all be 0 or 1")

    @classmethod
    def from_values(cls, width: int, height: int, values) -> "MaskGrid":
        return cls(width, height, bytes(int(bool(v)) for v in values))

    @classmethod
    def from_rows(cls, rows) -> "MaskGrid":
        rows = list(rows)
        if not rows:
            raise ValueError("mask must be non-empty")
        width = len(rows[0])
        flat = []
        for r in rows:
            if len(r) != width:
                raise ValueError("ragged mask rows")
            flat.extend(int(bool(v)) for v in r)
        return cls(width, len(rows), bytes(flat))

    def row(self, r: int) -> bytes:
        return self.cells[r * self.width : (r + 1) * self.width]

    def cell_string(self) -> str:
        """Row-major '0'/'1' rendering of the raw cells (any size)."""
        return self.cells.translate(bytes.maketrans(b"\x00\x01", b"01")).decode("ascii")


@dataclass(frozen=True)
class PredictionRecord:
    """One model answer per image.

    ``verdict`` is None only for records read leniently from malformed model
    output; strict validation never produces it. Presence rules: a tampered
    verdict carries method, text and bbox; real/generated verdicts carry none
    of them.
    """

    id: str
    verdict: ImageVerdict | None
    method: ForgeryMethod | None = None
    text: str | None = None
    bbox: BBox | None = None
    reasoning: str = ""
    raw_output: str | None = None
    extra: Mapping[str, Any] = field(default_factory=dict)

    def with_bbox(self, bbox: BBox) -> "PredictionRecord":
        return replace(self, bbox=bbox)


@dataclass(frozen=True)
class GroundTruthRecord:
    """Gold label for one image, tagged with its evaluation subset."""

    id: str
    subset: str
    verdict: ImageVerdict
    method: ForgeryMethod | None = None
    text: str | None = None
    bbox: BBox | None = None
    mask: MaskGrid | None = None
    reasoning_annotation: str = ""
    language: str | None = None
    domain: str | None = None
    extra: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class OcrInstance:
    """One detected text instance: its content and its box."""

    text: str
    bbox: BBox


@dataclass(frozen=True)
class OcrLayout:
    """OCR engine result for one image; instance order is document order."""

    id: str
    instances: tuple[OcrInstance, ...]
    extra: Mapping[str, Any] = field(default_factory=dict)


def base_id(record_id: str) -> str:
    """Image id without the multi-region suffix.

    Multi-region ground truth is expressed as several records sharing one
    image id with a ``#`` suffix per region (``img7#0``, ``img7#1``).
    """
    return record_id.split("#", 1)[0]


# ---------------------------------------------------------------------------
# Strict validation


_PREDICTION_FIELDS = ("id", "verdict", "method", "text", "bbox", "reasoning", "raw_output")
_GROUNDTRUTH_FIELDS = (
    "id",
    "subset",
    "verdict",
    "method",
    "text",
    "bbox",
    "mask",
    "reasoning_annotation",
    "language",
    "domain",
)
_OCR_FIELDS = ("id", "instances")


def _check_id(raw: Mapping, out: list[SchemaViolation]) -> str:
    rid = raw.get("id")
    if not isinstance(rid, str) or not rid:
        out.append(SchemaViolation("id", "required non-empty string"))
        return ""
    return rid


def _check_str(raw: Mapping, key: str, out: list[SchemaViolation], required: bool) -> str | None:
    val = raw.get(key)
    if val is None:
        if required:
            out.append(SchemaViolation(key, "required string is missing"))
        return None
    if not isinstance(val, str):
        out.append(SchemaViolation(key, f"must be a string, got {type(val).__name__}"))
        return None
    return val


def _check_verdict(raw: Mapping, out: list[SchemaViolation]) -> ImageVerdict | None:
    val = raw.get("verdict")
    if val is None:
        out.append(SchemaViolation("verdict", "required; one of real|generated|tampered"))
        return None
    verdict = _VERDICTS.get(val) if isinstance(val, str) else None
    if verdict is None:
        out.append(SchemaViolation("verdict", f"unknown verdict {val!r}"))
    return verdict


def _check_method(raw: Mapping, out: list[SchemaViolation]) -> ForgeryMethod | None:
    val = raw.get("method")
    if val is None:
        return None
    method = _METHODS.get(val) if isinstance(val, str) else None
    if method is None:
        out.append(SchemaViolation("method", f"unknown method {val!r}"))
    return method


def _check_bbox(raw_val, key: str, out: list[SchemaViolation]) -> BBox | None:
    if raw_val is None:
        return None
    try:
        return BBox.from_seq(raw_val)
    except ValueError as exc:
        out.append(SchemaViolation(key, str(exc)))
        return None


def _check_mask(raw_val, out: list[SchemaViolation]) -> MaskGrid | None:
    if raw_val is None:
        return None
    if not isinstance(raw_val, Mapping):
        out.append(SchemaViolation("mask", "must be an object {width, height, cells}"))
        return None
    width, height, cells = raw_val.get("width"), raw_val.get("height"), raw_val.get("cells")
    if (
        not isinstance(width, int)
        or not isinstance(height, int)
        or isinstance(width, bool)
        or isinstance(height, bool)
    ):
        out.append(SchemaViolation("mask", "width/height must be integers"))
        return None
    if not isinstance(cells, str):
        out.append(SchemaViolation("mask", "cells must be a '0'/'1' string"))
        return None
    if len(cells) != width * height or cells.strip("01"):
        out.append(
            SchemaViolation("mask", f"cells must be {width * height} characters of '0'/'1'")
        )
        return None
    try:
        return MaskGrid(width, height, cells.encode("ascii").translate(bytes.maketrans(b"01", b"\x00\x01")))
    except ValueError as exc:
        out.append(SchemaViolation("mask", str(exc)))
        return None


def _presence_rules(
    verdict: ImageVerdict | None,
    present: Mapping[str, bool],
    out: list[SchemaViolation],
) -> None:
    if verdict is ImageVerdict.TAMPERED:
        for key, ok in present.items():
            if key != "mask" and not ok:
                out.append(SchemaViolation(key, "required when verdict is tampered"))
    elif verdict is not None:
        for key, ok in present.items():
            if ok:
                out.append(SchemaViolation(key, f"forbidden when verdict is {verdict.value}"))


def _extras(raw: Mapping, known: tuple[str, ...]) -> dict[str, Any]:
    return {k: v for k, v in raw.items() if k not in known}


def validate_record(raw: Mapping, kind: str):
    """Validate one parsed JSON object against its schema.

    ``kind`` is one of ``"prediction"``, ``"groundtruth"``, ``"ocr"``.
    Returns the typed record, or raises ``SchemaError`` carrying every
    violation found; partial records are never returned.
    """
    if not isinstance(raw, Mapping):
        raise SchemaError([SchemaViolation("$", "record must be a JSON object")])
    if kind == "prediction":
        return _validate_prediction(raw)
    if kind == "groundtruth":
        return _validate_groundtruth(raw)
    if kind == "ocr":
        return _validate_ocr(raw)
    raise ValueError(f"unknown record kind: {kind!r}")


def _validate_prediction(raw: Mapping) -> PredictionRecord:
    out: list[SchemaViolation] = []
    rid = _check_id(raw, out)
    verdict = _check_verdict(raw, out)
    method = _check_method(raw, out)
    text = _check_str(raw, "text", out, required=False)
    bbox = _check_bbox(raw.get("bbox"), "bbox", out)
    reasoning = _check_str(raw, "reasoning", out, required=True)
    raw_output = _check_str(raw, "raw_output", out, required=False)
    _presence_rules(
        verdict,
        {
            "method": raw.get("method") is not None,
            "text": raw.get("text") is not None,
            "bbox": raw.get("bbox") is not None,
        },
        out,
    )
    if out:
        raise SchemaError(out, record_id=rid or None)
    return PredictionRecord(
        id=rid,
        verdict=verdict,
        method=method,
        text=text,
        bbox=bbox,
        reasoning=reasoning or "",
        raw_output=raw_output,
        extra=_extras(raw, _PREDICTION_FIELDS),
    )


def _validate_groundtruth(raw: Mapping) -> GroundTruthRecord:
    out: list[SchemaViolation] = []
    rid = _check_id(raw, out)
    subset = raw.get("subset")
    if subset not in SUBSETS:
        out.append(SchemaViolation("subset", f"must be one of {'|'.join(SUBSETS)}, got {subset!r}"))
    verdict = _check_verdict(raw, out)
    method = _check_method(raw, out)
    text = _check_str(raw, "text", out, required=False)
    bbox = _check_bbox(raw.get("bbox"), "bbox", out)
    mask = _check_mask(raw.get("mask"), out)
    annotation = _check_str(raw, "reasoning_annotation", out, required=True)
    language = _check_str(raw, "language", out, required=False)
    domain = _check_str(raw, "domain", out, required=False)
    _presence_rules(
        verdict,
        {
            "method": raw.get("method") is not None,
            "text": raw.get("text") is not None,
            "bbox": raw.get("bbox") is not None,
            "mask": raw.get("mask") is not None,
        },
        out,
    )
    if out:
        raise SchemaError(out, record_id=rid or None)
    return GroundTruthRecord(
        id=rid,
        subset=subset,
        verdict=verdict,
        method=method,
        text=text,
        bbox=bbox,
        mask=mask,
        reasoning_annotation=annotation or "",
        language=language,
        domain=domain,
        extra=_extras(raw, _GROUNDTRUTH_FIELDS),
    )


def _validate_ocr(raw: Mapping) -> OcrLayout:
    out: list[SchemaViolation] = []
    rid = _check_id(raw, out)
    instances_raw = raw.get("instances")
    instances: list[OcrInstance] = []
    if not isinstance(instances_raw, list):
        out.append(SchemaViolation("instances", "required list of {text, bbox}"))
    else:
        for i, inst in enumerate(instances_raw):
            if not isinstance(inst, Mapping):
                out.append(SchemaViolation(f"instances[{i}]", "must be an object"))
                continue
            text = inst.get("text")
            if not isinstance(text, str):
                out.append(SchemaViolation(f"instances[{i}].text", "required string"))
                text = ""
            bbox = _check_bbox(inst.get("bbox"), f"instances[{i}].bbox", out)
            if bbox is None and inst.get("bbox") is None:
                out.append(SchemaViolation(f"instances[{i}].bbox", "required"))
            if bbox is not None:
                instances.append(OcrInstance(text=text, bbox=bbox))
    if out:
        raise SchemaError(out, record_id=rid or None)
    return OcrLayout(id=rid, instances=tuple(instances), extra=_extras(raw, _OCR_FIELDS))


# ---------------------------------------------------------------------------
# Lenient prediction reading (model output is routinely malformed)


def prediction_from_obj_lenient(raw: Mapping) -> tuple[PredictionRecord | None, list[str]]:
    """Best-effort read of a prediction object.

    Fields inconsistent with the verdict (or malformed) are dropped with a
    diagnostic instead of failing the record, so downstream scoring always
    has something defined to work with. Returns ``(None, diags)`` only when
    there is no usable id.
    """
    diags: list[str] = []
    rid = raw.get("id")
    if not isinstance(rid, str) or not rid:
        return None, ["record skipped: missing id"]

    verdict = None
    v = raw.get("verdict")
    if v is not None:
        verdict = _VERDICTS.get(v) if isinstance(v, str) else None
        if verdict is None:
            diags.append(f"unknown verdict {v!r} treated as missing")

    method = None
    m = raw.get("method")
    if m is not None:
        method = _METHODS.get(m) if isinstance(m, str) else None
        if method is None:
            diags.append(f"unknown method {m!r} dropped")

    text = raw.get("text")
    if text is not None and not isinstance(text, str):
        diags.append("non-string text dropped")
        text = None

    bbox = None
    if raw.get("bbox") is not None:
        try:
            bbox = BBox.from_seq(raw.get("bbox"))
        except ValueError as exc:
            diags.append(f"bbox dropped: {exc}")

    if verdict is not ImageVerdict.TAMPERED:
        # Canonical view: fields tied to a tampered verdict are ignored elsewhere.
        for name, val in (("method", method), ("text", text), ("bbox", bbox)):
            if val is not None:
                diags.append(f"{name} ignored for verdict "
                             f"{verdict.value if verdict else 'missing'}")
        method = text = bbox = None

    reasoning = raw.get("reasoning")
    if not isinstance(reasoning, str):
        reasoning = ""
    raw_output = raw.get("raw_output")
    if raw_output is not None and not isinstance(raw_output, str):
        raw_output = None

    record = PredictionRecord(
        id=rid,
        verdict=verdict,
        method=method,
        text=text,
        bbox=bbox,
        reasoning=reasoning,
        raw_output=raw_output,
        extra=_extras(raw, _PREDICTION_FIELDS),
    )
    return record, diags


# ---------------------------------------------------------------------------
# Serialization back to JSON-ready objects


def prediction_to_obj(rec: PredictionRecord) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "id": rec.id,
        "verdict": rec.verdict.value if rec.verdict else None,
    }
    if rec.method is not None:
        obj["method"] = rec.method.value
    if rec.text is not None:
        obj["text"] = rec.text
    if rec.bbox is not None:
        obj["bbox"] = rec.bbox.as_list()
    obj["reasoning"] = rec.reasoning
    if rec.raw_output is not None:
        obj["raw_output"] = rec.raw_output
    obj.update(rec.extra)
    return obj


def groundtruth_to_obj(rec: GroundTruthRecord) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "id": rec.id,
        "subset": rec.subset,
        "verdict": rec.verdict.value,
    }
    if rec.method is not None:
        obj["method"] = rec.method.value
    if rec.text is not None:
        obj["text"] = rec.text
    if rec.bbox is not None:
        obj["bbox"] = rec.bbox.as_list()
    if rec.mask is not None:
        obj["mask"] = {
            "width": rec.mask.width,
            "height": rec.mask.height,
            "cells": rec.mask.cell_string(),
        }
    obj["reasoning_annotation"] = rec.reasoning_annotation
    if rec.language is not None:
        obj["language"] = rec.language
    if rec.domain is not None:
        obj["domain"] = rec.domain
    obj.update(rec.extra)
    return obj


def ocr_to_obj(layout: OcrLayout) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "id": layout.id,
        "instances": [{"text": i.text, "bbox": i.bbox.as_list()} for i in layout.instances],
    }
    obj.update(layout.extra)
    return obj
