"""Structured parsing of raw model completions.

The canonical completion is optional whitespace, exactly one
``<think>...</think>`` block, exactly one ``<answer>...</answer>`` block,
then optional whitespace. The answer body is a JSON object with keys
verdict/method/text/bbox (nulls for non-tampered verdicts).

``parse_completion`` is total: any string yields a ``ParsedOutput`` with
best-effort fields and diagnostics instead of an exception. Two compliance
signals are reported separately - ``tags_ok`` for the tag grammar and
``payload_ok`` for the answer JSON - and ``format_ok`` requires both.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping

from .records import BBox, ForgeryMethod, ImageVerdict, PredictionRecord

THINK_OPEN = "<think>"
THINK_CLOSE = "</think>"
ANSWER_OPEN = "<answer>"
ANSWER_CLOSE = "</answer>"

_VERDICTS = {v.value: v for v in ImageVerdict}
_METHODS = {m.value: m for m in ForgeryMethod}


def escape_reasoning(text: str) -> str:
    """Make reasoning safe to embed between tags ('&' first, so unescape is exact)."""
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def unescape_reasoning(text: str) -> str:
    return text.replace("&lt;", "<").replace("&gt;", ">").replace("&amp;", "&")


@dataclass(frozen=True)
class AnswerPayload:
    """The answer fields of one completion; any may be missing."""

    verdict: ImageVerdict | None = None
    method: ForgeryMethod | None = None
    text: str | None = None
    bbox: BBox | None = None

    def canonical(self) -> "AnswerPayload":
        """Drop fields inconsistent with the verdict (the view every consumer uses)."""
        if self.verdict is ImageVerdict.TAMPERED:
            return self
        return AnswerPayload(verdict=self.verdict)


@dataclass(frozen=True)
class ParsedOutput:
    think: str
    answer_raw: str
    answer: AnswerPayload
    tags_ok: bool
    payload_ok: bool
    diagnostics: tuple[str, ...]

    @property
    def format_ok(self) -> bool:
        return self.tags_ok and self.payload_ok


def _check_tags(raw: str, diags: list[str]) -> bool:
    counts = {t: raw.count(t) for t in (THINK_OPEN, THINK_CLOSE, ANSWER_OPEN, ANSWER_CLOSE)}
    ok = True
    for tag, n in counts.items():
        if n == 0:
            diags.append(f"missing {tag}")
            ok = False
        elif n > 1:
            diags.append(f"repeated {tag} ({n} occurrences)")
            ok = False
    if not ok:
        return False
    i_to = raw.index(THINK_OPEN)
    i_tc = raw.index(THINK_CLOSE)
    i_ao = raw.index(ANSWER_OPEN)
    i_ac = raw.index(ANSWER_CLOSE)
    if not (i_to < i_tc < i_ao < i_ac):
        diags.append("tags out of order (think block must precede answer block)")
        return False
    head = raw[:i_to]
    mid = raw[i_tc + len(THINK_CLOSE) : i_ao]
    tail = raw[i_ac + len(ANSWER_CLOSE) :]
    for name, seg in (("before <think>", head), ("between blocks", mid), ("after </answer>", tail)):
        if seg.strip():
            diags.append(f"unexpected text {name}")
            ok = False
    return ok


def _first_block(raw: str, open_tag: str, close_tag: str, diags: list[str]) -> str:
    start = raw.find(open_tag)
    if start < 0:
        return ""
    start += len(open_tag)
    end = raw.find(close_tag, start)
    if end < 0:
        diags.append(f"unterminated {open_tag} block")
        return raw[start:]
    return raw[start:end]


def _extract_payload(answer_raw: str, diags: list[str]) -> tuple[AnswerPayload, bool]:
    body = answer_raw.strip()
    if not body:
        diags.append("empty answer body")
        return AnswerPayload(), False
    try:
        obj = json.loads(body)
    except json.JSONDecodeError as exc:
        diags.append(f"answer body is not valid JSON: {exc.msg}")
        return AnswerPayload(), False
    if not isinstance(obj, Mapping):
        diags.append("answer body must be a JSON object")
        return AnswerPayload(), False

    ok = True
    verdict = None
    v = obj.get("verdict")
    if v is None:
        diags.append("answer missing verdict")
        ok = False
    elif isinstance(v, str) and v in _VERDICTS:
        verdict = _VERDICTS[v]
    else:
        diags.append(f"unknown verdict {v!r}")
        ok = False

    method = None
    m = obj.get("method")
    if m is not None:
        if isinstance(m, str) and m in _METHODS:
            method = _METHODS[m]
        else:
            diags.append(f"unknown method {m!r}")
            ok = False

    text = obj.get("text")
    if text is not None and not isinstance(text, str):
        diags.append("answer text must be a string")
        text = None
        ok = False

    bbox = None
    if obj.get("bbox") is not None:
        try:
            bbox = BBox.from_seq(obj["bbox"])
        except ValueError as exc:
            diags.append(f"bad answer bbox: {exc}")
            ok = False

    if verdict is ImageVerdict.TAMPERED:
        for name, val in (("method", method), ("text", text), ("bbox", bbox)):
            if val is None:
                diags.append(f"answer missing {name} for tampered verdict")
                ok = False
    elif verdict is not None:
        for name in ("method", "text", "bbox"):
            if obj.get(name) is not None:
                diags.append(f"answer {name} must be null for verdict {verdict.value}")
                ok = False

    return AnswerPayload(verdict=verdict, method=method, text=text, bbox=bbox), ok


def parse_completion(raw: str) -> ParsedOutput:
    """Parse one raw completion; never raises."""
    diags: list[str] = []
    tags_ok = _check_tags(raw, diags)
    think = unescape_reasoning(_first_block(raw, THINK_OPEN, THINK_CLOSE, diags))
    answer_raw = _first_block(raw, ANSWER_OPEN, ANSWER_CLOSE, diags)
    answer, payload_ok = _extract_payload(answer_raw, diags)
    return ParsedOutput(
        think=think,
        answer_raw=answer_raw,
        answer=answer,
        tags_ok=tags_ok,
        payload_ok=payload_ok,
        diagnostics=tuple(diags),
    )


def render_answer_body(
    verdict: ImageVerdict | None,
    method: ForgeryMethod | None,
    text: str | None,
    bbox: BBox | None,
) -> str:
    payload: dict[str, Any] = {
        "verdict": verdict.value if verdict else None,
        "method": method.value if method else None,
        "text": text,
        "bbox": bbox.as_list() if bbox else None,
    }
    body = json.dumps(payload, ensure_ascii=False)
    # '<' only occurs inside JSON strings; the \u escape keeps the body valid
    # JSON while guaranteeing no literal tag can appear inside the answer block.
    return body.replace("<", "\\u003c")


def render_completion(p: PredictionRecord) -> str:
    """Canonical completion string for a record; parse_completion inverts it."""
    return (
        f"{THINK_OPEN}{escape_reasoning(p.reasoning)}{THINK_CLOSE}"
        f"{ANSWER_OPEN}{render_answer_body(p.verdict, p.method, p.text, p.bbox)}{ANSWER_CLOSE}"
    )
