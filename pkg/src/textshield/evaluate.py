"""Four-metric benchmark harness.

Per image: classification accuracy (three-way verdict), OCR score (one minus
normed Levenshtein on the tampered text), localization IoU, and a reasoning
score (mean of token-frequency cosine, Rouge-L, and BLEU between predicted
and gold reasoning). Results aggregate per evaluation subset as percentages.

Images the model fails to flag as tampered contribute 0 to OCR and Loc -
misses are penalized, not excluded. OCR/Loc averages run over tampered
ground-truth records by default (``denominator="all"`` divides by every
record instead). Multi-region images - several ground-truth records sharing
an id with ``#`` suffixes - are matched 1:1 to predicted regions greedily by
descending IoU.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import DataConsistencyError, IdMismatch, UnknownFormat
from .geometry import iou
from .records import GroundTruthRecord, ImageVerdict, PredictionRecord, SUBSETS, base_id
from .textmetrics import TokenSequence, bleu, cosine_sim, normed_levenshtein, rouge_l, tokenize

CosineProvider = Callable[[TokenSequence, TokenSequence], float]


def reasoning_score(
    pred_text: str,
    gold_text: str,
    cosine_provider: CosineProvider = cosine_sim,
) -> float:
    """Mean of cosine, Rouge-L, and BLEU over tokenized reasoning texts.

    Empty token sequences score 0 on every component instead of erroring;
    the harness must stay total over arbitrary datasets.
    """
    hyp = tokenize(pred_text)
    ref = tokenize(gold_text)
    if not hyp or not ref:
        return 0.0
    return (cosine_provider(hyp, ref) + rouge_l(hyp, ref) + bleu(hyp, ref)) / 3.0


@dataclass(frozen=True)
class ImageScores:
    """Per-image metric tuple; ocr/loc are None off tampered ground truth."""

    id: str
    subset: str
    cls: int
    ocr: float | None
    loc: float | None
    res: float
    missing_prediction: bool = False


def score_image(
    pred: PredictionRecord | None,
    gt: GroundTruthRecord,
    cosine_provider: CosineProvider = cosine_sim,
) -> ImageScores:
    """Score one prediction (or its absence) against one ground-truth record."""
    if pred is not None and pred.id != gt.id and base_id(pred.id) != base_id(gt.id):
        raise IdMismatch(f"prediction {pred.id!r} vs ground truth {gt.id!r}")
    cls = 1 if pred is not None and pred.verdict is gt.verdict else 0
    ocr = loc = None
    if gt.verdict is ImageVerdict.TAMPERED:
        flagged = pred is not None and pred.verdict is ImageVerdict.TAMPERED
        ocr = (
            1.0 - normed_levenshtein(pred.text, gt.text)
            if flagged and pred.text is not None and gt.text is not None
            else 0.0
        )
        loc = (
            iou(pred.bbox, gt.bbox)
            if flagged and pred.bbox is not None and gt.bbox is not None
            else 0.0
        )
    res = reasoning_score(
        pred.reasoning if pred is not None else "",
        gt.reasoning_annotation,
        cosine_provider,
    )
    return ImageScores(
        id=gt.id,
        subset=gt.subset,
        cls=cls,
        ocr=ocr,
        loc=loc,
        res=res,
        missing_prediction=pred is None,
    )


def match_multi_region(
    preds: Sequence[PredictionRecord],
    gts: Sequence[GroundTruthRecord],
) -> tuple[list[int | None], int]:
    """Greedy 1:1 assignment of predicted regions to ground-truth regions.

    Pairs are taken in descending IoU order (ties to lower indices). Returns
    the prediction index chosen for each ground-truth record (None when
    unmatched) and the count of leftover predicted regions, which are false
    positives.
    """
    region_preds = [i for i, p in enumerate(preds) if p.bbox is not None]
    region_gts = [j for j, g in enumerate(gts) if g.bbox is not None]
    pairs = sorted(
        (-iou(preds[i].bbox, gts[j].bbox), i, j) for i in region_preds for j in region_gts
    )
    assigned: list[int | None] = [None] * len(gts)
    used_preds: set[int] = set()
    for _, i, j in pairs:
        if i in used_preds or assigned[j] is not None:
            continue
        assigned[j] = i
        used_preds.add(i)
    return assigned, len(region_preds) - len(used_preds)


def _score_group(
    gts: Sequence[GroundTruthRecord],
    preds: Sequence[PredictionRecord],
    cosine_provider: CosineProvider,
) -> tuple[list[ImageScores], int]:
    """Score every ground-truth record of one image; returns scores + false positives."""
    if len(gts) == 1 and len(preds) <= 1:
        pred = preds[0] if preds else None
        scores = [score_image(pred, gts[0], cosine_provider)]
        false_positives = (
            1
            if gts[0].verdict is not ImageVerdict.TAMPERED
            and pred is not None
            and pred.bbox is not None
            else 0
        )
        return scores, false_positives

    image_pred = preds[0] if preds else None
    assigned, leftover = match_multi_region(preds, gts)
    tampered_image = any(g.verdict is ImageVerdict.TAMPERED for g in gts)
    if not tampered_image:
        leftover = sum(1 for p in preds if p.bbox is not None)
    out: list[ImageScores] = []
    for j, gt in enumerate(gts):
        cls = 1 if image_pred is not None and image_pred.verdict is gt.verdict else 0
        ocr = loc = None
        if gt.verdict is ImageVerdict.TAMPERED:
            region = preds[assigned[j]] if assigned[j] is not None else None
            flagged = region is not None and region.verdict is ImageVerdict.TAMPERED
            ocr = (
                1.0 - normed_levenshtein(region.text, gt.text)
                if flagged and region.text is not None and gt.text is not None
                else 0.0
            )
            loc = iou(region.bbox, gt.bbox) if flagged else 0.0
        res = reasoning_score(
            image_pred.reasoning if image_pred is not None else "",
            gt.reasoning_annotation,
            cosine_provider,
        )
        out.append(
            ImageScores(
                id=gt.id,
                subset=gt.subset,
                cls=cls,
                ocr=ocr,
                loc=loc,
                res=res,
                missing_prediction=image_pred is None,
            )
        )
    return out, leftover


@dataclass(frozen=True)
class SubsetMetrics:
    """Aggregated percentages and counts for one evaluation subset."""

    n_real: int
    n_generated: int
    n_tampered: int
    n_missing_predictions: int
    n_false_positive_regions: int
    cls_acc: float
    ocr_score: float | None
    loc_iou: float | None
    res_score: float


@dataclass(frozen=True)
class MetricReport:
    label: str
    denominator: str
    subsets: dict[str, SubsetMetrics]


def aggregate(
    gts: Sequence[GroundTruthRecord],
    preds: Iterable[PredictionRecord],
    label: str = "run",
    denominator: str = "tampered",
    cosine_provider: CosineProvider = cosine_sim,
    jobs: int = 1,
) -> tuple[MetricReport, list[str]]:
    """Aggregate per-subset metrics; returns the report and sorted warnings.

    Record order never matters: images are scored in sorted-id order, so the
    result is bit-identical under input permutation and any ``jobs`` value.
    """
    if denominator not in ("tampered", "all"):
        raise ValueError(f"denominator must be 'tampered' or 'all', got {denominator!r}")

    seen: set[str] = set()
    for g in gts:
        if g.id in seen:
            raise DataConsistencyError(f"duplicate ground-truth id {g.id!r}")
        seen.add(g.id)

    gt_groups: dict[str, list[GroundTruthRecord]] = {}
    for g in gts:
        gt_groups.setdefault(base_id(g.id), []).append(g)
    for group in gt_groups.values():
        group.sort(key=lambda g: g.id)

    pred_groups: dict[str, list[PredictionRecord]] = {}
    warnings: list[str] = []
    for p in preds:
        key = base_id(p.id)
        if key in gt_groups:
            pred_groups.setdefault(key, []).append(p)
        else:
            warnings.append(f"prediction id {p.id!r} has no ground truth")

    bases = sorted(gt_groups)
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            group_results = list(
                pool.map(
                    lambda b: _score_group(gt_groups[b], pred_groups.get(b, ()), cosine_provider),
                    bases,
                )
            )
    else:
        group_results = [
            _score_group(gt_groups[b], pred_groups.get(b, ()), cosine_provider) for b in bases
        ]

    acc: dict[str, dict[str, float]] = {}
    for scores, false_positives in group_results:
        for s in scores:
            bucket = acc.setdefault(
                s.subset,
                {
                    "n": 0, "n_real": 0, "n_generated": 0, "n_tampered": 0,
                    "n_missing": 0, "n_fp": 0,
                    "cls": 0.0, "ocr": 0.0, "loc": 0.0, "res": 0.0,
                },
            )
            bucket["n"] += 1
            bucket["cls"] += s.cls
            bucket["res"] += s.res
            if s.missing_prediction:
                bucket["n_missing"] += 1
            if s.ocr is not None:
                bucket["n_tampered"] += 1
                bucket["ocr"] += s.ocr
                bucket["loc"] += s.loc
        if scores:
            acc[scores[0].subset]["n_fp"] += false_positives

    for g in gts:
        bucket = acc[g.subset]
        if g.verdict is ImageVerdict.REAL:
            bucket["n_real"] += 1
        elif g.verdict is ImageVerdict.GENERATED:
            bucket["n_generated"] += 1

    subsets: dict[str, SubsetMetrics] = {}
    for name in SUBSETS:
        if name not in acc:
            continue
        b = acc[name]
        n = int(b["n"])
        n_tampered = int(b["n_tampered"])
        denom = n if denominator == "all" else n_tampered
        subsets[name] = SubsetMetrics(
            n_real=int(b["n_real"]),
            n_generated=int(b["n_generated"]),
            n_tampered=n_tampered,
            n_missing_predictions=int(b["n_missing"]),
            n_false_positive_regions=int(b["n_fp"]),
            cls_acc=100.0 * b["cls"] / n,
            ocr_score=100.0 * b["ocr"] / denom if denom else None,
            loc_iou=100.0 * b["loc"] / denom if denom else None,
            res_score=100.0 * b["res"] / n,
        )

    return MetricReport(label=label, denominator=denominator, subsets=subsets), sorted(warnings)


# ---------------------------------------------------------------------------
# Report emission


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.1f}"


def emit_report(report: MetricReport, fmt: str) -> str:
    """Render a report deterministically as json, csv, or markdown."""
    if fmt == "json":
        return _emit_json(report)
    if fmt == "csv":
        return _emit_csv(report)
    if fmt in ("md", "markdown"):
        return _emit_markdown(report)
    raise UnknownFormat(f"unknown report format {fmt!r} (expected json|csv|md)")


def _emit_json(report: MetricReport) -> str:
    payload = {
        "label": report.label,
        "denominator": report.denominator,
        "subsets": {
            name: {
                "n_real": m.n_real,
                "n_generated": m.n_generated,
                "n_tampered": m.n_tampered,
                "n_missing_predictions": m.n_missing_predictions,
                "n_false_positive_regions": m.n_false_positive_regions,
                "cls_acc": round(m.cls_acc, 1),
                "ocr_score": None if m.ocr_score is None else round(m.ocr_score, 1),
                "loc_iou": None if m.loc_iou is None else round(m.loc_iou, 1),
                "res_score": round(m.res_score, 1),
            }
            for name, m in report.subsets.items()
        },
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def _emit_csv(report: MetricReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "label", "subset", "n_real", "n_generated", "n_tampered",
            "n_missing_predictions", "n_false_positive_regions",
            "cls_acc", "ocr_score", "loc_iou", "res_score",
        ]
    )
    for name, m in report.subsets.items():
        writer.writerow(
            [
                report.label, name, m.n_real, m.n_generated, m.n_tampered,
                m.n_missing_predictions, m.n_false_positive_regions,
                f"{m.cls_acc:.1f}",
                "" if m.ocr_score is None else f"{m.ocr_score:.1f}",
                "" if m.loc_iou is None else f"{m.loc_iou:.1f}",
                f"{m.res_score:.1f}",
            ]
        )
    return buf.getvalue()


def _emit_markdown(report: MetricReport) -> str:
    names = list(report.subsets)
    header = ["Method"]
    for name in names:
        header += [f"{name} Cls.", f"{name} OCR", f"{name} Loc.", f"{name} Res."]
    row = [report.label]
    for name in names:
        m = report.subsets[name]
        row += [_fmt(m.cls_acc), _fmt(m.ocr_score), _fmt(m.loc_iou), _fmt(m.res_score)]
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "---|" * len(header),
        "| " + " | ".join(row) + " |",
    ]
    return "\n".join(lines) + "\n"
