"""Single command-line entry point for every pipeline stage.

Subcommands: parse, reward, rectify, evaluate, mask encode|decode, metrics
<primitive>, fixtures gen. All outputs are written atomically (temp file +
rename); logs go to stderr only, with verbosity controlled by the
TEXTSHIELD_LOG environment variable.

Exit codes: 0 success, 1 usage error, 2 schema error (including missing
input files), 3 data-consistency error (unmatched ids, bad group sizes).
"""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path
from typing import Any

import click

from . import __version__
from .errors import DataConsistencyError, SchemaError, SchemaViolation
from .evaluate import aggregate, emit_report
from .fixtures import FixtureConfig, generate
from .geometry import diou as diou_fn, iou as iou_fn
from .jsonl import read_jsonl, write_jsonl_atomic, write_text_atomic
from .parsing import parse_completion
from .records import (
    BBox,
    GroundTruthRecord,
    OcrLayout,
    prediction_from_obj_lenient,
    prediction_to_obj,
    validate_record,
)
from .rectify import RectifyConfig, rectify_batch
from .rewards import DEFAULT_WEIGHTS, RewardWeights, group_advantages, reward_all
from .textmetrics import bleu, cosine_sim, levenshtein, normed_levenshtein, rouge_l, tokenize
from . import annotations as ann

log = logging.getLogger("textshield")

USAGE_ERROR, SCHEMA_ERROR, DATA_ERROR = 1, 2, 3


def _configure_logging() -> None:
    level = os.environ.get("TEXTSHIELD_LOG", "WARNING").upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _load_groundtruth(path: str) -> list[GroundTruthRecord]:
    return [validate_record(obj, "groundtruth") for _, obj in read_jsonl(path)]


def _load_layouts(path: str) -> dict[str, OcrLayout]:
    layouts: dict[str, OcrLayout] = {}
    for _, obj in read_jsonl(path):
        layout = validate_record(obj, "ocr")
        if layout.id in layouts:
            raise DataConsistencyError(f"duplicate OCR layout id {layout.id!r} in {path}")
        layouts[layout.id] = layout
    return layouts


def _load_predictions_lenient(path: str, strict: bool):
    preds = []
    for lineno, obj in read_jsonl(path):
        if strict:
            preds.append(validate_record(obj, "prediction"))
            continue
        record, diags = prediction_from_obj_lenient(obj)
        for d in diags:
            log.warning("%s:%d: %s", path, lineno, d)
        if record is not None:
            preds.append(record)
    return preds


@click.group(name="textshield")
@click.version_option(version=__version__, prog_name="textshield")
def cli() -> None:
    """Tampered-text detection toolkit: parsing, rewards, rectification, evaluation."""


# ---------------------------------------------------------------------------
# parse


@cli.command("parse")
@click.option("--raw", "raw_path", required=True, help="raw_outputs.jsonl with {id, raw} lines.")
@click.option("--out", "out_path", required=True, help="Destination predictions.jsonl.")
@click.option("--diagnostics", "diag_path", default=None, help="Optional diagnostics sidecar.")
def parse_cmd(raw_path: str, out_path: str, diag_path: str | None) -> None:
    """Extract structured answers from raw model completions."""
    pred_objs: list[dict[str, Any]] = []
    diag_objs: list[dict[str, Any]] = []
    for lineno, obj in read_jsonl(raw_path):
        if (
            not isinstance(obj, dict)
            or not isinstance(obj.get("id"), str)
            or not isinstance(obj.get("raw"), str)
        ):
            raise SchemaError(
                [SchemaViolation(f"{raw_path}:{lineno}", "expected {id: str, raw: str}")]
            )
        parsed = parse_completion(obj["raw"])
        answer = parsed.answer.canonical()
        record: dict[str, Any] = {
            "id": obj["id"],
            "verdict": answer.verdict.value if answer.verdict else None,
        }
        if answer.method is not None:
            record["method"] = answer.method.value
        if answer.text is not None:
            record["text"] = answer.text
        if answer.bbox is not None:
            record["bbox"] = answer.bbox.as_list()
        record["reasoning"] = parsed.think
        record["raw_output"] = obj["raw"]
        pred_objs.append(record)
        diag_objs.append(
            {
                "id": obj["id"],
                "tags_ok": parsed.tags_ok,
                "payload_ok": parsed.payload_ok,
                "format_ok": parsed.format_ok,
                "diagnostics": list(parsed.diagnostics),
            }
        )
    write_jsonl_atomic(out_path, pred_objs)
    if diag_path:
        write_jsonl_atomic(diag_path, diag_objs)
    click.echo(f"parsed {len(pred_objs)} completions -> {out_path}", err=True)


# ---------------------------------------------------------------------------
# reward


@cli.command("reward")
@click.option("--pred", "pred_path", required=True)
@click.option("--gt", "gt_path", required=True)
@click.option("--out", "out_path", required=True)
@click.option("--weights", "weights_spec", default=None, help="e.g. cls=1,method=1,loc=1,ocr=1,format=1")
@click.option("--group-size", type=click.IntRange(min=2), default=None,
              help="Completions per prompt; adds group-relative advantages.")
@click.option("--strict", is_flag=True, help="Reject malformed prediction records instead of scoring them 0.")
@click.option("--jobs", type=click.IntRange(min=1), default=None, help="Worker threads (default: all cores).")
def reward_cmd(pred_path, gt_path, out_path, weights_spec, group_size, strict, jobs) -> None:
    """Score predictions with the five rewards; optionally emit advantages."""
    try:
        weights = RewardWeights.parse(weights_spec) if weights_spec else DEFAULT_WEIGHTS
    except ValueError as exc:
        raise click.UsageError(str(exc))

    gt_by_id: dict[str, GroundTruthRecord] = {}
    for gt in _load_groundtruth(gt_path):
        if gt.id in gt_by_id:
            raise DataConsistencyError(f"duplicate ground-truth id {gt.id!r} in {gt_path}")
        gt_by_id[gt.id] = gt

    preds = _load_predictions_lenient(pred_path, strict)
    missing = [p.id for p in preds if p.id not in gt_by_id]
    if missing:
        raise DataConsistencyError(
            f"{len(missing)} prediction ids without ground truth (first: {missing[0]!r})"
        )
    if group_size is not None and len(preds) % group_size:
        raise DataConsistencyError(
            f"{len(preds)} records are not divisible into groups of {group_size}"
        )

    def score(pred):
        return reward_all(pred, gt_by_id[pred.id], weights)

    vectors = list(_parallel_map(score, preds, jobs))

    objs = [v.to_obj() for v in vectors]
    if group_size is not None:
        for g0 in range(0, len(vectors), group_size):
            advantages = group_advantages([v.composite for v in vectors[g0 : g0 + group_size]])
            for k, adv in enumerate(advantages):
                objs[g0 + k]["group"] = g0 // group_size
                objs[g0 + k]["advantage"] = adv
    write_jsonl_atomic(out_path, objs)
    click.echo(f"scored {len(objs)} records -> {out_path}", err=True)


def _parallel_map(fn, items, jobs):
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# rectify


@cli.command("rectify")
@click.option("--pred", "pred_path", required=True)
@click.option("--ocr", "ocr_path", required=True)
@click.option("--out", "out_path", required=True)
@click.option("--threshold", type=click.FloatRange(0.0, 1.0), default=0.2, show_default=True,
              help="Normed Levenshtein matching threshold (inclusive).")
@click.option("--audit", "audit_path", default=None, help="Per-record outcome sidecar.")
@click.option("--strict", is_flag=True)
@click.option("--jobs", type=click.IntRange(min=1), default=None)
def rectify_cmd(pred_path, ocr_path, out_path, threshold, audit_path, strict, jobs) -> None:
    """Replace tampered-text boxes with matching OCR engine boxes."""
    layouts = _load_layouts(ocr_path)
    preds = _load_predictions_lenient(pred_path, strict)
    results = rectify_batch(
        preds,
        layouts,
        RectifyConfig(match_threshold=threshold),
        jobs=jobs if jobs is not None else os.cpu_count() or 1,
    )

    out_objs = [prediction_to_obj(rec) for rec, _ in results]
    write_jsonl_atomic(out_path, out_objs)
    if audit_path:
        audit_objs = []
        for rec, outcome in results:
            if outcome is None:
                audit_objs.append({"id": rec.id, "applicable": False})
            else:
                audit_objs.append(
                    {
                        "id": rec.id,
                        "applicable": True,
                        "source": outcome.source.value,
                        "matched_index": outcome.matched_index,
                        "match_distance": outcome.match_distance,
                        "final_bbox": outcome.final_bbox.as_list(),
                    }
                )
        write_jsonl_atomic(audit_path, audit_objs)
    n_changed = sum(1 for _, o in results if o is not None and o.matched_index is not None)
    click.echo(f"rectified {n_changed}/{len(results)} records -> {out_path}", err=True)


# ---------------------------------------------------------------------------
# evaluate


@cli.command("evaluate")
@click.option("--pred", "pred_path", required=True)
@click.option("--gt", "gt_path", required=True)
@click.option("--rectified", is_flag=True, help="Mark the run label as post-rectification.")
@click.option("--report", "fmt", type=click.Choice(["md", "json", "csv"]), default="md", show_default=True)
@click.option("--out", "out_path", default=None, help="Write the report here instead of stdout.")
@click.option("--label", default="run", show_default=True)
@click.option("--denominator", type=click.Choice(["tampered", "all"]), default="tampered",
              show_default=True, help="Averaging base for the OCR and Loc columns.")
@click.option("--max-unmatched", type=click.IntRange(min=0), default=0, show_default=True,
              help="Tolerated prediction ids without ground truth before exit code 3.")
@click.option("--strict", is_flag=True)
@click.option("--jobs", type=click.IntRange(min=1), default=None)
def evaluate_cmd(pred_path, gt_path, rectified, fmt, out_path, label, denominator,
                 max_unmatched, strict, jobs) -> None:
    """Compute the four benchmark metrics per evaluation subset."""
    gts = _load_groundtruth(gt_path)
    preds = _load_predictions_lenient(pred_path, strict)
    if rectified:
        label = f"{label} (rectified)"
    report, warnings = aggregate(
        gts,
        preds,
        label=label,
        denominator=denominator,
        jobs=jobs if jobs is not None else os.cpu_count() or 1,
    )
    text = emit_report(report, fmt)
    if out_path:
        write_text_atomic(out_path, text)
        click.echo(f"report -> {out_path}", err=True)
    else:
        click.echo(text, nl=False)
    for w in warnings:
        log.warning("%s", w)
    if len(warnings) > max_unmatched:
        raise DataConsistencyError(
            f"{len(warnings)} unmatched prediction ids exceed budget {max_unmatched}"
        )


# ---------------------------------------------------------------------------
# mask


@cli.group("mask")
def mask_group() -> None:
    """Mask-string encoding and decoding."""


@mask_group.command("encode")
@click.argument("mask_file")
@click.option("--out", "out_path", default=None)
def mask_encode_cmd(mask_file: str, out_path: str | None) -> None:
    """Print the 1024-character mask string for a PGM/PNG mask file."""
    encoded = ann.encode_mask_string(ann.load_mask(mask_file))
    if out_path:
        write_text_atomic(out_path, encoded + "\n")
    else:
        click.echo(encoded)


@mask_group.command("decode")
@click.argument("mask_string")
@click.option("--format", "fmt", type=click.Choice(["txt", "pgm"]), default="txt", show_default=True)
@click.option("--out", "out_path", default=None)
def mask_decode_cmd(mask_string: str, fmt: str, out_path: str | None) -> None:
    """Decode a mask string (or @file containing one) back into a 32x32 grid."""
    if mask_string.startswith("@"):
        mask_string = Path(mask_string[1:]).read_text(encoding="utf-8").strip()
    grid = ann.decode_mask_string(mask_string)
    if fmt == "pgm":
        if not out_path:
            raise click.UsageError("--out is required with --format pgm")
        ann.save_mask_pgm(grid, out_path)
        return
    lines = [grid.cell_string()[r * 32 : (r + 1) * 32] for r in range(32)]
    text = "\n".join(lines) + "\n"
    if out_path:
        write_text_atomic(out_path, text)
    else:
        click.echo(text, nl=False)


# ---------------------------------------------------------------------------
# metrics (debug access to the primitives)


@cli.group("metrics")
def metrics_group() -> None:
    """Directly evaluate individual metric primitives."""


@metrics_group.command("lev")
@click.argument("a")
@click.argument("b")
def metrics_lev(a: str, b: str) -> None:
    click.echo(str(levenshtein(a, b)))


@metrics_group.command("nlev")
@click.argument("a")
@click.argument("b")
def metrics_nlev(a: str, b: str) -> None:
    click.echo(repr(normed_levenshtein(a, b)))


@metrics_group.command("bleu")
@click.argument("hyp")
@click.argument("ref")
def metrics_bleu(hyp: str, ref: str) -> None:
    click.echo(repr(bleu(tokenize(hyp), tokenize(ref))))


@metrics_group.command("rouge")
@click.argument("hyp")
@click.argument("ref")
def metrics_rouge(hyp: str, ref: str) -> None:
    click.echo(repr(rouge_l(tokenize(hyp), tokenize(ref))))


@metrics_group.command("cosine")
@click.argument("hyp")
@click.argument("ref")
def metrics_cosine(hyp: str, ref: str) -> None:
    click.echo(repr(cosine_sim(tokenize(hyp), tokenize(ref))))


def _box(coords: tuple[float, ...]) -> BBox:
    return BBox(*coords)


@metrics_group.command("iou")
@click.argument("coords", nargs=8, type=float)
def metrics_iou(coords) -> None:
    """IoU of two boxes given as X1 Y1 X2 Y2 X1 Y1 X2 Y2."""
    click.echo(repr(iou_fn(_box(coords[:4]), _box(coords[4:]))))


@metrics_group.command("diou")
@click.argument("coords", nargs=8, type=float)
def metrics_diou(coords) -> None:
    """Distance-IoU of two boxes given as X1 Y1 X2 Y2 X1 Y1 X2 Y2."""
    click.echo(repr(diou_fn(_box(coords[:4]), _box(coords[4:]))))


# ---------------------------------------------------------------------------
# fixtures


@cli.group("fixtures")
def fixtures_group() -> None:
    """Synthetic corpus generation."""


@fixtures_group.command("gen")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--n", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--out-dir", required=True)
@click.option("--noise-rate", type=click.FloatRange(0.0, 1.0), default=0.1, show_default=True,
              help="Character corruption rate for predicted texts.")
@click.option("--target-iou", type=click.FloatRange(0.0, 1.0), default=0.35, show_default=True,
              help="Mean IoU of jittered prediction boxes (1.0 disables jitter).")
@click.option("--iou-spread", type=click.FloatRange(0.0, 0.5), default=0.03, show_default=True)
@click.option("--tampered-frac", type=click.FloatRange(0.0, 1.0), default=0.5, show_default=True)
@click.option("--generated-frac", type=click.FloatRange(0.0, 1.0), default=0.25, show_default=True)
def fixtures_gen_cmd(seed, n, out_dir, noise_rate, target_iou, iou_spread,
                     tampered_frac, generated_frac) -> None:
    """Write matching groundtruth/ocr/predictions JSONL files."""
    if tampered_frac + generated_frac > 1.0:
        raise click.UsageError("tampered-frac + generated-frac must be <= 1")
    cfg = FixtureConfig(
        seed=seed,
        n=n,
        noise_rate=noise_rate,
        target_iou=target_iou,
        iou_spread=iou_spread,
        tampered_frac=tampered_frac,
        generated_frac=generated_frac,
    )
    gt_objs, ocr_objs, pred_objs = generate(cfg)
    out = Path(out_dir)
    write_jsonl_atomic(out / "groundtruth.jsonl", gt_objs)
    write_jsonl_atomic(out / "ocr.jsonl", ocr_objs)
    write_jsonl_atomic(out / "predictions.jsonl", pred_objs)
    click.echo(f"wrote {n} fixture records to {out}", err=True)


# ---------------------------------------------------------------------------
# entry point


def main(argv: list[str] | None = None) -> int:
    """Dispatch with the documented exit codes; console script entry point."""
    _configure_logging()
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return 130
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return USAGE_ERROR
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return USAGE_ERROR
    except SchemaError as exc:
        click.echo(f"schema error: {exc}", err=True)
        return SCHEMA_ERROR
    except FileNotFoundError as exc:
        click.echo(f"missing file: {exc.filename}", err=True)
        return SCHEMA_ERROR
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return SCHEMA_ERROR
    except DataConsistencyError as exc:
        click.echo(f"data error: {exc}", err=True)
        return DATA_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
