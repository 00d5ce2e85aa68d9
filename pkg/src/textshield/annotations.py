"""Annotation encodings for training targets.

Turns region masks into the two supervision encodings (minimum bounding box
and the 32x32 '0'/'1' mask string), builds OCR reference-grounding pairs on
real images, and reads mask files (PGM natively; PNG when Pillow is
installed).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import BadMaskString, EmptyMask, IdMismatch, IndexOutOfRange, NotRealImage
from .records import BBox, GroundTruthRecord, ImageVerdict, MaskGrid, OcrLayout

MASK_STRING_SIDE = 32
MASK_STRING_LENGTH = MASK_STRING_SIDE * MASK_STRING_SIDE

_TO_ASCII = bytes.maketrans(b"\x00\x01", b"01")
_FROM_ASCII = bytes.maketrans(b"01", b"\x00\x01")


def min_bbox(mask: MaskGrid) -> BBox:
    """Tightest axis-aligned box covering every tampered cell.

    x is the column index, y the row index; x2/y2 are exclusive.
    Raises ``EmptyMask`` when the mask has no 1-cells.
    """
    w = mask.width
    top = bottom = None
    left, right = w, -1
    for r in range(mask.height):
        row = mask.cells[r * w : (r + 1) * w]
        first = row.find(1)
        if first < 0:
            continue
        if top is None:
            top = r
        bottom = r
        if first < left:
            left = first
        last = row.rfind(1)
        if last > right:
            right = last
    if top is None:
        raise EmptyMask("mask contains no tampered cells")
    return BBox(float(left), float(top), float(right + 1), float(bottom + 1))


def resample_mask(mask: MaskGrid, width: int = MASK_STRING_SIDE, height: int = MASK_STRING_SIDE) -> MaskGrid:
    """Nearest-neighbor resample; source index is floor(target * src/dst)."""
    if mask.width == width and mask.height == height:
        return mask
    sw, sh = mask.width, mask.height
    cells = bytearray(width * height)
    pos = 0
    for r in range(height):
        row = mask.cells[(r * sh // height) * sw : (r * sh // height) * sw + sw]
        for c in range(width):
            cells[pos] = row[c * sw // width]
            pos += 1
    return MaskGrid(width, height, bytes(cells))


def encode_mask_string(mask: MaskGrid) -> str:
    """Resample to 32x32 and emit the row-major 1024-character '0'/'1' string."""
    return resample_mask(mask).cells.translate(_TO_ASCII).decode("ascii")


def decode_mask_string(s: str) -> MaskGrid:
    """Inverse of ``encode_mask_string`` for 32x32 grids."""
    if len(s) != MASK_STRING_LENGTH:
        raise BadMaskString(f"expected {MASK_STRING_LENGTH} characters, got {len(s)}")
    if s.strip("01"):
        raise BadMaskString("mask string may only contain '0' and '1'")
    return MaskGrid(MASK_STRING_SIDE, MASK_STRING_SIDE, s.encode("ascii").translate(_FROM_ASCII))


def forensic_target(mask: MaskGrid, description: str) -> dict[str, Any]:
    """Three-field training target for one tampered region.

    The description is a pass-through string produced by an external
    captioning model; box and mask string are derived here.
    """
    return {
        "description": description,
        "bbox": min_bbox(mask).as_list(),
        "mask": encode_mask_string(mask),
    }


# ---------------------------------------------------------------------------
# OCR reference grounding

BOX_TO_TEXT = "box_to_text"
TEXT_TO_BOX = "text_to_box"


@dataclass(frozen=True)
class GroundingPair:
    """One reference-grounding training pair built from a real text image."""

    direction: str
    prompt: dict[str, Any]
    target: dict[str, Any]


def make_grounding_pair(
    gt: GroundTruthRecord,
    layout: OcrLayout,
    direction: str,
    instance_index: int,
) -> GroundingPair:
    """Build a (bbox -> text) or (text -> bbox) pair for one OCR instance."""
    if gt.verdict is not ImageVerdict.REAL:
        raise NotRealImage(f"grounding pairs need a real image, got {gt.verdict.value}")
    if gt.id != layout.id:
        raise IdMismatch(f"ground truth {gt.id!r} vs layout {layout.id!r}")
    if not 0 <= instance_index < len(layout.instances):
        raise IndexOutOfRange(
            f"instance {instance_index} out of range for {len(layout.instances)} instances"
        )
    inst = layout.instances[instance_index]
    if direction == BOX_TO_TEXT:
        return GroundingPair(
            direction=direction,
            prompt={"id": gt.id, "bbox": inst.bbox.as_list()},
            target={"text": inst.text},
        )
    if direction == TEXT_TO_BOX:
        return GroundingPair(
            direction=direction,
            prompt={"id": gt.id, "text": inst.text},
            target={"bbox": inst.bbox.as_list()},
        )
    raise ValueError(f"direction must be {BOX_TO_TEXT!r} or {TEXT_TO_BOX!r}, got {direction!r}")


# ---------------------------------------------------------------------------
# Mask files


def load_mask(path: str | Path) -> MaskGrid:
    """Read a mask image; any nonzero pixel is a tampered cell.

    PGM (P2/P5) is supported natively. PNG needs the optional Pillow
    dependency (``pip install textshield[png]``).
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        return _load_pgm(path)
    if suffix == ".png":
        return _load_png(path)
    raise ValueError(f"unsupported mask file type: {path.name!r} (use .pgm or .png)")


def _load_pgm(path: Path) -> MaskGrid:
    data = path.read_bytes()
    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            if data[pos : pos + 1].isspace():
                pos += 1
            elif data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos] not in b"\r\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        return data[start:pos]

    magic = next_token()
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a PGM file (magic {magic!r})")
    width, height, maxval = (int(next_token()) for _ in range(3))
    if width < 1 or height < 1 or maxval < 1 or maxval > 65535:
        raise ValueError(f"{path}: bad PGM dimensions {width}x{height} maxval {maxval}")
    n = width * height
    if magic == b"P2":
        values = data[pos:].split()
        if len(values) < n:
            raise ValueError(f"{path}: expected {n} pixels, found {len(values)}")
        cells = bytes(1 if int(v) else 0 for v in values[:n])
    else:
        pos += 1  # single whitespace byte after maxval
        step = 1 if maxval < 256 else 2
        raster = data[pos : pos + n * step]
        if len(raster) < n * step:
            raise ValueError(f"{path}: truncated PGM raster")
        if step == 1:
            cells = bytes(1 if b else 0 for b in raster)
        else:
            cells = bytes(
                1 if (raster[i] or raster[i + 1]) else 0 for i in range(0, 2 * n, 2)
            )
    return MaskGrid(width, height, cells)


def save_mask_pgm(mask: MaskGrid, path: str | Path) -> None:
    """Write a binary (P5) PGM with tampered cells at full intensity."""
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    raster = mask.cells.translate(bytes.maketrans(b"\x00\x01", b"\x00\xff"))
    Path(path).write_bytes(header + raster)


def _load_png(path: Path) -> MaskGrid:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise RuntimeError(
            "PNG masks need the optional Pillow dependency: pip install textshield[png]"
        ) from exc
    with Image.open(path) as img:
        gray = img.convert("L")
        width, height = gray.size
        cells = bytes(1 if px else 0 for px in gray.tobytes())
    return MaskGrid(width, height, cells)
