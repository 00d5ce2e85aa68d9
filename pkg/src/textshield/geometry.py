"""Bounding-box arithmetic: IoU and Distance-IoU.

All geometry works in continuous real coordinates; nothing here rounds to a
pixel grid. DIoU is used for ranking only, so its negative range is kept.
"""

from __future__ import annotations

from .records import BBox


def intersection_area(a: BBox, b: BBox) -> float:
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    if iw <= 0.0:
        return 0.0
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ih <= 0.0:
        return 0.0
    return iw * ih


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union; 0.0 for disjoint or merely touching boxes."""
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)


def enclosing_box(a: BBox, b: BBox) -> BBox:
    return BBox(
        min(a.x1, b.x1),
        min(a.y1, b.y1),
        max(a.x2, b.x2),
        max(a.y2, b.y2),
    )


def center_distance_sq(a: BBox, b: BBox) -> float:
    ax, ay = a.center
    bx, by = b.center
    return (ax - bx) ** 2 + (ay - by) ** 2


def diou(a: BBox, b: BBox) -> float:
    """IoU minus the squared center distance over the enclosing box's squared diagonal.

    Range (-1, 1]; equals IoU exactly when the centers coincide.
    """
    rho_sq = center_distance_sq(a, b)
    if rho_sq == 0.0:
        return iou(a, b)
    enc = enclosing_box(a, b)
    diag_sq = (enc.x2 - enc.x1) ** 2 + (enc.y2 - enc.y1) ** 2
    return iou(a, b) - rho_sq / diag_sq
