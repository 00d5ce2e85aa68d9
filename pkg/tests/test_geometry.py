"""IoU and Distance-IoU arithmetic."""

import random

import pytest

from conftest import random_bbox
from textshield.geometry import diou, enclosing_box, iou
from textshield.records import BBox


class TestIoU:
    def test_identical_boxes(self):
        b = BBox(3, 4, 10, 12)
        assert iou(b, b) == 1.0

    def test_touching_corner_is_zero(self):
        assert iou(BBox(0, 0, 10, 10), BBox(10, 10, 20, 20)) == 0.0

    def test_touching_edge_is_zero(self):
        assert iou(BBox(0, 0, 10, 10), BBox(10, 0, 20, 10)) == 0.0

    def test_half_shift(self):
        # inter 50, union 150
        assert iou(BBox(0, 0, 10, 10), BBox(5, 0, 15, 10)) == pytest.approx(1 / 3, abs=1e-15)

    def test_containment(self):
        assert iou(BBox(0, 0, 10, 10), BBox(2, 2, 4, 4)) == pytest.approx(4 / 100, abs=1e-15)


class TestDiou:
    def test_identical_boxes(self):
        b = BBox(1, 1, 5, 9)
        assert diou(b, b) == 1.0

    def test_adjacent_boxes_hand_value(self):
        # iou 0, center distance^2 = 100, enclosing diagonal^2 = 500
        assert diou(BBox(0, 0, 10, 10), BBox(10, 0, 20, 10)) == pytest.approx(-0.2, abs=1e-15)

    def test_strictly_decreases_with_distance(self):
        a = BBox(0, 0, 10, 10)
        values = [diou(a, BBox(10 + d, 0, 20 + d, 10)) for d in (0, 5, 20, 100, 500)]
        assert all(x > y for x, y in zip(values, values[1:]))

    def test_equals_iou_iff_centers_coincide(self):
        outer = BBox(0, 0, 10, 10)
        inner = BBox(2.5, 2.5, 7.5, 7.5)  # same center
        assert diou(outer, inner) == iou(outer, inner)
        shifted = BBox(2, 2, 7, 7)
        assert diou(outer, shifted) < iou(outer, shifted)


class TestGeometryProperties:
    def test_symmetry_bounds_translation(self):
        rng = random.Random(21)
        for _ in range(500):
            a = random_bbox(rng, side=200)
            b = random_bbox(rng, side=200)
            i_ab, i_ba = iou(a, b), iou(b, a)
            d_ab, d_ba = diou(a, b), diou(b, a)
            assert i_ab == i_ba
            assert d_ab == d_ba
            assert 0.0 <= i_ab <= 1.0
            assert -1.0 < d_ab <= 1.0
            assert d_ab <= i_ab + 1e-15
            # translation invariance
            dx, dy = rng.uniform(0, 50), rng.uniform(0, 50)
            at = BBox(a.x1 + dx, a.y1 + dy, a.x2 + dx, a.y2 + dy)
            bt = BBox(b.x1 + dx, b.y1 + dy, b.x2 + dx, b.y2 + dy)
            assert iou(at, bt) == pytest.approx(i_ab, abs=1e-12)
            assert diou(at, bt) == pytest.approx(d_ab, abs=1e-12)

    def test_iou_one_iff_equal(self):
        rng = random.Random(22)
        for _ in range(200):
            a = random_bbox(rng, side=100)
            b = random_bbox(rng, side=100)
            if iou(a, b) == 1.0:
                assert a == b

    def test_enclosing_box_contains_both(self):
        rng = random.Random(23)
        for _ in range(200):
            a = random_bbox(rng, side=100)
            b = random_bbox(rng, side=100)
            enc = enclosing_box(a, b)
            assert enc.x1 <= min(a.x1, b.x1) and enc.x2 >= max(a.x2, b.x2)
            assert enc.y1 <= min(a.y1, b.y1) and enc.y2 >= max(a.y2, b.y2)
