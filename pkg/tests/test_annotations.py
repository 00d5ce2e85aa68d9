"""Mask encodings, minimum bounding boxes, grounding pairs, and mask files."""

import random

import pytest

from oracles import min_bbox_scan, nearest_neighbor_resample
from textshield.annotations import (
    decode_mask_string,
    encode_mask_string,
    forensic_target,
    load_mask,
    make_grounding_pair,
    min_bbox,
    resample_mask,
    save_mask_pgm,
)
from textshield.errors import (
    BadMaskString,
    EmptyMask,
    IdMismatch,
    IndexOutOfRange,
    NotRealImage,
)
from textshield.records import (
    BBox,
    GroundTruthRecord,
    ImageVerdict,
    MaskGrid,
    OcrInstance,
    OcrLayout,
)


def grid(width, height, ones=()):
    cells = bytearray(width * height)
    for r, c in ones:
        cells[r * width + c] = 1
    return MaskGrid(width, height, bytes(cells))


def random_grid(rng, width=32, height=32, p=0.3):
    return MaskGrid(width, height, bytes(1 if rng.random() < p else 0 for _ in range(width * height)))


class TestMinBBox:
    def test_single_cell(self):
        assert min_bbox(grid(32, 32, [(2, 3)])) == BBox(3, 2, 4, 3)

    def test_two_cells_matches_scan(self):
        m = grid(32, 32, [(2, 3), (5, 9)])
        assert min_bbox(m) == BBox(3, 2, 10, 6)
        assert min_bbox_scan(32, 32, m.cells) == (3, 2, 10, 6)

    def test_full_cover(self):
        m = MaskGrid(7, 5, bytes([1] * 35))
        assert min_bbox(m) == BBox(0, 0, 7, 5)

    def test_empty_mask_raises(self):
        with pytest.raises(EmptyMask):
            min_bbox(grid(4, 4))

    def test_random_grids_match_scan_oracle_and_are_tight(self):
        rng = random.Random(3)
        for _ in range(200):
            w, h = rng.randint(1, 40), rng.randint(1, 40)
            m = MaskGrid(w, h, bytes(1 if rng.random() < 0.1 else 0 for _ in range(w * h)))
            if 1 not in m.cells:
                continue
            box = min_bbox(m)
            assert (box.x1, box.y1, box.x2, box.y2) == min_bbox_scan(w, h, m.cells)
            # tightness: shrinking any side must lose a 1-cell
            x1, y1, x2, y2 = int(box.x1), int(box.y1), int(box.x2), int(box.y2)
            cols = [c for r in range(h) for c in range(w) if m.cells[r * w + c]]
            rows = [r for r in range(h) for c in range(w) if m.cells[r * w + c]]
            assert min(cols) == x1 and max(cols) == x2 - 1
            assert min(rows) == y1 and max(rows) == y2 - 1


class TestMaskString:
    def test_all_zero_identity(self):
        assert encode_mask_string(grid(32, 32)) == "0" * 1024

    def test_all_one(self):
        assert encode_mask_string(MaskGrid(32, 32, bytes([1] * 1024))) == "1" * 1024

    def test_downsample_quadrant(self):
        # ones exactly in the top-left 32x32 quadrant of a 64x64 mask map to
        # the top-left 16x16 of the 32x32 output (source pixel (2r, 2c))
        cells = bytearray(64 * 64)
        for r in range(32):
            for c in range(32):
                cells[r * 64 + c] = 1
        encoded = encode_mask_string(MaskGrid(64, 64, bytes(cells)))
        expected = nearest_neighbor_resample(64, 64, bytes(cells))
        assert encoded == "".join(str(v) for v in expected)
        for r in range(32):
            for c in range(32):
                want = "1" if r < 16 and c < 16 else "0"
                assert encoded[r * 32 + c] == want, (r, c)

    def test_resample_matches_oracle_on_random_sizes(self):
        rng = random.Random(9)
        for _ in range(50):
            w, h = rng.randint(1, 80), rng.randint(1, 80)
            m = MaskGrid(w, h, bytes(rng.randint(0, 1) for _ in range(w * h)))
            got = resample_mask(m)
            want = nearest_neighbor_resample(w, h, m.cells)
            assert list(got.cells) == want

    def test_round_trip_identity_on_random_grids(self):
        rng = random.Random(4)
        for _ in range(100):
            m = random_grid(rng)
            assert decode_mask_string(encode_mask_string(m)) == m

    def test_decode_all_zero(self):
        m = decode_mask_string("0" * 1024)
        assert m == grid(32, 32)

    def test_decode_rejects_wrong_length(self):
        with pytest.raises(BadMaskString):
            decode_mask_string("0" * 1023)

    def test_decode_rejects_bad_alphabet(self):
        with pytest.raises(BadMaskString):
            decode_mask_string("2" + "0" * 1023)


class TestForensicTarget:
    def test_three_named_fields(self):
        target = forensic_target(grid(32, 32, [(2, 3)]), "a pasted word")
        assert target == {
            "description": "a pasted word",
            "bbox": [3.0, 2.0, 4.0, 3.0],
            "mask": encode_mask_string(grid(32, 32, [(2, 3)])),
        }


def _real_gt(rid="a"):
    return GroundTruthRecord(
        id=rid, subset="test", verdict=ImageVerdict.REAL, reasoning_annotation="clean"
    )


def _layout(rid="a"):
    return OcrLayout(
        id=rid,
        instances=(
            OcrInstance("TOTAL", BBox(10, 10, 60, 30)),
            OcrInstance("DATE", BBox(10, 40, 60, 60)),
        ),
    )


class TestGroundingPairs:
    def test_box_to_text(self):
        pair = make_grounding_pair(_real_gt(), _layout(), "box_to_text", 0)
        assert pair.prompt == {"id": "a", "bbox": [10.0, 10.0, 60.0, 30.0]}
        assert pair.target == {"text": "TOTAL"}

    def test_text_to_box(self):
        pair = make_grounding_pair(_real_gt(), _layout(), "text_to_box", 0)
        assert pair.prompt == {"id": "a", "text": "TOTAL"}
        assert pair.target == {"bbox": [10.0, 10.0, 60.0, 30.0]}

    def test_tampered_image_rejected(self):
        gt = GroundTruthRecord(
            id="a",
            subset="test",
            verdict=ImageVerdict.TAMPERED,
            method=None,
            text="X",
            bbox=BBox(0, 0, 1, 1),
            reasoning_annotation="r",
        )
        with pytest.raises(NotRealImage):
            make_grounding_pair(gt, _layout(), "box_to_text", 0)

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            make_grounding_pair(_real_gt(), _layout(), "box_to_text", 2)

    def test_id_mismatch(self):
        with pytest.raises(IdMismatch):
            make_grounding_pair(_real_gt("b"), _layout("a"), "box_to_text", 0)

    def test_unknown_direction(self):
        with pytest.raises(ValueError):
            make_grounding_pair(_real_gt(), _layout(), "sideways", 0)


class TestMaskFiles:
    def test_pgm_binary_round_trip(self, tmp_path):
        rng = random.Random(7)
        m = random_grid(rng, 17, 9)
        path = tmp_path / "m.pgm"
        save_mask_pgm(m, path)
        assert load_mask(path) == m

    def test_pgm_ascii(self, tmp_path):
        path = tmp_path / "m.pgm"
        path.write_text("P2\n# comment\n3 2\n255\n0 200 0\n10 0 0\n")
        m = load_mask(path)
        assert m == MaskGrid(3, 2, bytes([0, 1, 0, 1, 0, 0]))

    def test_pgm_16bit(self, tmp_path):
        path = tmp_path / "m.pgm"
        header = b"P5\n2 2\n65535\n"
        raster = bytes([0, 0, 1, 0, 0, 1, 255, 255])
        path.write_bytes(header + raster)
        m = load_mask(path)
        assert list(m.cells) == [0, 1, 1, 1]

    def test_png_when_pillow_available(self, tmp_path):
        Image = pytest.importorskip("PIL.Image")
        img = Image.new("L", (4, 3))
        img.putpixel((1, 2), 255)
        path = tmp_path / "m.png"
        img.save(path)
        m = load_mask(path)
        assert m.width == 4 and m.height == 3
        assert m.cells[2 * 4 + 1] == 1 and sum(m.cells) == 1

    def test_unknown_extension(self, tmp_path):
        path = tmp_path / "m.bmp"
        path.write_bytes(b"")
        with pytest.raises(ValueError):
            load_mask(path)
