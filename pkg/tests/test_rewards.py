"""The five reward rules, composite weighting, and group advantages."""

import math
import random

import pytest

from textshield.errors import GroupTooSmall, IdMismatch
from textshield.geometry import iou
from textshield.parsing import parse_completion, render_completion
from textshield.records import BBox, ForgeryMethod, GroundTruthRecord, ImageVerdict, PredictionRecord
from textshield.rewards import (
    RewardWeights,
    group_advantages,
    reward_all,
    reward_cls,
    reward_format,
    reward_loc,
    reward_method,
    reward_ocr,
)

from conftest import boxes_with_iou

V = ImageVerdict
M = ForgeryMethod


def tampered_gt(rid="x", text="INVOICE", box=BBox(0, 0, 10, 10), method=M.GENERATION):
    return GroundTruthRecord(
        id=rid, subset="test", verdict=V.TAMPERED, method=method,
        text=text, bbox=box, reasoning_annotation="gold",
    )


def real_gt(rid="x"):
    return GroundTruthRecord(id=rid, subset="test", verdict=V.REAL, reasoning_annotation="gold")


class TestClassificationReward:
    @pytest.mark.parametrize(
        "pred,gt,expected",
        [
            (V.TAMPERED, V.TAMPERED, 1),
            (V.REAL, V.GENERATED, 0),
            (V.GENERATED, V.TAMPERED, 0),
            (V.REAL, V.REAL, 1),
            (None, V.REAL, 0),
        ],
    )
    def test_three_way(self, pred, gt, expected):
        assert reward_cls(pred, gt) == expected


class TestMethodReward:
    def test_correct(self):
        assert reward_method(M.COPY_PASTE, M.COPY_PASTE, V.TAMPERED) == 1

    def test_wrong(self):
        assert reward_method(M.GENERATION, M.COPY_PASTE, V.TAMPERED) == 0

    def test_inapplicable_off_tampered(self):
        assert reward_method(M.COPY_PASTE, None, V.REAL) is None
        assert reward_method(None, None, V.GENERATED) is None

    def test_missing_prediction_scores_zero(self):
        assert reward_method(None, M.GENERATION, V.TAMPERED) == 0


class TestLocalizationReward:
    def test_above_threshold_pays_iou(self):
        a, b = boxes_with_iou(6, 10)
        assert reward_loc(a, b, V.TAMPERED) == 0.6

    def test_exactly_half_pays_zero(self):
        a, b = boxes_with_iou(1, 2)
        assert iou(a, b) == 0.5
        assert reward_loc(a, b, V.TAMPERED) == 0.0

    def test_below_threshold_pays_zero(self):
        a, b = boxes_with_iou(3, 10)
        assert reward_loc(a, b, V.TAMPERED) == 0.0

    def test_missing_prediction(self):
        assert reward_loc(None, BBox(0, 0, 1, 1), V.TAMPERED) == 0.0

    def test_inapplicable(self):
        assert reward_loc(BBox(0, 0, 1, 1), None, V.REAL) is None

    def test_sweep_is_zero_up_to_half_and_identity_above(self):
        for num in range(0, 101):
            a, b = boxes_with_iou(num, 100)
            value = iou(a, b)
            got = reward_loc(a, b, V.TAMPERED)
            if value > 0.5:
                assert got == value
            else:
                assert got == 0.0


class TestOcrReward:
    def test_exact_match(self):
        assert reward_ocr("PAID", "PAID", V.TAMPERED) == 1.0

    def test_one_substitution_in_seven(self):
        assert reward_ocr("INV0ICE", "INVOICE", V.TAMPERED) == pytest.approx(6 / 7, abs=1e-12)

    def test_missing_prediction(self):
        assert reward_ocr(None, "PAID", V.TAMPERED) == 0.0

    def test_inapplicable(self):
        assert reward_ocr("PAID", None, V.REAL) is None

    def test_symmetry_and_identity(self, rng):
        from conftest import random_text

        for _ in range(200):
            a, b = random_text(rng), random_text(rng)
            assert reward_ocr(a, b, V.TAMPERED) == reward_ocr(b, a, V.TAMPERED)
            assert reward_ocr(a, a, V.TAMPERED) == 1.0


class TestFormatReward:
    def test_compliant(self):
        rec = PredictionRecord(id="a", verdict=V.REAL, reasoning="ok")
        assert reward_format(parse_completion(render_completion(rec))) == 1

    def test_missing_close_tag(self):
        assert reward_format(parse_completion("<think>t</think><answer>{}")) == 0

    def test_tags_ok_but_bad_json(self):
        assert reward_format(parse_completion("<think>t</think><answer>oops</answer>")) == 0


class TestRewardAll:
    def test_perfect_tampered_prediction_scores_five(self):
        gt = tampered_gt()
        pred = PredictionRecord(
            id="x", verdict=V.TAMPERED, method=M.GENERATION,
            text="INVOICE", bbox=BBox(0, 0, 10, 10), reasoning="why",
        )
        vec = reward_all(pred, gt)
        assert (vec.r_cls, vec.r_method, vec.r_loc, vec.r_ocr, vec.r_format) == (1, 1, 1.0, 1.0, 1)
        assert vec.composite == 5.0

    def test_perfect_real_prediction_scores_two(self):
        vec = reward_all(PredictionRecord(id="x", verdict=V.REAL, reasoning="r"), real_gt())
        assert vec.composite == 2.0
        assert vec.r_method is None and vec.r_loc is None and vec.r_ocr is None

    def test_real_call_on_tampered_gt_scores_format_only(self):
        pred = PredictionRecord(id="x", verdict=V.REAL, reasoning="r")
        vec = reward_all(
            PredictionRecord(id="x", verdict=V.REAL, reasoning="r", raw_output=render_completion(pred)),
            tampered_gt(),
        )
        # cls 0, method 0, loc 0, ocr 0, format 1
        assert (vec.r_cls, vec.r_method, vec.r_loc, vec.r_ocr, vec.r_format) == (0, 0, 0.0, 0.0, 1)
        assert vec.composite == 1.0

    def test_raw_output_drives_format(self):
        pred = PredictionRecord(
            id="x", verdict=V.REAL, reasoning="r", raw_output="<answer>broken"
        )
        vec = reward_all(pred, real_gt())
        assert vec.r_format == 0
        assert vec.composite == 1.0  # cls only

    def test_id_mismatch(self):
        with pytest.raises(IdMismatch):
            reward_all(PredictionRecord(id="a", verdict=V.REAL, reasoning="r"), real_gt("b"))

    def test_weights(self):
        weights = RewardWeights.parse("cls=2,format=0.5")
        vec = reward_all(
            PredictionRecord(id="x", verdict=V.REAL, reasoning="r"), real_gt(), weights
        )
        assert vec.composite == 2.5

    def test_weight_parse_rejects_unknown(self):
        with pytest.raises(ValueError):
            RewardWeights.parse("bogus=1")
        with pytest.raises(ValueError):
            RewardWeights(cls=-1)

    def test_determinism_bit_identical(self):
        rng = random.Random(5)
        from conftest import random_prediction

        gt = tampered_gt()
        for i in range(50):
            pred = random_prediction(rng, "x")
            a = reward_all(pred, gt)
            b = reward_all(pred, gt)
            assert a == b

    def test_components_always_in_unit_interval(self, rng):
        from conftest import random_prediction

        gts = [tampered_gt(), real_gt()]
        for i in range(300):
            pred = random_prediction(rng, "x")
            vec = reward_all(pred, gts[i % 2])
            for value in (vec.r_cls, vec.r_method, vec.r_loc, vec.r_ocr, vec.r_format):
                if value is not None:
                    assert 0.0 <= value <= 1.0
            assert 0.0 <= vec.composite <= 5.0


class TestGroupAdvantages:
    def test_alternating_rewards(self):
        assert group_advantages([1, 0, 1, 0]) == [1.0, -1.0, 1.0, -1.0]

    def test_constant_group_is_all_zero(self):
        assert group_advantages([3.5, 3.5, 3.5, 3.5]) == [0.0, 0.0, 0.0, 0.0]

    def test_singleton_rejected(self):
        with pytest.raises(GroupTooSmall):
            group_advantages([3])

    def test_sum_zero_and_unit_std(self, rng):
        for _ in range(300):
            group = [rng.uniform(0, 5) for _ in range(rng.randint(2, 16))]
            adv = group_advantages(group)
            assert abs(sum(adv)) < 1e-9
            if max(group) - min(group) > 1e-6:
                n = len(adv)
                std = math.sqrt(sum(a * a for a in adv) / n)
                assert std == pytest.approx(1.0, abs=1e-9)
