"""Filter cascade tests, including the hand-built one-reject-per-filter corpus."""

import numpy as np
import pytest

from tetradforge.corpus import BinaryMask, MaskCandidate, RasterImage
from tetradforge.errors import EmptyMask
from tetradforge.qc import (
    CASCADE_ORDER,
    FilterThresholds,
    filter_aspect_ratio,
    filter_classifier,
    filter_color_std,
    filter_components,
    filter_relative_size,
    run_cascade,
)


def rect_mask(h, w, y0, x0, y1, x1):
    bits = np.zeros((h, w), dtype=bool)
    bits[y0:y1, x0:x1] = True
    return BinaryMask(bits)


class TestRelativeSize:
    def test_too_small_fails(self):
        m = rect_mask(100, 100, 0, 0, 25, 20)  # 500 px of 10000 -> 0.05
        v = filter_relative_size(m, 100 * 100, 0.1, 0.75)
        assert not v.passed and v.measured == 0.05

    def test_mid_range_passes(self):
        m = rect_mask(100, 100, 0, 0, 50, 100)  # 0.5
        assert filter_relative_size(m, 10000, 0.1, 0.75).passed

    def test_lower_boundary_inclusive(self):
        m = rect_mask(100, 100, 0, 0, 10, 100)  # exactly 0.1
        v = filter_relative_size(m, 10000, 0.1, 0.75)
        assert v.measured == 0.1 and v.passed

    def test_upper_boundary_inclusive(self):
        m = rect_mask(100, 100, 0, 0, 75, 100)  # exactly 0.75
        assert filter_relative_size(m, 10000, 0.1, 0.75).passed


class TestAspectRatio:
    def test_four_to_one_fails(self):
        v = filter_aspect_ratio(rect_mask(500, 500, 0, 0, 100, 400), 3.0)
        assert not v.passed and v.measured == 4.0

    def test_two_to_one_passes(self):
        assert filter_aspect_ratio(rect_mask(500, 500, 0, 0, 100, 200), 3.0).passed

    def test_square_passes(self):
        v = filter_aspect_ratio(rect_mask(500, 500, 0, 0, 100, 100), 3.0)
        assert v.passed and v.measured == 1.0

    def test_exact_boundary_inclusive(self):
        assert filter_aspect_ratio(rect_mask(500, 500, 0, 0, 30, 90), 3.0).passed

    def test_empty_mask_raises(self):
        with pytest.raises(EmptyMask):
            filter_aspect_ratio(BinaryMask(np.zeros((4, 4), dtype=bool)))


def blobs_mask(n, h=40, w=40):
    bits = np.zeros((h, w), dtype=bool)
    for i in range(n):
        y, x = 2 + 7 * (i // 5), 2 + 7 * (i % 5)
        bits[y : y + 3, x : x + 3] = True
    return BinaryMask(bits)


class TestComponents:
    def test_five_blobs_fail(self):
        v = filter_components(blobs_mask(5), 4)
        assert not v.passed and v.measured == 5.0

    def test_one_blob_passes(self):
        assert filter_components(blobs_mask(1), 4).passed

    def test_four_blobs_inclusive(self):
        assert filter_components(blobs_mask(4), 4).passed


def gray_image(h, w, value):
    return RasterImage(np.full((h, w, 3), value, dtype=np.uint8))


class TestColorStd:
    def test_constant_color_fails(self):
        img = gray_image(10, 10, 120)
        m = BinaryMask(np.ones((10, 10), dtype=bool))
        v = filter_color_std(img, m, 45.0)
        assert not v.passed and v.measured == 0.0

    def test_black_white_passes(self):
        arr = np.zeros((10, 10, 3), dtype=np.uint8)
        arr[5:, :] = 255
        v = filter_color_std(RasterImage(arr), BinaryMask(np.ones((10, 10), dtype=bool)), 45.0)
        assert v.passed and v.measured == 127.5

    def test_exact_boundary_inclusive(self):
        # Grays 100 and 190, half each: population std is exactly 45.
        arr = np.full((10, 10, 3), 100, dtype=np.uint8)
        arr[5:, :] = 190
        v = filter_color_std(RasterImage(arr), BinaryMask(np.ones((10, 10), dtype=bool)), 45.0)
        assert v.measured == 45.0 and v.passed

    def test_textured_crop_matches_oracle(self, rng):
        img = RasterImage(rng.integers(0, 256, (12, 12, 3), dtype=np.uint8))
        m = BinaryMask(rng.random((12, 12)) < 0.6)
        luma = (
            299 * img.pixels[:, :, 0].astype(float)
            + 587 * img.pixels[:, :, 1].astype(float)
            + 114 * img.pixels[:, :, 2].astype(float)
        ) / 1000.0
        vals = luma[m.bits]
        expected = float(np.sqrt(((vals - vals.mean()) ** 2).mean()))
        v = filter_color_std(img, m, 45.0)
        assert v.measured == pytest.approx(expected, abs=1e-9)
        assert v.passed == (expected >= 45.0)


class TestClassifier:
    def test_below_threshold_fails(self):
        assert not filter_classifier(0.69, 0.7).passed

    def test_exact_boundary_inclusive(self):
        assert filter_classifier(0.70, 0.7).passed

    def test_top_score_passes(self):
        assert filter_classifier(1.0, 0.7).passed


def build_designed_corpus():
    """One candidate uniquely rejected by each filter plus one full passer.

    Image is 100x100; textured stripes give every mask enough color variance
    except the one designed to fail ColorStd.
    """
    rng = np.random.default_rng(99)
    arr = rng.integers(0, 256, (100, 100, 3), dtype=np.uint8)
    arr[55:95, 55:95] = 130  # flat zone for the ColorStd reject
    img = RasterImage(arr)

    def cand(mask):
        return MaskCandidate(mask=mask, score=0.0, source_id="designed")

    # 5 blobs of 15x15 in a compact layout: area 0.1125, bbox aspect < 2.
    big_blobs = np.zeros((100, 100), dtype=bool)
    for y, x in ((10, 10), (10, 40), (10, 70), (40, 10), (40, 40)):
        big_blobs[y : y + 15, x : x + 15] = True

    masks = {
        "fail_size": rect_mask(100, 100, 0, 0, 22, 22),          # 0.0484 < 0.1, square
        "fail_aspect": rect_mask(100, 100, 0, 0, 20, 84),        # ratio 4.2, size 0.168
        "fail_components": BinaryMask(big_blobs),
        "fail_std": rect_mask(100, 100, 55, 55, 95, 95),         # flat zone, size 0.16
        "fail_classifier": rect_mask(100, 100, 30, 0, 70, 30),   # fine mask, low score
        "pass_all": rect_mask(100, 100, 10, 10, 50, 50),
    }

    order = ["fail_size", "fail_aspect", "fail_components", "fail_std", "fail_classifier", "pass_all"]
    cands = [cand(masks[k]) for k in order]
    scores = [0.9, 0.9, 0.9, 0.9, 0.69, 0.9]
    return img, cands, scores, order


class TestCascade:
    def test_empty_input(self):
        img = gray_image(10, 10, 50)
        survivors, report = run_cascade(img, [], [])
        assert survivors == [] and report.total_in == 0
        assert all(s.survivors == 0 and s.reserved_pct == 0.0 for s in report.stages)

    def test_designed_corpus_counts(self):
        img, cands, scores, order = build_designed_corpus()
        survivors, report = run_cascade(img, cands, scores)
        assert survivors == [cands[order.index("pass_all")]]
        assert [s.survivors for s in report.stages] == [5, 4, 3, 2, 1]
        assert report.total_in == 6
        # Each designed candidate fails exactly its own filter.
        for idx, name in enumerate(order[:-1]):
            verdicts = report.candidate_verdicts[idx]
            failed = [v.filter_name for v in verdicts if not v.passed]
            assert failed == [CASCADE_ORDER[idx]], f"{name}: {failed}"
        assert all(v.passed for v in report.candidate_verdicts[-1])

    def test_reserved_percentages_non_increasing(self, rng):
        img = RasterImage(rng.integers(0, 256, (50, 50, 3), dtype=np.uint8))
        cands = []
        scores = []
        for _ in range(20):
            y0, x0 = rng.integers(0, 30, 2)
            h, w = rng.integers(5, 20, 2)
            cands.append(
                MaskCandidate(
                    mask=rect_mask(50, 50, int(y0), int(x0), int(y0 + h), int(x0 + w)),
                    score=0.5,
                    source_id="s",
                )
            )
            scores.append(float(rng.random()))
        _, report = run_cascade(img, cands, scores)
        pcts = report.reserved_percentages()
        assert all(a >= b for a, b in zip(pcts, pcts[1:]))

    def test_survivors_equal_intersection_of_pass_sets(self, rng):
        img, cands, scores, _ = build_designed_corpus()
        survivors, report = run_cascade(img, cands, scores)
        by_intersection = [
            c
            for c, vs in zip(cands, report.candidate_verdicts)
            if all(v.passed for v in vs)
        ]
        assert survivors == by_intersection

    def test_scores_length_checked(self):
        img, cands, scores, _ = build_designed_corpus()
        with pytest.raises(ValueError):
            run_cascade(img, cands, scores[:-1])
