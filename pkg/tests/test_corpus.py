import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tetradforge.corpus import (
    BBox,
    BinaryMask,
    MaskCandidate,
    RasterImage,
    RleMask,
    TetradRecord,
    load_image,
    load_masked_image,
    mask_bbox,
    rle_decode,
    rle_encode,
    save_image,
    save_masked_image,
)
from tetradforge.errors import CountMismatch, DimensionMismatch, EmptyMask

from conftest import random_mask


def bbox_scan_oracle(mask: BinaryMask) -> tuple[int, int, int, int]:
    """Exhaustive per-pixel min/max scan, independent of mask_bbox."""
    xs, ys = [], []
    for y in range(mask.height):
        for x in range(mask.width):
            if mask.bits[y, x]:
                xs.append(x)
                ys.append(y)
    return min(xs), min(ys), max(xs) + 1, max(ys) + 1


class TestRle:
    def test_all_zero_is_single_run(self):
        m = BinaryMask(np.zeros((4, 4), dtype=bool))
        assert rle_encode(m).counts == (16,)

    def test_all_one_has_leading_empty_zero_run(self):
        m = BinaryMask(np.ones((4, 4), dtype=bool))
        assert rle_encode(m).counts == (0, 16)

    def test_decode_all_zero(self):
        m = rle_decode(RleMask(width=4, height=4, counts=(16,)))
        assert not m.bits.any()

    def test_decode_all_one(self):
        m = rle_decode(RleMask(width=4, height=4, counts=(0, 16)))
        assert m.bits.all()

    def test_count_mismatch_rejected(self):
        with pytest.raises(CountMismatch):
            RleMask(width=4, height=4, counts=(15,))

    def test_negative_count_rejected(self):
        with pytest.raises(CountMismatch):
            RleMask(width=4, height=4, counts=(-1, 17))

    def test_column_major_convention(self):
        # Single set pixel at row 1, col 0 of a 3x2 mask: column-major flat
        # index is 1, so runs are [1, 1, 4].
        bits = np.zeros((3, 2), dtype=bool)
        bits[1, 0] = True
        assert rle_encode(BinaryMask(bits)).counts == (1, 1, 4)

    def test_round_trip_random_masks(self):
        # Dense bit-comparison oracle over 1000 random masks.
        rng = np.random.default_rng(7)
        for _ in range(1000):
            h = int(rng.integers(1, 33))
            w = int(rng.integers(1, 33))
            m = random_mask(rng, h, w, density=float(rng.random()))
            back = rle_decode(rle_encode(m))
            assert np.array_equal(back.bits, m.bits)

    @given(
        st.integers(1, 24),
        st.integers(1, 24),
        st.integers(0, 2**32 - 1),
        st.floats(0.0, 1.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_round_trip_property(self, h, w, seed, density):
        m = random_mask(np.random.default_rng(seed), h, w, density)
        assert np.array_equal(rle_decode(rle_encode(m)).bits, m.bits)

    def test_json_round_trip(self):
        rng = np.random.default_rng(3)
        m = random_mask(rng, 9, 13)
        rle = rle_encode(m)
        again = RleMask.from_json(rle.to_json())
        assert again == rle
        assert np.array_equal(rle_decode(again).bits, m.bits)


class TestMaskBbox:
    def test_single_pixel(self):
        bits = np.zeros((8, 8), dtype=bool)
        bits[3, 2] = True  # (x=2, y=3)
        assert mask_bbox(BinaryMask(bits)) == BBox(2, 3, 3, 4)

    def test_full_mask(self):
        m = BinaryMask(np.ones((5, 7), dtype=bool))
        assert mask_bbox(m) == BBox(0, 0, 7, 5)

    def test_empty_mask_raises(self):
        with pytest.raises(EmptyMask):
            mask_bbox(BinaryMask(np.zeros((4, 4), dtype=bool)))

    def test_matches_scan_oracle(self, rng):
        for _ in range(50):
            m = random_mask(rng, 12, 17, density=0.05)
            if m.is_empty():
                continue
            box = mask_bbox(m)
            assert (box.x0, box.y0, box.x1, box.y1) == bbox_scan_oracle(m)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_box_contains_all_set_pixels_and_is_tight(self, seed):
        m = random_mask(np.random.default_rng(seed), 10, 10, 0.2)
        if m.is_empty():
            return
        box = mask_bbox(m)
        ys, xs = np.nonzero(m.bits)
        assert (xs >= box.x0).all() and (xs < box.x1).all()
        assert (ys >= box.y0).all() and (ys < box.y1).all()
        # Tightness: each edge touches at least one set pixel.
        assert (xs == box.x0).any() and (xs == box.x1 - 1).any()
        assert (ys == box.y0).any() and (ys == box.y1 - 1).any()


class TestTypes:
    def test_image_validation(self):
        with pytest.raises(ValueError):
            RasterImage(np.zeros((4, 4, 2), dtype=np.uint8))
        with pytest.raises(ValueError):
            RasterImage(np.zeros((4, 4, 3), dtype=np.float32))

    def test_image_immutable(self):
        img = RasterImage(np.zeros((4, 4, 3), dtype=np.uint8))
        with pytest.raises(ValueError):
            img.pixels[0, 0, 0] = 1

    def test_gray_luma_is_exact(self):
        arr = np.full((2, 2, 3), 145, dtype=np.uint8)
        assert RasterImage(arr).luma()[0, 0] == 145.0

    def test_candidate_score_range(self):
        m = BinaryMask(np.ones((2, 2), dtype=bool))
        with pytest.raises(ValueError):
            MaskCandidate(mask=m, score=1.5, source_id="a")

    def test_tetrad_mask_must_match_gt_dims(self):
        m = BinaryMask(np.ones((4, 4), dtype=bool))
        with pytest.raises(DimensionMismatch):
            TetradRecord(
                id="r", fg_path="f.png", bg_path="b.png", gt_path="g.png",
                gt_size=(5, 5), mask=m, prompt=None,
            )

    def test_tetrad_refs_distinct(self):
        m = BinaryMask(np.ones((4, 4), dtype=bool))
        with pytest.raises(ValueError):
            TetradRecord(
                id="r", fg_path="same.png", bg_path="same.png", gt_path="g.png",
                gt_size=(4, 4), mask=m, prompt=None,
            )


class TestPngIo:
    def test_rgb_round_trip(self, tmp_path, rng):
        img = RasterImage(rng.integers(0, 256, (13, 9, 3), dtype=np.uint8))
        p = tmp_path / "x.png"
        save_image(img, p)
        assert np.array_equal(load_image(p).pixels, img.pixels)

    def test_gray_round_trip(self, tmp_path, rng):
        img = RasterImage(rng.integers(0, 256, (6, 8, 1), dtype=np.uint8))
        p = tmp_path / "g.png"
        save_image(img, p)
        back = load_image(p)
        assert back.channels == 1
        assert np.array_equal(back.pixels, img.pixels)

    def test_masked_round_trip(self, tmp_path, rng):
        img = RasterImage(rng.integers(0, 256, (10, 10, 3), dtype=np.uint8))
        mask = random_mask(rng, 10, 10)
        p = tmp_path / "fg.png"
        save_masked_image(img, mask, p)
        back_img, back_mask = load_masked_image(p)
        assert np.array_equal(back_img.pixels, img.pixels)
        assert np.array_equal(back_mask.bits, mask.bits)

    def test_masked_dim_mismatch(self, tmp_path, rng):
        img = RasterImage(rng.integers(0, 256, (10, 10, 3), dtype=np.uint8))
        with pytest.raises(DimensionMismatch):
            save_masked_image(img, random_mask(rng, 9, 10), tmp_path / "bad.png")
