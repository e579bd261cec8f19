import numpy as np
import pytest

from tetradforge.corpus import BinaryMask, RasterImage
from tetradforge.errors import DimensionMismatch, EmptyInput, ZeroVector
from tetradforge.metrics import clip_score, frechet_distance, inception_score, mask_eval, mse

from conftest import random_image, random_mask


def closed_form_frechet(mu1, cov1, mu2, cov2) -> float:
    """Independent oracle: Gaussian Frechet distance via scipy sqrtm."""
    from scipy import linalg

    cross = linalg.sqrtm(cov1 @ cov2)
    if np.iscomplexobj(cross):
        cross = cross.real
    diff = mu1 - mu2
    return float(diff @ diff + np.trace(cov1) + np.trace(cov2) - 2 * np.trace(cross))


class TestMse:
    def test_identical_is_zero(self, rng):
        img = random_image(rng, 16, 16)
        assert mse(img, img) == 0.0

    def test_constant_offset(self):
        a = RasterImage(np.full((8, 8, 3), 100, dtype=np.uint8))
        b = RasterImage(np.full((8, 8, 3), 110, dtype=np.uint8))
        assert mse(a, b) == 100.0

    def test_matches_direct_sum_oracle(self, rng):
        a, b = random_image(rng, 12, 12), random_image(rng, 12, 12)
        total = 0.0
        for y in range(12):
            for x in range(12):
                for c in range(3):
                    total += (float(a.pixels[y, x, c]) - float(b.pixels[y, x, c])) ** 2
        assert mse(a, b) == pytest.approx(total / (12 * 12 * 3), abs=1e-9)

    def test_dim_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            mse(random_image(rng, 8, 8), random_image(rng, 8, 9))


class TestFrechet:
    def test_identical_sets_zero(self, rng):
        emb = rng.standard_normal((64, 8))
        assert abs(frechet_distance(emb, emb)) <= 1e-6

    def test_known_gaussians_close_to_closed_form(self):
        rng = np.random.default_rng(42)
        dim, n = 8, 10_000
        mu1 = np.zeros(dim)
        mu2 = np.full(dim, 2.0 / np.sqrt(dim))  # ||mu1 - mu2||^2 = 4
        cov = np.eye(dim)
        a = rng.multivariate_normal(mu1, cov, size=n)
        b = rng.multivariate_normal(mu2, cov, size=n)
        got = frechet_distance(a, b)
        assert got == pytest.approx(4.0, rel=0.05)

    def test_distinct_covariances_match_oracle(self):
        rng = np.random.default_rng(43)
        dim, n = 6, 20_000
        mu1, mu2 = np.zeros(dim), np.ones(dim) * 0.5
        q = rng.standard_normal((dim, dim))
        cov1 = np.eye(dim)
        cov2 = 0.5 * np.eye(dim) + 0.1 * (q @ q.T) / dim
        a = rng.multivariate_normal(mu1, cov1, size=n)
        b = rng.multivariate_normal(mu2, cov2, size=n)
        want = closed_form_frechet(mu1, cov1, mu2, cov2)
        assert frechet_distance(a, b) == pytest.approx(want, rel=0.05)

    def test_symmetric(self, rng):
        a = rng.standard_normal((50, 5))
        b = rng.standard_normal((60, 5)) + 1.0
        assert frechet_distance(a, b) == pytest.approx(frechet_distance(b, a), abs=1e-9)

    def test_permutation_invariant(self, rng):
        a = rng.standard_normal((40, 4))
        b = rng.standard_normal((40, 4))
        perm = rng.permutation(40)
        assert frechet_distance(a, b) == pytest.approx(frechet_distance(a[perm], b), abs=1e-9)

    def test_non_negative(self, rng):
        for _ in range(10):
            a = rng.standard_normal((30, 3))
            b = rng.standard_normal((30, 3)) * rng.uniform(0.5, 2.0)
            assert frechet_distance(a, b) >= 0.0

    def test_too_few_vectors(self, rng):
        with pytest.raises(EmptyInput):
            frechet_distance(rng.standard_normal((1, 4)), rng.standard_normal((10, 4)))

    def test_dim_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            frechet_distance(rng.standard_normal((10, 4)), rng.standard_normal((10, 5)))


class TestInceptionScore:
    def test_identical_rows_is_one(self):
        rows = np.tile(np.array([2.0, -1.0, 0.5, 0.0]), (30, 1))
        assert inception_score(rows) == pytest.approx(1.0, abs=1e-12)

    def test_one_hot_uniform_is_k(self):
        k = 7
        rows = np.vstack([np.eye(k) * 100.0 for _ in range(3)])
        assert inception_score(rows) == pytest.approx(k, abs=1e-9)

    def test_matches_direct_formula_oracle(self, rng):
        rows = rng.standard_normal((40, 6))
        # Plain-python oracle over explicit softmaxes.
        total_kl = 0.0
        ps = []
        for row in rows:
            e = np.exp(row - row.max())
            ps.append(e / e.sum())
        marginal = np.mean(ps, axis=0)
        for p in ps:
            total_kl += float(np.sum(p * (np.log(p) - np.log(marginal))))
        want = float(np.exp(total_kl / len(ps)))
        assert inception_score(rows) == pytest.approx(want, abs=1e-9)

    def test_bounded_by_class_count(self, rng):
        for _ in range(10):
            rows = rng.standard_normal((25, 5)) * 3
            s = inception_score(rows)
            assert 1.0 - 1e-9 <= s <= 5.0 + 1e-9

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            inception_score(np.zeros((0, 4)))


class TestClipScore:
    def test_identical_is_one(self, rng):
        v = rng.standard_normal(32)
        assert clip_score(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_is_zero(self):
        a = np.array([1.0, 0.0, 0.0])
        b = np.array([0.0, 1.0, 0.0])
        assert clip_score(a, b) == 0.0

    def test_matches_dot_norm_oracle(self, rng):
        a, b = rng.standard_normal(16), rng.standard_normal(16)
        dot = sum(float(x) * float(y) for x, y in zip(a, b))
        na = sum(float(x) ** 2 for x in a) ** 0.5
        nb = sum(float(y) ** 2 for y in b) ** 0.5
        assert clip_score(a, b) == pytest.approx(dot / (na * nb), abs=1e-12)

    def test_scale_invariant(self, rng):
        a, b = rng.standard_normal(8), rng.standard_normal(8)
        assert clip_score(3.7 * a, b) == pytest.approx(clip_score(a, 0.2 * b), abs=1e-12)

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVector):
            clip_score(np.zeros(4), np.ones(4))


class TestMaskEval:
    def test_identical(self, rng):
        m = random_mask(rng, 10, 10)
        assert mask_eval(m, m) == 1.0

    def test_disjoint(self):
        a = np.zeros((6, 6), dtype=bool)
        b = np.zeros((6, 6), dtype=bool)
        a[0, 0] = True
        b[5, 5] = True
        assert mask_eval(BinaryMask(a), BinaryMask(b)) == 0.0
