"""Evaluation metrics over images, masks, and caller-supplied embeddings.

The Frechet distance operates on embedding sets rather than reaching into any
specific network, which keeps the numeric core testable against closed-form
Gaussian oracles. MSE is reported on the 0-255 sample scale.
"""

from __future__ import annotations

import numpy as np

from .corpus import BinaryMask, RasterImage
from .errors import DimensionMismatch, EmptyInput, NumericalFailure, ZeroVector
from .maskops import mask_iou

EIG_CLAMP_TOL = 1e-8


def mse(a: RasterImage, b: RasterImage) -> float:
    """Mean squared per-sample difference on the 0-255 scale."""
    if a.pixels.shape != b.pixels.shape:
        raise DimensionMismatch(f"mse needs equal shapes, got {a.pixels.shape} vs {b.pixels.shape}")
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    return float(np.mean(diff * diff))


def _sym_sqrtm(matrix: np.ndarray) -> np.ndarray:
    """Square root of a symmetric PSD matrix via eigendecomposition.

    Eigenvalues in [-EIG_CLAMP_TOL * scale, 0) are treated as numerical noise
    and clamped; anything more negative means the input was not PSD.
    """
    try:
        vals, vecs = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolve failed: {exc}") from exc
    scale = max(1.0, float(np.abs(vals).max()))
    if vals.min() < -EIG_CLAMP_TOL * scale:
        raise NumericalFailure(f"matrix indefinite: min eigenvalue {vals.min()}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(emb_a: np.ndarray, emb_b: np.ndarray) -> float:
    """||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)).

    The cross term uses the symmetric reduction
    Tr((S_a S_b)^(1/2)) = Tr((B S_a B)^(1/2)) with B = S_b^(1/2), so only
    symmetric eigendecompositions are needed.
    """
    emb_a = np.asarray(emb_a, dtype=np.float64)
    emb_b = np.asarray(emb_b, dtype=np.float64)
    if emb_a.ndim != 2 or emb_b.ndim != 2 or emb_a.shape[1] != emb_b.shape[1]:
        raise DimensionMismatch(f"embedding sets {emb_a.shape} vs {emb_b.shape}")
    if emb_a.shape[0] < 2 or emb_b.shape[0] < 2:
        raise EmptyInput("need at least 2 vectors per set")

    mu_a, mu_b = emb_a.mean(axis=0), emb_b.mean(axis=0)
    cov_a = np.cov(emb_a, rowvar=False)
    cov_b = np.cov(emb_b, rowvar=False)

    b_sqrt = _sym_sqrtm(cov_b)
    cross = _sym_sqrtm(b_sqrt @ cov_a @ b_sqrt)
    diff = mu_a - mu_b
    value = float(diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(cross))
    # Exact-zero case accumulates tiny negatives through the eigensolves.
    return max(value, 0.0) if value > -1e-6 else value


def inception_score(logit_rows: np.ndarray) -> float:
    """exp(mean KL(softmax(row) || marginal)), single split."""
    logits = np.asarray(logit_rows, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[0] == 0:
        raise EmptyInput("need a nonempty (n, k) array of logits")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_p = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    p = np.exp(log_p)
    marginal = p.mean(axis=0)
    kl = (p * (log_p - np.log(marginal))).sum(axis=1)
    return float(np.exp(kl.mean()))


def clip_score(emb_region: np.ndarray, emb_reference: np.ndarray) -> float:
    """Cosine similarity between an edited-region embedding and its reference."""
    a = np.asarray(emb_region, dtype=np.float64)
    b = np.asarray(emb_reference, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"vectors {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine undefined for zero-norm vector")
    return float(a @ b / (na * nb))


def mask_eval(pred: BinaryMask, gt: BinaryMask) -> float:
    """Insertion-mask IoU between a prediction and the ground truth."""
    return mask_iou(pred, gt)
