"""Geometric mask algebra: IoU, NMS, components, dilation, color statistics.

Pure functions over immutable inputs; safe to call concurrently.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .corpus import BinaryMask, MaskCandidate, RasterImage, mask_bbox
from .errors import DimensionMismatch, EmptyMask, MixedSources

# 8-connectivity structuring element for component labeling.
_EIGHT = np.ones((3, 3), dtype=bool)


def mask_iou(a: BinaryMask, b: BinaryMask) -> float:
    """Intersection over union in [0, 1]; defined as 1.0 when both are empty."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"IoU needs equal dims, got {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    inter = int(np.logical_and(a.bits, b.bits).sum())
    union = int(np.logical_or(a.bits, b.bits).sum())
    if union == 0:
        return 1.0
    return inter / union


def nms(
    candidates: list[MaskCandidate],
    iou_threshold: float,
    containment_threshold: float | None = None,
) -> list[MaskCandidate]:
    """Greedy keep-by-descending-score suppression.

    A candidate is suppressed iff its IoU with an already-kept candidate
    exceeds the threshold (strictly). Ties in score are broken by lower input
    index so reruns are reproducible. The optional containment threshold
    additionally suppresses candidates whose intersection over their own
    smaller area exceeds it (sub-object masks); disabled by default.
    """
    if not candidates:
        return []
    if not (0.0 < iou_threshold <= 1.0):
        raise ValueError(f"iou_threshold {iou_threshold} outside (0, 1]")
    sources = {c.source_id for c in candidates}
    if len(sources) > 1:
        raise MixedSources(f"candidates span sources {sorted(sources)}")

    order = sorted(range(len(candidates)), key=lambda i: (-candidates[i].score, i))
    kept: list[MaskCandidate] = []
    for i in order:
        cand = candidates[i]
        suppressed = False
        for k in kept:
            if mask_iou(cand.mask, k.mask) > iou_threshold:
                suppressed = True
                break
            if containment_threshold is not None:
                inter = int(np.logical_and(cand.mask.bits, k.mask.bits).sum())
                smaller = min(cand.mask.area, k.mask.area)
                if smaller > 0 and inter / smaller > containment_threshold:
                    suppressed = True
                    break
        if not suppressed:
            kept.append(cand)
    return kept


def connected_components(mask: BinaryMask) -> int:
    """Number of 8-connected foreground components."""
    if mask.is_empty():
        return 0
    _, count = ndimage.label(mask.bits, structure=_EIGHT)
    return int(count)


def dilate(mask: BinaryMask, radius: float) -> BinaryMask:
    """Morphological dilation with a Euclidean disc; radius 0 is identity.

    Computed via the exact distance transform: a pixel is set iff some input
    pixel lies within `radius` (straight-line distance).
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius < 1 or mask.is_empty():
        return mask
    distance = ndimage.distance_transform_edt(~mask.bits)
    return BinaryMask(distance <= radius)


def masked_color_std(image: RasterImage, mask: BinaryMask) -> float:
    """Population standard deviation of 0-255 luma over the masked pixels."""
    if (mask.width, mask.height) != (image.width, image.height):
        raise DimensionMismatch("mask and image dimensions differ")
    if mask.is_empty():
        raise EmptyMask("color std needs at least one masked pixel")
    values = image.luma()[mask.bits]
    return float(np.sqrt(np.mean((values - values.mean()) ** 2)))


__all__ = [
    "mask_iou",
    "nms",
    "connected_components",
    "dilate",
    "masked_color_std",
    "mask_bbox",
]
