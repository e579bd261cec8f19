"""Foreground quality-control cascade with reserved-percentage reporting.

Five filters run in a fixed order (relative size, aspect ratio, component
count, color std, classifier score). Each verdict is independent of cascade
position; only the cumulative report depends on the order. Every threshold is
inclusive on the keep side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import BinaryMask, MaskCandidate, RasterImage, mask_bbox
from .maskops import connected_components, masked_color_std

CASCADE_ORDER = (
    "RelativeSize",
    "AspectRatio",
    "ComponentCount",
    "ColorStd",
    "ClassifierScore",
)


@dataclass(frozen=True)
class FilterVerdict:
    filter_name: str
    passed: bool
    measured: float
    threshold: str  # display form, e.g. "[0.1, 0.75]" or ">= 0.7"


@dataclass(frozen=True)
class FilterThresholds:
    size_lo: float = 0.1
    size_hi: float = 0.75
    aspect_max: float = 3.0
    components_max: int = 4
    color_std_min: float = 45.0
    classifier_min: float = 0.7

    def __post_init__(self):
        if not (0.0 <= self.size_lo < self.size_hi <= 1.0):
            raise ValueError("size bounds must satisfy 0 <= lo < hi <= 1")
        if self.aspect_max < 1 or self.components_max < 1:
            raise ValueError("aspect_max and components_max must be >= 1")
        if not (0.0 <= self.classifier_min <= 1.0):
            raise ValueError("classifier_min outside [0, 1]")


@dataclass
class StageCount:
    filter_name: str
    survivors: int
    reserved_pct: float


@dataclass
class FilterReport:
    """Cumulative cascade statistics plus per-candidate verdicts for triage."""

    total_in: int
    stages: list[StageCount]
    candidate_verdicts: list[list[FilterVerdict]] = field(default_factory=list)

    def reserved_percentages(self) -> list[float]:
        return [s.reserved_pct for s in self.stages]


def filter_relative_size(
    mask: BinaryMask, image_area: int, lo: float = 0.1, hi: float = 0.75
) -> FilterVerdict:
    """Keep masks covering between lo and hi of the source image, inclusive."""
    if image_area <= 0:
        raise ValueError("image_area must be positive")
    ratio = mask.area / image_area
    return FilterVerdict("RelativeSize", lo <= ratio <= hi, ratio, f"[{lo}, {hi}]")


def filter_aspect_ratio(mask: BinaryMask, max_ratio: float = 3.0) -> FilterVerdict:
    """Keep masks whose bbox is not overly thin: max(w,h)/min(w,h) <= max_ratio."""
    box = mask_bbox(mask)  # raises EmptyMask
    ratio = max(box.width, box.height) / min(box.width, box.height)
    return FilterVerdict("AspectRatio", ratio <= max_ratio, ratio, f"<= {max_ratio}")


def filter_components(mask: BinaryMask, max_components: int = 4) -> FilterVerdict:
    count = connected_components(mask)
    return FilterVerdict("ComponentCount", count <= max_components, float(count), f"<= {max_components}")


def filter_color_std(
    image: RasterImage, mask: BinaryMask, min_std: float = 45.0
) -> FilterVerdict:
    std = masked_color_std(image, mask)  # raises EmptyMask / DimensionMismatch
    return FilterVerdict("ColorStd", std >= min_std, std, f">= {min_std}")


def filter_classifier(score: float, min_score: float = 0.7) -> FilterVerdict:
    """Gate on an externally supplied quality score (see ml gateway)."""
    if not (0.0 <= score <= 1.0):
        raise ValueError(f"classifier score {score} outside [0, 1]")
    return FilterVerdict("ClassifierScore", score >= min_score, score, f">= {min_score}")


def candidate_verdicts(
    image: RasterImage,
    candidate: MaskCandidate,
    score: float,
    config: FilterThresholds,
) -> list[FilterVerdict]:
    """All five verdicts for one candidate, in cascade order."""
    return [
        filter_relative_size(candidate.mask, image.width * image.height, config.size_lo, config.size_hi),
        filter_aspect_ratio(candidate.mask, config.aspect_max),
        filter_components(candidate.mask, config.components_max),
        filter_color_std(image, candidate.mask, config.color_std_min),
        filter_classifier(score, config.classifier_min),
    ]


def run_cascade(
    image: RasterImage,
    candidates: list[MaskCandidate],
    scores: list[float],
    config: FilterThresholds = FilterThresholds(),
) -> tuple[list[MaskCandidate], FilterReport]:
    """Apply all filters; survivors pass every one.

    Candidates are expected NMS-deduplicated and nonempty (EmptyMask
    propagates otherwise). The report carries, for each stage, how many
    candidates pass every filter up to and including it.
    """
    if len(scores) != len(candidates):
        raise ValueError("need one classifier score per candidate")

    all_verdicts = [
        candidate_verdicts(image, cand, score, config)
        for cand, score in zip(candidates, scores)
    ]

    total = len(candidates)
    stages: list[StageCount] = []
    for k, name in enumerate(CASCADE_ORDER):
        n = sum(1 for vs in all_verdicts if all(v.passed for v in vs[: k + 1]))
        stages.append(StageCount(name, n, n / total if total else 0.0))

    survivors = [
        cand
        for cand, vs in zip(candidates, all_verdicts)
        if all(v.passed for v in vs)
    ]
    return survivors, FilterReport(total_in=total, stages=stages, candidate_verdicts=all_verdicts)
