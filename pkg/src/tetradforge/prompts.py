"""Position prompts: derivation from masks, rasterization, augmentation.

All four prompt kinds (point, box, mask, null) rasterize into one 1-channel
position map at latent resolution: points become Gaussian heatmaps with peak
1.0, boxes fill with ones inside, masks downsample to binary maps (soft after
feathering), and the null prompt is an all-one map meaning any position.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import ndimage

from .corpus import BBox, BinaryMask, mask_bbox
from .errors import DimensionMismatch, EmptyMask, OutOfBounds
from .maskops import dilate

LATENT_FACTOR = 8  # spatial downsampling of the 4-channel latent grid
HEATMAP_SIGMA_FRAC = 0.05  # sigma as a fraction of min(map side)


@dataclass(frozen=True)
class PointPrompt:
    x: int
    y: int


@dataclass(frozen=True)
class BoxPrompt:
    box: BBox


@dataclass(frozen=True)
class MaskPrompt:
    """Mask prompt; feather_sigma > 0 (image-pixel units) softens it at rasterization."""

    mask: BinaryMask
    feather_sigma: float = 0.0


@dataclass(frozen=True)
class NullPrompt:
    pass


PositionPrompt = Union[PointPrompt, BoxPrompt, MaskPrompt, NullPrompt]


@dataclass(frozen=True, eq=False)
class PositionMap:
    """1-channel guidance map at latent resolution, values in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("position map must be 2-D")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("position map values must lie in [0, 1]")
        v = np.ascontiguousarray(v)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class PromptVariants:
    point: PointPrompt
    box: BoxPrompt
    mask: MaskPrompt
    null: NullPrompt


def latent_map_size(image_size: tuple[int, int], factor: int = LATENT_FACTOR) -> tuple[int, int]:
    w, h = image_size
    return max(1, w // factor), max(1, h // factor)


def derive_prompts(
    mask: BinaryMask,
    point_mode: str = "centroid",
    rng: np.random.Generator | None = None,
) -> PromptVariants:
    """All four prompt variants for one ground-truth mask.

    point_mode "centroid" rounds the pixel-average location (half up);
    "interior" draws a uniform set pixel and needs an rng.
    """
    if mask.is_empty():
        raise EmptyMask("cannot derive prompts from an empty mask")
    ys, xs = np.nonzero(mask.bits)
    if point_mode == "centroid":
        px = int(np.floor(xs.mean() + 0.5))
        py = int(np.floor(ys.mean() + 0.5))
    elif point_mode == "interior":
        if rng is None:
            raise ValueError("interior point mode needs an rng")
        i = int(rng.integers(len(xs)))
        px, py = int(xs[i]), int(ys[i])
    else:
        raise ValueError(f"unknown point_mode {point_mode!r}")
    return PromptVariants(
        point=PointPrompt(px, py),
        box=BoxPrompt(mask_bbox(mask)),
        mask=MaskPrompt(mask),
        null=NullPrompt(),
    )


def _check_point(x: int, y: int, image_size: tuple[int, int]) -> None:
    w, h = image_size
    if not (0 <= x < w and 0 <= y < h):
        raise OutOfBounds(f"point ({x},{y}) outside {w}x{h}")


def _check_box(box: BBox, image_size: tuple[int, int]) -> None:
    w, h = image_size
    if box.x1 > w or box.y1 > h:
        raise OutOfBounds(f"box {box} outside {w}x{h}")


def _nn_downsample(values: np.ndarray, map_size: tuple[int, int]) -> np.ndarray:
    mw, mh = map_size
    h, w = values.shape
    src_y = np.minimum(((np.arange(mh) + 0.5) * h / mh).astype(int), h - 1)
    src_x = np.minimum(((np.arange(mw) + 0.5) * w / mw).astype(int), w - 1)
    return values[np.ix_(src_y, src_x)]


def rasterize(
    prompt: PositionPrompt,
    image_size: tuple[int, int],
    map_size: tuple[int, int] | None = None,
) -> PositionMap:
    """Rasterize a prompt onto the latent grid (image dims / 8 by default)."""
    w, h = image_size
    mw, mh = map_size if map_size is not None else latent_map_size(image_size)

    if isinstance(prompt, NullPrompt):
        return PositionMap(np.ones((mh, mw)))

    if isinstance(prompt, BoxPrompt):
        _check_box(prompt.box, image_size)
        sx, sy = mw / w, mh / h
        x0 = int(np.floor(prompt.box.x0 * sx))
        y0 = int(np.floor(prompt.box.y0 * sy))
        x1 = min(mw, max(x0 + 1, int(np.ceil(prompt.box.x1 * sx))))
        y1 = min(mh, max(y0 + 1, int(np.ceil(prompt.box.y1 * sy))))
        out = np.zeros((mh, mw))
        out[y0:y1, x0:x1] = 1.0
        return PositionMap(out)

    if isinstance(prompt, PointPrompt):
        _check_point(prompt.x, prompt.y, image_size)
        # Pixel center mapped to continuous map coordinates.
        cx = (prompt.x + 0.5) * mw / w
        cy = (prompt.y + 0.5) * mh / h
        sigma = HEATMAP_SIGMA_FRAC * min(mw, mh)
        gx = np.arange(mw) + 0.5
        gy = np.arange(mh) + 0.5
        d2 = (gy[:, None] - cy) ** 2 + (gx[None, :] - cx) ** 2
        heat = np.exp(-d2 / (2.0 * sigma**2))
        return PositionMap(heat / heat.max())  # peak exactly 1.0

    if isinstance(prompt, MaskPrompt):
        m = prompt.mask
        if (m.width, m.height) != (w, h):
            raise DimensionMismatch(f"mask prompt {m.width}x{m.height} vs image {w}x{h}")
        small = _nn_downsample(m.bits.astype(np.float64), (mw, mh))
        if prompt.feather_sigma > 0:
            sigma_map = prompt.feather_sigma * ((mw / w) + (mh / h)) / 2.0
            small = np.clip(ndimage.gaussian_filter(small, sigma=sigma_map), 0.0, 1.0)
        return PositionMap(small)

    raise TypeError(f"not a position prompt: {prompt!r}")


@dataclass(frozen=True)
class PromptAugmentConfig:
    """Magnitudes as fractions of min(image side); zero everywhere is identity."""

    point_jitter_frac: float = 0.05
    box_enlarge_frac: float = 0.2
    mask_dilate_frac: float = 0.03
    mask_feather_frac: float = 0.02


def augment_prompt(
    prompt: PositionPrompt,
    image_size: tuple[int, int],
    rng: np.random.Generator,
    config: PromptAugmentConfig = PromptAugmentConfig(),
) -> PositionPrompt:
    """Jitter points, enlarge boxes, dilate and feather masks; null is unchanged.

    Deterministic for a given rng state; outputs always remain in-bounds.
    """
    w, h = image_size
    side = min(w, h)

    if isinstance(prompt, NullPrompt):
        return prompt

    if isinstance(prompt, PointPrompt):
        _check_point(prompt.x, prompt.y, image_size)
        sigma = config.point_jitter_frac * side
        dx, dy = rng.normal(0.0, sigma, 2) if sigma > 0 else (0.0, 0.0)
        nx = int(np.clip(np.floor(prompt.x + dx + 0.5), 0, w - 1))
        ny = int(np.clip(np.floor(prompt.y + dy + 0.5), 0, h - 1))
        return PointPrompt(nx, ny)

    if isinstance(prompt, BoxPrompt):
        _check_box(prompt.box, image_size)
        b = prompt.box
        grow = rng.uniform(0.0, config.box_enlarge_frac, 4)
        x0 = max(0, int(np.floor(b.x0 - grow[0] * b.width)))
        x1 = min(w, int(np.ceil(b.x1 + grow[1] * b.width)))
        y0 = max(0, int(np.floor(b.y0 - grow[2] * b.height)))
        y1 = min(h, int(np.ceil(b.y1 + grow[3] * b.height)))
        return BoxPrompt(BBox(x0, y0, x1, y1))

    if isinstance(prompt, MaskPrompt):
        radius = float(rng.uniform(0.0, config.mask_dilate_frac)) * side
        grown = dilate(prompt.mask, radius)
        sigma = config.mask_feather_frac * side
        return MaskPrompt(grown, feather_sigma=sigma)

    raise TypeError(f"not a position prompt: {prompt!r}")


# --- manifest serialization --------------------------------------------------


def prompt_to_json(prompt: PositionPrompt) -> dict:
    from .corpus import rle_encode

    if isinstance(prompt, NullPrompt):
        return {"kind": "null"}
    if isinstance(prompt, PointPrompt):
        return {"kind": "point", "x": prompt.x, "y": prompt.y}
    if isinstance(prompt, BoxPrompt):
        b = prompt.box
        return {"kind": "box", "x0": b.x0, "y0": b.y0, "x1": b.x1, "y1": b.y1}
    if isinstance(prompt, MaskPrompt):
        return {
            "kind": "mask",
            "rle": rle_encode(prompt.mask).to_json(),
            "feather_sigma": prompt.feather_sigma,
        }
    raise TypeError(f"not a position prompt: {prompt!r}")


def prompt_from_json(obj: dict) -> PositionPrompt:
    from .corpus import RleMask, rle_decode

    kind = obj["kind"]
    if kind == "null":
        return NullPrompt()
    if kind == "point":
        return PointPrompt(int(obj["x"]), int(obj["y"]))
    if kind == "box":
        return BoxPrompt(BBox(int(obj["x0"]), int(obj["y0"]), int(obj["x1"]), int(obj["y1"])))
    if kind == "mask":
        return MaskPrompt(
            rle_decode(RleMask.from_json(obj["rle"])),
            feather_sigma=float(obj.get("feather_sigma", 0.0)),
        )
    raise ValueError(f"unknown prompt kind {kind!r}")
