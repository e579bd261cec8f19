"""Core raster/mask value types and the lossless codecs every stage shares.

Images are 8-bit; all floating-point math converts on entry, with samples
scaled to [0, 1] (or 0-255 luma where a statistic is defined on that scale).
All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from PIL import Image

from .errors import CountMismatch, DimensionMismatch, EmptyMask


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class RasterImage:
    """8-bit image, shape (h, w, c) with c in {1, 3}, row-major, channel-interleaved."""

    pixels: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim == 2:
            px = px[:, :, None]
        if px.ndim != 3 or px.dtype != np.uint8:
            raise ValueError("pixels must be a uint8 array of shape (h, w, c)")
        h, w, c = px.shape
        if h <= 0 or w <= 0 or c not in (1, 3):
            raise ValueError(f"bad image shape {px.shape}: need h>0, w>0, c in {{1,3}}")
        object.__setattr__(self, "pixels", _frozen(px))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def size(self) -> tuple[int, int]:
        """(width, height)"""
        return self.width, self.height

    def to_float(self) -> np.ndarray:
        """Samples scaled to [0, 1], float64, shape (h, w, c)."""
        return self.pixels.astype(np.float64) / 255.0

    def luma(self) -> np.ndarray:
        """ITU-R 601 luma on the 0-255 scale, float64, shape (h, w).

        Integer coefficients over 1000 so gray pixels map to their exact value.
        """
        px = self.pixels.astype(np.float64)
        if self.channels == 1:
            return px[:, :, 0]
        return (299 * px[:, :, 0] + 587 * px[:, :, 1] + 114 * px[:, :, 2]) / 1000.0


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """One boolean per pixel, row-major, shape (h, w)."""

    bits: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 2 or b.dtype != np.bool_:
            raise ValueError("bits must be a bool array of shape (h, w)")
        if b.shape[0] <= 0 or b.shape[1] <= 0:
            raise ValueError(f"bad mask shape {b.shape}")
        object.__setattr__(self, "bits", _frozen(b))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def area(self) -> int:
        return int(self.bits.sum())

    def is_empty(self) -> bool:
        return not bool(self.bits.any())

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "BinaryMask":
        return cls(np.asarray(arr) != 0)


@dataclass(frozen=True)
class RleMask:
    """Column-major run-length encoding, alternating runs starting with a zero-run.

    Matches the COCO uncompressed convention so external annotations can be
    ingested directly. The first run may be 0 when the mask starts with a set
    pixel.
    """

    width: int
    height: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise CountMismatch(f"bad dimensions {self.width}x{self.height}")
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise CountMismatch("negative run length")
        if sum(counts) != self.width * self.height:
            raise CountMismatch(
                f"runs sum to {sum(counts)}, expected {self.width * self.height}"
            )
        object.__setattr__(self, "counts", counts)

    def to_json(self) -> dict:
        """Manifest form: {"size": [h, w], "counts": [...]}."""
        return {"size": [self.height, self.width], "counts": list(self.counts)}

    @classmethod
    def from_json(cls, obj: dict) -> "RleMask":
        h, w = obj["size"]
        return cls(width=int(w), height=int(h), counts=tuple(obj["counts"]))


def rle_encode(mask: BinaryMask) -> RleMask:
    """Losslessly encode a mask; decode(encode(m)) == m exactly."""
    flat = mask.bits.ravel(order="F")
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [flat.size]))
    lengths = (ends - starts).tolist()
    if flat[0]:
        lengths.insert(0, 0)
    return RleMask(width=mask.width, height=mask.height, counts=tuple(lengths))


def rle_decode(rle: RleMask) -> BinaryMask:
    """Inverse of rle_encode. Raises CountMismatch for malformed runs."""
    # RleMask validates run sums at construction; recheck to guard hand-built inputs.
    if sum(rle.counts) != rle.width * rle.height:
        raise CountMismatch("run sums disagree with dimensions")
    values = np.arange(len(rle.counts)) % 2 == 1
    flat = np.repeat(values, rle.counts)
    bits = flat.reshape((rle.height, rle.width), order="F")
    return BinaryMask(bits)


@dataclass(frozen=True)
class BBox:
    """Half-open pixel box: x in [x0, x1), y in [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if not (0 <= self.x0 < self.x1 and 0 <= self.y0 < self.y1):
            raise ValueError(f"degenerate box ({self.x0},{self.y0},{self.x1},{self.y1})")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def area(self) -> int:
        return self.width * self.height

    def contains(self, other: "BBox") -> bool:
        return (
            self.x0 <= other.x0
            and self.y0 <= other.y0
            and self.x1 >= other.x1
            and self.y1 >= other.y1
        )


def mask_bbox(mask: BinaryMask) -> BBox:
    """Tightest half-open box containing every set pixel."""
    if mask.is_empty():
        raise EmptyMask("mask_bbox needs at least one set pixel")
    rows = np.flatnonzero(mask.bits.any(axis=1))
    cols = np.flatnonzero(mask.bits.any(axis=0))
    return BBox(x0=int(cols[0]), y0=int(rows[0]), x1=int(cols[-1]) + 1, y1=int(rows[-1]) + 1)


@dataclass(frozen=True)
class MaskCandidate:
    """A scored segmentation mask tied to one source image."""

    mask: BinaryMask
    score: float
    source_id: str

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class TetradRecord:
    """One training sample: foreground, background, ground truth, mask, prompt.

    Image fields are file refs; the mask must match the ground-truth crop
    dimensions, and the three image refs must be distinct files.
    """

    id: str
    fg_path: str
    bg_path: str
    gt_path: str
    gt_size: tuple[int, int]  # (width, height)
    mask: BinaryMask
    prompt: Any  # PositionPrompt; typed loosely to avoid a circular import
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len({self.fg_path, self.bg_path, self.gt_path}) != 3:
            raise ValueError("fg/bg/gt must be distinct files")
        w, h = self.gt_size
        if (self.mask.width, self.mask.height) != (w, h):
            raise DimensionMismatch(
                f"mask {self.mask.width}x{self.mask.height} vs gt {w}x{h}"
            )


# --- PNG interchange -------------------------------------------------------


def load_image(path: str | Path) -> RasterImage:
    """Load a PNG (or any PIL-readable file) as 1- or 3-channel 8-bit."""
    with Image.open(path) as im:
        if im.mode == "L":
            arr = np.asarray(im, dtype=np.uint8)[:, :, None]
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return RasterImage(arr)


def save_image(image: RasterImage, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = image.pixels
    if image.channels == 1:
        Image.fromarray(arr[:, :, 0], mode="L").save(path, format="PNG")
    else:
        Image.fromarray(arr, mode="RGB").save(path, format="PNG")


def save_masked_image(image: RasterImage, mask: BinaryMask, path: str | Path) -> None:
    """Write RGB + alpha-from-mask, preserving the exact silhouette."""
    if (mask.width, mask.height) != (image.width, image.height):
        raise DimensionMismatch("mask and image dimensions differ")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rgb = image.pixels if image.channels == 3 else np.repeat(image.pixels, 3, axis=2)
    alpha = np.where(mask.bits, 255, 0).astype(np.uint8)[:, :, None]
    Image.fromarray(np.concatenate([rgb, alpha], axis=2), mode="RGBA").save(
        path, format="PNG"
    )


def load_masked_image(path: str | Path) -> tuple[RasterImage, BinaryMask]:
    """Inverse of save_masked_image."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGBA"), dtype=np.uint8)
    return RasterImage(arr[:, :, :3]), BinaryMask(arr[:, :, 3] >= 128)
