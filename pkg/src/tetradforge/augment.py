"""Background and foreground augmentation to prevent copy-paste learning.

Background: resize so the shorter edge is 256, then place a 256x256 window
uniformly over positions that intersect the object mask (partial crops are
allowed). Foreground: probability-gated geometric ops (isotropic scale,
rotation, anisotropic scale, cutout) and color ops (brightness, contrast,
saturation, mild blur, additive noise). Geometric ops transform image and
mask identically; color ops never touch the mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from .corpus import BinaryMask, RasterImage, mask_bbox
from .errors import EmptyMask

CROP_SIZE = 256


def resize_to_short_side(
    image: RasterImage, mask: BinaryMask, target: int = CROP_SIZE
) -> tuple[RasterImage, BinaryMask]:
    """Aspect-preserving resize, bilinear for the image and nearest for the mask."""
    w, h = image.width, image.height
    if w <= h:
        new_w, new_h = target, max(target, round(h * target / w))
    else:
        new_w, new_h = max(target, round(w * target / h)), target
    arr = image.pixels if image.channels == 3 else np.repeat(image.pixels, 3, axis=2)
    im = Image.fromarray(arr).resize((new_w, new_h), Image.Resampling.BILINEAR)
    mk = Image.fromarray(mask.bits.astype(np.uint8) * 255).resize(
        (new_w, new_h), Image.Resampling.NEAREST
    )
    return RasterImage(np.asarray(im)), BinaryMask(np.asarray(mk) >= 128)


def _window_counts(bits: np.ndarray, win: int) -> np.ndarray:
    """Set-pixel counts for every win x win window via an integral image."""
    h, w = bits.shape
    s = np.zeros((h + 1, w + 1), dtype=np.int64)
    s[1:, 1:] = bits.astype(np.int64).cumsum(0).cumsum(1)
    return s[win:, win:] - s[:-win, win:] - s[win:, :-win] + s[:-win, :-win]


def choose_window(
    mask: BinaryMask, rng: np.random.Generator, size: int = CROP_SIZE
) -> tuple[int, int]:
    """Uniform (top, left) over windows that contain at least one set pixel."""
    if mask.is_empty():
        raise EmptyMask("window choice needs a nonempty mask")
    if mask.height < size or mask.width < size:
        raise ValueError(f"mask {mask.width}x{mask.height} smaller than window {size}")
    counts = _window_counts(mask.bits, size)
    valid = np.flatnonzero(counts > 0)
    pick = int(valid[rng.integers(len(valid))])
    return divmod(pick, counts.shape[1])


def crop_window(image: RasterImage, top: int, left: int, size: int = CROP_SIZE) -> RasterImage:
    return RasterImage(image.pixels[top : top + size, left : left + size])


def crop_window_mask(mask: BinaryMask, top: int, left: int, size: int = CROP_SIZE) -> BinaryMask:
    return BinaryMask(mask.bits[top : top + size, left : left + size])


def background_crop(
    image: RasterImage, mask: BinaryMask, rng: np.random.Generator, size: int = CROP_SIZE
) -> tuple[RasterImage, BinaryMask]:
    """Resize to short side `size` then crop a window intersecting the mask."""
    img2, mask2 = resize_to_short_side(image, mask, size)
    top, left = choose_window(mask2, rng, size)
    return crop_window(img2, top, left, size), crop_window_mask(mask2, top, left, size)


@dataclass(frozen=True)
class ForegroundAugmentConfig:
    p_iso_scale: float = 0.4
    p_rotation: float = 0.4
    p_aniso_scale: float = 0.2
    p_cutout: float = 0.2
    p_brightness: float = 0.2
    p_contrast: float = 0.2
    p_saturation: float = 0.2
    p_blur: float = 0.2
    p_noise: float = 0.2
    iso_range: tuple[float, float] = (0.8, 1.2)
    rotation_max_deg: float = 30.0
    aniso_range: tuple[float, float] = (0.8, 1.2)
    cutout_max_frac: float = 0.25
    color_range: tuple[float, float] = (0.8, 1.2)
    blur_sigma: float = 0.8
    noise_max_sigma: float = 0.02  # fraction of dynamic range

    @classmethod
    def disabled(cls) -> "ForegroundAugmentConfig":
        return cls(**{f: 0.0 for f in (
            "p_iso_scale", "p_rotation", "p_aniso_scale", "p_cutout",
            "p_brightness", "p_contrast", "p_saturation", "p_blur", "p_noise",
        )})


OP_NAMES = (
    "iso_scale",
    "rotation",
    "aniso_scale",
    "cutout",
    "brightness",
    "contrast",
    "saturation",
    "blur",
    "noise",
)


def _mask_centroid(bits: np.ndarray) -> np.ndarray:
    ys, xs = np.nonzero(bits)
    return np.array([ys.mean(), xs.mean()])


def augment_foreground(
    fg: RasterImage,
    fg_mask: BinaryMask,
    rng: np.random.Generator,
    config: ForegroundAugmentConfig = ForegroundAugmentConfig(),
) -> tuple[RasterImage, BinaryMask, dict]:
    """Probability-gated augmentation; returns the realized parameters too.

    Deterministic for a given rng state; the draw order is fixed (gates first,
    then magnitudes per active op). With all probabilities zero the inputs are
    returned unchanged, bit for bit.
    """
    if fg_mask.is_empty():
        raise EmptyMask("foreground augmentation needs a nonempty mask")

    probs = (
        config.p_iso_scale, config.p_rotation, config.p_aniso_scale, config.p_cutout,
        config.p_brightness, config.p_contrast, config.p_saturation,
        config.p_blur, config.p_noise,
    )
    gates = rng.random(len(probs))
    active = {name: bool(g < p) for name, g, p in zip(OP_NAMES, gates, probs)}
    params: dict = {"applied": [n for n in OP_NAMES if active[n]]}

    img = fg.pixels.astype(np.float64)
    bits = fg_mask.bits
    changed = False

    # Compose all firing linear ops into one transform about the mask centroid.
    forward = np.eye(2)
    if active["iso_scale"]:
        s = float(rng.uniform(*config.iso_range))
        params["iso_scale"] = s
        forward = forward @ (s * np.eye(2))
    if active["rotation"]:
        deg = float(rng.uniform(-config.rotation_max_deg, config.rotation_max_deg))
        params["rotation_deg"] = deg
        t = np.deg2rad(deg)
        forward = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]]) @ forward
    if active["aniso_scale"]:
        sy, sx = (float(rng.uniform(*config.aniso_range)) for _ in range(2))
        params["aniso_scale"] = [sy, sx]
        forward = np.diag([sy, sx]) @ forward

    if not np.array_equal(forward, np.eye(2)):
        center = _mask_centroid(bits)
        pull = np.linalg.inv(forward)
        offset = center - pull @ center
        new_bits = ndimage.affine_transform(
            bits.astype(np.uint8), pull, offset=offset, order=0, mode="constant", cval=0
        ).astype(bool)
        if new_bits.any():
            img = np.stack(
                [
                    ndimage.affine_transform(img[:, :, c], pull, offset=offset, order=1, mode="reflect")
                    for c in range(img.shape[2])
                ],
                axis=2,
            )
            bits = new_bits
            changed = True
        else:
            # Degenerate result (thin mask vanished); keep the original.
            params["skipped_geometric"] = True

    if active["cutout"]:
        frac = float(rng.uniform(0.0, config.cutout_max_frac))
        aspect = float(rng.uniform(0.5, 2.0))
        box = mask_bbox(BinaryMask(bits))
        area = frac * box.area
        cw = max(1, int(round(np.sqrt(area * aspect))))
        ch = max(1, int(round(area / cw))) if area >= 1 else 1
        cw, ch = min(cw, box.width), min(ch, box.height)
        left = int(rng.integers(box.x0, box.x1 - cw + 1))
        top = int(rng.integers(box.y0, box.y1 - ch + 1))
        hole = np.zeros_like(bits)
        hole[top : top + ch, left : left + cw] = True
        if (bits & ~hole).any():
            params["cutout"] = [top, left, ch, cw]
            img = img.copy()
            img[hole] = 0.0
            bits = bits & ~hole
            changed = True
        else:
            params["skipped_cutout"] = True

    if active["brightness"]:
        f = float(rng.uniform(*config.color_range))
        params["brightness"] = f
        img = img * f
        changed = True
    if active["contrast"]:
        f = float(rng.uniform(*config.color_range))
        params["contrast"] = f
        mean = img.mean()
        img = (img - mean) * f + mean
        changed = True
    if active["saturation"]:
        f = float(rng.uniform(*config.color_range))
        params["saturation"] = f
        if img.shape[2] == 3:  # no-op on grayscale
            gray = (299 * img[:, :, 0] + 587 * img[:, :, 1] + 114 * img[:, :, 2]) / 1000.0
            img = gray[:, :, None] + f * (img - gray[:, :, None])
            changed = True
    if active["blur"]:
        params["blur_sigma"] = config.blur_sigma
        # truncate 1.25 yields a 3x3 kernel at the default sigma
        img = ndimage.gaussian_filter(img, sigma=(config.blur_sigma, config.blur_sigma, 0), truncate=1.25)
        changed = True
    if active["noise"]:
        sigma = float(rng.uniform(0.0, config.noise_max_sigma)) * 255.0
        params["noise_sigma"] = sigma
        img = img + rng.normal(0.0, sigma, img.shape) if sigma > 0 else img
        changed = True

    if not changed:
        return fg, fg_mask, params

    out = RasterImage(np.clip(np.rint(img), 0, 255).astype(np.uint8))
    out_mask = fg_mask if bits is fg_mask.bits else BinaryMask(bits)
    return out, out_mask, params
