"""Background-inpainting quality gate.

SSIM is computed over grayscale luma in [0, 1] with the canonical parameters:
11x11 Gaussian window (sigma 1.5) and stability constants C1=(0.01)^2,
C2=(0.03)^2 on unit dynamic range. Local statistics use valid-mode windows
only, so no padding policy leaks into the score. A pair whose score falls
below the threshold discards the entire foreground-background pair.
"""

from __future__ import annotations

import numpy as np

from .corpus import RasterImage
from .errors import DimensionMismatch

WINDOW = 11
SIGMA = 1.5
C1 = 0.01**2
C2 = 0.03**2


def _gaussian_kernel(size: int = WINDOW, sigma: float = SIGMA) -> np.ndarray:
    offsets = np.arange(size) - (size - 1) / 2.0
    k = np.exp(-(offsets**2) / (2.0 * sigma**2))
    return k / k.sum()


_KERNEL_1D = _gaussian_kernel()


def _filter_valid(img: np.ndarray) -> np.ndarray:
    """Separable Gaussian filtering, valid mode (output shrinks by WINDOW-1)."""
    k = _KERNEL_1D
    # Convolve rows, then columns; kernel is symmetric so correlate == convolve.
    rows = np.apply_along_axis(lambda r: np.convolve(r, k, mode="valid"), 1, img)
    return np.apply_along_axis(lambda c: np.convolve(c, k, mode="valid"), 0, rows)


def ssim(a: RasterImage, b: RasterImage) -> float:
    """Mean local SSIM between two same-size images, in [-1, 1]."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"ssim needs equal dims, got {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    if a.width < WINDOW or a.height < WINDOW:
        raise DimensionMismatch(f"images must be at least {WINDOW}x{WINDOW}")

    x = a.luma() / 255.0
    y = b.luma() / 255.0

    mu_x = _filter_valid(x)
    mu_y = _filter_valid(y)
    var_x = _filter_valid(x * x) - mu_x**2
    var_y = _filter_valid(y * y) - mu_y**2
    cov = _filter_valid(x * y) - mu_x * mu_y

    num = (2 * mu_x * mu_y + C1) * (2 * cov + C2)
    den = (mu_x**2 + mu_y**2 + C1) * (var_x + var_y + C2)
    return float(np.mean(num / den))


def gate_inpainting(
    original: RasterImage, inpainted: RasterImage, threshold: float = 0.8
) -> bool:
    """Keep iff ssim(original, inpainted) >= threshold."""
    return ssim(original, inpainted) >= threshold
