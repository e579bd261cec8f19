"""Pipeline configuration: flat key/value config files and the drift hash.

The config file is plain text, one `key = value` per line, `#` comments.
A seed is mandatory; reruns with the same input set, config, and seed must
produce byte-identical outputs under the mock gateway.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from pathlib import Path

from .augment import ForegroundAugmentConfig
from .prompts import PromptAugmentConfig
from .qc import FilterThresholds


@dataclass(frozen=True)
class PipelineConfig:
    input_dir: str
    output_dir: str
    seed: int
    gateway_url: str | None = None
    gateway_token: str | None = None
    mock_gateway: bool = False
    workers: int = 1

    nms_iou: float = 0.6
    containment: float | None = None
    size_lo: float = 0.1
    size_hi: float = 0.75
    aspect_max: float = 3.0
    components_max: int = 4
    color_std_min: float = 45.0
    classifier_min: float = 0.7
    ssim_threshold: float = 0.8
    dilate_frac: float = 0.03
    crop_size: int = 256
    drop_prob: float = 0.1
    test_fraction: float = 0.1
    point_mode: str = "centroid"

    # foreground augmentation
    p_iso_scale: float = 0.4
    p_rotation: float = 0.4
    p_aniso_scale: float = 0.2
    p_cutout: float = 0.2
    p_brightness: float = 0.2
    p_contrast: float = 0.2
    p_saturation: float = 0.2
    p_blur: float = 0.2
    p_noise: float = 0.2
    iso_lo: float = 0.8
    iso_hi: float = 1.2
    rotation_max_deg: float = 30.0
    aniso_lo: float = 0.8
    aniso_hi: float = 1.2
    cutout_max_frac: float = 0.25
    color_lo: float = 0.8
    color_hi: float = 1.2
    blur_sigma: float = 0.8
    noise_max_sigma: float = 0.02

    # prompt augmentation
    point_jitter_frac: float = 0.05
    box_enlarge_frac: float = 0.2
    mask_dilate_frac: float = 0.03
    mask_feather_frac: float = 0.02

    def __post_init__(self):
        if not (0.0 < self.nms_iou <= 1.0):
            raise ValueError("nms_iou must be in (0, 1]")
        if not (0.0 <= self.size_lo < self.size_hi <= 1.0):
            raise ValueError("size bounds must satisfy 0 <= lo < hi <= 1")
        if not (0.0 <= self.classifier_min <= 1.0):
            raise ValueError("classifier_min outside [0, 1]")
        if not (-1.0 <= self.ssim_threshold <= 1.0):
            raise ValueError("ssim_threshold outside [-1, 1]")
        if not (0.0 <= self.drop_prob <= 1.0):
            raise ValueError("drop_prob outside [0, 1]")
        if not (0.0 <= self.test_fraction <= 1.0):
            raise ValueError("test_fraction outside [0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def thresholds(self) -> FilterThresholds:
        return FilterThresholds(
            size_lo=self.size_lo,
            size_hi=self.size_hi,
            aspect_max=self.aspect_max,
            components_max=self.components_max,
            color_std_min=self.color_std_min,
            classifier_min=self.classifier_min,
        )

    def fg_augment(self) -> ForegroundAugmentConfig:
        return ForegroundAugmentConfig(
            p_iso_scale=self.p_iso_scale,
            p_rotation=self.p_rotation,
            p_aniso_scale=self.p_aniso_scale,
            p_cutout=self.p_cutout,
            p_brightness=self.p_brightness,
            p_contrast=self.p_contrast,
            p_saturation=self.p_saturation,
            p_blur=self.p_blur,
            p_noise=self.p_noise,
            iso_range=(self.iso_lo, self.iso_hi),
            rotation_max_deg=self.rotation_max_deg,
            aniso_range=(self.aniso_lo, self.aniso_hi),
            cutout_max_frac=self.cutout_max_frac,
            color_range=(self.color_lo, self.color_hi),
            blur_sigma=self.blur_sigma,
            noise_max_sigma=self.noise_max_sigma,
        )

    def prompt_augment(self) -> PromptAugmentConfig:
        return PromptAugmentConfig(
            point_jitter_frac=self.point_jitter_frac,
            box_enlarge_frac=self.box_enlarge_frac,
            mask_dilate_frac=self.mask_dilate_frac,
            mask_feather_frac=self.mask_feather_frac,
        )

    def drift_hash(self) -> str:
        """Hash of every field that influences output bytes (not workers or urls)."""
        excluded = {"input_dir", "output_dir", "gateway_url", "gateway_token", "workers"}
        payload = {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if f.name not in excluded
        }
        blob = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, raw: str, target_type):
    raw = raw.strip()
    if raw.lower() in ("none", "null", ""):
        return None
    if target_type is bool:
        low = raw.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if target_type is int:
        return int(raw)
    if target_type is float:
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict:
    """Flat `key = value` lines into a dict of raw strings."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, value = stripped.split("=", 1)
        out[key.strip()] = value.strip()
    return out


_FIELD_TYPES = {
    "input_dir": str, "output_dir": str, "seed": int,
    "gateway_url": str, "gateway_token": str, "mock_gateway": bool, "workers": int,
    "nms_iou": float, "containment": float,
    "size_lo": float, "size_hi": float, "aspect_max": float, "components_max": int,
    "color_std_min": float, "classifier_min": float, "ssim_threshold": float,
    "dilate_frac": float, "crop_size": int, "drop_prob": float,
    "test_fraction": float, "point_mode": str,
    "p_iso_scale": float, "p_rotation": float, "p_aniso_scale": float, "p_cutout": float,
    "p_brightness": float, "p_contrast": float, "p_saturation": float,
    "p_blur": float, "p_noise": float,
    "iso_lo": float, "iso_hi": float, "rotation_max_deg": float,
    "aniso_lo": float, "aniso_hi": float, "cutout_max_frac": float,
    "color_lo": float, "color_hi": float, "blur_sigma": float, "noise_max_sigma": float,
    "point_jitter_frac": float, "box_enlarge_frac": float,
    "mask_dilate_frac": float, "mask_feather_frac": float,
}


def load_config(path: str | Path, overrides: dict | None = None) -> PipelineConfig:
    raw = parse_config_text(Path(path).read_text())
    values: dict = {}
    for key, value in raw.items():
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        values[key] = _coerce(key, value, _FIELD_TYPES[key])
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    for required in ("input_dir", "output_dir", "seed"):
        if values.get(required) is None:
            raise ValueError(f"config is missing required key {required!r} (seed is mandatory)")
    return PipelineConfig(**values)
