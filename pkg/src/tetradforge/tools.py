"""Operations over a finished pipeline output tree, exposed via the CLI."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .corpus import RasterImage, load_image, rle_decode, RleMask
from .diffusion import build_schedule, forward_noise, mask_to_signal, signal_to_mask
from .gateway import Gateway, embed_batch
from .inpaint_gate import ssim as ssim_score
from .manifest import read_manifest
from .metrics import clip_score, frechet_distance, inception_score, mse
from .prompts import latent_map_size, prompt_from_json, rasterize


def encode_prompts(manifest_path: str | Path, out_subdir: str = "prompt") -> list[str]:
    """Rasterize every record's prompt to an 8-bit PNG plus a float32 sidecar."""
    manifest_path = Path(manifest_path)
    state = read_manifest(manifest_path)
    root = manifest_path.parent
    written = []
    for t in state.tetrads:
        w, h = t["size"]
        prompt = prompt_from_json(t["prompt"])
        pm = rasterize(prompt, (w, h), latent_map_size((w, h)))
        base = root / out_subdir / t["id"]
        base.parent.mkdir(parents=True, exist_ok=True)
        quantized = np.rint(pm.values * 255).astype(np.uint8)
        Image.fromarray(quantized, mode="L").save(base.with_suffix(".png"), format="PNG")
        np.save(base.with_suffix(".npy"), pm.values.astype(np.float32))
        written.append(t["id"])
    return written


def _pseudo_latent(gt: RasterImage, map_size: tuple[int, int]) -> np.ndarray:
    """4-channel stand-in for the image latent: downsampled RGB plus luma,
    scaled to [-1, 1]. No VAE service is defined, so previews use this proxy.
    """
    mw, mh = map_size
    arr = gt.pixels if gt.channels == 3 else np.repeat(gt.pixels, 3, axis=2)
    small = np.asarray(
        Image.fromarray(arr).resize((mw, mh), Image.Resampling.BILINEAR), dtype=np.float64
    )
    luma = (299 * small[:, :, 0] + 587 * small[:, :, 1] + 114 * small[:, :, 2]) / 1000.0
    stacked = np.concatenate([small, luma[:, :, None]], axis=2) / 255.0
    return stacked * 2.0 - 1.0


def noise_preview(
    manifest_path: str | Path,
    record_id: str,
    t: int,
    seed: int = 0,
    out_subdir: str = "preview",
) -> dict[str, str]:
    """Write noised latent/mask visualizations for one record at step t."""
    manifest_path = Path(manifest_path)
    state = read_manifest(manifest_path)
    root = manifest_path.parent
    record = next((r for r in state.tetrads if r["id"] == record_id), None)
    if record is None:
        raise KeyError(f"no record {record_id!r} in manifest")

    sched = build_schedule()
    gt = load_image(root / record["gt"])
    mask = rle_decode(RleMask.from_json(record["mask"]))
    map_size = latent_map_size((gt.width, gt.height))

    z0 = _pseudo_latent(gt, map_size)
    mask_map = rasterize(prompt_from_json({"kind": "mask", "rle": record["mask"]}),
                         (gt.width, gt.height), map_size).values
    m0 = mask_to_signal(mask_map)

    rng = np.random.default_rng(seed)
    z_t = forward_noise(z0, t, rng.standard_normal(z0.shape), sched)
    m_t = forward_noise(m0, t, rng.standard_normal(m0.shape), sched)

    out_dir = root / out_subdir
    out_dir.mkdir(parents=True, exist_ok=True)
    latent_vis = np.clip((z_t[:, :, :3] + 1.0) / 2.0 * 255.0, 0, 255).astype(np.uint8)
    mask_vis = np.rint(signal_to_mask(m_t) * 255.0).astype(np.uint8)
    latent_path = out_dir / f"{record_id}_t{t}_latent.png"
    mask_path = out_dir / f"{record_id}_t{t}_mask.png"
    Image.fromarray(latent_vis).save(latent_path, format="PNG")
    Image.fromarray(mask_vis, mode="L").save(mask_path, format="PNG")
    _ = mask  # decoded for validation; visualization uses the rasterized map
    return {"latent": str(latent_path), "mask": str(mask_path)}


def _load_set(path: str | Path) -> list[RasterImage]:
    """An image set is a directory of PNGs or a manifest (gt images)."""
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".png")
        return [load_image(p) for p in files]
    state = read_manifest(path)
    root = path.parent
    return [load_image(root / t["gt"]) for t in state.tetrads]


def evaluate_sets(
    set_a: str | Path,
    set_b: str | Path,
    gateway: Gateway,
    space: str = "metric_clip",
    paired: bool = False,
) -> dict:
    """Distribution metrics between two image sets; paired adds MSE/CLIP/SSIM."""
    imgs_a, imgs_b = _load_set(set_a), _load_set(set_b)
    result: dict = {"n_a": len(imgs_a), "n_b": len(imgs_b), "space": space}
    if len(imgs_a) >= 2 and len(imgs_b) >= 2:
        emb_a = embed_batch(gateway, imgs_a, space)
        emb_b = embed_batch(gateway, imgs_b, space)
        result["frechet_distance"] = frechet_distance(emb_a, emb_b)
    if imgs_a:
        result["inception_score_a"] = inception_score(
            embed_batch(gateway, imgs_a, "metric_inception_logits")
        )
    if imgs_b:
        result["inception_score_b"] = inception_score(
            embed_batch(gateway, imgs_b, "metric_inception_logits")
        )
    if paired:
        if len(imgs_a) != len(imgs_b):
            raise ValueError("paired evaluation needs equally sized sets")
        result["mse_mean"] = float(np.mean([mse(a, b) for a, b in zip(imgs_a, imgs_b)]))
        result["clip_score_mean"] = float(
            np.mean(
                [
                    clip_score(gateway.embed(a, space), gateway.embed(b, space))
                    for a, b in zip(imgs_a, imgs_b)
                ]
            )
        )
        result["ssim_mean"] = float(np.mean([ssim_score(a, b) for a, b in zip(imgs_a, imgs_b)]))
    return result


def format_report(result: dict) -> str:
    lines = ["metric                     value", "-" * 34]
    for key in sorted(result):
        value = result[key]
        shown = f"{value:.6f}" if isinstance(value, float) else str(value)
        lines.append(f"{key:<26} {shown}")
    return "\n".join(lines)


def write_report(result: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
