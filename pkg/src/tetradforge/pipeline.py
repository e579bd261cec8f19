"""End-to-end tetrad construction: segment, NMS, QC cascade, inpaint gate,
crops, augmentation, prompts, manifest.

Determinism contract: (input set, config, seed) fully determines every output
byte under the mock gateway. Per-record randomness comes from streams keyed by
(seed, source id, candidate index), and results are committed to the manifest
in sorted source order regardless of worker count, so parallelism only
changes wall time. A source line is the commit marker for its image; resume
drops uncommitted debris and processes only unseen sources.
"""

from __future__ import annotations

import hashlib
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .augment import choose_window, crop_window, crop_window_mask, resize_to_short_side
from .config import PipelineConfig
from .corpus import (
    BinaryMask,
    RasterImage,
    load_image,
    mask_bbox,
    rle_encode,
    save_image,
    save_masked_image,
)
from .errors import GatewayDown, ServiceUnavailable
from .gateway import Gateway, make_gateway
from .inpaint_gate import ssim
from .manifest import (
    MANIFEST_NAME,
    ManifestWriter,
    check_drift,
    compact_to_completed,
    dump_line,
    read_manifest,
)
from .maskops import dilate, nms
from .prompts import augment_prompt, derive_prompts, prompt_to_json
from .qc import CASCADE_ORDER, run_cascade

log = logging.getLogger("forge")

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
PROMPT_KINDS = ("point", "box", "mask", "null")


def record_rng(seed: int, source_id: str, index: int) -> np.random.Generator:
    """Independent stream per (seed, source, candidate); order-free parallelism."""
    digest = hashlib.sha256(f"{seed}:{source_id}:{index}".encode()).digest()
    words = np.frombuffer(digest, dtype=np.uint32)
    return np.random.default_rng(np.random.SeedSequence(words.tolist()))


def split_of(record_id: str, test_fraction: float) -> str:
    """Deterministic train/test assignment by id hash."""
    digest = hashlib.sha256(f"split:{record_id}".encode()).digest()
    u = int.from_bytes(digest[:8], "big") / 2**64
    return "test" if u < test_fraction else "train"


def tight_crop(image: RasterImage, mask: BinaryMask) -> tuple[RasterImage, BinaryMask]:
    box = mask_bbox(mask)
    return (
        RasterImage(image.pixels[box.y0 : box.y1, box.x0 : box.x1]),
        BinaryMask(mask.bits[box.y0 : box.y1, box.x0 : box.x1]),
    )


def discover_inputs(input_dir: str | Path) -> list[tuple[str, Path]]:
    paths = [
        p
        for p in sorted(Path(input_dir).iterdir())
        if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file()
    ]
    ids = [p.stem for p in paths]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate source ids in input dir: {dupes}")
    return list(zip(ids, paths))


def _verdicts_json(verdicts) -> list[dict]:
    return [
        {"filter": v.filter_name, "passed": v.passed, "measured": v.measured, "threshold": v.threshold}
        for v in verdicts
    ]


def process_source(
    sid: str, path: Path, config: PipelineConfig, gateway: Gateway, out_dir: Path
) -> dict:
    """Produce the manifest lines (and write the image files) for one source.

    Pure given (config, gateway, source file); gateway outages raise
    GatewayDown so the run aborts resumably instead of recording a bogus
    empty source.
    """
    try:
        image = load_image(path)
        candidates = [
            c for c in gateway.segment(image, sid) if not c.mask.is_empty()
        ]
        n_initial = len(candidates)
        kept = nms(candidates, config.nms_iou, config.containment)

        crops = [tight_crop(image, c.mask)[0] for c in kept]
        scores = [gateway.score_foreground(crop) for crop in crops]
        survivors, report = run_cascade(image, kept, scores, config.thresholds())

        # Deferred writes: nothing lands on disk unless the whole source
        # succeeds, so errored sources leave no unreferenced files.
        pending_files: list[tuple[str, RasterImage, BinaryMask | None]] = []

        candidate_entries = []
        tetrad_lines = []
        for k, (cand, crop, score) in enumerate(zip(kept, crops, scores)):
            cid = f"{sid}-{k:02d}"
            crop_rel = f"review/crops/{cid}.png"
            pending_files.append((crop_rel, crop, None))
            entry = {
                "id": cid,
                "crop": crop_rel,
                "segment_score": cand.score,
                "classifier_score": score,
                "verdicts": _verdicts_json(report.candidate_verdicts[k]),
                "ssim": None,
                "kept": False,
            }
            candidate_entries.append(entry)
            if cand not in survivors:
                continue

            rng = record_rng(config.seed, sid, k)

            # Inpaint gate: expand the hole slightly, fill, compare.
            radius = int(np.ceil(config.dilate_frac * min(image.width, image.height)))
            hole = dilate(cand.mask, radius)
            inpainted = gateway.inpaint(image, hole)
            ssim_val = ssim(image, inpainted)
            entry["ssim"] = ssim_val
            if ssim_val < config.ssim_threshold:
                continue  # discard the entire foreground-background pair

            # Foreground: tight crop of the original, then augmentation.
            fg_img, fg_mask = tight_crop(image, cand.mask)
            fg_aug, fg_mask_aug, fg_params = augment_foreground_with_config(
                fg_img, fg_mask, rng, config
            )

            # Ground truth and background share one resize and window.
            gt_resized, mask_resized = resize_to_short_side(image, cand.mask, config.crop_size)
            bg_resized, _ = resize_to_short_side(inpainted, cand.mask, config.crop_size)
            top, left = choose_window(mask_resized, rng, config.crop_size)
            gt_crop = crop_window(gt_resized, top, left, config.crop_size)
            bg_crop = crop_window(bg_resized, top, left, config.crop_size)
            mask_crop = crop_window_mask(mask_resized, top, left, config.crop_size)

            kind = PROMPT_KINDS[int(rng.integers(len(PROMPT_KINDS)))]
            variants = derive_prompts(mask_crop, point_mode=config.point_mode, rng=rng)
            prompt = getattr(variants, kind)
            prompt = augment_prompt(prompt, gt_crop.size, rng, config.prompt_augment())

            rid = cid
            fg_rel, bg_rel, gt_rel = (f"fg/{rid}.png", f"bg/{rid}.png", f"gt/{rid}.png")
            pending_files.append((fg_rel, fg_aug, fg_mask_aug))
            pending_files.append((bg_rel, bg_crop, None))
            pending_files.append((gt_rel, gt_crop, None))

            entry["kept"] = True
            tetrad_lines.append(
                {
                    "type": "tetrad",
                    "id": rid,
                    "source": sid,
                    "fg": fg_rel,
                    "bg": bg_rel,
                    "gt": gt_rel,
                    "size": [gt_crop.width, gt_crop.height],
                    "mask": rle_encode(mask_crop).to_json(),
                    "prompt": prompt_to_json(prompt),
                    "meta": {
                        "source": sid,
                        "candidate_index": k,
                        "segment_score": cand.score,
                        "classifier_score": score,
                        "ssim": ssim_val,
                        "fg_augment": fg_params,
                        "prompt_kind": kind,
                        "window": [top, left],
                        "split": split_of(rid, config.test_fraction),
                    },
                }
            )

        for rel, img, mask in pending_files:
            if mask is None:
                save_image(img, out_dir / rel)
            else:
                save_masked_image(img, mask, out_dir / rel)

        source_line = {
            "type": "source",
            "id": sid,
            "status": "ok",
            "n_initial": n_initial,
            "n_post_nms": len(kept),
            "stage_survivors": [s.survivors for s in report.stages],
            "n_records": len(tetrad_lines),
            "candidates": candidate_entries,
        }
        return {"source_line": source_line, "tetrad_lines": tetrad_lines}
    except ServiceUnavailable as exc:
        raise GatewayDown(f"{sid}: {exc}") from exc
    except GatewayDown:
        raise
    except Exception as exc:  # noqa: BLE001 - per-image isolation
        log.warning("source %s failed: %r", sid, exc)
        return {
            "source_line": {
                "type": "source",
                "id": sid,
                "status": "error",
                "error": f"{type(exc).__name__}: {exc}",
                "n_initial": 0,
                "n_post_nms": 0,
                "stage_survivors": [0] * len(CASCADE_ORDER),
                "n_records": 0,
                "candidates": [],
            },
            "tetrad_lines": [],
        }


def augment_foreground_with_config(fg_img, fg_mask, rng, config: PipelineConfig):
    from .augment import augment_foreground

    return augment_foreground(fg_img, fg_mask, rng, config.fg_augment())


def build(config: PipelineConfig, gateway: Gateway | None = None, require_existing: bool = False) -> dict:
    """Run (or continue) the pipeline; returns the summary counts.

    A pre-existing manifest turns the call into a resume: the drift hash must
    match, incomplete debris is compacted away, and only unseen sources run.
    """
    if gateway is None:
        url = config.gateway_url or os.environ.get("FORGE_GATEWAY_URL")
        gateway = make_gateway(url, config.mock_gateway, config.gateway_token)

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / MANIFEST_NAME

    completed: set[str] = set()
    if manifest_path.exists() and manifest_path.stat().st_size > 0:
        state = read_manifest(manifest_path)
        check_drift(state, config.drift_hash())
        compact_to_completed(manifest_path, state)
        completed = state.completed_ids
    elif require_existing:
        raise FileNotFoundError(f"nothing to resume: {manifest_path} not found")
    else:
        with open(manifest_path, "w") as fh:
            fh.write(dump_line({"type": "config", "hash": config.drift_hash(), "version": 1}))

    inputs = discover_inputs(config.input_dir)
    todo = [(sid, p) for sid, p in inputs if sid not in completed]
    log.info("processing %d of %d sources (%d already complete)", len(todo), len(inputs), len(completed))

    results = []
    with ManifestWriter(manifest_path) as writer:
        if todo:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                futures = [
                    pool.submit(process_source, sid, p, config, gateway, out_dir)
                    for sid, p in todo
                ]
                # Commit strictly in input order so worker count never shows
                # up in the output bytes.
                for fut in futures:
                    res = fut.result()
                    for line in res["tetrad_lines"]:
                        writer.append(line)
                    writer.append(res["source_line"])
                    results.append(res)

    return summarize(manifest_path)


def resume(config: PipelineConfig, gateway: Gateway | None = None) -> dict:
    return build(config, gateway, require_existing=True)


def summarize(manifest_path: str | Path) -> dict:
    state = read_manifest(manifest_path)
    stage_totals = [0] * len(CASCADE_ORDER)
    n_initial = n_post_nms = ssim_pass = 0
    for s in state.sources:
        n_initial += s.get("n_initial", 0)
        n_post_nms += s.get("n_post_nms", 0)
        for i, v in enumerate(s.get("stage_survivors", [])):
            stage_totals[i] += v
        ssim_pass += sum(
            1 for c in s.get("candidates", []) if c.get("ssim") is not None and c["kept"]
        )
    return {
        "sources": len(state.sources),
        "errors": sum(1 for s in state.sources if s.get("status") == "error"),
        "records_out": len(state.tetrads),
        "per_stage_counts": {
            "initial": n_initial,
            "post_nms": n_post_nms,
            **{name: stage_totals[i] for i, name in enumerate(CASCADE_ORDER)},
            "ssim_gate": ssim_pass,
        },
    }


def stats_table(manifest_path: str | Path) -> str:
    """Cascade report in the three-column reserved-percentage format."""
    state = read_manifest(manifest_path)
    total = sum(s.get("n_post_nms", 0) for s in state.sources)
    stage_totals = [0] * len(CASCADE_ORDER)
    for s in state.sources:
        for i, v in enumerate(s.get("stage_survivors", [])):
            stage_totals[i] += v

    thresholds = {}
    for s in state.sources:
        for c in s.get("candidates", []):
            for v in c.get("verdicts", []):
                thresholds[v["filter"]] = v["threshold"]
            break
        if thresholds:
            break

    display = {
        "RelativeSize": "Relative Size",
        "AspectRatio": "Aspect Ratio",
        "ComponentCount": "Components Num.",
        "ColorStd": "Color Std.",
        "ClassifierScore": "Classifier Score",
    }
    rows = [("Filter condition", "Threshold", "Reserved Percentage")]
    rows.append(("None (Initial)", "--", "100.00%" if total else "0.00%"))
    for i, name in enumerate(CASCADE_ORDER):
        pct = 100.0 * stage_totals[i] / total if total else 0.0
        rows.append((display[name], thresholds.get(name, "--"), f"{pct:.2f}%"))

    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = [
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        for row in rows
    ]
    return "\n".join(lines)


def corpus_quality_metrics(manifest_path: str | Path, gateway: Gateway) -> dict:
    """Distribution distance of kept vs all candidate crops, plus kept IS."""
    from .gateway import embed_batch
    from .metrics import frechet_distance, inception_score

    state = read_manifest(manifest_path)
    out_dir = Path(manifest_path).parent
    all_crops, kept_crops = [], []
    for s in state.sources:
        for c in s.get("candidates", []):
            img = load_image(out_dir / c["crop"])
            all_crops.append(img)
            if c["kept"]:
                kept_crops.append(img)
    result: dict = {"n_candidates": len(all_crops), "n_kept": len(kept_crops)}
    if len(all_crops) >= 2 and len(kept_crops) >= 2:
        emb_all = embed_batch(gateway, all_crops, "metric_clip")
        emb_kept = embed_batch(gateway, kept_crops, "metric_clip")
        result["frechet_kept_vs_all"] = frechet_distance(emb_kept, emb_all)
    if kept_crops:
        logits = embed_batch(gateway, kept_crops, "metric_inception_logits")
        result["inception_score_kept"] = inception_score(logits)
    return result
