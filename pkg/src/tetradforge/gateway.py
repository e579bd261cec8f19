"""Gateway to external ML inference services, plus the deterministic mock.

Four endpoints: segment, inpaint, score_fg, embed. The wire protocol is JSON
envelopes over HTTP POST with base64-encoded PNG images and COCO-style RLE
masks. The in-process mock answers every call as a pure function of the
request pixels, so pipeline runs are reproducible offline; tests and the
--mock CLI flag use it exclusively.

Mock contracts:
  segment   - connected regions of non-background color (background = the
              most common exact color), ordered by area then scan order,
              scored 0.9, 0.8, ... down to 0.05
  inpaint   - fills the hole with the mean color of a 5 px ring around it
  score_fg  - stable hash-derived value in [0, 1); fixture pins override
  embed     - unit vector seeded by (space, pixels); fixed dim per space
"""

from __future__ import annotations

import base64
import hashlib
import io
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np
import requests
from PIL import Image
from scipy import ndimage

from .corpus import BinaryMask, MaskCandidate, RasterImage, RleMask, rle_decode, rle_encode
from .errors import DimensionMismatch, MalformedResponse, ServiceUnavailable
from .maskops import dilate

EMBED_DIMS = {
    "foreground_semantic": 768,
    "metric_clip": 512,
    "metric_inception_logits": 1000,
}

RING_RADIUS = 5
RETRIES = 3
BACKOFF_S = 0.2


class Gateway(Protocol):
    def segment(self, image: RasterImage, source_id: str = "") -> list[MaskCandidate]: ...

    def inpaint(self, image: RasterImage, mask: BinaryMask) -> RasterImage: ...

    def score_foreground(self, crop: RasterImage) -> float: ...

    def embed(self, image: RasterImage, space: str) -> np.ndarray: ...


def _digest(image: RasterImage, extra: bytes = b"") -> bytes:
    h = hashlib.sha256()
    h.update(f"{image.width}x{image.height}x{image.channels}".encode())
    h.update(image.pixels.tobytes())
    h.update(extra)
    return h.digest()


@dataclass
class MockGateway:
    """In-process stand-in for the model services; pure and deterministic."""

    score_pins: dict[str, float] = field(default_factory=dict)
    max_candidates: int = 32

    def pin_score(self, crop: RasterImage, value: float) -> None:
        """Pin the classifier score for one exact crop (fixture table)."""
        self.score_pins[_digest(crop).hex()] = value

    def segment(self, image: RasterImage, source_id: str = "") -> list[MaskCandidate]:
        px = image.pixels if image.channels == 3 else np.repeat(image.pixels, 3, axis=2)
        packed = (
            (px[:, :, 0].astype(np.uint32) << 16)
            | (px[:, :, 1].astype(np.uint32) << 8)
            | px[:, :, 2].astype(np.uint32)
        )
        values, counts = np.unique(packed, return_counts=True)
        fg = packed != values[counts.argmax()]
        if not fg.any():
            return []
        labels, n = ndimage.label(fg, structure=np.ones((3, 3)))
        regions = []
        for lab in range(1, n + 1):
            bits = labels == lab
            first = int(np.flatnonzero(bits.ravel())[0])
            regions.append((int(bits.sum()), first, bits))
        regions.sort(key=lambda r: (-r[0], r[1]))
        out = []
        for i, (_, _, bits) in enumerate(regions[: self.max_candidates]):
            score = max(0.05, 0.9 - 0.1 * i)
            out.append(MaskCandidate(mask=BinaryMask(bits), score=score, source_id=source_id))
        return out

    def inpaint(self, image: RasterImage, mask: BinaryMask) -> RasterImage:
        if (mask.width, mask.height) != (image.width, image.height):
            raise DimensionMismatch("inpaint mask dims differ from image")
        if mask.is_empty():
            return image
        ring = dilate(mask, RING_RADIUS).bits & ~mask.bits
        px = image.pixels.astype(np.float64)
        source = ring if ring.any() else ~mask.bits if (~mask.bits).any() else None
        if source is None:
            fill = px.reshape(-1, image.channels).mean(axis=0)
        else:
            fill = px[source].mean(axis=0)
        out = image.pixels.copy()
        out[mask.bits] = np.clip(np.rint(fill), 0, 255).astype(np.uint8)
        return RasterImage(out)

    def score_foreground(self, crop: RasterImage) -> float:
        digest = _digest(crop)
        pinned = self.score_pins.get(digest.hex())
        if pinned is not None:
            return pinned
        return int.from_bytes(digest[:8], "big") / 2**64

    def embed(self, image: RasterImage, space: str) -> np.ndarray:
        dim = EMBED_DIMS.get(space)
        if dim is None:
            raise ValueError(f"unknown embedding space {space!r}")
        seed = np.frombuffer(_digest(image, space.encode()), dtype=np.uint32)
        rng = np.random.default_rng(np.random.SeedSequence(seed.tolist()))
        vec = rng.standard_normal(dim)
        return vec / np.linalg.norm(vec)


# --- wire codecs ----------------------------------------------------------------


def image_to_b64(image: RasterImage) -> str:
    buf = io.BytesIO()
    arr = image.pixels[:, :, 0] if image.channels == 1 else image.pixels
    Image.fromarray(arr).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def image_from_b64(data: str) -> RasterImage:
    raw = base64.b64decode(data)
    with Image.open(io.BytesIO(raw)) as im:
        if im.mode == "L":
            arr = np.asarray(im, dtype=np.uint8)[:, :, None]
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return RasterImage(arr)


@dataclass
class HttpGateway:
    """HTTP client for the four inference endpoints.

    Transient failures (connection errors, timeouts, 5xx) are retried with
    exponential backoff; schema or value violations raise MalformedResponse
    immediately. A semaphore bounds in-flight requests.
    """

    base_url: str
    token: str | None = None
    retries: int = RETRIES
    backoff_s: float = BACKOFF_S
    timeout_s: float = 30.0
    max_inflight: int = 8
    sleep: Callable[[float], None] = time.sleep  # injectable for tests

    def __post_init__(self):
        import threading

        self.base_url = self.base_url.rstrip("/")
        self._session = requests.Session()
        self._gate = threading.BoundedSemaphore(self.max_inflight)

    def _post(self, path: str, body: dict) -> dict:
        headers = {}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        last_error = None
        for attempt in range(self.retries):
            if attempt:
                self.sleep(self.backoff_s * 2 ** (attempt - 1))
            try:
                with self._gate:
                    resp = self._session.post(
                        f"{self.base_url}{path}", json=body, headers=headers,
                        timeout=self.timeout_s,
                    )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code >= 500:
                last_error = RuntimeError(f"HTTP {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise MalformedResponse(f"{path}: HTTP {resp.status_code}")
            try:
                return resp.json()
            except ValueError as exc:
                raise MalformedResponse(f"{path}: invalid JSON ({exc})") from exc
        raise ServiceUnavailable(f"{path}: {last_error!r} after {self.retries} attempts")

    def segment(self, image: RasterImage, source_id: str = "") -> list[MaskCandidate]:
        payload = self._post("/segment", {"image": image_to_b64(image)})
        masks = payload.get("masks")
        if not isinstance(masks, list):
            raise MalformedResponse("/segment: missing masks list")
        out = []
        for item in masks:
            try:
                rle = RleMask.from_json(item["rle"])
                score = float(item["score"])
            except Exception as exc:
                raise MalformedResponse(f"/segment: bad mask entry ({exc})") from exc
            if (rle.width, rle.height) != (image.width, image.height):
                raise MalformedResponse("/segment: mask dims differ from image")
            if not (0.0 <= score <= 1.0):
                raise MalformedResponse(f"/segment: score {score} outside [0, 1]")
            out.append(MaskCandidate(mask=rle_decode(rle), score=score, source_id=source_id))
        return out

    def inpaint(self, image: RasterImage, mask: BinaryMask) -> RasterImage:
        if (mask.width, mask.height) != (image.width, image.height):
            raise DimensionMismatch("inpaint mask dims differ from image")
        payload = self._post(
            "/inpaint",
            {"image": image_to_b64(image), "mask": rle_encode(mask).to_json()},
        )
        try:
            result = image_from_b64(payload["image"])
        except Exception as exc:
            raise MalformedResponse(f"/inpaint: bad image payload ({exc})") from exc
        if result.size != image.size:
            raise MalformedResponse("/inpaint: result dims differ from input")
        return result

    def score_foreground(self, crop: RasterImage) -> float:
        payload = self._post("/score_fg", {"image": image_to_b64(crop)})
        try:
            score = float(payload["score"])
        except Exception as exc:
            raise MalformedResponse(f"/score_fg: bad score ({exc})") from exc
        if not (0.0 <= score <= 1.0):
            raise MalformedResponse(f"/score_fg: score {score} outside [0, 1]")
        return score

    def embed(self, image: RasterImage, space: str) -> np.ndarray:
        if space not in EMBED_DIMS:
            raise ValueError(f"unknown embedding space {space!r}")
        payload = self._post("/embed", {"image": image_to_b64(image), "space": space})
        try:
            vec = np.asarray(payload["vector"], dtype=np.float64)
        except Exception as exc:
            raise MalformedResponse(f"/embed: bad vector ({exc})") from exc
        if vec.ndim != 1 or len(vec) != EMBED_DIMS[space]:
            raise MalformedResponse(
                f"/embed: expected dim {EMBED_DIMS[space]}, got shape {vec.shape}"
            )
        return vec


def embed_batch(gateway: Gateway, images: list[RasterImage], space: str) -> np.ndarray:
    """Order-preserving batch embedding."""
    return np.stack([gateway.embed(img, space) for img in images])


def make_gateway(url: str | None, mock: bool, token: str | None = None) -> Gateway:
    if mock:
        return MockGateway()
    if not url:
        raise ValueError("gateway url required unless --mock is set (FORGE_GATEWAY_URL)")
    return HttpGateway(base_url=url, token=token)
