"""Embedded HTTP server for the human QC loop.

Serves pending foreground candidates with their filter verdicts, accepts
good/bad labels into an append-only audit log (last write wins per id), and
exports the classifier-training label manifest. Reads never mutate state;
writes are serialized through one lock, so concurrent reviewer sessions
converge. The static review UI, when built, is served from ui_dir.

Endpoints:
  GET  /api/pending?page=&size=&filter=unlabeled|all
  POST /api/label            {"id", "label": "good"|"bad", "annotator"}
  GET  /api/export           line-delimited {"id", "crop", "label"}
  GET  /api/crop/<id>        candidate crop PNG
  GET  /api/sources          per-source summaries
  GET  /api/triage?source=   all candidates of one source with verdicts
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .errors import EmptyStore, UnknownId
from .manifest import MANIFEST_NAME, read_manifest

LABELS_NAME = "review/labels.jsonl"
VALID_LABELS = ("good", "bad")


class LabelStore:
    """Append-only label log with an in-memory last-write-wins index."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._labels: dict[str, dict] = {}
        if self.path.exists():
            for line in self.path.read_text().splitlines():
                if line.strip():
                    entry = json.loads(line)
                    self._labels[entry["id"]] = entry

    def submit(self, candidate_id: str, label: str, annotator: str) -> dict:
        if label not in VALID_LABELS:
            raise ValueError(f"label must be one of {VALID_LABELS}, got {label!r}")
        entry = {
            "id": candidate_id,
            "label": label,
            "annotator": annotator,
            "ts": time.time(),
        }
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
            self._labels[candidate_id] = entry
        return entry

    def get(self, candidate_id: str) -> str | None:
        entry = self._labels.get(candidate_id)
        return entry["label"] if entry else None

    def count(self) -> int:
        return len(self._labels)

    def export_lines(self, crop_paths: dict[str, str]) -> list[str]:
        """Sorted by id; byte-stable across calls."""
        if not self._labels:
            raise EmptyStore("no labels to export")
        lines = []
        for cid in sorted(self._labels):
            entry = self._labels[cid]
            lines.append(
                json.dumps(
                    {"id": cid, "crop": crop_paths.get(cid, ""), "label": entry["label"]},
                    sort_keys=True,
                )
            )
        return lines


class ReviewData:
    """Candidate index loaded from the pipeline manifest."""

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        state = read_manifest(self.out_dir / MANIFEST_NAME)
        self.sources = state.sources
        self.candidates: dict[str, dict] = {}
        self.order: list[str] = []
        for s in state.sources:
            for c in s.get("candidates", []):
                self.candidates[c["id"]] = {**c, "source": s["id"]}
                self.order.append(c["id"])
        self.order.sort()

    def crop_paths(self) -> dict[str, str]:
        return {cid: self.candidates[cid]["crop"] for cid in self.order}


def make_handler(data: ReviewData, store: LabelStore, ui_dir: Path | None, token: str | None):
    class ReviewHandler(BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def _json(self, status: int, payload) -> None:
            body = json.dumps(payload, sort_keys=True).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _bytes(self, status: int, body: bytes, ctype: str) -> None:
            self.send_response(status)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _authorized(self) -> bool:
            if token is None:
                return True
            header = self.headers.get("Authorization", "")
            return header == f"Bearer {token}" or self.headers.get("X-Review-Token") == token

        def do_GET(self):
            url = urlparse(self.path)
            if url.path.startswith("/api/") and not self._authorized():
                self._json(401, {"error": "Unauthorized"})
                return
            if url.path == "/api/pending":
                self._pending(parse_qs(url.query))
            elif url.path == "/api/export":
                self._export()
            elif url.path.startswith("/api/crop/"):
                self._crop(url.path.removeprefix("/api/crop/"))
            elif url.path == "/api/sources":
                self._sources()
            elif url.path == "/api/triage":
                self._triage(parse_qs(url.query))
            elif not url.path.startswith("/api/"):
                self._static(url.path)
            else:
                self._json(404, {"error": "no such endpoint"})

        def do_POST(self):
            url = urlparse(self.path)
            if not self._authorized():
                self._json(401, {"error": "Unauthorized"})
                return
            if url.path != "/api/label":
                self._json(404, {"error": "no such endpoint"})
                return
            try:
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length))
                cid = body["id"]
                label = body["label"]
                annotator = body.get("annotator", "anonymous")
            except (ValueError, KeyError, TypeError) as exc:
                self._json(400, {"error": f"bad request: {exc}"})
                return
            if cid not in data.candidates:
                self._json(404, {"error": "UnknownId", "id": cid})
                return
            try:
                store.submit(cid, label, annotator)
            except ValueError as exc:
                self._json(400, {"error": str(exc)})
                return
            self._json(200, {"ok": True, "id": cid, "label": label})

        def _pending(self, query):
            page = int(query.get("page", ["1"])[0])
            size = int(query.get("size", ["20"])[0])
            which = query.get("filter", ["all"])[0]
            ids = data.order
            if which == "unlabeled":
                ids = [cid for cid in ids if store.get(cid) is None]
            total = len(ids)
            start = (page - 1) * size
            items = []
            for cid in ids[start : start + size]:
                c = data.candidates[cid]
                items.append(
                    {
                        "id": cid,
                        "source": c["source"],
                        "crop": f"/api/crop/{cid}",
                        "verdicts": c["verdicts"],
                        "ssim": c["ssim"],
                        "kept": c["kept"],
                        "label": store.get(cid),
                    }
                )
            self._json(200, {"items": items, "page": page, "size": size, "total": total})

        def _export(self):
            try:
                lines = store.export_lines(data.crop_paths())
            except EmptyStore as exc:
                self._json(409, {"error": "EmptyStore", "detail": str(exc)})
                return
            self._bytes(200, ("\n".join(lines) + "\n").encode(), "application/x-ndjson")

        def _crop(self, cid):
            c = data.candidates.get(cid)
            if c is None:
                self._json(404, {"error": "UnknownId", "id": cid})
                return
            path = data.out_dir / c["crop"]
            if not path.exists():
                self._json(404, {"error": "crop file missing", "id": cid})
                return
            self._bytes(200, path.read_bytes(), "image/png")

        def _sources(self):
            payload = [
                {
                    "id": s["id"],
                    "status": s.get("status"),
                    "n_post_nms": s.get("n_post_nms", 0),
                    "n_records": s.get("n_records", 0),
                }
                for s in data.sources
            ]
            self._json(200, payload)

        def _triage(self, query):
            wanted = query.get("source", [None])[0]
            items = []
            for cid in data.order:
                c = data.candidates[cid]
                if wanted is not None and c["source"] != wanted:
                    continue
                items.append(
                    {
                        "id": cid,
                        "source": c["source"],
                        "crop": f"/api/crop/{cid}",
                        "verdicts": c["verdicts"],
                        "ssim": c["ssim"],
                        "kept": c["kept"],
                        "label": store.get(cid),
                    }
                )
            self._json(200, {"items": items, "source": wanted})

        def _static(self, path):
            if ui_dir is None:
                self._bytes(
                    200,
                    b"<html><body><h1>Review API</h1><p>UI bundle not installed; "
                    b"the JSON API is live under /api/.</p></body></html>",
                    "text/html",
                )
                return
            name = "index.html" if path in ("/", "") else path.lstrip("/")
            target = (ui_dir / name).resolve()
            if not str(target).startswith(str(ui_dir.resolve())) or not target.is_file():
                self._json(404, {"error": "not found"})
                return
            ctype = {
                ".html": "text/html",
                ".js": "text/javascript",
                ".css": "text/css",
                ".map": "application/json",
            }.get(target.suffix, "application/octet-stream")
            self._bytes(200, target.read_bytes(), ctype)

    return ReviewHandler


def create_server(
    out_dir: str | Path,
    port: int = 0,
    ui_dir: str | Path | None = None,
    token: str | None = None,
) -> ThreadingHTTPServer:
    out_dir = Path(out_dir)
    data = ReviewData(out_dir)
    store = LabelStore(out_dir / LABELS_NAME)
    handler = make_handler(data, store, Path(ui_dir) if ui_dir else None, token)
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve_forever(server: ThreadingHTTPServer) -> None:
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
