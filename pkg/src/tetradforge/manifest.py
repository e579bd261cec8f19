"""Append-only line-delimited manifest: the pipeline's crash-safe ledger.

Three line types, each a JSON object with a "type" field:
  config - written once at run start; carries the drift hash
  source - one per processed input image, appended after all of its tetrad
           lines; its presence marks the image complete (commit marker)
  tetrad - one per emitted training record

A torn final line (no trailing newline after a kill) is tolerated and dropped
at resume; any other unparseable line refuses with its line number.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigDrift, CorruptManifest

MANIFEST_NAME = "manifest.jsonl"


def dump_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


@dataclass
class ManifestState:
    config_line: dict | None = None
    sources: list[dict] = field(default_factory=list)
    tetrads: list[dict] = field(default_factory=list)
    lines: list[dict] = field(default_factory=list)  # every parsed line in order
    torn_tail: bool = False

    @property
    def completed_ids(self) -> set[str]:
        return {s["id"] for s in self.sources}

    def tetrads_for(self, source_id: str) -> list[dict]:
        return [t for t in self.tetrads if t["source"] == source_id]


def read_manifest(path: str | Path) -> ManifestState:
    state = ManifestState()
    text = Path(path).read_text()
    ends_with_newline = text.endswith("\n")
    raw_lines = text.split("\n")
    if raw_lines and raw_lines[-1] == "":
        raw_lines.pop()
    for i, raw in enumerate(raw_lines, 1):
        is_last = i == len(raw_lines)
        try:
            obj = json.loads(raw)
            kind = obj["type"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            if is_last and not ends_with_newline:
                state.torn_tail = True
                break
            raise CorruptManifest(i, f"{exc}") from exc
        state.lines.append(obj)
        if kind == "config":
            state.config_line = obj
        elif kind == "source":
            state.sources.append(obj)
        elif kind == "tetrad":
            state.tetrads.append(obj)
        else:
            raise CorruptManifest(i, f"unknown line type {kind!r}")
    return state


def check_drift(state: ManifestState, expected_hash: str) -> None:
    if state.config_line is None:
        raise CorruptManifest(1, "manifest has no config line")
    if state.config_line.get("hash") != expected_hash:
        raise ConfigDrift(
            f"manifest built with config {state.config_line.get('hash')}, "
            f"current is {expected_hash}; thresholds changed, rebuild instead"
        )


def compact_to_completed(path: str | Path, state: ManifestState) -> None:
    """Rewrite the manifest keeping only complete sources (and the config line).

    Drops tetrad lines of sources that never got their commit marker, plus any
    torn tail. No-op when nothing needs dropping.
    """
    completed = state.completed_ids
    kept = [
        line
        for line in state.lines
        if line["type"] == "config"
        or (line["type"] == "source")
        or (line["type"] == "tetrad" and line["source"] in completed)
    ]
    if len(kept) == len(state.lines) and not state.torn_tail:
        return
    path = Path(path)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        for line in kept:
            fh.write(dump_line(line))
    tmp.replace(path)


class ManifestWriter:
    """Serialized appender; one instance per run."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "a")

    def append(self, obj: dict) -> None:
        self._fh.write(dump_line(obj))
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
