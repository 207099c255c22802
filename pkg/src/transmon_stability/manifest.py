"""Run manifests: what was run, with which inputs, producing which files."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .io import dump_json, write_text

MANIFEST_NAME = "manifest.json"


def canonical_hash(obj) -> str:
    """SHA-256 of the sorted, compact JSON form of ``obj``."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: list
    config: dict
    seeds: dict
    inputs: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    version: str = __version__
    started: str = field(default_factory=_now)
    finished: str | None = None

    @property
    def config_hash(self) -> str:
        return canonical_hash({"config": self.config, "seeds": self.seeds})

    def add_input(self, path) -> None:
        path = Path(path)
        if path.is_dir():
            for p in sorted(path.rglob("*")):
                if p.is_file():
                    self.inputs[str(p)] = file_digest(p)
        else:
            self.inputs[str(path)] = file_digest(path)

    def to_dict(self) -> dict:
        return {
            "command": list(self.command),
            "config": self.config,
            "config_hash": self.config_hash,
            "seeds": self.seeds,
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": sorted(self.outputs),
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
        }

    def write(self, out_dir) -> Path:
        self.finished = _now()
        return write_text(Path(out_dir) / MANIFEST_NAME, dump_json(self.to_dict()))
