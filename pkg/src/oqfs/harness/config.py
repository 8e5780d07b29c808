"""Run configuration: one declarative file, env overrides, CLI overrides.

Config files are ``key = value`` lines (# comments allowed).  Any key can be
overridden by an ``OQFS_<KEY>`` environment variable, and those in turn by
explicit keyword overrides (the CLI flags).  Every run writes a resolved
manifest (config hash + timestamp) next to its outputs so emitted table rows
stay traceable.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

COLLECTIONS = ("WIKI", "DUC", "MIX", "SYNTH")
RETRIEVERS = ("BM25", "DENSE")
GENERATORS = ("EXTRACTIVE", "REMOTE", "RANDOM")


@dataclass
class ExperimentConfig:
    collection: str = "SYNTH"
    retriever: str = "BM25"
    generator: str = "EXTRACTIVE"
    k: int = 50
    max_words: int = 250
    seed: int = 42
    docs: str = ""  # documents jsonl
    clusters: str = ""  # clusters jsonl
    passages: str = ""  # chunked passages jsonl
    out_dir: str = "runs/latest"
    endpoint: str = ""  # remote generation service
    embed_provider: str = "bag"  # bag | hash | remote | file
    embed_dim: int = 768
    embed_endpoint: str = ""  # remote encoder service
    store: str = ""  # embedding store path (input for "file", cache otherwise)
    mmr_lambda: float = 0.7
    stopwords: str = ""  # optional stopword file applied to BM25 only

    def validate(self) -> None:
        if self.collection not in COLLECTIONS:
            raise ValueError(f"collection must be one of {COLLECTIONS}")
        if self.retriever not in RETRIEVERS:
            raise ValueError(f"retriever must be one of {RETRIEVERS}")
        if self.generator not in GENERATORS:
            raise ValueError(f"generator must be one of {GENERATORS}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_words < 1:
            raise ValueError(f"max_words must be >= 1, got {self.max_words}")
        for name in ("docs", "clusters", "passages", "store", "stopwords"):
            value = getattr(self, name)
            if value and not Path(value).exists():
                raise FileNotFoundError(f"config path {name} = {value!r} does not exist")

    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()

    def write_manifest(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "manifest.json"
        manifest = {
            "config": asdict(self),
            "config_sha256": self.config_hash(),
            "created_utc": datetime.now(timezone.utc).isoformat(),
        }
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return path


def _coerce(raw: str, target_type: type):
    if target_type is int:
        return int(raw)
    if target_type is float:
        return float(raw)
    return raw


def load_config(path: str | Path | None = None, **overrides) -> ExperimentConfig:
    """File values, then OQFS_* environment variables, then overrides."""
    by_name = {f.name: f.type for f in fields(ExperimentConfig)}
    types = {"k": int, "max_words": int, "seed": int, "embed_dim": int, "mmr_lambda": float}
    values: dict = {}
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in by_name:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _coerce(raw.strip(), types.get(key, str))
    for key in by_name:
        env = os.environ.get(f"OQFS_{key.upper()}")
        if env is not None:
            values[key] = _coerce(env, types.get(key, str))
    for key, value in overrides.items():
        if key not in by_name:
            raise ValueError(f"unknown config override {key!r}")
        if value is not None:
            values[key] = value
    return ExperimentConfig(**values)
