"""Exact dense retrieval: full-scan dot-product top-k over a vector store.

Similarity is the raw dot product of query and passage vectors.  Vectors are
stored as float32; score accumulation runs in float64 so results do not
depend on block boundaries.  Search is exact (no approximate structures):
a blocked scan computes every score, then partial selection extracts the
top k with ties broken by ascending passage_id.

The on-disk format (magic ``OQFSEMB1``) is documented in docs/FORMATS.md.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import RetrievalResult

_MAGIC = b"OQFSEMB1"
_BLOCK_ROWS = 8192


@dataclass(slots=True)
class EmbeddingStore:
    """N x d float32 matrix plus the ordinal -> passage_id table."""

    dimension: int
    vectors: np.ndarray  # shape (N, d), float32
    passage_ids: list[str]

    def __post_init__(self) -> None:
        self.vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2 or self.vectors.shape[1] != self.dimension:
            raise ValueError(
                f"vectors shape {self.vectors.shape} does not match dimension {self.dimension}"
            )
        if len(self.passage_ids) != self.vectors.shape[0]:
            raise ValueError(
                f"{len(self.passage_ids)} ids for {self.vectors.shape[0]} vectors"
            )
        if not np.isfinite(self.vectors).all():
            raise ValueError("store contains non-finite vector entries")

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def vector_for(self, passage_id: str) -> np.ndarray:
        return self.vectors[self.passage_ids.index(passage_id)]


def score_all(store: EmbeddingStore, qvec: np.ndarray) -> np.ndarray:
    """Float64 dot products of the query against every stored vector."""
    q = np.asarray(qvec, dtype=np.float64).reshape(-1)
    if q.shape[0] != store.dimension:
        raise ValueError(
            f"query dimension {q.shape[0]} does not match store dimension {store.dimension}"
        )
    n = len(store)
    scores = np.empty(n, dtype=np.float64)
    for start in range(0, n, _BLOCK_ROWS):
        block = store.vectors[start : start + _BLOCK_ROWS]
        scores[start : start + block.shape[0]] = block.astype(np.float64) @ q
    return scores


def search_dense(
    store: EmbeddingStore, qvec: np.ndarray, k: int, query_id: str = ""
) -> RetrievalResult:
    """Exact top-k by dot product; ties broken by ascending passage_id."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    scores = score_all(store, qvec)
    n = len(store)
    if k >= n:
        candidates = range(n)
    else:
        top = np.argpartition(-scores, k - 1)[:k]
        kth_score = scores[top].min()
        candidates = np.flatnonzero(scores >= kth_score)
    ordered = sorted(candidates, key=lambda i: (-scores[i], store.passage_ids[i]))[:k]
    return RetrievalResult(
        query_id=query_id,
        retriever="DENSE",
        ranking=[(store.passage_ids[i], float(scores[i])) for i in ordered],
    )


# --------------------------------------------------------------------------
# Persistence: header {magic "OQFSEMB1", u32 dimension, u64 count}, then
# count*d float32 values, then the id table — all little-endian.
# --------------------------------------------------------------------------


def save_store(store: EmbeddingStore, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", store.dimension))
        fh.write(struct.pack("<Q", len(store)))
        fh.write(store.vectors.astype("<f4", copy=False).tobytes(order="C"))
        for pid in store.passage_ids:
            raw = pid.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)


def load_store(path: str | Path) -> EmbeddingStore:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {_MAGIC!r}")
        (dim,) = struct.unpack("<I", fh.read(4))
        (count,) = struct.unpack("<Q", fh.read(8))
        raw = fh.read(4 * dim * count)
        vectors = np.frombuffer(raw, dtype="<f4").reshape(count, dim).copy()
        ids = []
        for _ in range(count):
            (ln,) = struct.unpack("<H", fh.read(2))
            ids.append(fh.read(ln).decode("utf-8"))
    return EmbeddingStore(dimension=dim, vectors=vectors, passage_ids=ids)
