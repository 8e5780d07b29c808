"""From-scratch BM25 inverted index over stemmed tokens.

Scoring uses the Robertson-smoothed IDF and the canonical parameter defaults
k1 = 1.2, b = 0.75:

    score(q, p) = sum over query stems t of
        idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(p) / avg_len))
    idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))

Repeated query stems contribute once per occurrence.  The on-disk format
(magic ``OQFSIDX1``) is documented in docs/FORMATS.md.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

from .. import textproc
from ..corpus import Collection
from . import RetrievalResult

K1 = 1.2
B = 0.75

_MAGIC = b"OQFSIDX1"
_VERSION = 1


@dataclass(slots=True)
class InvertedIndex:
    """Postings sorted by passage ordinal; immutable once built."""

    postings: dict[str, list[tuple[int, int]]]  # stem -> [(ordinal, tf), ...]
    lengths: list[int]  # token count per passage
    passage_ids: list[str]  # ordinal -> passage_id
    avg_length: float = field(init=False)

    def __post_init__(self) -> None:
        n = len(self.lengths)
        self.avg_length = (sum(self.lengths) / n) if n else 0.0

    @property
    def n_passages(self) -> int:
        return len(self.lengths)

    def idf(self, stem: str) -> float:
        df = len(self.postings.get(stem, ()))
        n = self.n_passages
        return math.log(1.0 + (n - df + 0.5) / (df + 0.5))


def build_bm25_index(
    collection: Collection, stopwords: frozenset[str] | None = None
) -> InvertedIndex:
    """Index every passage's stems; deterministic given passage order.

    ``stopwords`` (surface forms, optional) are dropped before stemming.
    Zero-token passages are indexed with length 0 and can never match.
    """
    if not collection.passages:
        raise ValueError("cannot index an empty collection")
    postings: dict[str, list[tuple[int, int]]] = {}
    lengths: list[int] = []
    ids: list[str] = []
    for ordinal, passage in enumerate(collection.passages):
        tokens = textproc.tokenize(passage.text)
        if stopwords:
            tokens = [t for t in tokens if t.surface not in stopwords]
        counts: dict[str, int] = {}
        for t in tokens:
            counts[t.stem] = counts.get(t.stem, 0) + 1
        for stem_ in sorted(counts):
            postings.setdefault(stem_, []).append((ordinal, counts[stem_]))
        lengths.append(len(tokens))
        ids.append(passage.passage_id)
    return InvertedIndex(postings=postings, lengths=lengths, passage_ids=ids)


def _contribution(index: InvertedIndex, idf: float, tf: int, length: int) -> float:
    norm = K1 * (1.0 - B + B * length / index.avg_length)
    return idf * tf * (K1 + 1.0) / (tf + norm)


def bm25_score(index: InvertedIndex, query_stems: list[str], ordinal: int) -> float:
    """Direct formula evaluation for one passage; absent stems contribute 0."""
    if ordinal >= index.n_passages:
        raise IndexError(f"ordinal {ordinal} out of range ({index.n_passages} passages)")
    score = 0.0
    length = index.lengths[ordinal]
    for stem_ in query_stems:
        plist = index.postings.get(stem_)
        if not plist:
            continue
        tf = 0
        for o, f in plist:  # postings are short in tests; bisect not needed
            if o == ordinal:
                tf = f
                break
            if o > ordinal:
                break
        if tf == 0:
            continue
        score += _contribution(index, index.idf(stem_), tf, length)
    return score


def search_bm25(
    index: InvertedIndex,
    query: str,
    k: int,
    stopwords: frozenset[str] | None = None,
    query_id: str = "",
) -> RetrievalResult:
    """Exact top-k among passages sharing at least one stem with the query."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    query_tokens = textproc.tokenize(query)
    if stopwords:
        query_tokens = [t for t in query_tokens if t.surface not in stopwords]
    acc: dict[int, float] = {}
    for token in query_tokens:
        plist = index.postings.get(token.stem)
        if not plist:
            continue
        idf = index.idf(token.stem)
        for ordinal, tf in plist:
            acc[ordinal] = acc.get(ordinal, 0.0) + _contribution(
                index, idf, tf, index.lengths[ordinal]
            )
    ranked = sorted(
        acc.items(), key=lambda item: (-item[1], index.passage_ids[item[0]])
    )[:k]
    return RetrievalResult(
        query_id=query_id,
        retriever="BM25",
        ranking=[(index.passage_ids[o], s) for o, s in ranked],
    )


# --------------------------------------------------------------------------
# Persistence.  Layout (all little-endian) in docs/FORMATS.md.
# --------------------------------------------------------------------------


def save_index(index: InvertedIndex, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<B", _VERSION))
        fh.write(struct.pack("<Q", index.n_passages))
        fh.write(struct.pack(f"<{index.n_passages}I", *index.lengths))
        for pid in index.passage_ids:
            raw = pid.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
        fh.write(struct.pack("<Q", len(index.postings)))
        for stem_ in sorted(index.postings):
            raw = stem_.encode("utf-8")
            plist = index.postings[stem_]
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", len(plist)))
            flat = [v for pair in plist for v in pair]
            fh.write(struct.pack(f"<{len(flat)}I", *flat))


def load_index(path: str | Path) -> InvertedIndex:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {_MAGIC!r}")
        (version,) = struct.unpack("<B", fh.read(1))
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported index version {version}")
        (n,) = struct.unpack("<Q", fh.read(8))
        lengths = list(struct.unpack(f"<{n}I", fh.read(4 * n)))
        ids = []
        for _ in range(n):
            (ln,) = struct.unpack("<H", fh.read(2))
            ids.append(fh.read(ln).decode("utf-8"))
        (n_stems,) = struct.unpack("<Q", fh.read(8))
        postings: dict[str, list[tuple[int, int]]] = {}
        for _ in range(n_stems):
            (ln,) = struct.unpack("<H", fh.read(2))
            stem_ = fh.read(ln).decode("utf-8")
            (n_post,) = struct.unpack("<I", fh.read(4))
            flat = struct.unpack(f"<{2 * n_post}I", fh.read(8 * n_post))
            postings[stem_] = [(flat[i], flat[i + 1]) for i in range(0, len(flat), 2)]
    return InvertedIndex(postings=postings, lengths=lengths, passage_ids=ids)
