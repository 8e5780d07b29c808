"""Embedding providers behind one small interface.

Encoders are external to this toolkit; providers supply vectors without
reimplementing them.  ``FileStoreProvider`` serves precomputed vectors,
``RemoteEncoder`` speaks the /embed wire protocol, ``TestHashEmbedder``
gives deterministic pseudo-random vectors for tests, and ``BagHashEmbedder``
hashes stemmed term frequencies into a fixed-width vector so dense retrieval
is meaningful on corpora without precomputed embeddings.
"""

from __future__ import annotations

import hashlib
import threading
import time
from typing import Protocol, Sequence

import numpy as np
import requests

from .. import textproc
from ..errors import ProtocolError, TransportError
from .dense import EmbeddingStore

QUERY = "query"
PASSAGE = "passage"
_ROLES = (QUERY, PASSAGE)


class EmbeddingProvider(Protocol):
    dimension: int

    def embed(self, text: str, role: str) -> np.ndarray: ...

    def embed_batch(self, texts: Sequence[str], role: str) -> np.ndarray: ...


def _check(text: str, role: str) -> None:
    if not text:
        raise ValueError("cannot embed empty text")
    if role not in _ROLES:
        raise ValueError(f"role must be one of {_ROLES}, got {role!r}")


class _BatchFromSingle:
    def embed_batch(self, texts: Sequence[str], role: str) -> np.ndarray:
        return np.stack([self.embed(t, role) for t in texts])


class TestHashEmbedder(_BatchFromSingle):
    """Deterministic, seedable vectors; role-sensitive like a dual encoder."""

    __test__ = False  # not a pytest class despite the name

    def __init__(self, dimension: int = 768, seed: int = 0):
        self.dimension = dimension
        self.seed = seed

    def embed(self, text: str, role: str) -> np.ndarray:
        _check(text, role)
        digest = hashlib.sha256(
            f"{self.seed}\x1f{role}\x1f{text}".encode("utf-8")
        ).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        return rng.standard_normal(self.dimension).astype(np.float32)


class BagHashEmbedder(_BatchFromSingle):
    """Feature-hashed stemmed term frequencies (signed hashing trick).

    Dot products approximate stem-overlap weight, which makes exact dense
    search behave like a lexical retriever.  Queries and passages share one
    vector space, so both roles map a given text to the same vector.
    """

    def __init__(self, dimension: int = 768, seed: int = 0):
        self.dimension = dimension
        self.seed = seed

    def embed(self, text: str, role: str) -> np.ndarray:
        _check(text, role)
        vec = np.zeros(self.dimension, dtype=np.float64)
        for stem in textproc.stems(text):
            digest = hashlib.sha256(f"{self.seed}\x1f{stem}".encode("utf-8")).digest()
            bucket = int.from_bytes(digest[:8], "little") % self.dimension
            sign = 1.0 if digest[8] & 1 else -1.0
            vec[bucket] += sign
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec.astype(np.float32)


class FileStoreProvider(_BatchFromSingle):
    """Precomputed vectors keyed by the store's id table.

    ``embed(text, role)`` treats ``text`` as the lookup key; use passage ids
    for passage stores and query ids (or verbatim query text) for query
    stores, matching however the store was built.
    """

    def __init__(self, passage_store: EmbeddingStore, query_store: EmbeddingStore | None = None):
        self.dimension = passage_store.dimension
        self._stores = {
            PASSAGE: passage_store,
            QUERY: query_store if query_store is not None else passage_store,
        }
        self._lookup = {
            role: {pid: i for i, pid in enumerate(store.passage_ids)}
            for role, store in self._stores.items()
        }

    def embed(self, text: str, role: str) -> np.ndarray:
        _check(text, role)
        try:
            idx = self._lookup[role][text]
        except KeyError:
            raise KeyError(f"no stored {role} vector for key {text!r}") from None
        return self._stores[role].vectors[idx]


class RemoteEncoder(_BatchFromSingle):
    """Client for POST /embed: {texts: [...], role: "query"|"passage"}.

    Retries transport failures with bounded exponential backoff, then raises
    TransportError (timeout vs connection).  Replies that are not valid
    protocol messages raise ProtocolError with the raw body attached.
    At most ``max_in_flight`` requests run concurrently.
    """

    def __init__(
        self,
        endpoint: str,
        dimension: int = 768,
        timeout: float = 30.0,
        max_retries: int = 3,
        backoff: float = 0.2,
        max_in_flight: int = 8,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.dimension = dimension
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self._gate = threading.Semaphore(max_in_flight)
        self._session = requests.Session()

    def embed(self, text: str, role: str) -> np.ndarray:
        _check(text, role)
        return self.embed_batch([text], role)[0]

    def embed_batch(self, texts: Sequence[str], role: str) -> np.ndarray:
        if role not in _ROLES:
            raise ValueError(f"role must be one of {_ROLES}, got {role!r}")
        payload = {"texts": list(texts), "role": role}
        last: Exception | None = None
        for attempt in range(self.max_retries):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    resp = self._session.post(
                        f"{self.endpoint}/embed", json=payload, timeout=self.timeout
                    )
                break
            except requests.Timeout as exc:
                last = TransportError(f"embed request timed out: {exc}", kind="timeout")
            except requests.ConnectionError as exc:
                last = TransportError(f"embed request failed: {exc}", kind="connection")
        else:
            assert last is not None
            raise last
        try:
            body = resp.json()
            vectors = body["vectors"]
            arr = np.asarray(vectors, dtype=np.float32)
            if arr.ndim != 2 or arr.shape != (len(texts), self.dimension):
                raise ValueError(f"vector block has shape {arr.shape}")
        except Exception as exc:
            raise ProtocolError(
                f"malformed /embed reply: {exc}", body=resp.text[:2000]
            ) from exc
        return arr


def build_store(
    provider: EmbeddingProvider,
    ids: Sequence[str],
    texts: Sequence[str],
    role: str = PASSAGE,
    batch_size: int = 64,
) -> EmbeddingStore:
    """Embed a text sequence into a store keyed by ``ids``."""
    if len(ids) != len(texts):
        raise ValueError(f"{len(ids)} ids for {len(texts)} texts")
    blocks = []
    for start in range(0, len(texts), batch_size):
        blocks.append(provider.embed_batch(texts[start : start + batch_size], role))
    vectors = (
        np.concatenate(blocks)
        if blocks
        else np.zeros((0, provider.dimension), dtype=np.float32)
    )
    return EmbeddingStore(
        dimension=provider.dimension, vectors=vectors, passage_ids=list(ids)
    )
