"""Top-k passage retrieval: sparse BM25 and exact dense dot-product search."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(slots=True)
class RetrievalResult:
    """A ranked top-k list for one query.

    Scores are non-increasing, ties are broken by ascending passage_id, and
    no passage appears twice.
    """

    query_id: str
    retriever: str  # "BM25" or "DENSE"
    ranking: list[tuple[str, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        prev: tuple[float, str] | None = None
        seen: set[str] = set()
        for pid, score in self.ranking:
            if pid in seen:
                raise ValueError(f"duplicate passage_id {pid!r} in ranking")
            seen.add(pid)
            if prev is not None:
                if score > prev[0] or (score == prev[0] and pid < prev[1]):
                    raise ValueError(
                        f"ranking out of order at {pid!r}: "
                        f"({score}, {pid!r}) after {prev}"
                    )
            prev = (score, pid)

    def top(self, k: int) -> "RetrievalResult":
        """The same result truncated to its first k entries."""
        return RetrievalResult(self.query_id, self.retriever, self.ranking[:k])

    def passage_ids(self) -> list[str]:
        return [pid for pid, _ in self.ranking]


from .bm25 import (  # noqa: E402
    InvertedIndex,
    bm25_score,
    build_bm25_index,
    load_index,
    save_index,
    search_bm25,
)
from .dense import (  # noqa: E402
    EmbeddingStore,
    load_store,
    save_store,
    search_dense,
)
from .providers import (  # noqa: E402
    BagHashEmbedder,
    EmbeddingProvider,
    FileStoreProvider,
    RemoteEncoder,
    TestHashEmbedder,
)

__all__ = [
    "RetrievalResult",
    "InvertedIndex",
    "build_bm25_index",
    "bm25_score",
    "search_bm25",
    "save_index",
    "load_index",
    "EmbeddingStore",
    "search_dense",
    "save_store",
    "load_store",
    "EmbeddingProvider",
    "TestHashEmbedder",
    "BagHashEmbedder",
    "FileStoreProvider",
    "RemoteEncoder",
]
