"""Documents, passage chunking, collections, and cluster splits.

Documents are chunked greedily into disjoint passages of at most
``max_words`` whitespace tokens; re-joining a document's passages in ordinal
order reproduces its word sequence exactly.  Collections stream to and from
line-delimited JSON so multi-million-passage corpora never need to fit in
memory at once.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

SOURCE_TAGS = ("WIKI", "DUC2005", "DUC2006", "DUC2007", "SYNTH")


@dataclass(frozen=True, slots=True)
class Document:
    doc_id: str
    source_tag: str
    text: str
    title: str | None = None

    def __post_init__(self) -> None:
        if self.source_tag not in SOURCE_TAGS:
            raise ValueError(f"unknown source_tag {self.source_tag!r}")


@dataclass(frozen=True, slots=True)
class Passage:
    passage_id: str
    parent_doc_id: str
    ordinal: int
    text: str
    word_count: int


@dataclass(frozen=True, slots=True)
class Cluster:
    cluster_id: str
    query: str
    member_doc_ids: frozenset[str]
    reference_summaries: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.query.strip():
            raise ValueError(f"cluster {self.cluster_id}: empty query")
        if not self.member_doc_ids:
            raise ValueError(f"cluster {self.cluster_id}: no member documents")
        if not self.reference_summaries:
            raise ValueError(f"cluster {self.cluster_id}: no reference summaries")


@dataclass
class Collection:
    """An ordered passage list plus document-to-cluster membership.

    ``doc_membership`` maps parent doc ids to cluster ids; documents without
    ground-truth membership (the usual case for WIKI) are simply absent.
    Treat built collections as immutable: searches and judgments assume the
    passage order never changes.
    """

    name: str
    passages: list[Passage] = field(default_factory=list)
    doc_membership: dict[str, str] = field(default_factory=dict)
    _by_id: dict[str, Passage] | None = field(default=None, init=False, repr=False)

    def __len__(self) -> int:
        return len(self.passages)

    def passage_by_id(self, passage_id: str) -> Passage:
        if self._by_id is None or len(self._by_id) != len(self.passages):
            self._by_id = {p.passage_id: p for p in self.passages}
        return self._by_id[passage_id]

    def validate(self) -> None:
        seen: set[str] = set()
        for p in self.passages:
            if p.passage_id in seen:
                raise ValueError(f"duplicate passage_id {p.passage_id!r}")
            seen.add(p.passage_id)


def chunk_document(doc: Document, max_words: int = 100) -> list[Passage]:
    """Greedy left-to-right split into runs of exactly ``max_words`` tokens.

    The final passage holds the remainder.  Words are maximal runs of
    non-whitespace characters.  A document that is empty after trimming
    yields zero passages and a logged warning.
    """
    if max_words < 1:
        raise ValueError(f"max_words must be >= 1, got {max_words}")
    words = doc.text.split()
    if not words:
        log.warning("document %s is empty after trimming; no passages", doc.doc_id)
        return []
    passages = []
    for ordinal, start in enumerate(range(0, len(words), max_words)):
        chunk = words[start : start + max_words]
        passages.append(
            Passage(
                passage_id=f"{doc.doc_id}#{ordinal}",
                parent_doc_id=doc.doc_id,
                ordinal=ordinal,
                text=" ".join(chunk),
                word_count=len(chunk),
            )
        )
    return passages


def build_collection(
    docs: Iterable[Document],
    name: str,
    max_words: int = 100,
    doc_membership: dict[str, str] | None = None,
) -> Collection:
    """Chunk every document; passage order is document order then ordinal."""
    passages: list[Passage] = []
    seen: set[str] = set()
    for doc in docs:
        if doc.doc_id in seen:
            raise ValueError(f"duplicate doc_id {doc.doc_id!r}")
        seen.add(doc.doc_id)
        passages.extend(chunk_document(doc, max_words=max_words))
    return Collection(name=name, passages=passages, doc_membership=dict(doc_membership or {}))


def mix_collections(parts: list[Collection], name: str) -> Collection:
    """Concatenate collections, namespacing passage ids by part name.

    Parent doc ids are left as-is so cluster membership stays resolvable in
    the mix; a doc id claimed by two parts for different clusters is
    rejected.
    """
    names = [p.name for p in parts]
    if len(set(names)) != len(names):
        raise ValueError(f"part names must be distinct, got {names}")
    passages: list[Passage] = []
    membership: dict[str, str] = {}
    seen: set[str] = set()
    for part in parts:
        for p in part.passages:
            namespaced = f"{part.name}/{p.passage_id}"
            if namespaced in seen:
                raise ValueError(f"colliding namespaced passage_id {namespaced!r}")
            seen.add(namespaced)
            passages.append(
                Passage(
                    passage_id=namespaced,
                    parent_doc_id=p.parent_doc_id,
                    ordinal=p.ordinal,
                    text=p.text,
                    word_count=p.word_count,
                )
            )
        for doc_id, cluster_id in part.doc_membership.items():
            if doc_id in membership and membership[doc_id] != cluster_id:
                raise ValueError(
                    f"doc {doc_id!r} belongs to {membership[doc_id]!r} and {cluster_id!r}"
                )
            membership[doc_id] = cluster_id
    return Collection(name=name, passages=passages, doc_membership=membership)


def split_train_val(
    clusters: list[Cluster], fraction: float = 0.10, seed: int = 0
) -> tuple[list[Cluster], list[Cluster]]:
    """Hold out ``floor(fraction * n)`` clusters chosen by a seeded shuffle.

    Both returned lists preserve the input order.  The same
    (clusters, fraction, seed) always yields the identical split.
    """
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    if not clusters:
        raise ValueError("cannot split an empty cluster list")
    n_val = int(fraction * len(clusters))
    if n_val == 0:
        log.warning(
            "fraction %.3f of %d clusters floors to an empty validation set",
            fraction,
            len(clusters),
        )
    indices = list(range(len(clusters)))
    random.Random(seed).shuffle(indices)
    val_idx = set(indices[:n_val])
    train = [c for i, c in enumerate(clusters) if i not in val_idx]
    val = [c for i, c in enumerate(clusters) if i in val_idx]
    return train, val


# --------------------------------------------------------------------------
# Line-delimited record IO.
# --------------------------------------------------------------------------


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def write_documents(docs: Iterable[Document], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            rec = {"doc_id": d.doc_id, "source_tag": d.source_tag, "text": d.text}
            if d.title is not None:
                rec["title"] = d.title
            fh.write(_dump(rec) + "\n")
            n += 1
    return n


def read_documents(path: str | Path) -> Iterator[Document]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            yield Document(
                doc_id=rec["doc_id"],
                source_tag=rec["source_tag"],
                text=rec["text"],
                title=rec.get("title"),
            )


def write_passages(passages: Iterable[Passage], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for p in passages:
            fh.write(
                _dump(
                    {
                        "passage_id": p.passage_id,
                        "parent_doc_id": p.parent_doc_id,
                        "ordinal": p.ordinal,
                        "text": p.text,
                    }
                )
                + "\n"
            )
            n += 1
    return n


def read_passages(path: str | Path) -> Iterator[Passage]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            yield Passage(
                passage_id=rec["passage_id"],
                parent_doc_id=rec["parent_doc_id"],
                ordinal=rec["ordinal"],
                text=rec["text"],
                word_count=len(rec["text"].split()),
            )


def write_clusters(clusters: Iterable[Cluster], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for c in clusters:
            fh.write(
                _dump(
                    {
                        "cluster_id": c.cluster_id,
                        "query": c.query,
                        "member_doc_ids": sorted(c.member_doc_ids),
                        "reference_summaries": list(c.reference_summaries),
                    }
                )
                + "\n"
            )
            n += 1
    return n


def read_clusters(path: str | Path) -> Iterator[Cluster]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            yield Cluster(
                cluster_id=rec["cluster_id"],
                query=rec["query"],
                member_doc_ids=frozenset(rec["member_doc_ids"]),
                reference_summaries=tuple(rec["reference_summaries"]),
            )


def load_collection(
    passages_path: str | Path,
    name: str,
    clusters: Iterable[Cluster] | None = None,
) -> Collection:
    """Load a passage file; membership is derived from ``clusters`` if given."""
    membership: dict[str, str] = {}
    if clusters is not None:
        for c in clusters:
            for doc_id in c.member_doc_ids:
                membership[doc_id] = c.cluster_id
    coll = Collection(
        name=name,
        passages=list(read_passages(passages_path)),
        doc_membership=membership,
    )
    coll.validate()
    return coll
