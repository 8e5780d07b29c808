"""End-to-end runs: retrieval eval tables, summarization eval, k-sweeps.

Stages persist their artifacts (results, summaries, reports, sweep data)
under the run directory so each stage can be re-run independently, and a
resolved-config manifest makes every emitted row traceable.  A fixed config
and seed produce byte-identical outputs.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .. import metrics, records
from ..corpus import Cluster, Collection
from ..errors import ProtocolError, TransportError
from ..generation import (
    EXTRACTIVE,
    RANDOM,
    REMOTE,
    GenerationRequest,
    Summary,
    generate_extractive,
    generate_random,
    generate_remote,
)
from ..metrics import RelevanceJudgment
from ..retrieval import (
    EmbeddingStore,
    RetrievalResult,
    build_bm25_index,
    search_bm25,
    search_dense,
)
from ..retrieval.providers import (
    QUERY,
    BagHashEmbedder,
    EmbeddingProvider,
    RemoteEncoder,
    TestHashEmbedder,
    build_store,
)
from .config import ExperimentConfig
from .tables import format_table

log = logging.getLogger(__name__)


class Bm25Retriever:
    tag = "BM25"

    def __init__(self, index, stopwords: frozenset[str] | None = None):
        self.index = index
        self.stopwords = stopwords

    def search(self, query: str, k: int, query_id: str = "") -> RetrievalResult:
        return search_bm25(
            self.index, query, k, stopwords=self.stopwords, query_id=query_id
        )


class DenseRetriever:
    tag = "DENSE"

    def __init__(self, store: EmbeddingStore, provider: EmbeddingProvider):
        self.store = store
        self.provider = provider

    def search(self, query: str, k: int, query_id: str = "") -> RetrievalResult:
        qvec = self.provider.embed(query, QUERY)
        return search_dense(self.store, qvec, k, query_id=query_id)


def make_provider(cfg: ExperimentConfig) -> EmbeddingProvider:
    if cfg.embed_provider == "bag":
        return BagHashEmbedder(dimension=cfg.embed_dim, seed=cfg.seed)
    if cfg.embed_provider == "hash":
        return TestHashEmbedder(dimension=cfg.embed_dim, seed=cfg.seed)
    if cfg.embed_provider == "remote":
        if not cfg.embed_endpoint:
            raise ValueError("embed_provider=remote requires embed_endpoint")
        return RemoteEncoder(cfg.embed_endpoint, dimension=cfg.embed_dim)
    raise ValueError(f"no provider construction for {cfg.embed_provider!r}")


def build_retriever(cfg: ExperimentConfig, collection: Collection):
    if cfg.retriever == "BM25":
        stopwords = None
        if cfg.stopwords:
            stopwords = frozenset(
                w.strip().lower()
                for w in Path(cfg.stopwords).read_text().split()
                if w.strip()
            )
        return Bm25Retriever(build_bm25_index(collection, stopwords=stopwords), stopwords)
    if cfg.embed_provider == "file":
        from ..retrieval.dense import load_store
        from ..retrieval.providers import FileStoreProvider

        store = load_store(cfg.store)
        return DenseRetriever(store, FileStoreProvider(store))
    provider = make_provider(cfg)
    store = build_store(
        provider,
        [p.passage_id for p in collection.passages],
        [p.text for p in collection.passages],
        role="passage",
    )
    return DenseRetriever(store, provider)


def make_judgments(
    collection: Collection, clusters: Sequence[Cluster]
) -> list[RelevanceJudgment]:
    """Relevant set per query: passages whose parent doc is in the cluster.

    A collection without any membership information (typical for WIKI)
    yields all-empty judgments with a prominent warning; a cluster naming a
    document the membership map does not know is an error.
    """
    if not clusters:
        return []
    if not collection.doc_membership:
        log.warning(
            "collection %s carries no ground-truth membership; every relevance "
            "set is empty and retrieval accuracy over it is meaningless",
            collection.name,
        )
        return [RelevanceJudgment(c.cluster_id, frozenset()) for c in clusters]
    by_parent: dict[str, list[str]] = {}
    for p in collection.passages:
        by_parent.setdefault(p.parent_doc_id, []).append(p.passage_id)
    judgments = []
    for cluster in clusters:
        relevant: set[str] = set()
        for doc_id in cluster.member_doc_ids:
            if doc_id not in collection.doc_membership:
                raise ValueError(
                    f"cluster {cluster.cluster_id} references doc_id {doc_id!r} "
                    f"absent from collection {collection.name} membership"
                )
            relevant.update(by_parent.get(doc_id, ()))
        judgments.append(RelevanceJudgment(cluster.cluster_id, frozenset(relevant)))
    return judgments


def retrieve_all(
    retriever, clusters: Sequence[Cluster], k: int
) -> list[RetrievalResult]:
    return [
        retriever.search(c.query, k, query_id=c.cluster_id) for c in clusters
    ]


# --------------------------------------------------------------------------
# Retrieval evaluation (accuracy-by-k table).
# --------------------------------------------------------------------------


def run_retrieval_eval(
    cfg: ExperimentConfig,
    collection: Collection,
    clusters: Sequence[Cluster],
    ks: Sequence[int] = (10, 30, 50),
    retrievers: Sequence | None = None,
    mode: str = "precision",
) -> tuple[str, list[dict]]:
    """Accuracy table: one row per retriever, one column per k.

    Returns the aligned table text and the row records; also writes
    ``retrieval_eval.jsonl``, per-retriever ``results_<tag>.jsonl``, and a
    manifest under the run directory.
    """
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg.write_manifest(out)
    ks = sorted(ks)
    headers = ["retriever"] + [f"top-{k}" for k in ks]
    if not clusters:
        table = format_table(headers, [])
        (out / "retrieval_eval.txt").write_text(table + "\n")
        (out / "retrieval_eval.jsonl").write_text("")
        return table, []
    judgments = make_judgments(collection, clusters)
    if retrievers is None:
        retrievers = [build_retriever(cfg, collection)]
    rows = []
    lines = []
    for retriever in retrievers:
        results = retrieve_all(retriever, clusters, max(ks))
        records.write_results(results, out / f"results_{retriever.tag.lower()}.jsonl")
        row: dict = {"retriever": retriever.tag}
        for k in ks:
            row[f"top-{k}"] = metrics.topk_accuracy(results, judgments, k, mode=mode)
        rows.append(row)
        lines.append([row["retriever"]] + [row[f"top-{k}"] for k in ks])
    table = format_table(headers, lines)
    (out / "retrieval_eval.txt").write_text(table + "\n")
    with open(out / "retrieval_eval.jsonl", "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    return table, rows


# --------------------------------------------------------------------------
# Summarization evaluation (macro-ROUGE table rows).
# --------------------------------------------------------------------------


def build_requests(
    collection: Collection,
    clusters: Sequence[Cluster],
    results: Sequence[RetrievalResult],
    k: int,
    max_words: int,
) -> list[GenerationRequest]:
    by_query = {c.cluster_id: c for c in clusters}
    requests = []
    for result in results:
        cluster = by_query[result.query_id]
        passages = tuple(
            (pid, collection.passage_by_id(pid).text)
            for pid, _ in result.ranking[:k]
        )
        if not passages:
            log.warning("query %s retrieved nothing; skipping request", result.query_id)
            continue
        requests.append(
            GenerationRequest(
                query_id=result.query_id,
                query=cluster.query,
                passages=passages,
                max_words=max_words,
            )
        )
    return requests


def generate_all(
    requests: Sequence[GenerationRequest], cfg: ExperimentConfig, generator: str
) -> list[Summary]:
    summaries = []
    for req in requests:
        if generator == EXTRACTIVE:
            summaries.append(generate_extractive(req, mmr_lambda=cfg.mmr_lambda))
        elif generator == RANDOM:
            summaries.append(generate_random(req, seed=cfg.seed))
        elif generator == REMOTE:
            summaries.append(generate_remote(req, cfg.endpoint))
        else:
            raise ValueError(f"unknown generator {generator!r}")
    return summaries


def run_summarization_eval(
    cfg: ExperimentConfig,
    collection: Collection,
    clusters: Sequence[Cluster],
    variants: Sequence[tuple[str, str]] | None = None,
    retriever_cache: dict | None = None,
) -> tuple[str, list[dict]]:
    """Macro-averaged ROUGE per (retriever, generator) over the collection.

    A failing remote generator marks its row failed; remaining rows are
    still produced.  Writes summaries and per-query reports per variant.
    """
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg.write_manifest(out)
    if variants is None:
        variants = [(cfg.retriever, cfg.generator)]
    by_query = {c.cluster_id: c for c in clusters}
    retriever_cache = retriever_cache if retriever_cache is not None else {}
    headers = ["model", "R-1", "R-2", "R-SU4"]
    rows: list[dict] = []
    lines: list[list] = []
    for retriever_tag, generator_tag in variants:
        label = f"{retriever_tag}+{generator_tag} ({collection.name})"
        variant_slug = f"{retriever_tag.lower()}_{generator_tag.lower()}"
        try:
            if retriever_tag not in retriever_cache:
                variant_cfg = ExperimentConfig(**{**cfg.__dict__, "retriever": retriever_tag})
                retriever_cache[retriever_tag] = build_retriever(variant_cfg, collection)
            retriever = retriever_cache[retriever_tag]
            results = retrieve_all(retriever, clusters, cfg.k)
            requests = build_requests(collection, clusters, results, cfg.k, cfg.max_words)
            summaries = generate_all(requests, cfg, generator_tag)
            scored = [
                (s.query_id, metrics.score_summary(s, by_query[s.query_id]))
                for s in summaries
            ]
        except (TransportError, ProtocolError) as exc:
            log.error("variant %s failed: %s", label, exc)
            rows.append({"model": label, "failed": str(exc)})
            lines.append([label, "FAILED", "FAILED", "FAILED"])
            continue
        records.write_summaries(summaries, out / f"summaries_{variant_slug}.jsonl")
        records.write_score_report(scored, out / f"report_{variant_slug}.jsonl")
        n = len(scored)
        r1 = sum(s.rouge1.f1 for _, s in scored) / n * 100 if n else 0.0
        r2 = sum(s.rouge2.f1 for _, s in scored) / n * 100 if n else 0.0
        su4 = sum(s.rouge_su4.f1 for _, s in scored) / n * 100 if n else 0.0
        rows.append({"model": label, "r1_f1": r1, "r2_f1": r2, "rsu4_f1": su4})
        lines.append([label, r1, r2, su4])
    table = format_table(headers, lines)
    (out / "summarization_eval.txt").write_text(table + "\n")
    return table, rows


# --------------------------------------------------------------------------
# k-sweep.
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class SweepResult:
    rows: tuple[tuple[int, float, float, float, float], ...]
    """(k, mean R1 F1, mean R2 F1, mean RSU4 F1, precision@k %) per k."""

    def ks(self) -> list[int]:
        return [row[0] for row in self.rows]

    def rsu4(self) -> list[float]:
        return [row[3] for row in self.rows]


def sweep_k(
    cfg: ExperimentConfig,
    collection: Collection,
    clusters: Sequence[Cluster],
    ks: Sequence[int] = (10, 20, 30, 40, 50, 75, 100),
    retriever=None,
    plot: bool = True,
) -> SweepResult:
    """One summarization run per k, reusing a single retrieval pass.

    Retrieval happens once at max(ks) and is truncated per k (exact top-k
    ordering makes the truncation equivalent to retrieving at k directly).
    Emits ``sweep.csv`` and ``sweep.svg``; a failing k is recorded and the
    sweep continues.
    """
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg.write_manifest(out)
    ks = sorted(set(ks))
    if retriever is None:
        retriever = build_retriever(cfg, collection)
    judgments = make_judgments(collection, clusters)
    by_query = {c.cluster_id: c for c in clusters}
    full_results = retrieve_all(retriever, clusters, max(ks))
    rows = []
    for k in ks:
        try:
            sliced = [r.top(k) for r in full_results]
            requests = build_requests(collection, clusters, sliced, k, cfg.max_words)
            summaries = generate_all(requests, cfg, cfg.generator)
            scored = [
                (s.query_id, metrics.score_summary(s, by_query[s.query_id]))
                for s in summaries
            ]
            n = len(scored)
            r1 = sum(s.rouge1.f1 for _, s in scored) / n if n else 0.0
            r2 = sum(s.rouge2.f1 for _, s in scored) / n if n else 0.0
            su4 = sum(s.rouge_su4.f1 for _, s in scored) / n if n else 0.0
            prec = metrics.topk_accuracy(sliced, judgments, k)
            rows.append((k, r1, r2, su4, prec))
        except (TransportError, ProtocolError) as exc:
            log.error("sweep point k=%d failed: %s", k, exc)
    result = SweepResult(rows=tuple(rows))
    with open(out / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "r1_f1", "r2_f1", "rsu4_f1", "precision_at_k"])
        for row in result.rows:
            writer.writerow([row[0]] + [repr(v) for v in row[1:]])
    if plot and result.rows:
        from .plots import save_sweep_plot

        save_sweep_plot(
            result.ks(),
            result.rsu4(),
            out / "sweep.svg",
            title=f"{cfg.retriever}+{cfg.generator} ({collection.name})",
        )
    return result
