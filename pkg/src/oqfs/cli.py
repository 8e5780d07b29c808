"""Command-line pipeline: each verb runs one stage and persists its output.

Typical flow on the synthetic benchmark:

    oqfs synth --out-dir data
    oqfs chunk --in data/docs.jsonl --out data/passages.jsonl
    oqfs index --passages data/passages.jsonl --out data/bm25.oqfsidx
    oqfs retrieve --method bm25 --collection data/passages.jsonl \\
        --queries data/clusters.jsonl --k 50 --out data/results.jsonl
    oqfs judgments --passages data/passages.jsonl \\
        --clusters data/clusters.jsonl --out data/judgments.jsonl
    oqfs retrieval-eval --results data/results.jsonl \\
        --judgments data/judgments.jsonl --k 10,30,50
    oqfs requests --results data/results.jsonl --passages data/passages.jsonl \\
        --clusters data/clusters.jsonl --k 50 --out data/requests.jsonl
    oqfs generate --method extractive --requests data/requests.jsonl \\
        --out data/summaries.jsonl
    oqfs score --candidates data/summaries.jsonl \\
        --clusters data/clusters.jsonl --out data/report

Every verb accepts ``--config FILE`` (key = value lines); OQFS_* environment
variables override file values, and explicit flags override both.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import corpus, generation, metrics, records
from .harness import config as config_mod
from .harness import pipeline, synth
from .harness.tables import format_table
from .retrieval import bm25 as bm25_mod
from .retrieval import dense as dense_mod
from .retrieval.providers import PASSAGE, QUERY, build_store

log = logging.getLogger(__name__)


def _load_cfg(config_path: str | None, **overrides) -> config_mod.ExperimentConfig:
    return config_mod.load_config(config_path, **overrides)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="debug logging")
def main(verbose: bool) -> None:
    """Open-domain retrieve-then-summarize pipeline."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command(name="synth")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--queries", "n_queries", default=20, show_default=True)
@click.option("--passages", "n_passages", default=5000, show_default=True)
@click.option("--rel-per-query", default=50, show_default=True)
@click.option("--seed", default=None, type=int)
def synth_cmd(config_path, out_dir, n_queries, n_passages, rel_per_query, seed):
    """Generate the seeded synthetic benchmark (docs + clusters)."""
    cfg = _load_cfg(config_path, seed=seed)
    n_noise = n_passages - n_queries * rel_per_query
    if n_noise < 0:
        raise click.UsageError("passages must cover queries * rel-per-query")
    spec = synth.SynthSpec(
        n_clusters=n_queries,
        relevant_per_cluster=rel_per_query,
        n_noise_docs=n_noise,
        seed=cfg.seed,
    )
    docs, clusters = synth.generate_synth(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus.write_documents(docs, out / "docs.jsonl")
    corpus.write_clusters(clusters, out / "clusters.jsonl")
    click.echo(f"wrote {len(docs)} docs and {len(clusters)} clusters to {out}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--docs", required=True, type=click.Path(exists=True))
@click.option("--clusters", "clusters_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
def ingest(config_path, docs, clusters_path, out_dir):
    """Validate raw document/cluster records and write normalized copies."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc_list = list(corpus.read_documents(docs))
    seen = set()
    for d in doc_list:
        if d.doc_id in seen:
            raise click.ClickException(f"duplicate doc_id {d.doc_id!r}")
        seen.add(d.doc_id)
    cluster_list = list(corpus.read_clusters(clusters_path))
    for c in cluster_list:
        unknown = sorted(c.member_doc_ids - seen)
        if unknown:
            log.warning("cluster %s references absent docs: %s", c.cluster_id, unknown[:3])
    corpus.write_documents(doc_list, out / "docs.jsonl")
    corpus.write_clusters(cluster_list, out / "clusters.jsonl")
    click.echo(f"ingested {len(doc_list)} docs, {len(cluster_list)} clusters")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--in", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out", "output_path", required=True, type=click.Path())
@click.option("--max-words", default=100, show_default=True)
def chunk(config_path, input_path, output_path, max_words):
    """Chunk documents into disjoint passages of at most max-words tokens."""
    n = 0
    with open(output_path, "w", encoding="utf-8") as fh:
        for doc in corpus.read_documents(input_path):
            for p in corpus.chunk_document(doc, max_words=max_words):
                fh.write(
                    json.dumps(
                        {
                            "passage_id": p.passage_id,
                            "parent_doc_id": p.parent_doc_id,
                            "ordinal": p.ordinal,
                            "text": p.text,
                        },
                        sort_keys=True,
                        ensure_ascii=False,
                    )
                    + "\n"
                )
                n += 1
    click.echo(f"wrote {n} passages to {output_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--in", "inputs", required=True, help="comma-separated passage files")
@click.option("--names", default=None, help="comma-separated part names (default: file stems)")
@click.option("--out", "output_path", required=True, type=click.Path())
def mix(config_path, inputs, names, output_path):
    """Merge passage collections, namespacing passage ids by part name."""
    paths = [p.strip() for p in inputs.split(",") if p.strip()]
    part_names = (
        [n.strip() for n in names.split(",")] if names else [Path(p).stem for p in paths]
    )
    if len(part_names) != len(paths):
        raise click.UsageError("names must match the number of input files")
    parts = [
        corpus.load_collection(path, name=name)
        for path, name in zip(paths, part_names)
    ]
    mixed = corpus.mix_collections(parts, name="MIX")
    corpus.write_passages(mixed.passages, output_path)
    click.echo(f"wrote {len(mixed)} passages to {output_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--clusters", "clusters_path", required=True, type=click.Path(exists=True))
@click.option("--fraction", default=0.10, show_default=True)
@click.option("--seed", default=None, type=int)
@click.option("--out-train", required=True, type=click.Path())
@click.option("--out-val", required=True, type=click.Path())
def split(config_path, clusters_path, fraction, seed, out_train, out_val):
    """Split clusters into train/validation with a seeded shuffle."""
    cfg = _load_cfg(config_path, seed=seed)
    clusters = list(corpus.read_clusters(clusters_path))
    train, val = corpus.split_train_val(clusters, fraction=fraction, seed=cfg.seed)
    corpus.write_clusters(train, out_train)
    corpus.write_clusters(val, out_val)
    click.echo(f"{len(train)} train / {len(val)} val clusters")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--passages", "passages_path", required=True, type=click.Path(exists=True))
@click.option("--out", "output_path", required=True, type=click.Path())
@click.option("--stopwords", type=click.Path(exists=True), default=None)
def index(config_path, passages_path, output_path, stopwords):
    """Build and persist a BM25 inverted index."""
    collection = corpus.load_collection(passages_path, name="collection")
    stop = None
    if stopwords:
        stop = frozenset(Path(stopwords).read_text().lower().split())
    idx = bm25_mod.build_bm25_index(collection, stopwords=stop)
    bm25_mod.save_index(idx, output_path)
    click.echo(
        f"indexed {idx.n_passages} passages, {len(idx.postings)} stems -> {output_path}"
    )


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--passages", "passages_path", type=click.Path(exists=True), default=None)
@click.option("--clusters", "clusters_path", type=click.Path(exists=True), default=None)
@click.option("--role", type=click.Choice([PASSAGE, QUERY]), default=PASSAGE)
@click.option("--provider", "provider_name", default=None, help="bag | hash | remote")
@click.option("--dim", default=None, type=int)
@click.option("--embed-endpoint", default=None)
@click.option("--out", "output_path", required=True, type=click.Path())
def embed(config_path, passages_path, clusters_path, role, provider_name, dim,
          embed_endpoint, output_path):
    """Embed passages (or cluster queries) into a binary vector store."""
    cfg = _load_cfg(
        config_path,
        embed_provider=provider_name,
        embed_dim=dim,
        embed_endpoint=embed_endpoint,
    )
    provider = pipeline.make_provider(cfg)
    if role == PASSAGE:
        if not passages_path:
            raise click.UsageError("--passages is required for role=passage")
        items = [(p.passage_id, p.text) for p in corpus.read_passages(passages_path)]
    else:
        if not clusters_path:
            raise click.UsageError("--clusters is required for role=query")
        items = [(c.cluster_id, c.query) for c in corpus.read_clusters(clusters_path)]
    store = build_store(
        provider, [i for i, _ in items], [t for _, t in items], role=role
    )
    dense_mod.save_store(store, output_path)
    click.echo(f"embedded {len(store)} {role} vectors (d={store.dimension}) -> {output_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--method", type=click.Choice(["bm25", "dense"]), required=True)
@click.option("--collection", "passages_path", required=True, type=click.Path(exists=True))
@click.option("--queries", "clusters_path", required=True, type=click.Path(exists=True))
@click.option("--k", default=None, type=int)
@click.option("--index", "index_path", type=click.Path(exists=True), default=None,
              help="reuse a persisted BM25 index")
@click.option("--store", "store_path", type=click.Path(exists=True), default=None,
              help="reuse a persisted embedding store")
@click.option("--provider", "provider_name", default=None)
@click.option("--dim", default=None, type=int)
@click.option("--out", "output_path", required=True, type=click.Path())
def retrieve(config_path, method, passages_path, clusters_path, k, index_path,
             store_path, provider_name, dim, output_path):
    """Retrieve top-k passages for every cluster query."""
    cfg = _load_cfg(
        config_path,
        retriever=method.upper(),
        embed_provider=provider_name,
        embed_dim=dim,
    )
    k = k if k is not None else cfg.k
    clusters = list(corpus.read_clusters(clusters_path))
    collection = corpus.load_collection(passages_path, name=cfg.collection)
    if method == "bm25":
        idx = (
            bm25_mod.load_index(index_path)
            if index_path
            else bm25_mod.build_bm25_index(collection)
        )
        retriever = pipeline.Bm25Retriever(idx)
    else:
        provider = pipeline.make_provider(cfg)
        if store_path:
            store = dense_mod.load_store(store_path)
        else:
            store = build_store(
                provider,
                [p.passage_id for p in collection.passages],
                [p.text for p in collection.passages],
                role=PASSAGE,
            )
        retriever = pipeline.DenseRetriever(store, provider)
    results = pipeline.retrieve_all(retriever, clusters, k)
    records.write_results(results, output_path)
    click.echo(f"wrote {len(results)} result lists to {output_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--passages", "passages_path", required=True, type=click.Path(exists=True))
@click.option("--clusters", "clusters_path", required=True, type=click.Path(exists=True))
@click.option("--out", "output_path", required=True, type=click.Path())
def judgments(config_path, passages_path, clusters_path, output_path):
    """Derive relevance judgments from cluster membership."""
    clusters = list(corpus.read_clusters(clusters_path))
    collection = corpus.load_collection(passages_path, name="collection", clusters=clusters)
    judged = pipeline.make_judgments(collection, clusters)
    records.write_judgments(judged, output_path)
    click.echo(f"wrote {len(judged)} judgments to {output_path}")


@main.command(name="retrieval-eval")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--results", "results_path", required=True, type=click.Path(exists=True))
@click.option("--judgments", "judgments_path", required=True, type=click.Path(exists=True))
@click.option("--k", "ks", default="10,30,50", show_default=True)
@click.option("--mode", type=click.Choice(["precision", "hitrate"]), default="precision",
              show_default=True)
def retrieval_eval(config_path, results_path, judgments_path, ks, mode):
    """Score persisted retrieval results against judgments, per k."""
    k_values = sorted(int(v) for v in ks.split(","))
    results = list(records.read_results(results_path))
    judged = list(records.read_judgments(judgments_path))
    by_tag: dict[str, list] = {}
    for r in results:
        by_tag.setdefault(r.retriever, []).append(r)
    headers = ["retriever"] + [f"top-{k}" for k in k_values]
    rows = []
    for tag in sorted(by_tag):
        rows.append(
            [tag]
            + [
                metrics.topk_accuracy(by_tag[tag], judged, k, mode=mode)
                for k in k_values
            ]
        )
    click.echo(format_table(headers, rows))


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--results", "results_path", required=True, type=click.Path(exists=True))
@click.option("--passages", "passages_path", required=True, type=click.Path(exists=True))
@click.option("--clusters", "clusters_path", required=True, type=click.Path(exists=True))
@click.option("--k", default=None, type=int)
@click.option("--max-words", default=None, type=int)
@click.option("--out", "output_path", required=True, type=click.Path())
def requests(config_path, results_path, passages_path, clusters_path, k, max_words,
             output_path):
    """Assemble generation requests from retrieval results."""
    cfg = _load_cfg(config_path, k=k, max_words=max_words)
    clusters = list(corpus.read_clusters(clusters_path))
    collection = corpus.load_collection(passages_path, name=cfg.collection)
    results = list(records.read_results(results_path))
    reqs = pipeline.build_requests(collection, clusters, results, cfg.k, cfg.max_words)
    records.write_requests(reqs, output_path)
    click.echo(f"wrote {len(reqs)} requests to {output_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--method", type=click.Choice(["extractive", "remote", "random"]),
              required=True)
@click.option("--requests", "requests_path", required=True, type=click.Path(exists=True))
@click.option("--endpoint", default=None)
@click.option("--mmr-lambda", default=None, type=float)
@click.option("--seed", default=None, type=int)
@click.option("--out", "output_path", required=True, type=click.Path())
def generate(config_path, method, requests_path, endpoint, mmr_lambda, seed, output_path):
    """Generate summaries for persisted requests."""
    cfg = _load_cfg(
        config_path,
        generator=method.upper(),
        endpoint=endpoint,
        mmr_lambda=mmr_lambda,
        seed=seed,
    )
    if method == "remote" and not cfg.endpoint:
        raise click.UsageError("--endpoint (or config endpoint) required for remote")
    reqs = list(records.read_requests(requests_path))
    summaries = pipeline.generate_all(reqs, cfg, cfg.generator)
    records.write_summaries(summaries, output_path)
    click.echo(f"wrote {len(summaries)} summaries to {output_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--candidates", "candidates_path", required=True, type=click.Path(exists=True))
@click.option("--clusters", "clusters_path", required=True, type=click.Path(exists=True))
@click.option("--out", "output_prefix", required=True, type=click.Path())
def score(config_path, candidates_path, clusters_path, output_prefix):
    """ROUGE-score summaries against cluster references."""
    clusters = {c.cluster_id: c for c in corpus.read_clusters(clusters_path)}
    rows = []
    for summary in records.read_summaries(candidates_path):
        cluster = clusters.get(summary.query_id)
        if cluster is None:
            raise click.ClickException(f"no cluster for query {summary.query_id!r}")
        rows.append((summary.query_id, metrics.score_summary(summary, cluster)))
    report_path = Path(str(output_prefix) + ".jsonl")
    records.write_score_report(rows, report_path)
    table_rows = [
        [qid, s.rouge1.f1 * 100, s.rouge2.f1 * 100, s.rouge_su4.f1 * 100]
        for qid, s in rows
    ]
    n = len(rows)
    if n:
        table_rows.append(
            [
                "MACRO_AVG",
                sum(s.rouge1.f1 for _, s in rows) / n * 100,
                sum(s.rouge2.f1 for _, s in rows) / n * 100,
                sum(s.rouge_su4.f1 for _, s in rows) / n * 100,
            ]
        )
    table = format_table(["query", "R-1", "R-2", "R-SU4"], table_rows)
    Path(str(output_prefix) + ".txt").write_text(table + "\n")
    click.echo(table)


@main.command(name="sweep-k")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--passages", "passages_path", default=None, type=click.Path(exists=True))
@click.option("--clusters", "clusters_path", default=None, type=click.Path(exists=True))
@click.option("--ks", default="10,20,30,40,50,75,100", show_default=True)
@click.option("--out-dir", default=None, type=click.Path())
def sweep_k_cmd(config_path, passages_path, clusters_path, ks, out_dir):
    """Run the pipeline at several k values; emit sweep.csv and sweep.svg."""
    cfg = _load_cfg(
        config_path, passages=passages_path, clusters=clusters_path, out_dir=out_dir
    )
    clusters = list(corpus.read_clusters(cfg.clusters))
    collection = corpus.load_collection(cfg.passages, name=cfg.collection, clusters=clusters)
    result = pipeline.sweep_k(
        cfg, collection, clusters, ks=[int(v) for v in ks.split(",")]
    )
    headers = ["k", "R-1", "R-2", "R-SU4", "prec@k"]
    click.echo(
        format_table(
            headers,
            [[k, r1 * 100, r2 * 100, su4 * 100, prec] for k, r1, r2, su4, prec in result.rows],
        )
    )


@main.command(name="pipeline")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--passages", "passages_path", default=None, type=click.Path(exists=True))
@click.option("--clusters", "clusters_path", default=None, type=click.Path(exists=True))
@click.option("--retriever", default=None, type=click.Choice(["BM25", "DENSE"]))
@click.option("--generator", default=None,
              type=click.Choice(["EXTRACTIVE", "REMOTE", "RANDOM"]))
@click.option("--out-dir", default=None, type=click.Path())
def pipeline_cmd(config_path, passages_path, clusters_path, retriever, generator, out_dir):
    """Full retrieve-generate-score run; prints the macro-ROUGE row."""
    cfg = _load_cfg(
        config_path,
        passages=passages_path,
        clusters=clusters_path,
        retriever=retriever,
        generator=generator,
        out_dir=out_dir,
    )
    cfg.validate()
    clusters = list(corpus.read_clusters(cfg.clusters))
    collection = corpus.load_collection(cfg.passages, name=cfg.collection, clusters=clusters)
    table, _ = pipeline.run_summarization_eval(cfg, collection, clusters)
    click.echo(table)


if __name__ == "__main__":
    main()
