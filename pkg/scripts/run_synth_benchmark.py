#!/usr/bin/env python3
"""Full synthetic-benchmark run: retrieval table, ROUGE table, k-sweep.

Builds the seeded benchmark in a work directory, then prints the
retrieval-accuracy table (BM25 vs dense, k = 10/30/50), the macro-ROUGE
table for extractive vs random generation, and the RSU4-vs-k sweep.

    python scripts/run_synth_benchmark.py --out runs/synth [--seed 42]
"""

import argparse
import time
from pathlib import Path

from oqfs.corpus import build_collection, write_clusters, write_documents, write_passages
from oqfs.harness.config import ExperimentConfig
from oqfs.harness.pipeline import (
    build_retriever,
    run_retrieval_eval,
    run_summarization_eval,
    sweep_k,
)
from oqfs.harness.synth import SynthSpec, generate_synth
from oqfs.harness.tables import format_table


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/synth", help="run directory")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--queries", type=int, default=20)
    parser.add_argument("--rel-per-query", type=int, default=50)
    parser.add_argument("--noise", type=int, default=4000)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()

    spec = SynthSpec(
        n_clusters=args.queries,
        relevant_per_cluster=args.rel_per_query,
        n_noise_docs=args.noise,
        seed=args.seed,
    )
    docs, clusters = generate_synth(spec)
    membership = {d: c.cluster_id for c in clusters for d in c.member_doc_ids}
    collection = build_collection(docs, "SYNTH", doc_membership=membership)
    write_documents(docs, out / "docs.jsonl")
    write_clusters(clusters, out / "clusters.jsonl")
    write_passages(collection.passages, out / "passages.jsonl")
    print(f"benchmark: {len(collection)} passages, {len(clusters)} queries")

    cfg = ExperimentConfig(out_dir=str(out), k=50, seed=args.seed, embed_dim=2048)

    print("\nretrieval accuracy (%):")
    retrievers = [
        build_retriever(
            ExperimentConfig(**{**cfg.__dict__, "retriever": tag}), collection
        )
        for tag in ("BM25", "DENSE")
    ]
    table, _ = run_retrieval_eval(
        cfg, collection, clusters, ks=(10, 30, 50), retrievers=retrievers
    )
    print(table)

    print("\nsummarization (macro F1 x 100):")
    table, _ = run_summarization_eval(
        cfg,
        collection,
        clusters,
        variants=[("BM25", "EXTRACTIVE"), ("BM25", "RANDOM"), ("DENSE", "EXTRACTIVE")],
        retriever_cache={r.tag: r for r in retrievers},
    )
    print(table)

    print("\nk sweep (BM25 + extractive):")
    sweep = sweep_k(
        cfg, collection, clusters, ks=(10, 20, 30, 40, 50), retriever=retrievers[0]
    )
    print(
        format_table(
            ["k", "R-1", "R-2", "R-SU4", "prec@k"],
            [
                [k, r1 * 100, r2 * 100, su4 * 100, prec]
                for k, r1, r2, su4, prec in sweep.rows
            ],
        )
    )
    print(f"\nartifacts in {out}/ ({time.time() - started:.1f}s)")


if __name__ == "__main__":
    main()
