"""Acceptance suite: every criterion at its stated tolerance.

Full-scale retrieval-accuracy and ROUGE numbers require licensed DUC data,
the multi-million-passage Wikipedia dump, and pretrained neural encoders and
generators; none of that is desk-reproducible.  The end-to-end criteria here
run instead on the in-repo synthetic benchmark (20 queries, 5,000 passages,
50 planted relevant passages per query, seed 42), whose constructions make
the expected values exact.

Each criterion prints one pass/fail line via the conftest hook.
"""

import math
import random
import struct
import time
from pathlib import Path

import numpy as np
import pytest

from oqfs import metrics, textproc
from oqfs.corpus import Collection, Document, Passage, build_collection, chunk_document
from oqfs.harness.config import ExperimentConfig
from oqfs.harness.pipeline import (
    Bm25Retriever,
    make_judgments,
    retrieve_all,
    run_summarization_eval,
    sweep_k,
)
from oqfs.harness.synth import SynthSpec, generate_synth
from oqfs.metrics import (
    RelevanceJudgment,
    rouge_n,
    rouge_su4,
    topk_accuracy,
)
from oqfs.retrieval import (
    EmbeddingStore,
    RetrievalResult,
    build_bm25_index,
    load_index,
    load_store,
    save_index,
    save_store,
    search_bm25,
    search_dense,
)

SYNTH_KS = (10, 20, 30, 40, 50)


# --------------------------------------------------------------------------
# Criterion: chunking partition property. Exact; < 5 s.
# --------------------------------------------------------------------------


def test_chunking_partition_property():
    started = time.monotonic()
    rng = random.Random(1234)
    for i in range(1000):
        n_words = rng.randint(1, 1000)
        words = [f"w{rng.randint(0, 5000)}" for _ in range(n_words)]
        doc = Document(f"d{i}", "SYNTH", " ".join(words))
        passages = chunk_document(doc, max_words=100)
        flat = [w for p in passages for w in p.text.split()]
        assert flat == words
        assert all(p.word_count == 100 for p in passages[:-1])
        assert 1 <= passages[-1].word_count <= 100
    assert time.monotonic() - started < 5.0


# --------------------------------------------------------------------------
# Criterion: BM25 oracle equivalence. Scores within 1e-9; < 10 s.
# --------------------------------------------------------------------------


def _bm25_oracle_scores(texts, query):
    """Exhaustive scoring straight from the formula, no index involved."""
    stem_lists = [textproc.stems(t) for t in texts]
    lengths = [len(s) for s in stem_lists]
    n = len(texts)
    avg = sum(lengths) / n
    out = []
    for i, passage_stems in enumerate(stem_lists):
        score = 0.0
        for stem in textproc.stems(query):
            tf = passage_stems.count(stem)
            if tf == 0:
                continue
            df = sum(1 for other in stem_lists if stem in other)
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            score += idf * tf * 2.2 / (tf + 1.2 * (1.0 - 0.75 + 0.75 * lengths[i] / avg))
        out.append(score)
    return out


def test_bm25_oracle_equivalence():
    started = time.monotonic()
    rng = random.Random(77)
    vocab = [f"term{v}" for v in range(80)]
    texts = [
        " ".join(rng.choice(vocab) for _ in range(rng.randint(4, 40)))
        for _ in range(200)
    ]
    passages = [
        Passage(f"p{i:03d}", f"d{i:03d}", 0, t, len(t.split()))
        for i, t in enumerate(texts)
    ]
    index = build_bm25_index(Collection(name="acc", passages=passages))
    for _ in range(50):
        query = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 6)))
        oracle = _bm25_oracle_scores(texts, query)
        expected = sorted(
            ((f"p{i:03d}", s) for i, s in enumerate(oracle) if s > 0.0),
            key=lambda item: (-item[1], item[0]),
        )[:10]
        result = search_bm25(index, query, k=10)
        assert result.passage_ids() == [pid for pid, _ in expected]
        for (_, got), (_, want) in zip(result.ranking, expected):
            assert abs(got - want) < 1e-9
    assert time.monotonic() - started < 10.0


# --------------------------------------------------------------------------
# Criterion: dense search oracle equivalence, ties included. < 30 s.
# --------------------------------------------------------------------------


def test_dense_oracle_equivalence():
    started = time.monotonic()
    rng = np.random.default_rng(4242)
    vectors = rng.standard_normal((10_000, 64)).astype(np.float32)
    # deliberately duplicated vectors force exact score ties
    for src, dests in ((17, (901, 5002)), (2222, (2223, 7777, 9999))):
        for dest in dests:
            vectors[dest] = vectors[src]
    ids = [f"p{i:05d}" for i in range(10_000)]
    store = EmbeddingStore(dimension=64, vectors=vectors, passage_ids=ids)
    ids_arr = np.array(ids)
    for _ in range(100):
        q = rng.standard_normal(64).astype(np.float32)
        scores = (vectors.astype(np.float64) * q.astype(np.float64)).sum(axis=1)
        order = np.lexsort((ids_arr, -scores))[:50]  # full sort: score desc, id asc
        result = search_dense(store, q, k=50)
        assert result.passage_ids() == list(ids_arr[order])
        for (_, got), want in zip(result.ranking, scores[order]):
            assert abs(got - want) < 1e-9
    assert time.monotonic() - started < 30.0


# --------------------------------------------------------------------------
# Criterion: ROUGE suite. < 20 s total.
# --------------------------------------------------------------------------


def test_rouge_identity_inputs():
    text = "the committee approved seven measures during its final session"
    assert rouge_n(text, [text], 1).f1 == pytest.approx(1.0, abs=1e-9)
    assert rouge_n(text, [text], 2).f1 == pytest.approx(1.0, abs=1e-9)
    assert rouge_su4(text, [text]).f1 == pytest.approx(1.0, abs=1e-9)


def test_rouge1_hand_count_exact():
    triple = rouge_n("the cat", ["the cat sat"], 1)
    assert triple.precision == 1.0
    assert triple.recall == 2 / 3
    assert triple.f1 == 0.8


def _su4_oracle(cand_tokens, ref_tokens):
    def units(tokens):
        out = [(t,) for t in tokens]
        for i in range(len(tokens)):
            for j in range(i + 1, len(tokens)):
                if j - i <= 4:
                    out.append((tokens[i], tokens[j]))
        return out

    cand_units, ref_units = units(cand_tokens), units(ref_tokens)
    pool = list(ref_units)
    matches = 0
    for unit in cand_units:
        if unit in pool:
            pool.remove(unit)
            matches += 1
    p = matches / len(cand_units)
    r = matches / len(ref_units)
    return p, r, (2 * p * r / (p + r) if p + r else 0.0)


def test_rouge_su4_matches_enumeration_oracle():
    started = time.monotonic()
    rng = random.Random(2024)
    vocab = [f"v{i}" for i in range(10)]
    for _ in range(100):
        cand = [rng.choice(vocab) for _ in range(30)]
        ref = [rng.choice(vocab) for _ in range(30)]
        want = _su4_oracle(cand, ref)
        got = rouge_su4(" ".join(cand), [" ".join(ref)]).as_tuple()
        assert got == pytest.approx(want, abs=1e-9)
    assert time.monotonic() - started < 20.0


def test_rouge_su4_self_unit_identity():
    from oqfs.metrics import _su4_counts

    for m in range(6, 101):
        tokens = [f"t{i}" for i in range(m)]
        assert sum(_su4_counts(tokens).values()) == 5 * m - 10


# --------------------------------------------------------------------------
# Criterion: top-k accuracy arithmetic and upper bound.
# --------------------------------------------------------------------------


def test_topk_accuracy_planted_arithmetic():
    results, judgments = [], []
    for qid, hits in (("a", 10), ("b", 8), ("c", 6)):
        ranked = [(f"{qid}{i}", float(10 - i)) for i in range(10)]
        results.append(RetrievalResult(qid, "BM25", ranked))
        judgments.append(RelevanceJudgment(qid, frozenset(f"{qid}{i}" for i in range(hits))))
    assert topk_accuracy(results, judgments, 10) == 80.0


def test_topk_accuracy_upper_bound_fuzzed():
    rng = random.Random(31)
    for _ in range(200):
        n_queries = rng.randint(1, 6)
        k = rng.randint(1, 20)
        results, judgments = [], []
        c_max = 0
        for qi in range(n_queries):
            n_rel = rng.randint(0, 15)
            c_max = max(c_max, n_rel)
            relevant = [f"q{qi}r{i}" for i in range(n_rel)]
            noise = [f"q{qi}x{i}" for i in range(20)]
            ranked = relevant + noise
            rng.shuffle(ranked)
            results.append(
                RetrievalResult(
                    f"q{qi}",
                    "BM25",
                    [(pid, float(30 - i)) for i, pid in enumerate(ranked[:k])],
                )
            )
            judgments.append(RelevanceJudgment(f"q{qi}", frozenset(relevant)))
        acc = topk_accuracy(results, judgments, k)
        assert acc <= 100.0 * min(1.0, c_max / k) + 1e-9


# --------------------------------------------------------------------------
# End-to-end criteria on the in-repo synthetic benchmark.
# --------------------------------------------------------------------------


@pytest.fixture(scope="module")
def synth_benchmark():
    spec = SynthSpec(
        n_clusters=20, relevant_per_cluster=50, n_noise_docs=4000, seed=42
    )
    docs, clusters = generate_synth(spec)
    membership = {d: c.cluster_id for c in clusters for d in c.member_doc_ids}
    collection = build_collection(docs, "SYNTH", doc_membership=membership)
    assert len(collection) == 5000
    retriever = Bm25Retriever(build_bm25_index(collection))
    return collection, clusters, retriever


def test_synth_end_to_end(synth_benchmark, tmp_path):
    started = time.monotonic()
    collection, clusters, retriever = synth_benchmark
    judgments = make_judgments(collection, clusters)
    assert all(len(j.relevant) >= 50 for j in judgments)

    # (a) BM25 precision@10 is 100.0 by construction
    results = retrieve_all(retriever, clusters, 50)
    assert topk_accuracy(results, judgments, 10) == 100.0

    # (b) extractive beats random passage selection by >= 10 macro R1 points
    cfg = ExperimentConfig(out_dir=str(tmp_path / "e2e"), k=50, seed=42)
    _, rows = run_summarization_eval(
        cfg,
        collection,
        clusters,
        variants=[("BM25", "EXTRACTIVE"), ("BM25", "RANDOM")],
        retriever_cache={"BM25": retriever},
    )
    assert rows[0]["r1_f1"] >= rows[1]["r1_f1"] + 10.0

    # (c) RSU4 non-decreasing up to the planted relevance count
    sweep = sweep_k(
        cfg, collection, clusters, ks=SYNTH_KS, retriever=retriever, plot=False
    )
    rsu4 = sweep.rsu4()
    assert len(rsu4) == len(SYNTH_KS)
    for earlier, later in zip(rsu4, rsu4[1:]):
        assert later >= earlier

    assert time.monotonic() - started < 300.0


def test_synth_determinism_byte_identical(synth_benchmark, tmp_path):
    collection, clusters, _ = synth_benchmark
    outputs = []
    for name in ("first", "second"):
        out_dir = tmp_path / name
        cfg = ExperimentConfig(out_dir=str(out_dir), k=50, seed=42)
        run_summarization_eval(cfg, collection, clusters)
        sweep_k(cfg, collection, clusters, ks=SYNTH_KS)
        blob = {
            p.name: p.read_bytes()
            for p in sorted(out_dir.iterdir())
            if p.name != "manifest.json"  # manifests are timestamped by design
        }
        outputs.append(blob)
    assert outputs[0].keys() == outputs[1].keys()
    assert {"summaries_bm25_extractive.jsonl", "report_bm25_extractive.jsonl",
            "sweep.csv", "sweep.svg"} <= outputs[0].keys()
    for name in outputs[0]:
        assert outputs[0][name] == outputs[1][name], f"{name} differs between runs"


# --------------------------------------------------------------------------
# Criterion: persistence round-trips.
# --------------------------------------------------------------------------


def test_index_roundtrip_bit_identical(tmp_path):
    rng = random.Random(8)
    vocab = [f"word{v}" for v in range(50)]
    passages = []
    for i in range(150):
        text = " ".join(rng.choice(vocab) for _ in range(rng.randint(3, 25)))
        passages.append(Passage(f"p{i:03d}", f"d{i:03d}", 0, text, len(text.split())))
    index = build_bm25_index(Collection(name="persist", passages=passages))
    path = tmp_path / "index.oqfsidx"
    save_index(index, path)
    loaded = load_index(path)
    for _ in range(25):
        query = " ".join(rng.choice(vocab) for _ in range(3))
        assert search_bm25(index, query, k=9).ranking == search_bm25(loaded, query, k=9).ranking


def test_store_roundtrip_and_header_layout(tmp_path):
    rng = np.random.default_rng(15)
    vectors = rng.standard_normal((64, 48)).astype(np.float32)
    ids = [f"passage/{i}" for i in range(64)]
    store = EmbeddingStore(dimension=48, vectors=vectors, passage_ids=ids)
    path = tmp_path / "store.oqfsemb"
    save_store(store, path)

    loaded = load_store(path)
    assert np.array_equal(loaded.vectors.view(np.uint32), vectors.view(np.uint32))
    for _ in range(25):
        q = rng.standard_normal(48).astype(np.float32)
        assert search_dense(store, q, k=7).ranking == search_dense(loaded, q, k=7).ranking

    # documented byte layout: magic, u32 dimension, u64 count, little-endian,
    # then count*d float32, then length-prefixed utf-8 ids
    raw = path.read_bytes()
    magic, dim, count = struct.unpack("<8sIQ", raw[:20])
    assert magic == b"OQFSEMB1"
    assert dim == 48 and count == 64
    payload = np.frombuffer(raw[20 : 20 + 4 * 48 * 64], dtype="<f4").reshape(64, 48)
    assert np.array_equal(payload.view(np.uint32), vectors.view(np.uint32))
    offset = 20 + 4 * 48 * 64
    (first_len,) = struct.unpack("<H", raw[offset : offset + 2])
    assert raw[offset + 2 : offset + 2 + first_len].decode("utf-8") == "passage/0"
