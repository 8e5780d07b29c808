"""Line-delimited JSON for pipeline artifacts between stages.

Documents, passages, and clusters live in :mod:`oqfs.corpus`; this module
covers retrieval results, relevance judgments, generation requests, summary
outputs, and per-query score reports, so every stage can be re-run from its
predecessor's files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from .generation import GenerationRequest, Summary
from .metrics import RelevanceJudgment, RougeScores
from .retrieval import RetrievalResult


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def write_results(results: Iterable[RetrievalResult], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for r in results:
            fh.write(
                _dump(
                    {
                        "query_id": r.query_id,
                        "retriever": r.retriever,
                        "ranking": [[pid, score] for pid, score in r.ranking],
                    }
                )
                + "\n"
            )
            n += 1
    return n


def read_results(path: str | Path) -> Iterator[RetrievalResult]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            yield RetrievalResult(
                query_id=rec["query_id"],
                retriever=rec["retriever"],
                ranking=[(pid, float(score)) for pid, score in rec["ranking"]],
            )


def write_judgments(judgments: Iterable[RelevanceJudgment], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for j in judgments:
            fh.write(
                _dump({"query_id": j.query_id, "relevant": sorted(j.relevant)}) + "\n"
            )
            n += 1
    return n


def read_judgments(path: str | Path) -> Iterator[RelevanceJudgment]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            yield RelevanceJudgment(
                query_id=rec["query_id"], relevant=frozenset(rec["relevant"])
            )


def write_requests(requests: Iterable[GenerationRequest], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for r in requests:
            fh.write(
                _dump(
                    {
                        "query_id": r.query_id,
                        "query": r.query,
                        "passages": [{"id": pid, "text": t} for pid, t in r.passages],
                        "max_words": r.max_words,
                    }
                )
                + "\n"
            )
            n += 1
    return n


def read_requests(path: str | Path) -> Iterator[GenerationRequest]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            yield GenerationRequest(
                query_id=rec["query_id"],
                query=rec["query"],
                passages=tuple((p["id"], p["text"]) for p in rec["passages"]),
                max_words=rec["max_words"],
            )


def write_summaries(summaries: Iterable[Summary], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for s in summaries:
            rec = {
                "query_id": s.query_id,
                "text": s.text,
                "word_count": s.word_count,
                "generator": s.generator,
            }
            if s.model is not None:
                rec["model"] = s.model
            if s.latency_ms is not None:
                rec["latency_ms"] = s.latency_ms
            fh.write(_dump(rec) + "\n")
            n += 1
    return n


def read_summaries(path: str | Path) -> Iterator[Summary]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            yield Summary(
                query_id=rec["query_id"],
                text=rec["text"],
                generator=rec["generator"],
                word_count=rec["word_count"],
                model=rec.get("model"),
                latency_ms=rec.get("latency_ms"),
            )


def write_score_report(
    rows: list[tuple[str, RougeScores]], path: str | Path
) -> None:
    """Per-query F1 records plus a macro-average footer record."""
    with open(path, "w", encoding="utf-8") as fh:
        for query_id, scores in rows:
            fh.write(
                _dump(
                    {
                        "query_id": query_id,
                        "r1_f1": scores.rouge1.f1,
                        "r2_f1": scores.rouge2.f1,
                        "rsu4_f1": scores.rouge_su4.f1,
                    }
                )
                + "\n"
            )
        n = len(rows)
        fh.write(
            _dump(
                {
                    "query_id": "MACRO_AVG",
                    "r1_f1": sum(s.rouge1.f1 for _, s in rows) / n if n else 0.0,
                    "r2_f1": sum(s.rouge2.f1 for _, s in rows) / n if n else 0.0,
                    "rsu4_f1": sum(s.rouge_su4.f1 for _, s in rows) / n if n else 0.0,
                }
            )
            + "\n"
        )
