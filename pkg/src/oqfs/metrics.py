"""Retrieval and summarization evaluation.

Retrieval: top-k accuracy, reported as mean precision@k over queries — the
fraction of the top-k passages whose parent document belongs to the query's
cluster, averaged and scaled to a percentage.  A hit-rate variant ("any
relevant passage in the top k") is available behind ``mode="hitrate"`` but
is not the default.

Summarization: ROUGE-1, ROUGE-2, and ROUGE-SU4 precision/recall/F1.  Both
candidate and references are truncated to 250 surface words, then tokenized
and Porter-stemmed (stopwords kept, the usual multi-document convention).
Multi-reference scores take the per-reference triple with maximal F1.
ROUGE-SU4 units are skip-bigrams over token pairs (i, j) with j - i <= 4,
plus unigrams.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from . import textproc
from .retrieval import RetrievalResult

DEFAULT_WORD_LIMIT = 250
SU4_MAX_GAP = 4  # skip-bigram (i, j) allowed when j - i <= 4


@dataclass(frozen=True, slots=True)
class RelevanceJudgment:
    query_id: str
    relevant: frozenset[str]  # passage_ids


@dataclass(frozen=True, slots=True)
class MetricTriple:
    precision: float
    recall: float
    f1: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.precision, self.recall, self.f1)


@dataclass(frozen=True, slots=True)
class RougeScores:
    rouge1: MetricTriple
    rouge2: MetricTriple
    rouge_su4: MetricTriple


def topk_accuracy(
    results: list[RetrievalResult],
    judgments: list[RelevanceJudgment],
    k: int,
    mode: str = "precision",
) -> float:
    """Mean precision@k over queries, as a percentage.

    A result shorter than k keeps k as the denominator (missing slots are
    misses).  ``mode="hitrate"`` instead scores 1 when any of the top k is
    relevant.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if mode not in ("precision", "hitrate"):
        raise ValueError(f"unknown mode {mode!r}")
    by_query = {j.query_id: j for j in judgments}
    missing = [r.query_id for r in results if r.query_id not in by_query]
    if missing:
        raise ValueError(f"no judgments for queries: {missing[:5]}")
    if not results:
        return 0.0
    total = 0.0
    for result in results:
        relevant = by_query[result.query_id].relevant
        hits = sum(1 for pid, _ in result.ranking[:k] if pid in relevant)
        if mode == "precision":
            total += hits / k
        else:
            total += 1.0 if hits else 0.0
    return total / len(results) * 100.0


def truncate_words(text: str, limit: int = DEFAULT_WORD_LIMIT) -> str:
    """First ``limit`` whitespace tokens, rejoined with single spaces."""
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    return " ".join(text.split()[:limit])


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _prepare(text: str, limit: int) -> list[str]:
    return textproc.stems(truncate_words(text, limit))


def _ngram_counts(stems: list[str], n: int) -> Counter:
    return Counter(tuple(stems[i : i + n]) for i in range(len(stems) - n + 1))


def _su4_counts(stems: list[str]) -> Counter:
    counts: Counter = Counter()
    m = len(stems)
    for i in range(m):
        counts[(stems[i],)] += 1
        for j in range(i + 1, min(i + SU4_MAX_GAP, m - 1) + 1):
            counts[(stems[i], stems[j])] += 1
    return counts


def _clipped_triple(cand: Counter, ref: Counter) -> MetricTriple:
    matches = sum(min(count, ref[gram]) for gram, count in cand.items())
    n_cand = sum(cand.values())
    n_ref = sum(ref.values())
    precision = matches / n_cand if n_cand else 0.0
    recall = matches / n_ref if n_ref else 0.0
    return MetricTriple(precision, recall, _f1(precision, recall))


def _best_over_references(
    cand: Counter, references: list[Counter]
) -> MetricTriple:
    best: MetricTriple | None = None
    for ref in references:
        triple = _clipped_triple(cand, ref)
        if best is None or triple.f1 > best.f1:
            best = triple
    assert best is not None
    return best


def rouge_n(
    candidate: str,
    references: list[str],
    n: int,
    limit: int = DEFAULT_WORD_LIMIT,
) -> MetricTriple:
    """Clipped n-gram overlap; the best-F1 reference wins."""
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    if not references:
        raise ValueError("references must be non-empty")
    cand = _ngram_counts(_prepare(candidate, limit), n)
    refs = [_ngram_counts(_prepare(r, limit), n) for r in references]
    return _best_over_references(cand, refs)


def rouge_su4(
    candidate: str, references: list[str], limit: int = DEFAULT_WORD_LIMIT
) -> MetricTriple:
    """Skip-bigrams (pair gap <= 4) plus unigrams, clipped-count matched."""
    if not references:
        raise ValueError("references must be non-empty")
    cand = _su4_counts(_prepare(candidate, limit))
    refs = [_su4_counts(_prepare(r, limit)) for r in references]
    return _best_over_references(cand, refs)


def score_summary(candidate, cluster, limit: int = DEFAULT_WORD_LIMIT) -> RougeScores:
    """All three ROUGE metrics for one candidate against cluster references.

    ``candidate`` is a string or anything with a ``.text`` attribute;
    ``cluster`` is a reference list or anything with ``.reference_summaries``.
    An empty candidate scores all zeros.
    """
    text = getattr(candidate, "text", candidate)
    references = list(getattr(cluster, "reference_summaries", cluster))
    return RougeScores(
        rouge1=rouge_n(text, references, 1, limit),
        rouge2=rouge_n(text, references, 2, limit),
        rouge_su4=rouge_su4(text, references, limit),
    )
