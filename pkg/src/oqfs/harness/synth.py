"""Seeded synthetic benchmark with planted relevance.

Each cluster gets a private vocabulary: query terms that appear only in its
own relevant documents, topic terms shared across the cluster, plus one
fresh word per answer sentence.  Every relevant document hides one short
answer sentence (three query terms, one topic term, one unique term) among
filler prose drawn from a global pool that never overlaps reference text.
References are permutations of all the cluster's answer sentences.

Consequences used by the acceptance suite:
- the only passages sharing any stem with a query are its own cluster's
  relevant documents, so BM25 precision@k is 100.0 for k up to the planted
  count;
- filler words never match references, so summary ROUGE counts only answer
  content, and it grows with the number of retrieved relevant passages.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .. import textproc
from ..corpus import Cluster, Document

_CONSONANTS = "bdfgjklmnprtvz"
_VOWELS = "aiou"
_QUERY_FRAME = "which records discuss"
_ANSWER_WORDS = 5  # 3 query terms + 1 topic + 1 unique


@dataclass(frozen=True)
class SynthSpec:
    n_clusters: int = 20
    relevant_per_cluster: int = 50
    n_noise_docs: int = 4000
    filler_vocab: int = 500
    topic_terms: int = 12
    query_terms: int = 4
    n_references: int = 4
    seed: int = 42


def _fresh_word(rng: random.Random, used_stems: set[str]) -> str:
    while True:
        word = "".join(
            rng.choice(_CONSONANTS) + rng.choice(_VOWELS)
            for _ in range(rng.randint(2, 4))
        )
        stemmed = textproc.stem(word)
        if stemmed not in used_stems:
            used_stems.add(stemmed)
            return word


def _filler_sentences(rng: random.Random, pool: list[str], n_words: int) -> list[str]:
    sentences = []
    remaining = n_words
    while remaining > 0:
        size = min(remaining, rng.randint(6, 12))
        words = [rng.choice(pool) for _ in range(size)]
        sentences.append(" ".join(words).capitalize() + ".")
        remaining -= size
    return sentences


def generate_synth(spec: SynthSpec = SynthSpec()) -> tuple[list[Document], list[Cluster]]:
    rng = random.Random(spec.seed)
    used_stems = {textproc.stem(w) for w in _QUERY_FRAME.split()}
    filler = [_fresh_word(rng, used_stems) for _ in range(spec.filler_vocab)]

    docs: list[Document] = []
    clusters: list[Cluster] = []
    for c in range(spec.n_clusters):
        query_terms = [_fresh_word(rng, used_stems) for _ in range(spec.query_terms)]
        topic = [_fresh_word(rng, used_stems) for _ in range(spec.topic_terms)]
        answers: list[str] = []
        member_ids: list[str] = []
        for i in range(spec.relevant_per_cluster):
            words = rng.sample(query_terms, 3)
            words.append(rng.choice(topic))
            words.append(_fresh_word(rng, used_stems))
            rng.shuffle(words)
            assert len(words) == _ANSWER_WORDS
            answer = " ".join(words).capitalize() + "."
            answers.append(answer)
            padding = _filler_sentences(rng, filler, rng.randint(45, 70))
            position = rng.randint(0, len(padding))
            body = padding[:position] + [answer] + padding[position:]
            doc_id = f"c{c:02d}_rel{i:02d}"
            docs.append(Document(doc_id=doc_id, source_tag="SYNTH", text=" ".join(body)))
            member_ids.append(doc_id)
        references = []
        for _ in range(spec.n_references):
            order = answers.copy()
            rng.shuffle(order)
            references.append(" ".join(order))
        clusters.append(
            Cluster(
                cluster_id=f"c{c:02d}",
                query=f"{_QUERY_FRAME} {' '.join(query_terms)}",
                member_doc_ids=frozenset(member_ids),
                reference_summaries=tuple(references),
            )
        )
    for j in range(spec.n_noise_docs):
        body = _filler_sentences(rng, filler, rng.randint(40, 80))
        docs.append(
            Document(doc_id=f"noise{j:04d}", source_tag="SYNTH", text=" ".join(body))
        )
    return docs, clusters
