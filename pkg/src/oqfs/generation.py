"""Summary generation over a query plus its top-k retrieved passages.

The native generator is query-biased extractive fusion: maximal marginal
relevance over the sentences of all retrieved passages, with cosine
similarity of stemmed term-frequency vectors for both query relevance and
redundancy.  A remote backend speaks the /generate wire protocol instead.
A seeded random-passage baseline exists for benchmark comparisons.
"""

from __future__ import annotations

import logging
import math
import random
import threading
import time
from collections import Counter
from dataclasses import dataclass, field

import requests

from . import metrics, textproc
from .errors import ProtocolError, TransportError

log = logging.getLogger(__name__)

DEFAULT_MAX_WORDS = 250
MMR_LAMBDA = 0.7

EXTRACTIVE = "EXTRACTIVE"
REMOTE = "REMOTE"
ECHO = "ECHO"
RANDOM = "RANDOM"


@dataclass(frozen=True, slots=True)
class GenerationRequest:
    query_id: str
    query: str
    passages: tuple[tuple[str, str], ...]  # (passage_id, text), in rank order
    max_words: int = DEFAULT_MAX_WORDS

    def __post_init__(self) -> None:
        if not self.passages:
            raise ValueError("request needs at least one passage")
        if any(not text for _, text in self.passages):
            raise ValueError("passage texts must be non-empty")
        if self.max_words < 1:
            raise ValueError(f"max_words must be >= 1, got {self.max_words}")


@dataclass(frozen=True, slots=True)
class Summary:
    query_id: str
    text: str
    generator: str  # EXTRACTIVE | REMOTE | ECHO | RANDOM
    word_count: int = field(default=-1)
    model: str | None = None
    latency_ms: int | None = None

    def __post_init__(self) -> None:
        if self.word_count == -1:
            object.__setattr__(self, "word_count", len(self.text.split()))
        if self.word_count != len(self.text.split()):
            raise ValueError("word_count does not match text")


def _tf_vector(stems: list[str]) -> Counter:
    return Counter(stems)


def _cosine(a: Counter, b: Counter, norm_a: float, norm_b: float) -> float:
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    if len(b) < len(a):
        a, b = b, a
    dot = sum(count * b[stem] for stem, count in a.items())
    return dot / (norm_a * norm_b)


@dataclass(frozen=True, slots=True)
class _Candidate:
    text: str
    words: int
    tf: Counter
    norm: float


def _sentence_candidates(req: GenerationRequest) -> list[_Candidate]:
    candidates = []
    for _, passage_text in req.passages:
        for span in textproc.split_sentences(passage_text):
            if not span.tokens:  # punctuation-only fragment, no content
                continue
            sent = passage_text[span.start : span.end]
            stems = [t.stem for t in span.tokens]
            tf = _tf_vector(stems)
            candidates.append(
                _Candidate(
                    text=sent,
                    words=len(sent.split()),
                    tf=tf,
                    norm=math.sqrt(sum(c * c for c in tf.values())),
                )
            )
    return candidates


def generate_extractive(
    req: GenerationRequest, mmr_lambda: float = MMR_LAMBDA
) -> Summary:
    """Greedy MMR sentence selection within the word budget.

    Each round picks the candidate maximizing
    ``lambda * relevance - (1 - lambda) * redundancy`` among sentences that
    still fit; too-long sentences are skipped, not stopping the fill.
    Candidates lexically identical to an already-selected sentence
    (redundancy 1) add nothing and are never re-selected.  Ties go to the
    earlier candidate in passage order.
    """
    query_tf = _tf_vector(textproc.stems(req.query))
    query_norm = math.sqrt(sum(c * c for c in query_tf.values()))
    candidates = _sentence_candidates(req)
    if not candidates:
        log.warning("query %s: no sentences in any passage", req.query_id)
        return Summary(req.query_id, "", EXTRACTIVE)

    relevance = [
        _cosine(c.tf, query_tf, c.norm, query_norm) for c in candidates
    ]
    remaining = list(range(len(candidates)))
    selected: list[int] = []
    budget = req.max_words
    while remaining and budget > 0:
        best_i = None
        best_score = -math.inf
        for i in remaining:
            cand = candidates[i]
            if cand.words > budget:
                continue
            redundancy = 0.0
            for j in selected:
                sim = _cosine(
                    cand.tf, candidates[j].tf, cand.norm, candidates[j].norm
                )
                if sim > redundancy:
                    redundancy = sim
            if redundancy >= 1.0 - 1e-12:
                continue
            score = mmr_lambda * relevance[i] - (1.0 - mmr_lambda) * redundancy
            if score > best_score:
                best_score = score
                best_i = i
        if best_i is None:
            break
        selected.append(best_i)
        budget -= candidates[best_i].words
        remaining.remove(best_i)
    text = " ".join(candidates[i].text for i in selected)
    return Summary(req.query_id, text, EXTRACTIVE)


def generate_random(req: GenerationRequest, seed: int = 0) -> Summary:
    """Baseline: concatenate passages in seeded random order, then cap."""
    order = list(range(len(req.passages)))
    random.Random(seed).shuffle(order)
    text = " ".join(req.passages[i][1] for i in order)
    return Summary(
        req.query_id, metrics.truncate_words(text, req.max_words), RANDOM
    )


class GenerationClient:
    """Thread-safe /generate client with a bounded in-flight request count.

    Generation is slow, so the per-request timeout defaults to 120 s and at
    most ``max_in_flight`` requests (default 4) run concurrently.
    """

    def __init__(
        self,
        endpoint: str,
        timeout: float = 120.0,
        max_retries: int = 3,
        backoff: float = 0.2,
        max_in_flight: int = 4,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self._gate = threading.Semaphore(max_in_flight)
        self._session = requests.Session()

    def generate(self, req: GenerationRequest) -> Summary:
        return generate_remote(
            req,
            self.endpoint,
            timeout=self.timeout,
            max_retries=self.max_retries,
            backoff=self.backoff,
            session=self._session,
            gate=self._gate,
        )


def generate_remote(
    req: GenerationRequest,
    endpoint: str,
    timeout: float = 120.0,
    max_retries: int = 3,
    backoff: float = 0.2,
    session: requests.Session | None = None,
    gate: threading.Semaphore | None = None,
) -> Summary:
    """POST the request over the /generate wire protocol.

    Transport failures retry with bounded backoff then raise TransportError;
    malformed replies raise ProtocolError carrying the raw body.  A summary
    longer than max_words is truncated with a warning, not an error.
    """
    payload = {
        "query": req.query,
        "passages": [{"id": pid, "text": text} for pid, text in req.passages],
        "max_words": req.max_words,
    }
    session = session or requests.Session()
    url = endpoint.rstrip("/") + "/generate"
    last: Exception | None = None
    started = time.monotonic()
    for attempt in range(max_retries):
        if attempt:
            time.sleep(backoff * (2 ** (attempt - 1)))
        try:
            if gate is not None:
                with gate:
                    resp = session.post(url, json=payload, timeout=timeout)
            else:
                resp = session.post(url, json=payload, timeout=timeout)
            break
        except requests.Timeout as exc:
            last = TransportError(f"generate request timed out: {exc}", kind="timeout")
        except requests.ConnectionError as exc:
            last = TransportError(f"generate request failed: {exc}", kind="connection")
    else:
        assert last is not None
        raise last
    elapsed_ms = int((time.monotonic() - started) * 1000)
    try:
        body = resp.json()
        text = body["summary"]
        model = body["model"]
        latency_ms = int(body["latency_ms"])
        if not isinstance(text, str) or not isinstance(model, str):
            raise TypeError("summary and model must be strings")
    except Exception as exc:
        raise ProtocolError(
            f"malformed /generate reply (HTTP {resp.status_code}): {exc}",
            body=resp.text[:2000],
        ) from exc
    if len(text.split()) > req.max_words:
        log.warning(
            "query %s: service returned %d words, truncating to %d",
            req.query_id,
            len(text.split()),
            req.max_words,
        )
        text = metrics.truncate_words(text, req.max_words)
    log.debug("query %s: remote generation took %d ms", req.query_id, elapsed_ms)
    return Summary(
        req.query_id,
        text,
        ECHO if model == "echo" else REMOTE,
        model=model,
        latency_ms=latency_ms,
    )
