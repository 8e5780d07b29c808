"""Deterministic text processing shared by retrieval, metrics, and generation.

One tokenizer, one stemmer, one sentence splitter for the whole toolkit, so
lexical statistics agree across the BM25 index, ROUGE counting, and the
extractive generator.  Tokens are lowercase ``[a-z0-9]+`` runs; stems come
from the Porter algorithm in its original 1980 formulation (no later
extensions).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True, slots=True)
class Token:
    surface: str
    stem: str


@dataclass(frozen=True, slots=True)
class SentenceSpan:
    """Character span [start, end) of one sentence plus its tokens."""

    start: int
    end: int
    tokens: tuple[Token, ...]


def tokenize(text: str) -> list[Token]:
    """Lowercase, split on anything outside [a-z0-9], stem each token."""
    return [Token(s, stem(s)) for s in _TOKEN_RE.findall(text.lower())]


def surfaces(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def stems(text: str) -> list[str]:
    return [stem(s) for s in _TOKEN_RE.findall(text.lower())]


# --------------------------------------------------------------------------
# Porter stemmer, classic rule set.
#
# Letters are consonants unless they are a/e/i/o/u, or a 'y' preceded by a
# consonant.  The measure m of a stem counts vowel->consonant alternations
# in its [C](VC)^m[V] form.  Rules within a step are tried longest suffix
# first; the first suffix that matches ends the step whether or not its
# condition passes.  Words of length <= 2 are returned unchanged.
# --------------------------------------------------------------------------


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in "aeiou":
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem_: str) -> int:
    n = len(stem_)
    i = 0
    while i < n and _is_consonant(stem_, i):
        i += 1
    m = 0
    while i < n:
        while i < n and not _is_consonant(stem_, i):
            i += 1
        if i >= n:
            break
        m += 1
        while i < n and _is_consonant(stem_, i):
            i += 1
    return m


def _has_vowel(stem_: str) -> bool:
    return any(not _is_consonant(stem_, i) for i in range(len(stem_)))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    # *o: final three letters are consonant-vowel-consonant and the last is
    # not w, x, or y.
    if len(word) < 3:
        return False
    return (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
        and word[-1] not in "wxy"
    )


_STEP2_RULES = [
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
]

_STEP3_RULES = [
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
]

_STEP4_SUFFIXES = [
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
]

_STEP2_RULES.sort(key=lambda r: -len(r[0]))
_STEP3_RULES.sort(key=lambda r: -len(r[0]))
_STEP4_SUFFIXES.sort(key=len, reverse=True)


def _step1a(w: str) -> str:
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("ies"):
        return w[:-2]
    if w.endswith("ss"):
        return w
    if w.endswith("s"):
        return w[:-1]
    return w


def _step1b(w: str) -> str:
    if w.endswith("eed"):
        if _measure(w[:-3]) > 0:
            return w[:-1]
        return w
    stripped = None
    if w.endswith("ed") and _has_vowel(w[:-2]):
        stripped = w[:-2]
    elif w.endswith("ing") and _has_vowel(w[:-3]):
        stripped = w[:-3]
    if stripped is None:
        return w
    if stripped.endswith(("at", "bl", "iz")):
        return stripped + "e"
    if _ends_double_consonant(stripped) and stripped[-1] not in "lsz":
        return stripped[:-1]
    if _measure(stripped) == 1 and _ends_cvc(stripped):
        return stripped + "e"
    return stripped


def _step1c(w: str) -> str:
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


def _apply_rules(w: str, rules: list[tuple[str, str]]) -> str:
    for suffix, replacement in rules:
        if w.endswith(suffix):
            stem_ = w[: len(w) - len(suffix)]
            if _measure(stem_) > 0:
                return stem_ + replacement
            return w
    return w


def _step4(w: str) -> str:
    for suffix in _STEP4_SUFFIXES:
        if w.endswith(suffix):
            stem_ = w[: len(w) - len(suffix)]
            if _measure(stem_) > 1:
                if suffix == "ion" and stem_[-1:] not in ("s", "t"):
                    return w
                return stem_
            return w
    return w


def _step5a(w: str) -> str:
    if w.endswith("e"):
        stem_ = w[:-1]
        m = _measure(stem_)
        if m > 1 or (m == 1 and not _ends_cvc(stem_)):
            return stem_
    return w


def _step5b(w: str) -> str:
    if _measure(w) > 1 and _ends_double_consonant(w) and w.endswith("l"):
        return w[:-1]
    return w


@lru_cache(maxsize=262144)
def stem(word: str) -> str:
    """Porter-stem one already-normalized token."""
    if len(word) <= 2:
        return word
    w = _step1a(word)
    w = _step1b(w)
    w = _step1c(w)
    w = _apply_rules(w, _STEP2_RULES)
    w = _apply_rules(w, _STEP3_RULES)
    w = _step4(w)
    w = _step5a(w)
    w = _step5b(w)
    return w


# --------------------------------------------------------------------------
# Sentence splitting.
# --------------------------------------------------------------------------

_UPPER = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZ")


def split_sentences(text: str) -> list[SentenceSpan]:
    """Split at . ? ! followed by whitespace and an uppercase letter, or end.

    Spans are trimmed to non-whitespace extents, never overlap, and jointly
    cover every non-whitespace character of the input.
    """
    boundaries = []
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in ".?!":
            continue
        j = i + 1
        if j >= n:
            boundaries.append(j)
            continue
        if not text[j].isspace():
            continue
        while j < n and text[j].isspace():
            j += 1
        if j >= n or text[j] in _UPPER:
            boundaries.append(i + 1)

    spans: list[SentenceSpan] = []
    prev = 0
    for b in boundaries + [n]:
        if b < prev:
            continue
        segment = text[prev:b]
        stripped = segment.strip()
        if stripped:
            start = prev + len(segment) - len(segment.lstrip())
            end = start + len(stripped)
            spans.append(SentenceSpan(start, end, tuple(tokenize(stripped))))
        prev = b
    return spans
