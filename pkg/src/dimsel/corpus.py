"""Corpus ingestion: tokenization, vocabulary, halving, and frequency distortion.

Corpus files are UTF-8 text with one sentence per line. Vocabulary files are
TSV lines ``token<TAB>count``, ordered by count descending (ties broken
lexicographically).
"""

from __future__ import annotations

import math
import random
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "TokenizedCorpus",
    "Vocabulary",
    "CorpusSplit",
    "DistortionSpec",
    "tokenize_corpus",
    "build_vocabulary",
    "split_corpus",
    "distort_corpus",
    "read_corpus",
    "write_corpus",
    "read_vocabulary",
    "write_vocabulary",
]

_PUNCT = string.punctuation


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass
class TokenizedCorpus:
    """A sequence of sentences, each a list of lowercase tokens."""

    sentences: list[list[str]]

    @property
    def sentence_count(self) -> int:
        return len(self.sentences)

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)


@dataclass
class Vocabulary:
    """Rank-ordered token table: most frequent first, ties lexicographic."""

    entries: list[tuple[str, int]]
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.index = {token: i for i, (token, _) in enumerate(self.entries)}

    @property
    def size(self) -> int:
        return len(self.entries)

    def tokens(self) -> list[str]:
        return [token for token, _ in self.entries]


@dataclass
class CorpusSplit:
    part_a: TokenizedCorpus
    part_b: TokenizedCorpus
    mode: str


@dataclass(frozen=True)
class DistortionSpec:
    """Duplicate-sentence injection: append round(rate*N) copies of one
    randomly chosen sentence longer than ``min_sentence_len`` tokens."""

    rate: float
    seed: int
    min_sentence_len: int = 20

    def __post_init__(self) -> None:
        if not 0.0 < self.rate <= 1.0:
            raise ValueError(f"distortion rate must be in (0, 1], got {self.rate}")
        if self.min_sentence_len < 1:
            raise ValueError("min_sentence_len must be positive")


def tokenize_corpus(raw_text: bytes | str) -> TokenizedCorpus:
    """Lowercase, split on whitespace, strip surrounding ASCII punctuation.

    One sentence per line; blank lines (and tokens that are pure punctuation)
    are dropped. Invalid UTF-8 raises UnicodeDecodeError, which carries the
    offending byte offset.
    """
    if isinstance(raw_text, bytes):
        text = raw_text.decode("utf-8")
    else:
        text = raw_text
    sentences = []
    for line in text.splitlines():
        tokens = [t.strip(_PUNCT) for t in line.lower().split()]
        tokens = [t for t in tokens if t]
        if tokens:
            sentences.append(tokens)
    return TokenizedCorpus(sentences)


def build_vocabulary(corpus: TokenizedCorpus, max_vocab: int, min_count: int = 1) -> Vocabulary:
    """Top ``max_vocab`` tokens with count >= ``min_count``."""
    if max_vocab < 1:
        raise ValueError("max_vocab must be >= 1")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts = Counter()
    for sentence in corpus.sentences:
        counts.update(sentence)
    surviving = [(t, c) for t, c in counts.items() if c >= min_count]
    if not surviving:
        raise ValueError("no tokens survive the frequency threshold; vocabulary is empty")
    surviving.sort(key=lambda tc: (-tc[1], tc[0]))
    return Vocabulary(surviving[:max_vocab])


def split_corpus(corpus: TokenizedCorpus, mode: str = "interleave") -> CorpusSplit:
    """Split into two equal-size (+-1 sentence) halves, deterministically.

    ``interleave`` sends even-indexed sentences to part_a and odd to part_b;
    ``halves`` sends the first ceil(N/2) sentences to part_a.
    """
    n = corpus.sentence_count
    if n < 2:
        raise ValueError(f"corpus has {n} sentence(s); need at least 2 to split")
    if mode == "interleave":
        part_a = corpus.sentences[0::2]
        part_b = corpus.sentences[1::2]
    elif mode == "halves":
        cut = (n + 1) // 2
        part_a = corpus.sentences[:cut]
        part_b = corpus.sentences[cut:]
    else:
        raise ValueError(f"unknown split mode {mode!r}; expected 'interleave' or 'halves'")
    return CorpusSplit(TokenizedCorpus(list(part_a)), TokenizedCorpus(list(part_b)), mode)


def distort_corpus(corpus: TokenizedCorpus, spec: DistortionSpec) -> TokenizedCorpus:
    """Append round(rate*N) copies of one random long sentence, then shuffle.

    The chosen sentence must be strictly longer than ``spec.min_sentence_len``
    tokens. Reproducible for a fixed (corpus, spec).
    """
    eligible = [i for i, s in enumerate(corpus.sentences) if len(s) > spec.min_sentence_len]
    if not eligible:
        raise ValueError(
            f"no sentence longer than {spec.min_sentence_len} tokens is available to duplicate"
        )
    rng = random.Random(spec.seed)
    chosen = corpus.sentences[rng.choice(eligible)]
    n_dup = _round_half_up(spec.rate * corpus.sentence_count)
    out = list(corpus.sentences) + [chosen] * n_dup
    rng.shuffle(out)
    return TokenizedCorpus(out)


def read_corpus(path: str | Path) -> TokenizedCorpus:
    return tokenize_corpus(Path(path).read_bytes())


def write_corpus(corpus: TokenizedCorpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as sink:
        for sentence in corpus.sentences:
            sink.write(" ".join(sentence))
            sink.write("\n")


def read_vocabulary(path: str | Path) -> Vocabulary:
    entries = []
    with open(path, encoding="utf-8") as source:
        for lineno, line in enumerate(source, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                token, count = line.split("\t")
                entries.append((token, int(count)))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed vocabulary line {line!r}") from None
    if not entries:
        raise ValueError(f"{path}: empty vocabulary file")
    return Vocabulary(entries)


def write_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as sink:
        for token, count in vocab.entries:
            sink.write(f"{token}\t{count}\n")
