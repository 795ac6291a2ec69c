"""Vocabulary indexing and the TF-IDF vector space with cosine similarity."""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import Corpus

SparseVector = dict[str, float]


@dataclass(frozen=True)
class Vocabulary:
    """Term -> contiguous index mapping with per-term document frequencies.

    Indices follow first-seen order over the corpus the vocabulary was built
    from.  `n_docs` is the size of that corpus, the N in the IDF ratio.
    """

    index: Mapping[str, int]
    df: Mapping[str, int]
    n_docs: int

    def __post_init__(self) -> None:
        if self.n_docs < 0:
            raise ValueError("n_docs must be >= 0")
        if set(self.index) != set(self.df):
            raise ValueError("index and df must cover the same terms")
        indices = sorted(self.index.values())
        if indices != list(range(len(self.index))):
            raise ValueError("indices must be contiguous from 0")
        for term, count in self.df.items():
            if not 1 <= count <= max(self.n_docs, 1):
                raise ValueError(f"df[{term!r}]={count} out of range for n_docs={self.n_docs}")

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    @property
    def terms(self) -> list[str]:
        """Terms in index order."""
        return sorted(self.index, key=self.index.__getitem__)

    def idf(self, term: str) -> float:
        return math.log(self.n_docs / self.df[term])

    def checksum(self) -> str:
        """SHA-256 of the canonical TSV serialization, for cross-file integrity."""
        return hashlib.sha256(self._canonical_tsv().encode("utf-8")).hexdigest()

    def _canonical_tsv(self) -> str:
        lines = [f"# n_docs={self.n_docs}"]
        for term in self.terms:
            lines.append(f"{term}\t{self.index[term]}\t{self.df[term]}")
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self._canonical_tsv(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        index: dict[str, int] = {}
        df: dict[str, int] = {}
        n_docs = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    body = line.lstrip("#").strip()
                    if body.startswith("n_docs="):
                        n_docs = int(body.removeprefix("n_docs="))
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(f"{path}: line {lineno}: expected term<TAB>index<TAB>df")
                term, idx, count = parts
                if term in index:
                    raise ValueError(f"{path}: line {lineno}: duplicate term {term!r}")
                index[term] = int(idx)
                df[term] = int(count)
        if n_docs is None:
            raise ValueError(f"{path}: missing \"# n_docs=<N>\" header")
        return cls(index=index, df=df, n_docs=n_docs)


def build_vocabulary(corpus: Corpus) -> Vocabulary:
    """Index every term of a tokenized corpus in first-seen order."""
    index: dict[str, int] = {}
    df: Counter[str] = Counter()
    for doc in corpus:
        for term in doc.tokens:
            if term not in index:
                index[term] = len(index)
        df.update(set(doc.tokens))
    return Vocabulary(index=index, df=dict(df), n_docs=len(corpus))


def tfidf(tokens: Iterable[str], vocab: Vocabulary) -> SparseVector:
    """TF-IDF weights: count(t) * ln(n_docs / df(t)).

    Terms outside the vocabulary are skipped; terms appearing in every
    document get weight 0 and are left out of the vector.
    """
    counts = Counter(tokens)
    vector: SparseVector = {}
    for term, count in counts.items():
        if term not in vocab.index:
            continue
        weight = count * vocab.idf(term)
        if weight != 0.0:
            vector[term] = weight
    return vector


def norm(vector: SparseVector) -> float:
    return math.sqrt(sum(w * w for w in vector.values()))


def cosine(a: SparseVector, b: SparseVector) -> float:
    """Cosine similarity of two sparse vectors; 0.0 when either has no mass.

    Iterates the shared keys in sorted order, so cosine(a, b) == cosine(b, a)
    exactly, not just within rounding.
    """
    na = norm(a)
    nb = norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    common = sorted(a.keys() & b.keys())
    dot = sum(a[k] * b[k] for k in common)
    return dot / (na * nb)


def unit(vector: SparseVector) -> SparseVector:
    """Scale a vector to unit length; the zero vector stays zero."""
    n = norm(vector)
    if n == 0.0:
        return {}
    return {k: w / n for k, w in vector.items()}
