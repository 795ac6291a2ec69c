"""Document data model, JSONL ingestion/persistence, and the keyword pre-filter."""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator


class ClassLabel(Enum):
    """The four relevance classes, ordered from most general news to noise.

    Declaration order is the canonical tie-break order used throughout
    (News < Joke < MosquitoFocus < Sickness).
    """

    NEWS = "News"
    JOKE = "Joke"
    MOSQUITO_FOCUS = "MosquitoFocus"
    SICKNESS = "Sickness"

    @classmethod
    def from_name(cls, name: str) -> "ClassLabel":
        for label in cls:
            if label.value == name:
                return label
        raise ValueError(f"unknown class label {name!r}")

    @property
    def order(self) -> int:
        return _LABEL_ORDER[self]


_LABEL_ORDER = {label: i for i, label in enumerate(ClassLabel)}

# Canonical class order, shared by tie-breaking, report rows and matrix axes.
CLASS_ORDER = tuple(ClassLabel)


@dataclass(frozen=True)
class Document:
    """One post. `tokens` stays empty until preprocessing produces a new Document."""

    id: str
    raw_text: str
    timestamp: str | None = None
    gold_label: ClassLabel | None = None
    tokens: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("document id must be non-empty")
        if not self.raw_text:
            raise ValueError(f"document {self.id!r}: raw_text must be non-empty")

    def with_tokens(self, tokens: Iterable[str]) -> "Document":
        return replace(self, tokens=tuple(tokens))


class Corpus:
    """Immutable, insertion-ordered collection of documents with distinct ids."""

    def __init__(self, documents: Iterable[Document], provenance: str = ""):
        docs = tuple(documents)
        seen: set[str] = set()
        for doc in docs:
            if doc.id in seen:
                raise ValueError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)
        self._documents = docs
        self._by_id = {doc.id: doc for doc in docs}
        self.provenance = provenance

    @property
    def documents(self) -> tuple[Document, ...]:
        return self._documents

    def __iter__(self) -> Iterator[Document]:
        return iter(self._documents)

    def __len__(self) -> int:
        return len(self._documents)

    def __getitem__(self, index: int) -> Document:
        return self._documents[index]

    def by_id(self, doc_id: str) -> Document:
        return self._by_id[doc_id]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def with_provenance(self, note: str) -> "Corpus":
        prov = f"{self.provenance}; {note}" if self.provenance else note
        return Corpus(self._documents, provenance=prov)


def fold(text: str) -> str:
    """Case-fold and strip accents (for keyword matching only)."""
    decomposed = unicodedata.normalize("NFKD", text.casefold())
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


@dataclass(frozen=True)
class KeywordSet:
    """Search keywords, stored case-folded and accent-folded, leading '#' stripped."""

    keywords: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.keywords:
            raise ValueError("keyword set must be non-empty")
        folded = tuple(fold(k).lstrip("#") for k in self.keywords)
        if any(not k for k in folded):
            raise ValueError("keywords must contain at least one character besides '#'")
        object.__setattr__(self, "keywords", folded)

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> "KeywordSet":
        return cls(tuple(terms))

    @classmethod
    def from_file(cls, path: str | Path) -> "KeywordSet":
        terms = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("# "):
                    terms.append(line)
        return cls(tuple(terms))

    @classmethod
    def default(cls) -> "KeywordSet":
        ref = resources.files("epimine.data").joinpath("keywords.txt")
        with resources.as_file(ref) as path:
            return cls.from_file(path)


def load_jsonl(path: str | Path, *, require_lang: str | None = "pt") -> Corpus:
    """Load a corpus from a JSONL file, one object per line.

    Each line needs "id" and "text"; "label", "timestamp" and "tokens" are
    optional and unknown fields are ignored.  Documents carrying a "lang"
    field different from `require_lang` are skipped (pass None to keep all);
    documents without the field are always kept.
    """
    documents = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: malformed JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise ValueError(f"{path}: line {lineno}: expected a JSON object")
            try:
                doc = _document_from_record(record, require_lang)
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from exc
            if doc is not None:
                documents.append(doc)
    try:
        return Corpus(documents, provenance=f"loaded from {path}")
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def _document_from_record(record: dict, require_lang: str | None) -> Document | None:
    if "id" not in record:
        raise ValueError("missing \"id\" field")
    if "text" not in record:
        raise ValueError("missing \"text\" field")
    doc_id = record["id"]
    if isinstance(doc_id, int):
        doc_id = str(doc_id)
    if not isinstance(doc_id, str):
        raise ValueError(f"\"id\" must be a string, got {type(doc_id).__name__}")
    text = record["text"]
    if not isinstance(text, str):
        raise ValueError(f"\"text\" must be a string, got {type(text).__name__}")
    lang = record.get("lang")
    if require_lang is not None and lang is not None and lang != require_lang:
        return None
    label = None
    if record.get("label") is not None:
        label = ClassLabel.from_name(record["label"])
    tokens: tuple[str, ...] = ()
    if record.get("tokens") is not None:
        raw = record["tokens"]
        if not isinstance(raw, list) or not all(isinstance(t, str) for t in raw):
            raise ValueError("\"tokens\" must be an array of strings")
        tokens = tuple(raw)
    return Document(
        id=doc_id,
        raw_text=text,
        timestamp=record.get("timestamp"),
        gold_label=label,
        tokens=tokens,
    )


def save_jsonl(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus as JSONL; loading the result reproduces the corpus exactly."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in corpus:
            record: dict = {"id": doc.id, "text": doc.raw_text}
            if doc.timestamp is not None:
                record["timestamp"] = doc.timestamp
            if doc.gold_label is not None:
                record["label"] = doc.gold_label.value
            if doc.tokens:
                record["tokens"] = list(doc.tokens)
            fh.write(json.dumps(record, ensure_ascii=False))
            fh.write("\n")


def keyword_filter(corpus: Corpus, keys: KeywordSet) -> Corpus:
    """Keep documents whose folded text contains at least one keyword.

    The text is case- and accent-folded and a leading '#' is stripped from
    each whitespace token before substring matching, so "#Dengue" matches
    the keyword "dengue" and vice versa.
    """
    kept = []
    for doc in corpus:
        haystack = " ".join(tok.lstrip("#") for tok in fold(doc.raw_text).split())
        if any(key in haystack for key in keys.keywords):
            kept.append(doc)
    note = f"keyword_filter: {len(keys.keywords)} keys, kept {len(kept)}/{len(corpus)}"
    prov = f"{corpus.provenance}; {note}" if corpus.provenance else note
    return Corpus(kept, provenance=prov)
