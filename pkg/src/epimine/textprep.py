"""Tweet normalization, tokenization, lemmatization, stopwords and vocabulary pruning."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping

from .corpus import Corpus

# Replacement order inside one pass: image URLs before generic URLs so the
# extension is still visible, mentions before numbers so "@123" becomes
# "mention" rather than "@number".
_IMAGE_URL_RE = re.compile(
    r"(?:\w+://|www\.)\S*\.(?:jpg|jpeg|png|gif|bmp|webp|svg)(?:\?\S*)?",
    re.IGNORECASE,
)
_URL_RE = re.compile(r"(?:\w+://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_NUMBER_RE = re.compile(r"\b\d+(?:[.,]\d+)*\b")

# ASCII emoticons are removed only when they form a whole whitespace token;
# emoji codepoints are removed wherever they occur.
_EMOTICON_RE = re.compile(
    r"(?<!\S)(?:"
    r"[:;=8xX][-~o^']?[)(\]\[dDpPoO03/\\|*sS$}{]+"
    r"|[)(\]\[dD]+[-~o^']?[:;=8]"
    r"|<+/?3+"
    r"|\^[_.-]?\^|[oO][_.]+[oO]|-[_.]+-|[tT]_[tT]|>[_.]<|[uU]_[uU]|[xX]_[xX]|\._\."
    r")(?!\S)"
)
_EMOJI_RE = re.compile(
    "["
    "\U0001f000-\U0001faff"  # pictographs, emoticons, transport, supplemental
    "☀-➿"  # misc symbols and dingbats
    "⬀-⯿"  # arrows and stars
    "︀-️"  # variation selectors
    "‍"  # zero-width joiner
    "]+"
)

_TOKEN_RE = re.compile(r"\w+(?:-\w+)*")


@dataclass(frozen=True)
class LingoTable:
    """Whole-token abbreviation expansions ("abs" -> "abraço").

    Keys must be lowercase and whitespace-free, and no whitespace token of any
    expansion may itself be a key, so one expansion pass reaches a fixed point.
    """

    entries: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for key, expansion in self.entries.items():
            if key != key.lower() or key != "".join(key.split()) or not key:
                raise ValueError(f"lingo key {key!r} must be lowercase and whitespace-free")
            if key == expansion:
                raise ValueError(f"lingo entry {key!r} maps to itself")
        keys = set(self.entries)
        for key, expansion in self.entries.items():
            for word in expansion.split():
                if word in keys:
                    raise ValueError(
                        f"expansion of {key!r} contains {word!r}, which is itself a key"
                    )

    def __len__(self) -> int:
        return len(self.entries)

    def expand(self, token: str) -> str:
        return self.entries.get(token, token)

    @classmethod
    def from_file(cls, path: str | Path) -> "LingoTable":
        entries = {}
        for key, value in _read_tsv_pairs(path):
            entries[key] = value
        return cls(entries)

    @classmethod
    def default(cls) -> "LingoTable":
        return _default_lingo()


@lru_cache(maxsize=1)
def _default_lingo() -> LingoTable:
    ref = resources.files("epimine.data").joinpath("lingo_pt.tsv")
    with resources.as_file(ref) as path:
        return LingoTable.from_file(path)


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    ref = resources.files("epimine.data").joinpath("stopwords_pt.txt")
    with resources.as_file(ref) as path:
        return frozenset(load_stopwords(path))


def load_stopwords(path: str | Path) -> frozenset[str]:
    terms = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                terms.append(line)
    return frozenset(terms)


def load_lemma_lexicon(path: str | Path) -> dict[str, str]:
    return dict(_read_tsv_pairs(path))


def _read_tsv_pairs(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}: line {lineno}: expected \"key<TAB>value\"")
            yield parts[0].strip(), parts[1].strip()


@dataclass(frozen=True)
class PrepConfig:
    """Knobs for the preprocessing pipeline and the vocabulary curation step."""

    lingo: LingoTable = field(default_factory=LingoTable.default)
    stopwords: frozenset[str] = field(default_factory=default_stopwords)
    lemma_lexicon: Mapping[str, str] = field(default_factory=dict)
    replace_urls: bool = True
    replace_mentions: bool = True
    replace_numbers: bool = True
    replace_images: bool = True
    strip_emoticons: bool = True
    prune_top_n: int = 20
    prune_min_df: int = 2

    def __post_init__(self) -> None:
        if self.prune_top_n < 0:
            raise ValueError("prune_top_n must be >= 0")
        if self.prune_min_df < 1:
            raise ValueError("prune_min_df must be >= 1")


def normalize(text: str, cfg: PrepConfig | None = None) -> str:
    """Normalize raw tweet text to a lowercase, substitution-token form.

    One pass applies, in order: image URLs -> "image", other URLs -> "url",
    @mentions -> "mention", standalone numbers -> "number", emoticon/emoji
    stripping, case folding, '#' removal, and whole-token lingo expansion.
    Character removals can merge fragments into new matches (e.g. "12<emoji>34"
    becomes "1234"), so the pass repeats until the text stops changing; it
    stabilizes by the second round.
    """
    if cfg is None:
        cfg = PrepConfig()
    for _ in range(4):
        result = _normalize_pass(text, cfg)
        if result == text:
            break
        text = result
    return text


def _normalize_pass(text: str, cfg: PrepConfig) -> str:
    if cfg.replace_images:
        text = _IMAGE_URL_RE.sub("image", text)
    if cfg.replace_urls:
        text = _URL_RE.sub("url", text)
    if cfg.replace_mentions:
        text = _MENTION_RE.sub("mention", text)
    if cfg.replace_numbers:
        text = _NUMBER_RE.sub("number", text)
    if cfg.strip_emoticons:
        text = _EMOTICON_RE.sub(" ", text)
        text = _EMOJI_RE.sub("", text)
    text = text.casefold()
    text = text.replace("#", "")
    return " ".join(cfg.lingo.expand(token) for token in text.split())


def tokenize(text: str) -> list[str]:
    """Split normalized text into terms, keeping intra-word hyphens and accents."""
    return _TOKEN_RE.findall(text)


def lemmatize(tokens: list[str], lexicon: Mapping[str, str]) -> list[str]:
    """Replace each token by its lexicon entry, falling back to the token itself."""
    return [lexicon.get(token, token) for token in tokens]


def remove_stopwords(tokens: list[str], stopwords: frozenset[str]) -> list[str]:
    return [token for token in tokens if token not in stopwords]


def preprocess(corpus: Corpus, cfg: PrepConfig | None = None) -> Corpus:
    """Run the whole pipeline over a corpus, returning a new tokenized corpus.

    Documents whose token list comes out empty are kept with empty tokens.
    """
    if cfg is None:
        cfg = PrepConfig()
    docs = []
    for doc in corpus:
        tokens = tokenize(normalize(doc.raw_text, cfg))
        tokens = lemmatize(tokens, cfg.lemma_lexicon)
        tokens = remove_stopwords(tokens, cfg.stopwords)
        docs.append(doc.with_tokens(tokens))
    prov = f"{corpus.provenance}; preprocessed" if corpus.provenance else "preprocessed"
    return Corpus(docs, provenance=prov)


@dataclass(frozen=True)
class PruneReport:
    """What prune_vocabulary removed: (term, total count) and (term, doc frequency)."""

    removed_frequent: tuple[tuple[str, int], ...]
    removed_rare: tuple[tuple[str, int], ...]
    exhausted: bool = False


def prune_vocabulary(corpus: Corpus, top_n: int, min_df: int) -> tuple[Corpus, PruneReport]:
    """Drop the `top_n` most frequent terms, then terms in fewer than `min_df` documents.

    Exactly min(top_n, |V|) terms are removed in the frequency step; at a tied
    boundary the lexicographically smallest terms are kept.  Document frequency
    is measured on the input corpus.
    """
    if top_n < 0:
        raise ValueError("top_n must be >= 0")
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    tf: Counter[str] = Counter()
    df: Counter[str] = Counter()
    for doc in corpus:
        tf.update(doc.tokens)
        df.update(set(doc.tokens))

    # Stable sort: frequency descending, ties in reverse lexicographic order,
    # so removal takes the largest tied terms first.
    by_frequency = sorted(sorted(tf, reverse=True), key=lambda t: -tf[t])
    frequent = by_frequency[:top_n]
    exhausted = top_n > len(by_frequency)
    removed = set(frequent)
    rare = sorted(t for t in tf if t not in removed and df[t] < min_df)
    removed.update(rare)

    docs = [doc.with_tokens(t for t in doc.tokens if t not in removed) for doc in corpus]
    note = f"pruned vocabulary: top_n={top_n}, min_df={min_df}, removed {len(removed)} terms"
    prov = f"{corpus.provenance}; {note}" if corpus.provenance else note
    report = PruneReport(
        removed_frequent=tuple((t, tf[t]) for t in frequent),
        removed_rare=tuple((t, df[t]) for t in rare),
        exhausted=exhausted,
    )
    return Corpus(docs, provenance=prov), report
