"""LDA topic modelling via collapsed Gibbs sampling, hard clustering, and the k sweep."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .vectorspace import Vocabulary, tfidf

try:
    from numba import njit
except ImportError:
    njit = None


@dataclass(frozen=True)
class LdaConfig:
    """Sampler hyperparameters.  `alpha=None` means the 50/k heuristic."""

    k: int
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")

    @property
    def alpha_resolved(self) -> float:
        return 50.0 / self.k if self.alpha is None else self.alpha


@dataclass(frozen=True, eq=False)
class LdaModel:
    """Final sampler state: token-topic assignments plus the count matrices.

    `doc_ids` lists the documents that contributed at least one in-vocabulary
    token, in corpus order; `excluded_ids` the rest.  `doc_words[d]` and
    `z[d]` hold, per kept document, the vocabulary index and assigned topic of
    each token.  The count matrices are always recomputable from those two.
    """

    config: LdaConfig
    vocab: Vocabulary
    doc_ids: tuple[str, ...]
    excluded_ids: tuple[str, ...]
    doc_words: tuple[np.ndarray, ...]
    z: tuple[np.ndarray, ...]
    n_kw: np.ndarray
    n_dk: np.ndarray
    n_k: np.ndarray


def recompute_counts(model: LdaModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rebuild n_kw, n_dk, n_k from scratch out of the stored assignments."""
    k = model.config.k
    n_kw = np.zeros((k, len(model.vocab)), dtype=np.int64)
    n_dk = np.zeros((len(model.doc_ids), k), dtype=np.int64)
    for d, (words, topics) in enumerate(zip(model.doc_words, model.z)):
        np.add.at(n_kw, (topics, words), 1)
        np.add.at(n_dk[d], topics, 1)
    return n_kw, n_dk, n_kw.sum(axis=1)


def _sweep_impl(words, doc_of, z, n_kw, n_dk, n_k, cum, alpha, beta, uniforms):
    """One full Gibbs sweep over all tokens, in corpus order.

    For token i the current assignment is removed from the counts, the full
    conditional p(z_i = t | rest) accumulated into `cum`, and the new topic
    picked by inverting uniforms[i] against the cumulative weights.  Mutates
    z and the count arrays in place.
    """
    n_topics = n_kw.shape[0]
    v = n_kw.shape[1]
    for i in range(words.shape[0]):
        w = words[i]
        d = doc_of[i]
        t = z[i]
        n_kw[t, w] -= 1
        n_dk[d, t] -= 1
        n_k[t] -= 1
        total = 0.0
        for k in range(n_topics):
            total += (n_dk[d, k] + alpha) * (n_kw[k, w] + beta) / (n_k[k] + beta * v)
            cum[k] = total
        u = uniforms[i] * total
        t_new = n_topics - 1
        for k in range(n_topics):
            if cum[k] > u:
                t_new = k
                break
        z[i] = t_new
        n_kw[t_new, w] += 1
        n_dk[d, t_new] += 1
        n_k[t_new] += 1


if njit is not None:
    _sweep = njit(cache=True, nogil=True)(_sweep_impl)
else:
    _sweep = _sweep_impl


def fit_lda(corpus: Corpus, vocab: Vocabulary, cfg: LdaConfig) -> LdaModel:
    """Run collapsed Gibbs sampling to its final state.

    Assignments start uniform at random from cfg.seed; each of the
    cfg.iterations sweeps consumes one fresh block of uniforms from the same
    generator, so the whole trajectory is a pure function of the inputs.
    Documents with no in-vocabulary token sit out and are reported as excluded.
    """
    doc_ids = []
    excluded = []
    doc_word_lists = []
    for doc in corpus:
        words = [vocab.index[t] for t in doc.tokens if t in vocab.index]
        if words:
            doc_ids.append(doc.id)
            doc_word_lists.append(np.asarray(words, dtype=np.int64))
        else:
            excluded.append(doc.id)
    if not doc_ids:
        raise ValueError("no document has an in-vocabulary token")

    words = np.concatenate(doc_word_lists)
    doc_of = np.repeat(
        np.arange(len(doc_word_lists), dtype=np.int64),
        [len(w) for w in doc_word_lists],
    )
    n_tokens = words.shape[0]
    k = cfg.k
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    z = rng.integers(0, k, size=n_tokens, dtype=np.int64)

    n_kw = np.zeros((k, len(vocab)), dtype=np.int64)
    n_dk = np.zeros((len(doc_ids), k), dtype=np.int64)
    np.add.at(n_kw, (z, words), 1)
    np.add.at(n_dk, (doc_of, z), 1)
    n_k = n_kw.sum(axis=1)

    cum = np.empty(k, dtype=np.float64)
    alpha = cfg.alpha_resolved
    for _ in range(cfg.iterations):
        uniforms = rng.random(n_tokens)
        _sweep(words, doc_of, z, n_kw, n_dk, n_k, cum, alpha, cfg.beta, uniforms)

    bounds = np.cumsum([len(w) for w in doc_word_lists])[:-1]
    return LdaModel(
        config=cfg,
        vocab=vocab,
        doc_ids=tuple(doc_ids),
        excluded_ids=tuple(excluded),
        doc_words=tuple(doc_word_lists),
        z=tuple(np.split(z, bounds)),
        n_kw=n_kw,
        n_dk=n_dk,
        n_k=n_k,
    )


def estimate_phi(model: LdaModel) -> np.ndarray:
    """Per-topic term distribution, (k, |V|); rows sum to 1."""
    beta = model.config.beta
    v = len(model.vocab)
    return (model.n_kw + beta) / (model.n_k + beta * v)[:, None]


def estimate_theta(model: LdaModel) -> np.ndarray:
    """Per-document topic distribution, (n_docs, k); rows sum to 1."""
    alpha = model.config.alpha_resolved
    k = model.config.k
    lengths = model.n_dk.sum(axis=1)
    return (model.n_dk + alpha) / (lengths + alpha * k)[:, None]


def top_words(model: LdaModel, topic: int, n: int) -> list[tuple[str, float]]:
    """The n highest-phi terms of one topic, ties broken lexicographically."""
    if not 0 <= topic < model.config.k:
        raise ValueError(f"topic {topic} out of range 0..{model.config.k - 1}")
    if n < 0:
        raise ValueError("n must be >= 0")
    row = estimate_phi(model)[topic]
    ranked = sorted(
        ((term, float(row[idx])) for term, idx in model.vocab.index.items()),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ranked[:n]


@dataclass(frozen=True)
class Clustering:
    """Hard document-to-cluster map; tokenless documents listed separately."""

    assignment: Mapping[str, int]
    k: int
    excluded_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        for doc_id, cluster in self.assignment.items():
            if not 0 <= cluster < self.k:
                raise ValueError(f"document {doc_id!r} assigned to cluster {cluster}, k={self.k}")

    def members(self) -> dict[int, list[str]]:
        """Cluster id -> document ids, in assignment order."""
        out: dict[int, list[str]] = {}
        for doc_id, cluster in self.assignment.items():
            out.setdefault(cluster, []).append(doc_id)
        return out


def hard_assign(model: LdaModel) -> Clustering:
    """Cluster each document at its argmax theta; ties go to the lowest topic."""
    theta = estimate_theta(model)
    picks = theta.argmax(axis=1)
    return Clustering(
        assignment={doc_id: int(c) for doc_id, c in zip(model.doc_ids, picks)},
        k=model.config.k,
        excluded_ids=model.excluded_ids,
    )


@dataclass(frozen=True, eq=False)
class SweepResult:
    k: int
    model: LdaModel
    clustering: Clustering
    intra: float
    inter: float | None


def sweep(
    corpus: Corpus,
    vocab: Vocabulary,
    k_values: Sequence[int],
    base_cfg: LdaConfig,
    threads: int = 1,
) -> list[SweepResult]:
    """Fit one model per k and score each clustering's intra/inter similarity.

    Each k runs with seed base_cfg.seed + k, so any single row is reproducible
    on its own.  Results follow k_values order regardless of thread count.
    """
    from .clusteranalysis import similarity_matrix, summarize

    if not k_values:
        raise ValueError("k_values must be non-empty")
    vectors = {doc.id: tfidf(doc.tokens, vocab) for doc in corpus}

    def run_one(k: int) -> SweepResult:
        cfg = replace(base_cfg, k=k, seed=base_cfg.seed + k)
        model = fit_lda(corpus, vocab, cfg)
        clustering = hard_assign(model)
        matrix = similarity_matrix(clustering, vectors)
        intra, inter = summarize(matrix)
        return SweepResult(k=k, model=model, clustering=clustering, intra=intra, inter=inter)

    if threads > 1 and len(k_values) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run_one, k_values))
    return [run_one(k) for k in k_values]


def save_lda(model: LdaModel, path: str | Path) -> None:
    """Write config and assignments as JSON; the vocabulary travels by checksum."""
    cfg = model.config
    payload = {
        "format": "lda-model",
        "config": {
            "k": cfg.k,
            "alpha": cfg.alpha,
            "beta": cfg.beta,
            "iterations": cfg.iterations,
            "seed": cfg.seed,
        },
        "vocab_checksum": model.vocab.checksum(),
        "doc_ids": list(model.doc_ids),
        "excluded_ids": list(model.excluded_ids),
        "z": [[int(t) for t in topics] for topics in model.z],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False)
        fh.write("\n")


def load_lda(path: str | Path, corpus: Corpus, vocab: Vocabulary) -> LdaModel:
    """Rebuild a fitted model from its JSON next to the corpus and vocabulary.

    The corpus and vocabulary must be the ones the model was fitted on; the
    vocabulary is verified by checksum and the document layout re-derived,
    then the count matrices recomputed from the stored assignments.
    """
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "lda-model":
        raise ValueError(f"{path}: not an LDA model file")
    if payload["vocab_checksum"] != vocab.checksum():
        raise ValueError(f"{path}: vocabulary checksum mismatch")
    raw = payload["config"]
    cfg = LdaConfig(
        k=raw["k"],
        alpha=raw["alpha"],
        beta=raw["beta"],
        iterations=raw["iterations"],
        seed=raw["seed"],
    )

    doc_ids = []
    excluded = []
    doc_word_lists = []
    for doc in corpus:
        words = [vocab.index[t] for t in doc.tokens if t in vocab.index]
        if words:
            doc_ids.append(doc.id)
            doc_word_lists.append(np.asarray(words, dtype=np.int64))
        else:
            excluded.append(doc.id)
    if doc_ids != payload["doc_ids"] or excluded != payload["excluded_ids"]:
        raise ValueError(f"{path}: corpus does not match the model's document layout")
    z = []
    for words, topics in zip(doc_word_lists, payload["z"]):
        if len(topics) != len(words):
            raise ValueError(f"{path}: assignment length does not match document tokens")
        arr = np.asarray(topics, dtype=np.int64)
        if arr.size and not (0 <= arr.min() and arr.max() < cfg.k):
            raise ValueError(f"{path}: topic id out of range")
        z.append(arr)

    model = LdaModel(
        config=cfg,
        vocab=vocab,
        doc_ids=tuple(doc_ids),
        excluded_ids=tuple(excluded),
        doc_words=tuple(doc_word_lists),
        z=tuple(z),
        n_kw=np.zeros((cfg.k, len(vocab)), dtype=np.int64),
        n_dk=np.zeros((len(doc_ids), cfg.k), dtype=np.int64),
        n_k=np.zeros(cfg.k, dtype=np.int64),
    )
    n_kw, n_dk, n_k = recompute_counts(model)
    return replace(model, n_kw=n_kw, n_dk=n_dk, n_k=n_k)
