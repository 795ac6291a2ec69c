"""Multinomial Naive Bayes classifier with k-fold validation and evaluation metrics."""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import CLASS_ORDER, ClassLabel, Corpus, Document
from .vectorspace import Vocabulary, build_vocabulary


@dataclass(frozen=True)
class NaiveBayesModel:
    """Trained multinomial model: log priors and per-class term log probabilities.

    `term_log_prob[c]` is indexed by vocabulary index.  Only classes seen in
    training are present, always in canonical class order.
    """

    classes: tuple[ClassLabel, ...]
    class_log_prior: Mapping[ClassLabel, float]
    term_log_prob: Mapping[ClassLabel, tuple[float, ...]]
    smoothing: float
    vocab: Vocabulary

    def __post_init__(self) -> None:
        if self.smoothing <= 0:
            raise ValueError("smoothing must be > 0")
        if not self.classes:
            raise ValueError("model has no classes")
        if list(self.classes) != sorted(self.classes, key=lambda c: c.order):
            raise ValueError("classes must be in canonical order")
        prior_mass = sum(math.exp(p) for p in self.class_log_prior.values())
        if abs(prior_mass - 1.0) > 1e-9:
            raise ValueError(f"class priors sum to {prior_mass}, not 1")
        for cls in self.classes:
            row = self.term_log_prob[cls]
            if len(row) != len(self.vocab):
                raise ValueError(f"term_log_prob[{cls.value}] length != vocabulary size")
            if row:
                mass = sum(math.exp(lp) for lp in row)
                if abs(mass - 1.0) > 1e-9:
                    raise ValueError(f"term probabilities for {cls.value} sum to {mass}, not 1")


def train(corpus: Corpus, vocab: Vocabulary, smoothing: float = 1.0) -> NaiveBayesModel:
    """Fit priors and Laplace-smoothed term probabilities from a labeled corpus.

    prior(c) = n_c / n; p(t|c) = (count(t,c) + s) / (total_c + s*|V|), where
    total_c counts only in-vocabulary tokens, so each class distribution
    normalizes over the vocabulary.
    """
    if smoothing <= 0:
        raise ValueError("smoothing must be > 0")
    if len(corpus) == 0:
        raise ValueError("cannot train on an empty corpus")
    if len(vocab) == 0:
        raise ValueError("cannot train with an empty vocabulary")
    n_docs: Counter[ClassLabel] = Counter()
    term_counts: dict[ClassLabel, list[int]] = {}
    for doc in corpus:
        if doc.gold_label is None:
            raise ValueError(f"document {doc.id!r} has no gold label")
        cls = doc.gold_label
        n_docs[cls] += 1
        counts = term_counts.setdefault(cls, [0] * len(vocab))
        for token in doc.tokens:
            idx = vocab.index.get(token)
            if idx is not None:
                counts[idx] += 1

    classes = tuple(sorted(n_docs, key=lambda c: c.order))
    total = len(corpus)
    priors = {c: math.log(n_docs[c] / total) for c in classes}
    denom_extra = smoothing * len(vocab)
    log_probs = {}
    for cls in classes:
        counts = term_counts[cls]
        class_total = sum(counts)
        log_denom = math.log(class_total + denom_extra)
        log_probs[cls] = tuple(math.log(c + smoothing) - log_denom for c in counts)
    return NaiveBayesModel(
        classes=classes,
        class_log_prior=priors,
        term_log_prob=log_probs,
        smoothing=smoothing,
        vocab=vocab,
    )


def predict(
    model: NaiveBayesModel, doc: Document
) -> tuple[ClassLabel, dict[ClassLabel, float]]:
    """Classify one tokenized document.

    Returns the argmax label and the full posterior, normalized with
    log-sum-exp.  Out-of-vocabulary tokens carry no evidence, so a document
    with none in vocabulary gets the prior back.  Ties go to the earliest
    class in canonical order.
    """
    counts = Counter(doc.tokens)
    scores = {}
    for cls in model.classes:
        row = model.term_log_prob[cls]
        score = model.class_log_prior[cls]
        for token, count in counts.items():
            idx = model.vocab.index.get(token)
            if idx is not None:
                score += count * row[idx]
        scores[cls] = score

    peak = max(scores.values())
    weights = {c: math.exp(s - peak) for c, s in scores.items()}
    mass = sum(weights.values())
    posterior = {c: w / mass for c, w in weights.items()}
    best = model.classes[0]
    for cls in model.classes[1:]:
        if scores[cls] > scores[best]:
            best = cls
    return best, posterior


@dataclass(frozen=True)
class ClassMetrics:
    """One-vs-rest rates for a single class."""

    precision: float
    recall: float
    f1: float
    accuracy: float


@dataclass(frozen=True)
class EvalReport:
    """Confusion matrix over the four canonical classes plus derived rates.

    Rows are gold labels, columns predictions, both in canonical class order.
    `accuracy` is the micro average trace/total; `macro_accuracy` averages the
    per-class one-vs-rest accuracies (the two readings of a single reported
    accuracy figure, emitted side by side).
    """

    confusion: tuple[tuple[int, ...], ...]
    per_class: Mapping[ClassLabel, ClassMetrics]
    accuracy: float
    macro_accuracy: float
    macro_f1: float

    @property
    def n_docs(self) -> int:
        return sum(sum(row) for row in self.confusion)

    def to_csv_text(self) -> str:
        lines = ["class,precision,recall,F,accuracy"]
        for cls in CLASS_ORDER:
            m = self.per_class[cls]
            lines.append(
                f"{cls.value},{m.precision:.4f},{m.recall:.4f},{m.f1:.4f},{m.accuracy:.4f}"
            )
        lines.append(f"macro,,,{self.macro_f1:.4f},{self.macro_accuracy:.4f}")
        lines.append(f"micro,,,,{self.accuracy:.4f}")
        return "\n".join(lines) + "\n"

    def save_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv_text(), encoding="utf-8")


def _ratio(num: float, denom: float) -> float:
    return num / denom if denom else 0.0


def report_from_confusion(confusion: Sequence[Sequence[int]]) -> EvalReport:
    """Derive all rates from a gold-by-predicted count matrix."""
    n = sum(sum(row) for row in confusion)
    if n == 0:
        raise ValueError("empty confusion matrix")
    per_class = {}
    for i, cls in enumerate(CLASS_ORDER):
        tp = confusion[i][i]
        fn = sum(confusion[i]) - tp
        fp = sum(row[i] for row in confusion) - tp
        tn = n - tp - fn - fp
        precision = _ratio(tp, tp + fp)
        recall = _ratio(tp, tp + fn)
        f1 = _ratio(2 * precision * recall, precision + recall)
        per_class[cls] = ClassMetrics(
            precision=precision,
            recall=recall,
            f1=f1,
            accuracy=(tp + tn) / n,
        )
    k = len(CLASS_ORDER)
    return EvalReport(
        confusion=tuple(tuple(row) for row in confusion),
        per_class=per_class,
        accuracy=sum(confusion[i][i] for i in range(k)) / n,
        macro_accuracy=sum(m.accuracy for m in per_class.values()) / k,
        macro_f1=sum(m.f1 for m in per_class.values()) / k,
    )


def evaluate(model: NaiveBayesModel, corpus: Corpus) -> EvalReport:
    """Score a labeled corpus with a trained model."""
    if len(corpus) == 0:
        raise ValueError("cannot evaluate an empty corpus")
    confusion = [[0] * len(CLASS_ORDER) for _ in CLASS_ORDER]
    for doc in corpus:
        if doc.gold_label is None:
            raise ValueError(f"document {doc.id!r} has no gold label")
        predicted, _ = predict(model, doc)
        confusion[doc.gold_label.order][predicted.order] += 1
    return report_from_confusion(confusion)


def stratified_folds(corpus: Corpus, k: int, seed: int) -> list[list[int]]:
    """Deal document positions into k folds, shuffled and stratified by class.

    Each class list is shuffled with the shared seeded generator, then dealt
    round-robin, so fold class proportions track the corpus within one
    document per class.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > len(corpus):
        raise ValueError(f"k={k} exceeds corpus size {len(corpus)}")
    by_class: dict[ClassLabel, list[int]] = {}
    for pos, doc in enumerate(corpus):
        if doc.gold_label is None:
            raise ValueError(f"document {doc.id!r} has no gold label")
        by_class.setdefault(doc.gold_label, []).append(pos)
    for cls, positions in by_class.items():
        if len(positions) < 2:
            raise ValueError(f"class {cls.value} has {len(positions)} document(s); need >= 2")
    rng = random.Random(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in sorted(by_class, key=lambda c: c.order):
        positions = by_class[cls]
        rng.shuffle(positions)
        for j, pos in enumerate(positions):
            folds[j % k].append(pos)
    return folds


def kfold(corpus: Corpus, k: int = 10, seed: int = 0, smoothing: float = 1.0) -> EvalReport:
    """Stratified k-fold cross validation, one aggregate confusion matrix.

    Every fold is scored with a model (and vocabulary) built from the other
    folds only, and all held-out predictions land in a single report.
    """
    folds = stratified_folds(corpus, k, seed)
    docs = corpus.documents
    confusion = [[0] * len(CLASS_ORDER) for _ in CLASS_ORDER]
    for held_out in folds:
        held_set = set(held_out)
        train_docs = [docs[p] for p in range(len(docs)) if p not in held_set]
        train_corpus = Corpus(train_docs)
        vocab = build_vocabulary(train_corpus)
        model = train(train_corpus, vocab, smoothing)
        for pos in held_out:
            doc = docs[pos]
            predicted, _ = predict(model, doc)
            confusion[doc.gold_label.order][predicted.order] += 1
    return report_from_confusion(confusion)


def save_model(model: NaiveBayesModel, path: str | Path) -> None:
    """Write the model as one JSON document with the vocabulary embedded."""
    vocab = model.vocab
    payload = {
        "format": "nb-model",
        "smoothing": model.smoothing,
        "classes": [c.value for c in model.classes],
        "class_log_prior": {c.value: model.class_log_prior[c] for c in model.classes},
        "term_log_prob": {c.value: list(model.term_log_prob[c]) for c in model.classes},
        "vocab": {
            "n_docs": vocab.n_docs,
            "terms": [[term, vocab.df[term]] for term in vocab.terms],
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def load_model(path: str | Path) -> NaiveBayesModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "nb-model":
        raise ValueError(f"{path}: not a Naive Bayes model file")
    terms = payload["vocab"]["terms"]
    vocab = Vocabulary(
        index={term: i for i, (term, _) in enumerate(terms)},
        df={term: df for term, df in terms},
        n_docs=payload["vocab"]["n_docs"],
    )
    classes = tuple(ClassLabel.from_name(name) for name in payload["classes"])
    return NaiveBayesModel(
        classes=classes,
        class_log_prior={c: payload["class_log_prior"][c.value] for c in classes},
        term_log_prob={c: tuple(payload["term_log_prob"][c.value]) for c in classes},
        smoothing=payload["smoothing"],
        vocab=vocab,
    )
