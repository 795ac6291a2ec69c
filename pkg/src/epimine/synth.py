"""Synthetic labeled corpora with planted class/topic structure, plus purity scoring."""

from __future__ import annotations

import json
import random
from bisect import bisect_right
from dataclasses import dataclass, replace
from itertools import accumulate
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import ClassLabel, Corpus, Document
from .topics import Clustering


@dataclass(frozen=True)
class ClassSignature:
    """One class's private vocabulary and its multinomial draw weights."""

    label: ClassLabel
    terms: tuple[str, ...]
    weights: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not self.terms:
            raise ValueError(f"signature for {self.label.value} has no terms")
        if len(set(self.terms)) != len(self.terms):
            raise ValueError(f"signature for {self.label.value} repeats a term")
        if not self.weights:
            object.__setattr__(self, "weights", (1.0,) * len(self.terms))
        if len(self.weights) != len(self.terms):
            raise ValueError(f"signature for {self.label.value}: weights do not match terms")
        if any(w <= 0 for w in self.weights):
            raise ValueError(f"signature for {self.label.value}: weights must be > 0")


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a generated corpus.

    Each token comes from the document's class signature, except with
    probability `mix` it comes uniformly from the shared background
    vocabulary.  Signatures must be pairwise disjoint so classes stay
    identifiable.
    """

    classes: tuple[ClassSignature, ...]
    shared_vocab: tuple[str, ...] = ()
    mix: float = 0.0
    docs_per_class: int = 100
    doc_len: tuple[int, int] = (5, 15)
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.classes:
            raise ValueError("spec needs at least one class")
        labels = [sig.label for sig in self.classes]
        if len(set(labels)) != len(labels):
            raise ValueError("each class may appear only once")
        seen: dict[str, ClassLabel] = {}
        for sig in self.classes:
            for term in sig.terms:
                if term in seen:
                    raise ValueError(
                        f"term {term!r} appears in both {seen[term].value} "
                        f"and {sig.label.value} signatures"
                    )
                seen[term] = sig.label
        if not 0.0 <= self.mix <= 1.0:
            raise ValueError("mix must be in [0,1]")
        if self.mix > 0 and not self.shared_vocab:
            raise ValueError("mix > 0 requires a shared vocabulary")
        if self.docs_per_class < 0:
            raise ValueError("docs_per_class must be >= 0")
        lo, hi = self.doc_len
        if lo < 1 or hi < lo:
            raise ValueError("doc_len must satisfy 1 <= min <= max")


def default_spec() -> SynthSpec:
    """Four classes with small legible Portuguese signatures and a common background."""
    return SynthSpec(
        classes=(
            ClassSignature(
                ClassLabel.NEWS,
                ("casos", "confirma", "mil", "cidade", "saúde", "secretaria"),
            ),
            ClassSignature(
                ClassLabel.JOKE,
                ("parado", "whatsapp", "tão", "kkk", "piada", "zoeira"),
            ),
            ClassSignature(
                ClassLabel.MOSQUITO_FOCUS,
                ("foco", "água", "rua", "quintal", "terreno", "vizinho"),
            ),
            ClassSignature(
                ClassLabel.SICKNESS,
                ("febre", "sintoma", "doente", "dor", "corpo", "médico"),
            ),
        ),
        shared_vocab=("mosquito", "dengue", "epidemia", "brasil", "hoje", "gente"),
        mix=0.2,
        docs_per_class=500,
        doc_len=(5, 15),
        seed=0,
    )


class _Multinomial:
    """Cumulative-weight sampler over a fixed term list."""

    def __init__(self, terms: Sequence[str], weights: Sequence[float]):
        self.terms = list(terms)
        self.cum = list(accumulate(weights))
        self.total = self.cum[-1]

    def draw(self, rng: random.Random) -> str:
        return self.terms[bisect_right(self.cum, rng.random() * self.total)]


def generate(spec: SynthSpec) -> Corpus:
    """Materialize the spec into a labeled, already-tokenized corpus.

    Documents are emitted class by class in spec order; all randomness comes
    from one generator seeded with spec.seed, so equal specs give equal
    corpora.
    """
    rng = random.Random(spec.seed)
    background = (
        _Multinomial(spec.shared_vocab, (1.0,) * len(spec.shared_vocab))
        if spec.shared_vocab
        else None
    )
    lo, hi = spec.doc_len
    docs = []
    for sig in spec.classes:
        sampler = _Multinomial(sig.terms, sig.weights)
        for i in range(spec.docs_per_class):
            length = rng.randint(lo, hi)
            tokens = []
            for _ in range(length):
                if background is not None and rng.random() < spec.mix:
                    tokens.append(background.draw(rng))
                else:
                    tokens.append(sampler.draw(rng))
            docs.append(
                Document(
                    id=f"synth-{sig.label.value}-{i:05d}",
                    raw_text=" ".join(tokens),
                    gold_label=sig.label,
                    tokens=tuple(tokens),
                )
            )
    return Corpus(docs, provenance=f"synthetic: seed={spec.seed}, mix={spec.mix}")


def purity(clustering: Clustering, gold: Mapping[str, ClassLabel]) -> float:
    """Fraction of clustered documents sitting in their cluster's majority class."""
    if not clustering.assignment:
        raise ValueError("clustering has no assigned documents")
    per_cluster: dict[int, dict[ClassLabel, int]] = {}
    for doc_id, cluster in clustering.assignment.items():
        label = gold.get(doc_id)
        if label is None:
            raise ValueError(f"document {doc_id!r} is clustered but has no gold label")
        counts = per_cluster.setdefault(cluster, {})
        counts[label] = counts.get(label, 0) + 1
    majority = sum(max(counts.values()) for counts in per_cluster.values())
    return majority / len(clustering.assignment)


def load_spec(path: str | Path) -> SynthSpec:
    """Read a SynthSpec from JSON; omitted fields fall back to defaults."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    classes = tuple(
        ClassSignature(
            label=ClassLabel.from_name(entry["label"]),
            terms=tuple(entry["terms"]),
            weights=tuple(entry.get("weights", ())),
        )
        for entry in raw["classes"]
    )
    spec = SynthSpec(classes=classes)
    fields = {}
    if "shared_vocab" in raw:
        fields["shared_vocab"] = tuple(raw["shared_vocab"])
    if "mix" in raw:
        fields["mix"] = float(raw["mix"])
    if "docs_per_class" in raw:
        fields["docs_per_class"] = int(raw["docs_per_class"])
    if "doc_len" in raw:
        lo, hi = raw["doc_len"]
        fields["doc_len"] = (int(lo), int(hi))
    if "seed" in raw:
        fields["seed"] = int(raw["seed"])
    return replace(spec, **fields) if fields else spec
