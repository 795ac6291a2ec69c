"""Classification and topic clustering of epidemic-related short texts.

The package pairs a supervised relevance classifier (multinomial Naive Bayes
over four classes) with unsupervised topic discovery (LDA fit by collapsed
Gibbs sampling), plus the shared preprocessing, TF-IDF vector space, cluster
quality metrics and synthetic corpus generation the two pipelines need.
"""

from .classifier import EvalReport, NaiveBayesModel, evaluate, kfold, predict, train
from .clusteranalysis import (
    CrossTab,
    SimilarityMatrix,
    cluster_similarity,
    crosstab,
    similarity_matrix,
    summarize,
)
from .corpus import (
    ClassLabel,
    Corpus,
    Document,
    KeywordSet,
    keyword_filter,
    load_jsonl,
    save_jsonl,
)
from .synth import ClassSignature, SynthSpec, default_spec, generate, purity
from .textprep import (
    LingoTable,
    PrepConfig,
    PruneReport,
    normalize,
    preprocess,
    prune_vocabulary,
    tokenize,
)
from .topics import Clustering, LdaConfig, LdaModel, fit_lda, hard_assign, load_lda, save_lda, sweep
from .vectorspace import SparseVector, Vocabulary, build_vocabulary, cosine, tfidf

__version__ = "0.1.0"

__all__ = [
    "ClassLabel",
    "ClassSignature",
    "Clustering",
    "Corpus",
    "CrossTab",
    "Document",
    "EvalReport",
    "KeywordSet",
    "LdaConfig",
    "LdaModel",
    "LingoTable",
    "NaiveBayesModel",
    "PrepConfig",
    "PruneReport",
    "SimilarityMatrix",
    "SparseVector",
    "Vocabulary",
    "build_vocabulary",
    "cluster_similarity",
    "cosine",
    "crosstab",
    "default_spec",
    "evaluate",
    "fit_lda",
    "generate",
    "hard_assign",
    "keyword_filter",
    "kfold",
    "load_jsonl",
    "load_lda",
    "normalize",
    "predict",
    "preprocess",
    "prune_vocabulary",
    "purity",
    "save_jsonl",
    "save_lda",
    "similarity_matrix",
    "summarize",
    "sweep",
    "tfidf",
    "tokenize",
    "train",
    "__version__",
]
