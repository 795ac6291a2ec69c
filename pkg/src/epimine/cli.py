"""Command-line pipeline: ingest, preprocess, classify, cluster, and report."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path
from typing import Mapping

from . import classifier, clusteranalysis, synth as synthmod, textprep, topics
from .corpus import ClassLabel, Corpus, KeywordSet, keyword_filter, load_jsonl, save_jsonl
from .topics import Clustering, LdaConfig
from .vectorspace import Vocabulary, build_vocabulary, tfidf


class UsageError(Exception):
    """Bad invocation: missing required option, malformed flag value."""


@dataclass(frozen=True)
class RunConfig:
    """Defaults read from a JSON config file; flags always win over these."""

    values: Mapping[str, object]

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls(values={})
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        return cls(values=raw)

    def get(self, key: str, default=None):
        return self.values.get(key, default)


def _resolve(flag_value, config: RunConfig, key: str, default=None):
    if flag_value is not None:
        return flag_value
    value = config.get(key)
    return default if value is None else value


def _require_seed(flag_value, config: RunConfig):
    seed = _resolve(flag_value, config, "seed")
    if seed is None:
        raise UsageError("a --seed is required (or a \"seed\" entry in --config)")
    return int(seed)


def _parse_int_range(text: str) -> list[int]:
    """Accept "2..8", "2,3,5", or "4"."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        if "," in text:
            return [int(part) for part in text.split(",")]
        return [int(text)]
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as an integer range") from None


def _prep_config(args, config: RunConfig) -> textprep.PrepConfig:
    lingo_path = _resolve(getattr(args, "lingo", None), config, "lingo")
    stop_path = _resolve(getattr(args, "stopwords", None), config, "stopwords")
    lex_path = _resolve(getattr(args, "lexicon", None), config, "lexicon")
    return textprep.PrepConfig(
        lingo=textprep.LingoTable.from_file(lingo_path)
        if lingo_path
        else textprep.LingoTable.default(),
        stopwords=textprep.load_stopwords(stop_path)
        if stop_path
        else textprep.default_stopwords(),
        lemma_lexicon=textprep.load_lemma_lexicon(lex_path) if lex_path else {},
    )


def _load_tokenized(path: str) -> Corpus:
    loaded = load_jsonl(path, require_lang=None)
    return loaded


def _write_clusters(clustering: Clustering, path: str | Path) -> None:
    lines = [f"# k={clustering.k}", "doc_id,cluster"]
    for doc_id, cluster in clustering.assignment.items():
        lines.append(f"{doc_id},{cluster}")
    for doc_id in clustering.excluded_ids:
        lines.append(f"{doc_id},")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_clusters(path: str | Path) -> Clustering:
    assignment: dict[str, int] = {}
    excluded: list[str] = []
    k = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.startswith("k="):
                    k = int(body.removeprefix("k="))
                continue
            if line == "doc_id,cluster":
                continue
            doc_id, _, cluster = line.rpartition(",")
            if not doc_id:
                raise ValueError(f"{path}: line {lineno}: expected doc_id,cluster")
            if cluster:
                assignment[doc_id] = int(cluster)
            else:
                excluded.append(doc_id)
    if k is None:
        k = max(assignment.values(), default=0) + 1
    return Clustering(assignment=assignment, k=k, excluded_ids=tuple(excluded))


def _read_labels(path: str | Path) -> dict[str, ClassLabel]:
    """Pull id -> label pairs out of any JSONL with "id" and "label" fields."""
    labels: dict[str, ClassLabel] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
            if "label" in record and record["label"] is not None:
                labels[str(record["id"])] = ClassLabel.from_name(record["label"])
    return labels


def _write_top_words(model: topics.LdaModel, n: int, path: str | Path) -> None:
    lines = ["topic,rank,term,phi"]
    for topic in range(model.config.k):
        for rank, (term, phi) in enumerate(topics.top_words(model, topic, n), start=1):
            lines.append(f"{topic},{rank},{term},{phi:.6f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_sweep_csv(results, path: str | Path) -> None:
    lines = ["k,intra,inter"]
    for res in results:
        inter = "" if res.inter is None else f"{res.inter:.6f}"
        lines.append(f"{res.k},{res.intra:.6f},{inter}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_ingest(args, config: RunConfig) -> int:
    keys_path = _resolve(args.keywords, config, "keywords")
    keys = KeywordSet.from_file(keys_path) if keys_path else KeywordSet.default()
    lang = _resolve(args.lang, config, "lang", "pt") or None
    corpus = load_jsonl(args.infile, require_lang=lang)
    kept = keyword_filter(corpus, keys)
    save_jsonl(kept, args.outfile)
    print(f"kept {len(kept)}/{len(corpus)} documents -> {args.outfile}")
    return 0


def _cmd_prep(args, config: RunConfig) -> int:
    cfg = _prep_config(args, config)
    corpus = load_jsonl(args.infile, require_lang=None)
    prepped = textprep.preprocess(corpus, cfg)
    if args.prune or config.get("prune"):
        top_n = int(_resolve(args.top_n, config, "prune_top_n", cfg.prune_top_n))
        min_df = int(_resolve(args.min_df, config, "prune_min_df", cfg.prune_min_df))
        prepped, report = textprep.prune_vocabulary(prepped, top_n, min_df)
        print(
            f"pruned {len(report.removed_frequent)} frequent "
            f"and {len(report.removed_rare)} rare terms"
        )
        for term, count in report.removed_frequent:
            print(f"  frequent: {term} ({count})")
    save_jsonl(prepped, args.outfile)
    if args.vocab:
        build_vocabulary(prepped).save(args.vocab)
        print(f"vocabulary -> {args.vocab}")
    print(f"preprocessed {len(prepped)} documents -> {args.outfile}")
    return 0


def _cmd_train_nb(args, config: RunConfig) -> int:
    corpus = _load_tokenized(args.infile)
    smoothing = float(_resolve(args.smoothing, config, "smoothing", 1.0))
    vocab = build_vocabulary(corpus)
    model = classifier.train(corpus, vocab, smoothing)
    classifier.save_model(model, args.model)
    print(f"trained on {len(corpus)} documents, |V|={len(vocab)} -> {args.model}")
    return 0


def _cmd_predict(args, config: RunConfig) -> int:
    model = classifier.load_model(args.model)
    corpus = _load_tokenized(args.infile)
    with open(args.outfile, "w", encoding="utf-8") as fh:
        for doc in corpus:
            label, posterior = classifier.predict(model, doc)
            record = {
                "id": doc.id,
                "label": label.value,
                "posterior": {c.value: posterior[c] for c in model.classes},
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    print(f"predicted {len(corpus)} documents -> {args.outfile}")
    return 0


def _cmd_eval(args, config: RunConfig) -> int:
    model = classifier.load_model(args.model)
    corpus = _load_tokenized(args.infile)
    report = classifier.evaluate(model, corpus)
    report.save_csv(args.outfile)
    print(f"accuracy {report.accuracy:.4f} on {report.n_docs} documents -> {args.outfile}")
    return 0


def _cmd_kfold(args, config: RunConfig) -> int:
    corpus = _load_tokenized(args.infile)
    seed = _require_seed(args.seed, config)
    k = int(_resolve(args.k, config, "kfold_k", 10))
    smoothing = float(_resolve(args.smoothing, config, "smoothing", 1.0))
    report = classifier.kfold(corpus, k, seed, smoothing)
    report.save_csv(args.outfile)
    print(f"{k}-fold accuracy {report.accuracy:.4f} -> {args.outfile}")
    return 0


def _lda_config(args, config: RunConfig, k: int, seed: int) -> LdaConfig:
    alpha = _resolve(args.alpha, config, "alpha")
    return LdaConfig(
        k=k,
        alpha=float(alpha) if alpha is not None else None,
        beta=float(_resolve(args.beta, config, "beta", 0.01)),
        iterations=int(_resolve(args.iterations, config, "iterations", 1000)),
        seed=seed,
    )


def _cmd_lda(args, config: RunConfig) -> int:
    corpus = _load_tokenized(args.infile)
    seed = _require_seed(args.seed, config)
    k = int(_resolve(args.k, config, "k", 4))
    vocab = Vocabulary.load(args.vocab) if args.vocab else build_vocabulary(corpus)
    cfg = _lda_config(args, config, k, seed)
    model = topics.fit_lda(corpus, vocab, cfg)
    topics.save_lda(model, args.model)
    print(f"fitted k={k} on {len(model.doc_ids)} documents -> {args.model}")
    if args.clusters:
        _write_clusters(topics.hard_assign(model), args.clusters)
        print(f"clusters -> {args.clusters}")
    if args.top_words:
        _write_top_words(model, int(_resolve(args.top_n, config, "top_n", 10)), args.top_words)
        print(f"top words -> {args.top_words}")
    return 0


def _cmd_sweep(args, config: RunConfig) -> int:
    corpus = _load_tokenized(args.infile)
    seed = _require_seed(args.seed, config)
    k_values = _parse_int_range(str(_resolve(args.k, config, "k_sweep", "2..8")))
    vocab = Vocabulary.load(args.vocab) if args.vocab else build_vocabulary(corpus)
    base = _lda_config(args, config, k=max(k_values), seed=seed)
    threads = int(_resolve(args.threads, config, "threads", 1))
    results = topics.sweep(corpus, vocab, k_values, base, threads=threads)
    _write_sweep_csv(results, args.outfile)
    for res in results:
        inter = "n/a" if res.inter is None else f"{res.inter:.4f}"
        print(f"k={res.k}: intra {res.intra:.4f}, inter {inter}")
    print(f"sweep -> {args.outfile}")
    return 0


def _cmd_cluster_sim(args, config: RunConfig) -> int:
    corpus = _load_tokenized(args.infile)
    clustering = _read_clusters(args.clusters)
    vocab = Vocabulary.load(args.vocab) if args.vocab else build_vocabulary(corpus)
    vectors = {doc.id: tfidf(doc.tokens, vocab) for doc in corpus}
    include_self = not args.exclude_self
    matrix = clusteranalysis.similarity_matrix(clustering, vectors, include_self)
    clusteranalysis.write_similarity_csv(matrix, args.outfile)
    intra, inter = clusteranalysis.summarize(matrix)
    inter_text = "n/a" if inter is None else f"{inter:.4f}"
    print(f"intra {intra:.4f}, inter {inter_text} -> {args.outfile}")
    if args.svg:
        clusteranalysis.write_heatmap_svg(matrix, args.svg)
        print(f"heatmap -> {args.svg}")
    return 0


def _cmd_crosstab(args, config: RunConfig) -> int:
    labels = _read_labels(args.labels)
    clustering = _read_clusters(args.clusters)
    tab = clusteranalysis.crosstab(labels, clustering)
    clusteranalysis.write_cluster_profile_csv(tab, args.profile)
    clusteranalysis.write_class_scatter_csv(tab, args.scatter)
    if args.counts:
        clusteranalysis.write_counts_csv(tab, args.counts)
    print(f"crosstab over {tab.total} documents -> {args.profile}, {args.scatter}")
    return 0


def _cmd_synth(args, config: RunConfig) -> int:
    seed = _require_seed(args.seed, config)
    spec = synthmod.load_spec(args.spec) if args.spec else synthmod.default_spec()
    overrides = {"seed": seed}
    if args.docs_per_class is not None:
        overrides["docs_per_class"] = args.docs_per_class
    if args.mix is not None:
        overrides["mix"] = args.mix
    if args.doc_len is not None:
        values = _parse_int_range(args.doc_len)
        overrides["doc_len"] = (min(values), max(values))
    spec = dc_replace(spec, **overrides)
    corpus = synthmod.generate(spec)
    save_jsonl(corpus, args.outfile)
    print(f"generated {len(corpus)} documents -> {args.outfile}")
    return 0


def _cmd_report(args, config: RunConfig) -> int:
    corpus = _load_tokenized(args.infile)
    seed = _require_seed(args.seed, config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab = build_vocabulary(corpus)
    smoothing = float(_resolve(args.smoothing, config, "smoothing", 1.0))
    kfold_k = int(_resolve(args.kfold_k, config, "kfold_k", 10))

    report = classifier.kfold(corpus, kfold_k, seed, smoothing)
    report.save_csv(out_dir / "metrics.csv")
    print(f"{kfold_k}-fold accuracy {report.accuracy:.4f} -> metrics.csv")

    model = classifier.train(corpus, vocab, smoothing)
    classifier.save_model(model, out_dir / "model.json")
    predicted: dict[str, ClassLabel] = {}
    with open(out_dir / "predictions.jsonl", "w", encoding="utf-8") as fh:
        for doc in corpus:
            label, posterior = classifier.predict(model, doc)
            predicted[doc.id] = label
            record = {
                "id": doc.id,
                "label": label.value,
                "posterior": {c.value: posterior[c] for c in model.classes},
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    print("trained full model -> model.json, predictions.jsonl")

    k_values = _parse_int_range(str(_resolve(args.k, config, "k_sweep", "2..8")))
    base = _lda_config(args, config, k=max(k_values), seed=seed)
    threads = int(_resolve(args.threads, config, "threads", 1))
    results = topics.sweep(corpus, vocab, k_values, base, threads=threads)
    _write_sweep_csv(results, out_dir / "sweep.csv")
    vectors = {doc.id: tfidf(doc.tokens, vocab) for doc in corpus}
    for res in results:
        matrix = clusteranalysis.similarity_matrix(res.clustering, vectors)
        clusteranalysis.write_heatmap_svg(matrix, out_dir / f"heatmap_k{res.k}.svg")
    print(f"sweep over k={k_values[0]}..{k_values[-1]} -> sweep.csv, heatmaps")

    report_k = int(_resolve(args.report_k, config, "report_k", 4))
    chosen = next((res for res in results if res.k == report_k), None)
    if chosen is None:
        raise UsageError(f"--report-k {report_k} is not among the swept k values")
    topics.save_lda(chosen.model, out_dir / f"lda_k{report_k}.json")
    _write_clusters(chosen.clustering, out_dir / f"clusters_k{report_k}.csv")
    _write_top_words(chosen.model, 10, out_dir / f"top_words_k{report_k}.csv")
    tab = clusteranalysis.crosstab(predicted, chosen.clustering)
    clusteranalysis.write_cluster_profile_csv(tab, out_dir / f"cluster_profile_k{report_k}.csv")
    clusteranalysis.write_class_scatter_csv(tab, out_dir / f"class_scatter_k{report_k}.csv")
    clusteranalysis.write_counts_csv(tab, out_dir / f"crosstab_counts_k{report_k}.csv")
    print(f"crosstab at k={report_k} -> cluster_profile, class_scatter, counts")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epimine",
        description="Classify and cluster epidemic-related short texts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON file with default option values")
        return p

    p = add("ingest", _cmd_ingest, "filter raw tweet JSONL by language and keywords")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--keywords", help="keyword list file (default: bundled)")
    p.add_argument("--lang", help="required language tag, empty to disable (default pt)")

    p = add("prep", _cmd_prep, "normalize, tokenize, lemmatize, drop stopwords")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--lingo", help="abbreviation table TSV (default: bundled)")
    p.add_argument("--stopwords", help="stopword list (default: bundled)")
    p.add_argument("--lexicon", help="lemma lexicon TSV (default: none)")
    p.add_argument("--prune", action="store_true", default=None,
                   help="drop most frequent and too-rare terms")
    p.add_argument("--top-n", dest="top_n", type=int, help="frequent terms to drop")
    p.add_argument("--min-df", dest="min_df", type=int, help="minimum document frequency")
    p.add_argument("--vocab", help="also write the vocabulary TSV here")

    p = add("train-nb", _cmd_train_nb, "train the Naive Bayes classifier")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--smoothing", type=float)

    p = add("predict", _cmd_predict, "classify preprocessed documents")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)

    p = add("eval", _cmd_eval, "score a model against gold labels")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)

    p = add("kfold", _cmd_kfold, "stratified cross validation")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--smoothing", type=float)

    p = add("lda", _cmd_lda, "fit a topic model by collapsed Gibbs sampling")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--vocab", help="vocabulary TSV (default: built from input)")
    p.add_argument("--clusters", help="also write hard assignments CSV here")
    p.add_argument("--top-words", dest="top_words", help="also write top-words CSV here")
    p.add_argument("--top-n", dest="top_n", type=int)

    p = add("sweep", _cmd_sweep, "fit a range of k values and compare similarities")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--k", help="range like 2..8 (default)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--vocab")
    p.add_argument("--threads", type=int)

    p = add("cluster-sim", _cmd_cluster_sim, "intra/inter cluster similarity matrix")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--clusters", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--vocab")
    p.add_argument("--svg", help="also write a heatmap SVG here")
    p.add_argument("--exclude-self", dest="exclude_self", action="store_true",
                   help="average distinct pairs only within a cluster")

    p = add("crosstab", _cmd_crosstab, "class-vs-cluster contingency tables")
    p.add_argument("--labels", required=True, help="JSONL with id and label fields")
    p.add_argument("--clusters", required=True)
    p.add_argument("--profile", required=True, help="per-cluster class distribution CSV")
    p.add_argument("--scatter", required=True, help="per-class scattering CSV")
    p.add_argument("--counts", help="raw counts CSV")

    p = add("synth", _cmd_synth, "generate a synthetic labeled corpus")
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--spec", help="SynthSpec JSON (default: built-in four classes)")
    p.add_argument("--docs-per-class", dest="docs_per_class", type=int)
    p.add_argument("--mix", type=float)
    p.add_argument("--doc-len", dest="doc_len", help="token length range like 5..15")
    p.add_argument("--seed", type=int)

    p = add("report", _cmd_report, "run the full pipeline and bundle all artifacts")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--k", help="sweep range like 2..8 (default)")
    p.add_argument("--report-k", dest="report_k", type=int,
                   help="k whose clustering feeds the crosstab (default 4)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--kfold-k", dest="kfold_k", type=int)
    p.add_argument("--smoothing", type=float)
    p.add_argument("--threads", type=int)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        config = RunConfig.load(args.config)
        return args.func(args, config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
