"""End-to-end command-line tests driving main() in-process."""

import json

import pytest

from epimine import classifier
from epimine.cli import main
from epimine.corpus import load_jsonl


def run(*argv):
    return main(list(argv))


def make_synth(tmp_path, name="corpus.jsonl", docs=12, seed=1, extra=()):
    path = tmp_path / name
    code = run(
        "synth", "--out", str(path), "--docs-per-class", str(docs),
        "--seed", str(seed), *extra,
    )
    assert code == 0
    return path


class TestExitCodes:
    def test_help_exits_zero(self, capsys):
        assert run("--help") == 0
        assert "epimine" in capsys.readouterr().out

    def test_no_subcommand_is_usage_error(self):
        assert main([]) == 1

    def test_unknown_flag_is_usage_error(self, tmp_path):
        assert run("synth", "--out", str(tmp_path / "x.jsonl"), "--frobnicate") == 1

    def test_missing_seed_is_usage_error(self, tmp_path, capsys):
        corpus = make_synth(tmp_path)
        code = run("kfold", "--in", str(corpus), "--out", str(tmp_path / "m.csv"))
        assert code == 1
        assert "seed" in capsys.readouterr().err

    def test_missing_input_file_is_io_error(self, tmp_path):
        code = run(
            "kfold", "--in", str(tmp_path / "nope.jsonl"),
            "--out", str(tmp_path / "m.csv"), "--seed", "0",
        )
        assert code == 3

    def test_malformed_jsonl_is_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "a", "text": "x"}\nnot json\n', encoding="utf-8")
        code = run(
            "kfold", "--in", str(bad), "--out", str(tmp_path / "m.csv"), "--seed", "0",
        )
        assert code == 2
        assert "line 2" in capsys.readouterr().err

    def test_unlabeled_corpus_is_data_error(self, tmp_path):
        plain = tmp_path / "plain.jsonl"
        plain.write_text(
            '{"id": "a", "text": "x", "tokens": ["x"]}\n', encoding="utf-8"
        )
        code = run("train-nb", "--in", str(plain), "--model", str(tmp_path / "m.json"))
        assert code == 2


class TestIngest:
    def _raw(self, tmp_path):
        path = tmp_path / "raw.jsonl"
        rows = [
            {"id": "1", "text": "surto de dengue na cidade", "lang": "pt"},
            {"id": "2", "text": "dengue outbreak downtown", "lang": "en"},
            {"id": "3", "text": "bom dia a todos", "lang": "pt"},
        ]
        path.write_text(
            "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows),
            encoding="utf-8",
        )
        return path

    def test_language_and_keyword_filter(self, tmp_path, capsys):
        out = tmp_path / "kept.jsonl"
        assert run("ingest", "--in", str(self._raw(tmp_path)), "--out", str(out)) == 0
        assert "kept 1/2" in capsys.readouterr().out
        kept = load_jsonl(out, require_lang=None)
        assert [d.id for d in kept] == ["1"]

    def test_empty_lang_disables_language_filter(self, tmp_path):
        out = tmp_path / "kept.jsonl"
        code = run(
            "ingest", "--in", str(self._raw(tmp_path)), "--out", str(out), "--lang", "",
        )
        assert code == 0
        kept = load_jsonl(out, require_lang=None)
        assert [d.id for d in kept] == ["1", "2"]


class TestPrep:
    def test_pipeline_output(self, tmp_path):
        raw = tmp_path / "raw.jsonl"
        raw.write_text(
            json.dumps(
                {"id": "t1", "text": "RT @ana: 120 casos de dengue http://x.co/a"}
            )
            + "\n",
            encoding="utf-8",
        )
        out = tmp_path / "prep.jsonl"
        lexicon = "tests/fixtures/lemma_lexicon_pt.tsv"
        code = run(
            "prep", "--in", str(raw), "--out", str(out), "--lexicon", lexicon,
        )
        assert code == 0
        doc = load_jsonl(out, require_lang=None)[0]
        assert "mention" in doc.tokens
        assert "number" in doc.tokens
        assert "url" in doc.tokens
        assert "caso" in doc.tokens  # lemmatized
        assert "de" not in doc.tokens  # stopword
        assert "casos" not in doc.tokens

    def test_prune_and_vocab(self, tmp_path):
        raw = tmp_path / "raw.jsonl"
        rows = [
            {"id": "a", "text": "dengue zika febre"},
            {"id": "b", "text": "dengue zika"},
            {"id": "c", "text": "dengue unicum"},
        ]
        raw.write_text(
            "".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8"
        )
        out = tmp_path / "prep.jsonl"
        vocab_path = tmp_path / "vocab.tsv"
        code = run(
            "prep", "--in", str(raw), "--out", str(out),
            "--prune", "--top-n", "1", "--min-df", "2",
            "--vocab", str(vocab_path),
        )
        assert code == 0
        tokens = {t for d in load_jsonl(out, require_lang=None) for t in d.tokens}
        assert "dengue" not in tokens  # most frequent dropped
        assert "unicum" not in tokens  # df 1 < 2 dropped
        assert "febre" not in tokens  # df 1 < 2 dropped
        assert tokens == {"zika"}
        from epimine.vectorspace import Vocabulary

        vocab = Vocabulary.load(vocab_path)
        assert set(vocab.index) == {"zika"}


class TestClassifierPipeline:
    def test_train_predict_eval_match_library(self, tmp_path, capsys):
        corpus_path = make_synth(tmp_path)
        model_path = tmp_path / "model.json"
        pred_path = tmp_path / "pred.jsonl"
        metrics_path = tmp_path / "metrics.csv"

        assert run("train-nb", "--in", str(corpus_path), "--model", str(model_path)) == 0
        assert run(
            "predict", "--model", str(model_path), "--in", str(corpus_path),
            "--out", str(pred_path),
        ) == 0
        assert run(
            "eval", "--model", str(model_path), "--in", str(corpus_path),
            "--out", str(metrics_path),
        ) == 0

        # CLI output equals the in-process pipeline
        corpus = load_jsonl(corpus_path, require_lang=None)
        from epimine.vectorspace import build_vocabulary

        model = classifier.train(corpus, build_vocabulary(corpus), 1.0)
        expected = {doc.id: classifier.predict(model, doc)[0].value for doc in corpus}
        got = {}
        with open(pred_path, encoding="utf-8") as fh:
            for line in fh:
                record = json.loads(line)
                got[record["id"]] = record["label"]
        assert got == expected

        header = metrics_path.read_text(encoding="utf-8").splitlines()[0]
        assert header == "class,precision,recall,F,accuracy"

    def test_predict_empty_input(self, tmp_path):
        corpus_path = make_synth(tmp_path)
        model_path = tmp_path / "model.json"
        assert run("train-nb", "--in", str(corpus_path), "--model", str(model_path)) == 0
        empty = tmp_path / "empty.jsonl"
        empty.write_text("", encoding="utf-8")
        out = tmp_path / "pred.jsonl"
        assert run(
            "predict", "--model", str(model_path), "--in", str(empty), "--out", str(out),
        ) == 0
        assert out.read_text(encoding="utf-8") == ""

    def test_kfold_writes_metrics(self, tmp_path, capsys):
        corpus_path = make_synth(tmp_path, docs=10)
        out = tmp_path / "metrics.csv"
        code = run(
            "kfold", "--in", str(corpus_path), "--out", str(out), "--seed", "3", "--k", "5",
        )
        assert code == 0
        assert "5-fold" in capsys.readouterr().out
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "class,precision,recall,F,accuracy"
        assert len(lines) == 7  # header, 4 classes, macro, micro


class TestConfigPrecedence:
    def test_flag_beats_config_beats_default(self, tmp_path, capsys):
        corpus_path = make_synth(tmp_path, docs=10)
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"kfold_k": 3, "seed": 5}), encoding="utf-8")
        out = tmp_path / "m.csv"

        # config supplies k and seed
        assert run(
            "kfold", "--in", str(corpus_path), "--out", str(out),
            "--config", str(config),
        ) == 0
        assert "3-fold" in capsys.readouterr().out

        # flag wins over config
        assert run(
            "kfold", "--in", str(corpus_path), "--out", str(out),
            "--config", str(config), "--k", "2",
        ) == 0
        assert "2-fold" in capsys.readouterr().out

    def test_config_must_be_object(self, tmp_path):
        corpus_path = make_synth(tmp_path)
        config = tmp_path / "config.json"
        config.write_text("[1, 2]", encoding="utf-8")
        code = run(
            "kfold", "--in", str(corpus_path), "--out", str(tmp_path / "m.csv"),
            "--config", str(config),
        )
        assert code == 2


class TestTopicPipeline:
    def test_lda_sweep_cluster_sim_crosstab(self, tmp_path):
        corpus_path = make_synth(tmp_path, docs=8)
        model_path = tmp_path / "lda.json"
        clusters_path = tmp_path / "clusters.csv"
        top_path = tmp_path / "top.csv"

        code = run(
            "lda", "--in", str(corpus_path), "--model", str(model_path),
            "--k", "2", "--iterations", "30", "--seed", "7",
            "--clusters", str(clusters_path), "--top-words", str(top_path),
        )
        assert code == 0
        saved = json.loads(model_path.read_text(encoding="utf-8"))
        assert saved["config"]["k"] == 2
        clusters_text = clusters_path.read_text(encoding="utf-8")
        assert clusters_text.startswith("# k=2\ndoc_id,cluster\n")
        assert top_path.read_text(encoding="utf-8").startswith("topic,rank,term,phi\n")

        sweep_path = tmp_path / "sweep.csv"
        code = run(
            "sweep", "--in", str(corpus_path), "--out", str(sweep_path),
            "--k", "2..3", "--iterations", "30", "--seed", "7",
        )
        assert code == 0
        lines = sweep_path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "k,intra,inter"
        assert [row.split(",")[0] for row in lines[1:]] == ["2", "3"]

        sim_path = tmp_path / "sim.csv"
        svg_path = tmp_path / "heat.svg"
        code = run(
            "cluster-sim", "--in", str(corpus_path), "--clusters", str(clusters_path),
            "--out", str(sim_path), "--svg", str(svg_path),
        )
        assert code == 0
        assert sim_path.read_text(encoding="utf-8").startswith("cluster,")
        assert svg_path.read_text(encoding="utf-8").startswith("<svg")

        profile_path = tmp_path / "profile.csv"
        scatter_path = tmp_path / "scatter.csv"
        code = run(
            "crosstab", "--labels", str(corpus_path), "--clusters", str(clusters_path),
            "--profile", str(profile_path), "--scatter", str(scatter_path),
        )
        assert code == 0
        assert profile_path.read_text(encoding="utf-8").splitlines()[0].startswith(
            "class,cluster_"
        )
        assert scatter_path.read_text(encoding="utf-8").splitlines()[0].endswith(",Total")


class TestDeterminism:
    def test_synth_reruns_are_byte_identical(self, tmp_path):
        a = make_synth(tmp_path, name="a.jsonl", seed=4)
        b = make_synth(tmp_path, name="b.jsonl", seed=4)
        assert a.read_bytes() == b.read_bytes()

    def test_kfold_reruns_are_byte_identical(self, tmp_path):
        corpus_path = make_synth(tmp_path, docs=10)
        outs = []
        for name in ("m1.csv", "m2.csv"):
            out = tmp_path / name
            assert run(
                "kfold", "--in", str(corpus_path), "--out", str(out),
                "--seed", "9", "--k", "5",
            ) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_lda_reruns_are_byte_identical(self, tmp_path):
        corpus_path = make_synth(tmp_path, docs=8)
        models = []
        for name in ("l1.json", "l2.json"):
            path = tmp_path / name
            assert run(
                "lda", "--in", str(corpus_path), "--model", str(path),
                "--k", "2", "--iterations", "25", "--seed", "2",
            ) == 0
            models.append(path.read_bytes())
        assert models[0] == models[1]


class TestReport:
    def test_bundles_all_artifacts(self, tmp_path):
        corpus_path = make_synth(tmp_path, docs=10)
        out_dir = tmp_path / "report"
        code = run(
            "report", "--in", str(corpus_path), "--out-dir", str(out_dir),
            "--seed", "5", "--k", "2..3", "--report-k", "2",
            "--iterations", "30", "--kfold-k", "2",
        )
        assert code == 0
        expected = [
            "metrics.csv",
            "model.json",
            "predictions.jsonl",
            "sweep.csv",
            "heatmap_k2.svg",
            "heatmap_k3.svg",
            "lda_k2.json",
            "clusters_k2.csv",
            "top_words_k2.csv",
            "cluster_profile_k2.csv",
            "class_scatter_k2.csv",
            "crosstab_counts_k2.csv",
        ]
        for name in expected:
            assert (out_dir / name).is_file(), name

    def test_report_k_outside_sweep_is_usage_error(self, tmp_path):
        corpus_path = make_synth(tmp_path, docs=8)
        code = run(
            "report", "--in", str(corpus_path), "--out-dir", str(tmp_path / "r"),
            "--seed", "5", "--k", "2..3", "--report-k", "7", "--iterations", "10",
            "--kfold-k", "2",
        )
        assert code == 1
