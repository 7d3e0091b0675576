import math

import numpy as np
import pytest

from sparsetext.corpus import Corpus
from sparsetext.errors import ConfigError
from sparsetext.harness import (ALGORITHMS, CellResult, ExperimentConfig, RunRecord,
                                config_from_mapping, emit_tables, fit_model,
                                generate_synthetic_corpus, markdown_table,
                                parse_config_text, predict_matrix, results_csv,
                                run_experiment)
from sparsetext.metrics import MetricsReport
from sparsetext.nonparametric import TreeSplit
from sparsetext.parametric import nb_fit
from sparsetext.vectorize import build_vocabulary, tfidf_transform

from oracles import exhaustive_root_split, tfidf_by_hand


def small_config(**kw):
    cfg = ExperimentConfig(dimensions=(50,), algorithms=("nb",), seed=3)
    return config_from_mapping(kw, cfg)


class TestConfig:
    def test_parse_text(self):
        text = "# sweep\ndims = 50,100\nalgos=nb,svm\nsvm.C=10\nseed=7\n\ntest-fraction=0.25\n"
        cfg = config_from_mapping(parse_config_text(text))
        assert cfg.dimensions == (50, 100)
        assert cfg.algorithms == ("nb", "svm")
        assert cfg.hyperparams["svm"]["C"] == 10
        assert cfg.seed == 7 and cfg.test_fraction == 0.25
        # untouched defaults survive
        assert cfg.hyperparams["svm"]["kernel"] == "rbf"
        assert cfg.hyperparams["lda"]["ridge"] == 1e-3

    def test_overrides_apply_on_base(self):
        base = config_from_mapping({"seed": "1", "dims": "10,20"})
        cfg = config_from_mapping({"seed": 5, "dims": None}, base)
        assert cfg.seed == 5 and cfg.dimensions == (10, 20)
        assert base.seed == 1

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            config_from_mapping({"svm.nope": "1"})
        with pytest.raises(ConfigError):
            config_from_mapping({"colour": "red"})

    def test_bad_line(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config_text("seed=1\njust words\n")

    @pytest.mark.parametrize("values", [{"dims": "100,50"}, {"dims": "50,50"},
                                        {"algos": "nb,knn"}, {"test_fraction": "1.0"}])
    def test_validate(self, values):
        with pytest.raises(ConfigError):
            config_from_mapping(values).validate()

    def test_subsample_floor(self):
        with pytest.raises(ConfigError):
            config_from_mapping({"subsample": "7"}).validate(n_classes=4)


class TestSynthetic:
    def test_counts(self):
        corpus = generate_synthetic_corpus(25, 4, seed=1)
        assert len(corpus) == 100
        assert corpus.class_counts().tolist() == [25] * 4
        assert corpus.labels == ("class_0", "class_1", "class_2", "class_3")

    def test_noise_free_documents_use_own_keywords(self):
        corpus = generate_synthetic_corpus(10, 3, vocab_per_class=5, noise_rate=0.0, seed=2)
        for doc in corpus.documents:
            assert 10 <= len(doc.tokens) <= 30
            assert all(t.startswith(f"c{doc.label}k") for t in doc.tokens)

    def test_deterministic(self):
        a = generate_synthetic_corpus(5, 2, seed=4)
        b = generate_synthetic_corpus(5, 2, seed=4)
        assert [d.tokens for d in a.documents] == [d.tokens for d in b.documents]

    def test_nb_hand_oracle_on_ten_doc_slice(self):
        full = generate_synthetic_corpus(5, 2, vocab_per_class=4, noise_rate=0.2, seed=11)
        slice_ = Corpus(full.documents[:10], full.labels)
        vocab = build_vocabulary(slice_, 100)
        X = tfidf_transform(slice_, vocab)
        model = nb_fit(X)

        dense = tfidf_by_hand([list(d.tokens) for d in slice_.documents], vocab.terms)
        y = [d.label for d in slice_.documents]
        V = len(vocab)
        for c in range(2):
            rows = [dense[i] for i in range(10) if y[i] == c]
            total = sum(sum(r) for r in rows)
            assert model.log_priors[c] == pytest.approx(math.log(len(rows) / 10), abs=1e-12)
            for j in range(V):
                expect = math.log((1 + sum(r[j] for r in rows)) / (V + total))
                assert model.log_likelihoods[c, j] == pytest.approx(expect, abs=1e-12)
        # keywords dominate, so the hand model classifies its own training slice perfectly
        assert predict_matrix(model, X).tolist() == y

    def test_noise_free_tree_root_matches_exhaustive(self):
        full = generate_synthetic_corpus(4, 2, vocab_per_class=3, noise_rate=0.0, seed=5)
        vocab = build_vocabulary(full, 6)
        X = tfidf_transform(full, vocab)
        model = fit_model("tree", X, {"max_depth": 40, "min_samples_split": 2,
                                      "min_impurity_decrease": 0.0}, 0)
        best = exhaustive_root_split(X.to_dense(), X.labels.tolist())
        assert isinstance(model.root, TreeSplit)
        assert (model.root.feature, model.root.threshold) == best[:2]
        assert np.all(predict_matrix(model, X) == X.labels)


class TestRunExperiment:
    corpus = generate_synthetic_corpus(25, 4, seed=0)

    def test_single_cell(self):
        record = run_experiment(small_config(), self.corpus)
        assert list(record.cells) == [(50, "nb")]
        assert record.cell(50, "nb").ok

    def test_one_cell_per_pair(self):
        cfg = small_config(dims="10,30", algos="lda,nb,tree,svm")
        record = run_experiment(cfg, self.corpus)
        assert set(record.cells) == {(d, a) for d in (10, 30) for a in ALGORITHMS}
        for cell in record.cells.values():
            assert cell.report.support.sum() == 20

    def test_determinism(self):
        cfg = small_config(dims="10,30", algos="nb,tree,svm")
        a = results_csv(run_experiment(cfg, self.corpus))
        b = results_csv(run_experiment(cfg, self.corpus))
        assert a == b

    def test_workers_do_not_change_results(self):
        cfg = small_config(dims="10,30", algos="lda,nb,tree,svm")
        a = results_csv(run_experiment(cfg, self.corpus))
        b = results_csv(run_experiment(config_from_mapping({"workers": 4}, cfg), self.corpus))
        assert a == b

    def test_cell_independence(self):
        both = run_experiment(small_config(dims="30", algos="nb,svm"), self.corpus)
        alone = run_experiment(small_config(dims="30", algos="svm"), self.corpus)
        assert both.cell(30, "svm").report.macro == alone.cell(30, "svm").report.macro

    def test_failed_cell_recorded(self, tmp_path):
        cfg = small_config(dims="5,20", algos="lda,nb")
        cfg.hyperparams["lda"]["max_dense_dim"] = 10
        record = run_experiment(cfg, self.corpus)
        assert [(c.dimension, c.algorithm) for c in record.failed] == [(20, "lda")]
        assert "MemoryError" in record.cell(20, "lda").error
        assert record.cell(20, "nb").ok
        emit_tables(record, tmp_path)
        table = (tmp_path / "macro_precision.md").read_text().splitlines()
        assert table[-1].startswith("| 20 | — |")
        assert "20,lda,error" in (tmp_path / "results.csv").read_text()

    def test_save_models(self, tmp_path):
        cfg = small_config(dims="10", algos="nb,tree", out=str(tmp_path), save_models=True)
        run_experiment(cfg, self.corpus)
        assert sorted(p.name for p in (tmp_path / "models").iterdir()) == \
            ["nb_10.json", "tree_10.json"]


# reference grid values, used only to check rendering
REF_MACRO_PRECISION = {
    50: {"lda": 0.89, "nb": 0.79, "tree": 0.89, "svm": 0.90},
    100: {"lda": 0.90, "nb": 0.83, "tree": 0.89, "svm": 0.92},
    500: {"lda": 0.91, "nb": 0.85, "tree": 0.91, "svm": 0.93},
    1000: {"lda": 0.92, "nb": 0.86, "tree": 0.91, "svm": 0.93},
    5000: {"lda": 0.92, "nb": 0.86, "tree": 0.92, "svm": 0.93},
}
REF_WEIGHTED_RECALL = {
    50: {"lda": 0.88, "nb": 0.80, "tree": 0.89, "svm": 0.90},
    100: {"lda": 0.89, "nb": 0.84, "tree": 0.89, "svm": 0.91},
    500: {"lda": 0.91, "nb": 0.85, "tree": 0.91, "svm": 0.93},
    1000: {"lda": 0.91, "nb": 0.86, "tree": 0.91, "svm": 0.93},
    5000: {"lda": 0.92, "nb": 0.87, "tree": 0.92, "svm": 0.93},
}


def reference_record():
    dims = tuple(REF_MACRO_PRECISION)
    record = RunRecord({}, ("a", "b"), dims, ALGORITHMS)
    empty = np.zeros(2)
    for d in dims:
        for a in ALGORITHMS:
            macro = {"precision": REF_MACRO_PRECISION[d][a], "recall": 0.0, "f1": 0.0}
            weighted = {"precision": 0.0, "recall": REF_WEIGHTED_RECALL[d][a], "f1": 0.0}
            report = MetricsReport(("a", "b"), empty, empty, empty, np.array([1, 1]),
                                   macro, weighted)
            record.cells[(d, a)] = CellResult(d, a, d, report)
    return record


class TestEmitTables:
    def test_shape_five_by_four(self, tmp_path):
        record = reference_record()
        paths = emit_tables(record, tmp_path)
        names = sorted(p.name for p in paths)
        assert names == sorted(["macro_precision.md", "weighted_precision.md",
                                "macro_recall.md", "weighted_recall.md", "f1.md",
                                "results.csv", "timings.csv"])
        lines = (tmp_path / "macro_precision.md").read_text().strip().splitlines()
        body = [ln for ln in lines if ln.startswith("| ") and ln[2].isdigit()]
        assert len(body) == 5
        assert all(len(ln.strip("|").split("|")) == 1 + 4 for ln in body)

    def test_reference_values_render(self):
        record = reference_record()
        macro_p = markdown_table(record, "macro", "precision").splitlines()
        assert macro_p[0] == "| Dimensions | LDA | Naive Bayes | Decision Tree | SVM |"
        assert macro_p[2] == "| 50 | 89% | 79% | 89% | 90% |"
        weighted_r = markdown_table(record, "weighted", "recall").splitlines()
        assert weighted_r[-1] == "| 5000 | 92% | 87% | 92% | 93% |"

    def test_results_csv_schema(self):
        text = results_csv(reference_record())
        header, first = text.splitlines()[:2]
        assert header == "dimension,algorithm,class,precision,recall,f1,support"
        assert first.startswith("50,lda,a,")

    def test_empty_record(self, tmp_path):
        with pytest.raises(ValueError):
            emit_tables(RunRecord({}, (), (), ()), tmp_path)
