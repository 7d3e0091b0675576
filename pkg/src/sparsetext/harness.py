"""Dimension x algorithm sweeps, synthetic corpora and comparison tables."""

from __future__ import annotations

import copy
import csv
import io
import logging
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .corpus import (Corpus, StopwordList, build_corpus, load_csv, split_stratified,
                     subsample_stratified)
from .errors import ConfigError, DimensionMismatch, NonConvergenceWarning, SparseTextError
from .metrics import (MetricsReport, confusion, fixed4, percent, precision_recall_f1,
                      report_rows)
from .nonparametric import (Kernel, SvmMulticlassModel, TreeModel, TreeParams,
                            svm_fit_ovr, tree_fit, tree_predict)
from .parametric import LdaModel, NbModel, lda_fit, nb_fit
from .persist import save_model
from .vectorize import SparseMatrix, build_vocabulary, tfidf_transform

log = logging.getLogger(__name__)

ALGORITHMS = ("lda", "nb", "tree", "svm")
DISPLAY_NAMES = {"lda": "LDA", "nb": "Naive Bayes", "tree": "Decision Tree", "svm": "SVM"}
DEFAULT_DIMENSIONS = (50, 100, 500, 1000, 5000)

DEFAULT_HYPERPARAMS = {
    "lda": {"ridge": 1e-3, "max_dense_dim": 5000},
    "nb": {"alpha": 1.0},
    "tree": {"max_depth": 40, "min_samples_split": 2, "min_impurity_decrease": 0.0},
    "svm": {"C": 1.0, "tol": 1e-3, "max_passes": 10, "kernel": "rbf", "gamma": None,
            "max_sweeps": 10_000},
}


@dataclass
class ExperimentConfig:
    data: str | None = None
    text_column: str = "text"
    label_column: str = "label"
    stopwords: str | None = None  # None: bundled list, "none": no filtering
    labels: tuple[str, ...] | None = None  # keep only these classes
    dimensions: tuple[int, ...] = DEFAULT_DIMENSIONS
    algorithms: tuple[str, ...] = ALGORITHMS
    test_fraction: float = 0.2
    seed: int = 42
    subsample: int | None = None
    out: str | None = None
    workers: int = 1
    save_models: bool = False
    hyperparams: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_HYPERPARAMS))

    def validate(self, n_classes: int | None = None) -> None:
        dims = list(self.dimensions)
        if not dims or any(d < 1 for d in dims) or any(a >= b for a, b in zip(dims, dims[1:])):
            raise ConfigError(f"dimensions must be positive and strictly increasing: {dims}")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown or not self.algorithms:
            raise ConfigError(f"unknown algorithms {sorted(unknown)}")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("test_fraction must lie in (0, 1)")
        if self.subsample is not None and n_classes is not None \
                and self.subsample < 2 * n_classes:
            raise ConfigError(f"subsample must be >= 2 x {n_classes} classes")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def snapshot(self) -> dict:
        snap = asdict(self)
        snap["dimensions"] = list(self.dimensions)
        snap["algorithms"] = list(self.algorithms)
        snap["labels"] = None if self.labels is None else list(self.labels)
        return snap


# ---------------------------------------------------------------------------
# config files: flat key=value, dotted keys for per-algorithm settings
# ---------------------------------------------------------------------------

_INT_KEYS = {"seed", "subsample", "workers"}
_FLOAT_KEYS = {"test_fraction"}
_STR_KEYS = {"data", "text_column", "label_column", "stopwords", "out"}


def _coerce(value: str):
    low = value.lower()
    if low in ("none", "null", ""):
        return None
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def config_from_mapping(values: Mapping[str, object],
                        base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Apply string or typed settings onto `base` (defaults when omitted)."""
    cfg = copy.deepcopy(base) if base is not None else ExperimentConfig()
    for key, value in values.items():
        if value is None:
            continue
        key = key.replace("-", "_")
        if "." in key:
            algo, param = key.split(".", 1)
            if algo not in DEFAULT_HYPERPARAMS or param not in DEFAULT_HYPERPARAMS[algo]:
                raise ConfigError(f"unknown setting {key!r}")
            cfg.hyperparams[algo][param] = _coerce(value) if isinstance(value, str) else value
        elif key in ("dims", "dimensions"):
            items = value.split(",") if isinstance(value, str) else value
            cfg.dimensions = tuple(int(v) for v in items)
        elif key in ("algos", "algorithms"):
            items = value.split(",") if isinstance(value, str) else value
            cfg.algorithms = tuple(str(v).strip() for v in items)
        elif key == "labels":
            items = value.split(",") if isinstance(value, str) else value
            cfg.labels = tuple(str(v).strip() for v in items)
        elif key in _INT_KEYS:
            cfg.__setattr__(key, None if _coerce(str(value)) is None else int(value))
        elif key in _FLOAT_KEYS:
            cfg.__setattr__(key, float(value))
        elif key in _STR_KEYS:
            cfg.__setattr__(key, str(value))
        elif key == "save_models":
            cfg.save_models = value if isinstance(value, bool) else _coerce(str(value)) is True
        else:
            raise ConfigError(f"unknown setting {key!r}")
    return cfg


def load_config(path) -> ExperimentConfig:
    return config_from_mapping(parse_config_text(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------

def synthetic_texts(n_per_class: int, n_classes: int, vocab_per_class: int = 20,
                    noise_rate: float = 0.1, seed: int = 0, noise_vocab: int = 50):
    """Raw (texts, labels) for a keyword-separable corpus.

    Class ``c`` owns the keywords ``c{c}k0 .. c{c}k{vocab_per_class-1}``; noise
    tokens ``n0 ..`` are shared. Each document has 10 to 30 tokens.
    """
    if min(n_per_class, n_classes, vocab_per_class, noise_vocab) < 1:
        raise ValueError("counts must be positive")
    if not 0 <= noise_rate < 1:
        raise ValueError("noise_rate must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    noise = [f"n{i}" for i in range(noise_vocab)]
    texts, labels = [], []
    for c in range(n_classes):
        keywords = [f"c{c}k{i}" for i in range(vocab_per_class)]
        for _ in range(n_per_class):
            length = int(rng.integers(10, 31))
            from_noise = rng.random(length) < noise_rate
            kw = rng.integers(vocab_per_class, size=length)
            nz = rng.integers(noise_vocab, size=length)
            texts.append(" ".join(noise[nz[t]] if from_noise[t] else keywords[kw[t]]
                                  for t in range(length)))
            labels.append(f"class_{c}")
    return texts, labels


def generate_synthetic_corpus(n_per_class: int, n_classes: int, vocab_per_class: int = 20,
                              noise_rate: float = 0.1, seed: int = 0) -> Corpus:
    texts, labels = synthetic_texts(n_per_class, n_classes, vocab_per_class, noise_rate, seed)
    return build_corpus(texts, labels, source=f"synthetic(seed={seed})")


def write_synthetic_csv(path, n_per_class: int, n_classes: int, vocab_per_class: int = 20,
                        noise_rate: float = 0.1, seed: int = 0) -> Path:
    texts, labels = synthetic_texts(n_per_class, n_classes, vocab_per_class, noise_rate, seed)
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["text", "label"])
        writer.writerows(zip(texts, labels))
    return path


# ---------------------------------------------------------------------------
# fitting and batch prediction
# ---------------------------------------------------------------------------

def fit_model(algorithm: str, X: SparseMatrix, hyper: Mapping, seed: int):
    if algorithm == "lda":
        return lda_fit(X, hyper["ridge"], max_dense_dim=hyper["max_dense_dim"])
    if algorithm == "nb":
        return nb_fit(X, hyper["alpha"])
    if algorithm == "tree":
        return tree_fit_with(X, hyper)
    if algorithm == "svm":
        return svm_fit_ovr(X, Kernel(hyper["kernel"], hyper["gamma"]), hyper["C"],
                           hyper["tol"], hyper["max_passes"], seed=seed,
                           max_sweeps=hyper["max_sweeps"])
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def tree_fit_with(X: SparseMatrix, hyper: Mapping) -> TreeModel:
    return tree_fit(X, TreeParams(int(hyper["max_depth"]), int(hyper["min_samples_split"]),
                                  float(hyper["min_impurity_decrease"])))


def predict_matrix(model, X: SparseMatrix) -> np.ndarray:
    """Class index for every row of `X`."""
    if X.dim != model.dim:
        raise DimensionMismatch(f"input dim {X.dim} != model dim {model.dim}")
    if isinstance(model, LdaModel):
        Z = X.to_csr() @ model.projection
        d = ((Z[:, None, :] - model.projected_centroids[None, :, :]) ** 2).sum(axis=2)
        return np.argmin(d, axis=1)
    if isinstance(model, NbModel):
        jll = X.to_csr() @ model.log_likelihoods.T + model.log_priors
        return np.argmax(jll, axis=1)
    if isinstance(model, TreeModel):
        return np.array([tree_predict(model, x) for x in X.rows], dtype=np.intp)
    if isinstance(model, SvmMulticlassModel):
        return np.argmax(model.decision_matrix(X), axis=1)
    raise TypeError(f"unsupported model {type(model).__name__}")


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------

@dataclass
class CellResult:
    dimension: int
    algorithm: str
    n_features: int = 0
    report: MetricsReport | None = None
    error: str | None = None
    train_seconds: float = 0.0
    predict_seconds: float = 0.0
    converged: bool = True

    @property
    def ok(self) -> bool:
        return self.report is not None


@dataclass
class RunRecord:
    config: dict
    class_names: tuple[str, ...]
    dimensions: tuple[int, ...]
    algorithms: tuple[str, ...]
    cells: dict = field(default_factory=dict)

    def cell(self, dimension: int, algorithm: str) -> CellResult:
        return self.cells[(dimension, algorithm)]

    @property
    def failed(self) -> list[CellResult]:
        return [c for c in self.cells.values() if not c.ok]

    def metric(self, dimension: int, algorithm: str, average: str, metric: str) -> float | None:
        cell = self.cells.get((dimension, algorithm))
        if cell is None or not cell.ok:
            return None
        return cell.report.summary(average, metric)


def _load_corpus(config: ExperimentConfig) -> Corpus:
    if config.data is None:
        raise ConfigError("no data path configured")
    if config.stopwords is None:
        stops = StopwordList.default()
    elif config.stopwords.lower() == "none":
        stops = None
    else:
        stops = StopwordList.from_file(config.stopwords)
    return load_csv(config.data, config.text_column, config.label_column, stops,
                    config.labels)


def _run_cell(dimension: int, algorithm: str, X_train: SparseMatrix, X_test: SparseMatrix,
              config: ExperimentConfig, class_names, model_dir: Path | None,
              vocab, stops) -> CellResult:
    cell = CellResult(dimension, algorithm, X_train.dim)
    try:
        t0 = time.perf_counter()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NonConvergenceWarning)
            model = fit_model(algorithm, X_train, config.hyperparams[algorithm], config.seed)
        cell.train_seconds = time.perf_counter() - t0
        cell.converged = not any(issubclass(w.category, NonConvergenceWarning) for w in caught)
        t0 = time.perf_counter()
        y_pred = predict_matrix(model, X_test)
        cell.predict_seconds = time.perf_counter() - t0
        cm = confusion(X_test.labels, y_pred, len(class_names), class_names)
        cell.report = precision_recall_f1(cm)
        if model_dir is not None:
            save_model(model, model_dir / f"{algorithm}_{dimension}.json", class_names,
                       vocab, stops)
    except (SparseTextError, MemoryError, np.linalg.LinAlgError, ValueError) as exc:
        cell.error = f"{type(exc).__name__}: {exc}"
        log.warning("cell (%d, %s) failed: %s", dimension, algorithm, cell.error)
    return cell


def run_experiment(config: ExperimentConfig, corpus: Corpus | None = None) -> RunRecord:
    """Train and evaluate every requested (dimension, algorithm) cell.

    `corpus` overrides loading from ``config.data``. Failed cells are
    recorded with their error and do not stop the sweep.
    """
    if corpus is None:
        corpus = _load_corpus(config)
    config.validate(corpus.n_classes)
    if config.subsample is not None:
        corpus = subsample_stratified(corpus, config.subsample, config.seed)
    train, test = split_stratified(corpus, config.test_fraction, config.seed)
    record = RunRecord(config.snapshot(), corpus.labels, tuple(config.dimensions),
                       tuple(config.algorithms))
    model_dir = None
    if config.save_models and config.out:
        model_dir = Path(config.out) / "models"
        model_dir.mkdir(parents=True, exist_ok=True)
    stops = None
    if config.save_models:
        if config.stopwords is None:
            stops = StopwordList.default()
        elif config.stopwords.lower() != "none":
            stops = StopwordList.from_file(config.stopwords)

    for dim in config.dimensions:
        vocab = build_vocabulary(train, dim)
        X_train = tfidf_transform(train, vocab)
        X_test = tfidf_transform(test, vocab)
        args = [(dim, algo, X_train, X_test, config, corpus.labels, model_dir, vocab, stops)
                for algo in config.algorithms]
        if config.workers > 1:
            with ThreadPoolExecutor(config.workers) as pool:
                results = list(pool.map(lambda a: _run_cell(*a), args))
        else:
            results = [_run_cell(*a) for a in args]
        for cell in results:
            record.cells[(cell.dimension, cell.algorithm)] = cell
            log.info("dim=%d %s: %s", dim, cell.algorithm,
                     "failed" if not cell.ok else
                     f"macro F1 {cell.report.macro['f1']:.4f} ({cell.train_seconds:.1f}s)")
    return record


# ---------------------------------------------------------------------------
# output tables
# ---------------------------------------------------------------------------

TABLES = {
    "macro_precision.md": [("Macro Precision", "macro", "precision")],
    "weighted_precision.md": [("Weighted Precision", "weighted", "precision")],
    "macro_recall.md": [("Macro Average Recall", "macro", "recall")],
    "weighted_recall.md": [("Weighted Average Recall", "weighted", "recall")],
    # one F1 file, both averages: a single unqualified F1 table is ambiguous
    "f1.md": [("Macro F1-Score", "macro", "f1"), ("Weighted F1-Score", "weighted", "f1")],
}

FAILED = "—"


def markdown_table(record: RunRecord, average: str, metric: str, title: str | None = None) -> str:
    algos = record.algorithms
    lines = []
    if title:
        lines += [f"## {title}", ""]
    lines.append("| Dimensions | " + " | ".join(DISPLAY_NAMES[a] for a in algos) + " |")
    lines.append("|---" * (len(algos) + 1) + "|")
    for dim in record.dimensions:
        vals = []
        for algo in algos:
            v = record.metric(dim, algo, average, metric)
            vals.append(FAILED if v is None else percent(v))
        lines.append(f"| {dim} | " + " | ".join(vals) + " |")
    return "\n".join(lines) + "\n"


def results_csv(record: RunRecord) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dimension", "algorithm", "class", "precision", "recall", "f1", "support"])
    for dim in record.dimensions:
        for algo in record.algorithms:
            cell = record.cells.get((dim, algo))
            if cell is None or not cell.ok:
                writer.writerow([dim, algo, "error", "", "", "", ""])
                continue
            for name, p, r, f, s in report_rows(cell.report):
                writer.writerow([dim, algo, name, fixed4(p), fixed4(r), fixed4(f), s])
    return buf.getvalue()


def timings_csv(record: RunRecord) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dimension", "algorithm", "n_features", "train_seconds",
                     "predict_seconds", "converged", "error"])
    for dim in record.dimensions:
        for algo in record.algorithms:
            c = record.cells[(dim, algo)]
            writer.writerow([dim, algo, c.n_features, f"{c.train_seconds:.3f}",
                             f"{c.predict_seconds:.3f}", c.converged, c.error or ""])
    return buf.getvalue()


def emit_tables(record: RunRecord, out_dir) -> list[Path]:
    """Write the five markdown tables, ``results.csv`` and ``timings.csv``.

    Everything except ``timings.csv`` is a deterministic function of the
    record's metrics.
    """
    if not record.cells:
        raise ValueError("record has no cells")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, specs in TABLES.items():
        text = "\n".join(markdown_table(record, avg, metric, title)
                         for title, avg, metric in specs)
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    for name, text in (("results.csv", results_csv(record)),
                       ("timings.csv", timings_csv(record))):
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written
