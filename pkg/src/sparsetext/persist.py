"""JSON model persistence.

Every file is a single JSON object::

    {"format": "sparsetext-model", "version": 1, "type": "lda" | "nb" | "tree" | "svm",
     "dim": int, "classes": [name, ...], ...model arrays...,
     "vocabulary": {...} | null, "stopwords": [...] | null}

Floats are written with Python's shortest round-trip repr, so a loaded
model reproduces the saved model's arithmetic bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .corpus import StopwordList
from .errors import SchemaMismatch
from .nonparametric import (Kernel, SvmBinaryModel, SvmMulticlassModel, TreeLeaf,
                            TreeModel, TreeParams, TreeSplit)
from .parametric import LdaModel, NbModel
from .vectorize import SparseMatrix, SparseVector, Vocabulary

FORMAT = "sparsetext-model"
VERSION = 1

TrainedModel = Union[LdaModel, NbModel, TreeModel, SvmMulticlassModel]


@dataclass(frozen=True)
class ModelBundle:
    model: TrainedModel
    class_names: tuple[str, ...]
    vocabulary: Vocabulary | None = None
    stopwords: StopwordList | None = None


def model_type(model) -> str:
    for name, cls in (("lda", LdaModel), ("nb", NbModel), ("tree", TreeModel),
                      ("svm", SvmMulticlassModel)):
        if isinstance(model, cls):
            return name
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _arr(a) -> list:
    return np.asarray(a, dtype=np.float64).tolist()


def _sparse_rows(X: SparseMatrix) -> list:
    return [[r.indices.tolist(), _arr(r.values)] for r in X.rows]


def _node_to_dict(node) -> dict:
    if isinstance(node, TreeLeaf):
        return {"class": node.label, "class_counts": list(node.class_counts)}
    return {"feature": node.feature, "threshold": node.threshold,
            "left": _node_to_dict(node.left), "right": _node_to_dict(node.right)}


def _node_from_dict(d: dict):
    if "class" in d:
        return TreeLeaf(int(d["class"]), tuple(int(c) for c in d["class_counts"]))
    return TreeSplit(int(d["feature"]), float(d["threshold"]),
                     _node_from_dict(d["left"]), _node_from_dict(d["right"]))


def model_to_dict(model: TrainedModel, class_names=None, vocabulary=None,
                  stopwords=None) -> dict:
    kind = model_type(model)
    n_classes = model.n_classes
    if class_names is None:
        class_names = [str(c) for c in range(n_classes)]
    doc = {"format": FORMAT, "version": VERSION, "type": kind, "dim": model.dim,
           "classes": list(class_names)}
    if kind == "lda":
        doc.update(class_means=_arr(model.class_means), projection=_arr(model.projection),
                   projected_centroids=_arr(model.projected_centroids),
                   eigenvalues=_arr(model.eigenvalues), ridge=model.ridge)
    elif kind == "nb":
        doc.update(log_priors=_arr(model.log_priors),
                   log_likelihoods=_arr(model.log_likelihoods), smoothing=model.smoothing)
    elif kind == "tree":
        p = model.params
        doc.update(params={"max_depth": p.max_depth, "min_samples_split": p.min_samples_split,
                           "min_impurity_decrease": p.min_impurity_decrease},
                   root=_node_to_dict(model.root))
    else:
        doc["binaries"] = [
            {"support_indices": b.support_indices.tolist(), "dual_coef": _arr(b.dual_coef),
             "support_vectors": _sparse_rows(b.support_vectors), "bias": b.bias,
             "kernel": {"name": b.kernel.name, "gamma": b.kernel.gamma}, "C": b.C,
             "converged": b.converged, "n_sweeps": b.n_sweeps}
            for b in model.binaries
        ]
    doc["vocabulary"] = None if vocabulary is None else {
        "terms": list(vocabulary.terms), "doc_frequency": list(vocabulary.doc_frequency),
        "n_train_docs": vocabulary.n_train_docs}
    doc["stopwords"] = None if stopwords is None else sorted(stopwords.terms)
    return doc


def bundle_from_dict(doc: dict, expected_type: str | None = None) -> ModelBundle:
    if doc.get("format") != FORMAT or doc.get("version") != VERSION:
        raise SchemaMismatch(
            f"expected {FORMAT} version {VERSION}, got "
            f"{doc.get('format')!r} version {doc.get('version')!r}")
    kind = doc.get("type")
    if kind not in ("lda", "nb", "tree", "svm"):
        raise SchemaMismatch(f"unknown model type {kind!r}")
    if expected_type is not None and kind != expected_type:
        raise SchemaMismatch(f"expected a {expected_type!r} model, found {kind!r}")
    dim = int(doc["dim"])
    classes = tuple(doc["classes"])
    try:
        if kind == "lda":
            model = LdaModel(np.array(doc["class_means"]), np.array(doc["projection"]),
                             np.array(doc["projected_centroids"]),
                             np.array(doc["eigenvalues"]), float(doc["ridge"]))
        elif kind == "nb":
            model = NbModel(np.array(doc["log_priors"]), np.array(doc["log_likelihoods"]),
                            float(doc["smoothing"]))
        elif kind == "tree":
            model = TreeModel(_node_from_dict(doc["root"]), TreeParams(**doc["params"]),
                              dim, len(classes))
        else:
            binaries = []
            for b in doc["binaries"]:
                rows = tuple(SparseVector(np.array(i, dtype=np.int64), np.array(v), dim)
                             for i, v in b["support_vectors"])
                binaries.append(SvmBinaryModel(
                    np.array(b["dual_coef"], dtype=np.float64), SparseMatrix(rows, dim),
                    np.array(b["support_indices"], dtype=np.int64), float(b["bias"]),
                    Kernel(b["kernel"]["name"], b["kernel"]["gamma"]), float(b["C"]),
                    bool(b["converged"]), int(b["n_sweeps"])))
            model = SvmMulticlassModel(tuple(binaries), len(classes))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"malformed {kind} model: {exc}") from exc
    vocab = doc.get("vocabulary")
    if vocab is not None:
        vocab = Vocabulary(tuple(vocab["terms"]), tuple(vocab["doc_frequency"]),
                           int(vocab["n_train_docs"]))
    stops = doc.get("stopwords")
    if stops is not None:
        stops = StopwordList(frozenset(stops))
    return ModelBundle(model, classes, vocab, stops)


def save_model(model: TrainedModel, path, class_names=None, vocabulary=None,
               stopwords=None) -> Path:
    path = Path(path)
    doc = model_to_dict(model, class_names, vocabulary, stopwords)
    path.write_text(json.dumps(doc, allow_nan=False) + "\n", encoding="utf-8")
    return path


def load_bundle(path, expected_type: str | None = None) -> ModelBundle:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"{path}: not a JSON model file ({exc})") from exc
    if not isinstance(doc, dict):
        raise SchemaMismatch(f"{path}: top level must be an object")
    return bundle_from_dict(doc, expected_type)


def load_model(path, expected_type: str | None = None) -> TrainedModel:
    return load_bundle(path, expected_type).model
