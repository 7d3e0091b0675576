"""TF-IDF vocabulary construction and sparse row-major representations."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus, Document
from .errors import DimensionMismatch, NoTerms, UnknownTerm


@dataclass(frozen=True, eq=False)
class SparseVector:
    """One row of a sparse matrix: sorted column indices and nonzero values."""

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-D and equal length")
        if idx.size:
            if np.any(np.diff(idx) <= 0):
                raise ValueError("indices must be strictly increasing")
            if idx[0] < 0 or idx[-1] >= self.dim:
                raise ValueError("index out of range")
            if np.any(val == 0.0):
                raise ValueError("explicit zeros are not stored")
            if not np.all(np.isfinite(val)):
                raise ValueError("values must be finite")
        idx.flags.writeable = False
        val.flags.writeable = False
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def from_dense(cls, x: Sequence[float]) -> "SparseVector":
        x = np.asarray(x, dtype=np.float64)
        nz = np.flatnonzero(x)
        return cls(nz, x[nz], x.shape[0])

    @classmethod
    def zeros(cls, dim: int) -> "SparseVector":
        return cls(np.empty(0, np.int64), np.empty(0), dim)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def get(self, j: int) -> float:
        k = np.searchsorted(self.indices, j)
        if k < self.indices.size and self.indices[k] == j:
            return float(self.values[k])
        return 0.0

    def dot(self, other: "SparseVector") -> float:
        _check_dims(self.dim, other.dim)
        common, ia, ib = np.intersect1d(self.indices, other.indices,
                                        assume_unique=True, return_indices=True)
        return float(np.dot(self.values[ia], other.values[ib]))

    def squared_distance(self, other: "SparseVector") -> float:
        """``||self - other||^2`` over the union of nonzero columns."""
        _check_dims(self.dim, other.dim)
        union = np.union1d(self.indices, other.indices)
        a = np.zeros(union.size)
        b = np.zeros(union.size)
        a[np.searchsorted(union, self.indices)] = self.values
        b[np.searchsorted(union, other.indices)] = other.values
        diff = a - b
        return float(np.dot(diff, diff))

    def scaled(self, factor: float) -> "SparseVector":
        if factor == 0:
            return SparseVector.zeros(self.dim)
        return SparseVector(self.indices, self.values * factor, self.dim)


def _check_dims(a: int, b: int):
    if a != b:
        raise DimensionMismatch(f"dimension {a} != {b}")


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    rows: tuple[SparseVector, ...]
    dim: int
    row_labels: np.ndarray | None = None
    n_classes: int | None = None

    def __post_init__(self):
        rows = tuple(self.rows)
        for r in rows:
            if r.dim != self.dim:
                raise DimensionMismatch(f"row dim {r.dim} != matrix dim {self.dim}")
        object.__setattr__(self, "rows", rows)
        if self.row_labels is not None:
            labels = np.asarray(self.row_labels, dtype=np.intp)
            if labels.shape != (len(rows),):
                raise ValueError("row_labels must align with rows")
            labels.flags.writeable = False
            object.__setattr__(self, "row_labels", labels)
            if self.n_classes is None and labels.size:
                object.__setattr__(self, "n_classes", int(labels.max()) + 1)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, i):
        return self.rows[i]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), self.dim

    @property
    def labels(self) -> np.ndarray:
        if self.row_labels is None:
            raise ValueError("matrix has no row labels")
        return self.row_labels

    @classmethod
    def from_dense(cls, X, labels=None, n_classes=None) -> "SparseMatrix":
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return cls(tuple(SparseVector.from_dense(r) for r in X), X.shape[1],
                   labels, n_classes)

    @classmethod
    def from_csr(cls, X, labels=None, n_classes=None) -> "SparseMatrix":
        X = sp.csr_matrix(X)
        X.sum_duplicates()
        X.eliminate_zeros()
        X.sort_indices()
        rows = tuple(
            SparseVector(X.indices[X.indptr[i]:X.indptr[i + 1]],
                         X.data[X.indptr[i]:X.indptr[i + 1]], X.shape[1])
            for i in range(X.shape[0])
        )
        return cls(rows, X.shape[1], labels, n_classes)

    def to_csr(self) -> sp.csr_matrix:
        indptr = np.zeros(len(self.rows) + 1, dtype=np.int64)
        np.cumsum([r.nnz for r in self.rows], out=indptr[1:])
        if self.rows:
            indices = np.concatenate([r.indices for r in self.rows])
            data = np.concatenate([r.values for r in self.rows])
        else:
            indices, data = np.empty(0, np.int64), np.empty(0)
        return sp.csr_matrix((data, indices, indptr), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        return self.to_csr().toarray()

    def take(self, positions) -> "SparseMatrix":
        positions = list(positions)
        labels = None if self.row_labels is None else self.row_labels[positions]
        return SparseMatrix(tuple(self.rows[i] for i in positions), self.dim,
                            labels, self.n_classes)

    def scaled(self, factor: float) -> "SparseMatrix":
        return SparseMatrix(tuple(r.scaled(factor) for r in self.rows), self.dim,
                            self.row_labels, self.n_classes)


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    doc_frequency: tuple[int, ...]
    n_train_docs: int

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "doc_frequency", tuple(int(d) for d in self.doc_frequency))
        if len(self.terms) != len(self.doc_frequency):
            raise ValueError("terms and doc_frequency differ in length")
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("duplicate vocabulary terms")
        for df in self.doc_frequency:
            if not 1 <= df <= self.n_train_docs:
                raise ValueError(f"document frequency {df} outside [1, {self.n_train_docs}]")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self._index

    def index(self, term: str) -> int:
        try:
            return self._index[term]
        except KeyError:
            raise UnknownTerm(term) from None

    def idf_vector(self) -> np.ndarray:
        return np.array([_idf(self.n_train_docs, df) for df in self.doc_frequency])


def document_frequencies(docs: Iterable[Document]) -> Counter:
    df: Counter = Counter()
    for doc in docs:
        df.update(set(doc.tokens))
    return df


def build_vocabulary(train: Corpus, k: int) -> Vocabulary:
    """Keep the `k` terms with the highest training document frequency.

    Ties are broken by ascending term string; column order is rank order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(train) == 0:
        raise NoTerms("training corpus is empty")
    df = document_frequencies(train.documents)
    if not df:
        raise NoTerms("every training document is empty")
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    return Vocabulary(tuple(t for t, _ in ranked), tuple(n for _, n in ranked),
                      len(train))


def term_frequency(doc: Document, term: str) -> float:
    if not doc.tokens:
        return 0.0
    return doc.tokens.count(term) / len(doc.tokens)


def _idf(n_docs: int, df: int) -> float:
    # clamped at 0: the raw ratio drops below 1 once df + 1 > n_docs
    return max(0.0, math.log(n_docs / (1 + df)))


def inverse_document_frequency(vocab: Vocabulary, term: str) -> float:
    return _idf(vocab.n_train_docs, vocab.doc_frequency[vocab.index(term)])


def tfidf_row(doc: Document, vocab: Vocabulary, idf: np.ndarray | None = None) -> SparseVector:
    if idf is None:
        idf = vocab.idf_vector()
    dim = len(vocab)
    if not doc.tokens:
        return SparseVector.zeros(dim)
    n = len(doc.tokens)
    cols, vals = [], []
    for term, count in Counter(doc.tokens).items():
        j = vocab._index.get(term)
        if j is None or idf[j] == 0.0:
            continue
        cols.append(j)
        vals.append((count / n) * idf[j])
    if not cols:
        return SparseVector.zeros(dim)
    order = np.argsort(cols)
    return SparseVector(np.asarray(cols)[order], np.asarray(vals)[order], dim)


def tfidf_transform(corpus: Corpus, vocab: Vocabulary) -> SparseMatrix:
    """TF-IDF rows for every document, columns in vocabulary order.

    Entry ``(i, j)`` is ``TF(term_j, doc_i) * IDF(term_j)`` where TF divides
    by the full token count of the document, including tokens outside the
    vocabulary. Out-of-vocabulary tokens contribute no column.
    """
    idf = vocab.idf_vector()
    rows = tuple(tfidf_row(doc, vocab, idf) for doc in corpus.documents)
    return SparseMatrix(rows, len(vocab), corpus.label_array, corpus.n_classes)


def _sig6(v: float) -> str:
    return f"{v:.6g}"


def dump_svmlight(X: SparseMatrix, fh) -> None:
    """Write ``row_index label idx:val ...`` lines with 6 significant digits.

    Rows without labels are written with label ``-1``.
    """
    for i, row in enumerate(X.rows):
        label = -1 if X.row_labels is None else int(X.row_labels[i])
        parts = [str(i), str(label)]
        parts.extend(f"{j}:{_sig6(v)}" for j, v in zip(row.indices, row.values))
        fh.write(" ".join(parts) + "\n")


def load_svmlight(fh, dim: int) -> SparseMatrix:
    rows, labels = [], []
    for line in fh:
        parts = line.split()
        if not parts:
            continue
        labels.append(int(parts[1]))
        pairs = [p.split(":") for p in parts[2:]]
        idx = np.array([int(a) for a, _ in pairs], dtype=np.int64)
        val = np.array([float(b) for _, b in pairs])
        rows.append(SparseVector(idx, val, dim))
    lab = None if all(l < 0 for l in labels) else np.array(labels)
    return SparseMatrix(tuple(rows), dim, lab)
