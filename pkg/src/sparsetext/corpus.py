"""Labeled text ingestion: CSV loading, tokenization, stop-words and splits."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ClassTooSmall, EmptyCorpus, MalformedRow, MissingColumn

_SEPARATOR = re.compile(r"[^a-z0-9]+")


@dataclass(frozen=True)
class Document:
    id: int
    tokens: tuple[str, ...]
    label: int

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.id < 0:
            raise ValueError("document id must be non-negative")
        for tok in self.tokens:
            if not tok or tok != tok.lower():
                raise ValueError(f"invalid token {tok!r}")


@dataclass(frozen=True)
class Corpus:
    """Ordered labeled documents plus the class-name index they point into."""

    documents: tuple[Document, ...]
    labels: tuple[str, ...]
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "documents", tuple(self.documents))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate class names")
        n = len(self.labels)
        for doc in self.documents:
            if not 0 <= doc.label < n:
                raise ValueError(
                    f"document {doc.id} has label {doc.label} outside [0, {n})"
                )

    def __len__(self):
        return len(self.documents)

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    @property
    def label_array(self) -> np.ndarray:
        return np.fromiter((d.label for d in self.documents), dtype=np.intp,
                           count=len(self.documents))

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.label_array, minlength=self.n_classes)

    def subset(self, positions: Iterable[int], source: str | None = None) -> "Corpus":
        docs = [self.documents[i] for i in positions]
        return Corpus(docs, self.labels, self.source if source is None else source)


@dataclass(frozen=True)
class StopwordList:
    terms: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        terms = frozenset(self.terms)
        for t in terms:
            if t != t.lower() or any(ch.isspace() for ch in t) or not t:
                raise ValueError(f"invalid stop-word {t!r}")
        object.__setattr__(self, "terms", terms)

    def __contains__(self, term):
        return term in self.terms

    def __len__(self):
        return len(self.terms)

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "StopwordList":
        terms = set()
        for line in lines:
            line = line.strip()
            if line and not line.startswith("#"):
                terms.add(line.lower())
        return cls(frozenset(terms))

    @classmethod
    def from_file(cls, path) -> "StopwordList":
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh)

    @classmethod
    def default(cls) -> "StopwordList":
        """The bundled 127-word English list."""
        text = resources.files("sparsetext").joinpath("data/stopwords_en.txt")
        return cls.from_lines(text.read_text(encoding="utf-8").splitlines())


def tokenize(text: str) -> list[str]:
    """Lowercase `text` and split on every character outside ``[a-z0-9]``.

    >>> tokenize("RT @user: don't #stop123")
    ['rt', 'user', 'don', 't', 'stop123']
    """
    return [tok for tok in _SEPARATOR.split(text.lower()) if tok]


def remove_stopwords(tokens: Sequence[str], stops: StopwordList) -> list[str]:
    return [tok for tok in tokens if tok not in stops]


def build_corpus(texts: Sequence[str], labels: Sequence[str],
                 stops: StopwordList | None = None, source: str = "") -> Corpus:
    """Tokenize raw texts and encode string labels by sorted order."""
    if len(texts) != len(labels):
        raise ValueError("texts and labels differ in length")
    if not texts:
        raise EmptyCorpus(f"no documents in {source or 'input'}")
    names = sorted(set(labels))
    index = {name: i for i, name in enumerate(names)}
    docs = []
    for i, (text, label) in enumerate(zip(texts, labels)):
        tokens = tokenize(text)
        if stops is not None:
            tokens = remove_stopwords(tokens, stops)
        docs.append(Document(i, tokens, index[label]))
    return Corpus(docs, names, source)


def read_csv_columns(path, columns: Sequence[str]) -> list[list[str]]:
    """Read the named columns of a headed UTF-8 CSV file.

    Returns one list of values per requested column, in file order.
    Completely blank lines are skipped; any other row whose field count
    differs from the header aborts the read.
    """
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyCorpus(f"{path} is empty") from None
        positions = []
        for col in columns:
            if col not in header:
                raise MissingColumn(col, header)
            positions.append(header.index(col))
        out: list[list[str]] = [[] for _ in columns]
        for row_number, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedRow(row_number, len(header), len(row))
            for slot, pos in zip(out, positions):
                slot.append(row[pos])
    return out


def load_csv(path, text_column: str = "text", label_column: str = "label",
             stops: StopwordList | None = None,
             keep_labels: Sequence[str] | None = None) -> Corpus:
    """Load a labeled corpus from CSV.

    Parameters
    ----------
    path : path-like
        UTF-8 CSV file with a header row.
    text_column, label_column : str
        Header names of the text and class-label columns.
    stops : StopwordList, optional
        When given, stop-words are removed from every document. Documents
        left empty are kept.
    keep_labels : sequence of str, optional
        Drop every row whose label is not listed.

    Returns
    -------
    Corpus
        One document per data row in file order, labels indexed by their
        position in the sorted list of distinct label strings.
    """
    texts, labels = read_csv_columns(path, [text_column, label_column])
    if not texts:
        raise EmptyCorpus(f"{path} has a header but no data rows")
    if keep_labels is not None:
        keep = set(keep_labels)
        rows = [(t, lab) for t, lab in zip(texts, labels) if lab in keep]
        if not rows:
            raise EmptyCorpus(f"{path} has no rows labelled {sorted(keep)}")
        texts, labels = (list(col) for col in zip(*rows))
    return build_corpus(texts, labels, stops, source=str(path))


def _class_positions(corpus: Corpus) -> list[np.ndarray]:
    y = corpus.label_array
    return [np.flatnonzero(y == c) for c in range(corpus.n_classes)]


def split_stratified(corpus: Corpus, test_fraction: float = 0.2,
                     seed: int = 42) -> tuple[Corpus, Corpus]:
    """Deterministic per-class train/test partition.

    Each class contributes ``max(1, floor(test_fraction * count))`` documents
    to the test side. Both sides keep the original document order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    test_mask = np.zeros(len(corpus), dtype=bool)
    for c, pos in enumerate(_class_positions(corpus)):
        if len(pos) < 2:
            raise ClassTooSmall(
                f"class {corpus.labels[c]!r} has {len(pos)} document(s); need >= 2"
            )
        # epsilon guards products such as 0.29 * 100 = 28.999999999999996
        n_test = max(1, math.floor(test_fraction * len(pos) + 1e-9))
        test_mask[rng.permutation(pos)[:n_test]] = True
    train = corpus.subset(np.flatnonzero(~test_mask), corpus.source + "#train")
    test = corpus.subset(np.flatnonzero(test_mask), corpus.source + "#test")
    return train, test


def subsample_stratified(corpus: Corpus, n_max: int, seed: int = 42) -> Corpus:
    """Keep at most `n_max` documents, proportionally per class.

    Quotas follow the largest-remainder rule with a floor of two documents
    per class so the result can still be split.
    """
    if n_max >= len(corpus):
        return corpus
    counts = corpus.class_counts()
    if n_max < 2 * corpus.n_classes:
        raise ClassTooSmall(f"subsample of {n_max} cannot hold 2 docs per class")
    exact = counts * (n_max / counts.sum())
    quota = np.minimum(np.maximum(np.floor(exact).astype(int), 2), counts)
    order = np.lexsort((np.arange(len(counts)), -(exact - np.floor(exact))))
    i = 0
    while quota.sum() < n_max:
        c = order[i % len(order)]
        if quota[c] < counts[c]:
            quota[c] += 1
        i += 1
    while quota.sum() > n_max:
        c = int(np.argmax(quota))
        quota[c] -= 1
    rng = np.random.default_rng(seed)
    keep = np.zeros(len(corpus), dtype=bool)
    for c, pos in enumerate(_class_positions(corpus)):
        keep[rng.permutation(pos)[:quota[c]]] = True
    return corpus.subset(np.flatnonzero(keep), corpus.source + f"#sub{n_max}")
