"""Confusion matrices and per-class / macro / weighted precision, recall, F1."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

import numpy as np

from .errors import EmptyMatrix, IndexOutOfRange, LengthMismatch


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are true classes, columns are predicted classes."""

    counts: np.ndarray
    class_names: tuple[str, ...]

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def tp(self) -> np.ndarray:
        return np.diag(self.counts).copy()

    @property
    def fp(self) -> np.ndarray:
        return self.counts.sum(axis=0) - self.tp

    @property
    def fn(self) -> np.ndarray:
        return self.counts.sum(axis=1) - self.tp

    @property
    def tn(self) -> np.ndarray:
        return self.total - self.tp - self.fp - self.fn


def confusion(y_true: Sequence[int], y_pred: Sequence[int], n_classes: int,
              class_names: Sequence[str] | None = None) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise LengthMismatch(f"{y_true.size} true labels vs {y_pred.size} predictions")
    for arr in (y_true, y_pred):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise IndexOutOfRange(f"class index outside [0, {n_classes})")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    if class_names is None:
        class_names = [str(c) for c in range(n_classes)]
    return ConfusionMatrix(counts, tuple(class_names))


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    # undefined ratios count as 0
    out = np.zeros(num.shape, dtype=np.float64)
    np.divide(num, den, out=out, where=den > 0)
    return out


@dataclass(frozen=True, eq=False)
class MetricsReport:
    class_names: tuple[str, ...]
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    macro: dict
    weighted: dict

    def summary(self, average: str, metric: str) -> float:
        return float({"macro": self.macro, "weighted": self.weighted}[average][metric])


def _averages(per_class: dict, support: np.ndarray):
    # both averages go through the same weighted sum so that equal supports
    # give bit-identical macro and weighted values (s / (n*s) rounds to 1/n)
    n = support.size
    uniform = np.full(n, 1.0 / n)
    by_support = support / support.sum()
    macro = {k: float(np.dot(uniform, v)) for k, v in per_class.items()}
    weighted = {k: float(np.dot(by_support, v)) for k, v in per_class.items()}
    return macro, weighted


def precision_recall_f1(cm: ConfusionMatrix) -> MetricsReport:
    if cm.total == 0:
        raise EmptyMatrix("confusion matrix has no samples")
    tp, fp, fn = cm.tp, cm.fp, cm.fn
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    # harmonic mean of P and R written over counts: one rounding, so F1 can
    # never stray outside [min(P, R), max(P, R)]
    f1 = _ratio(2 * tp, 2 * tp + fp + fn)
    support = cm.counts.sum(axis=1)
    macro, weighted = _averages({"precision": precision, "recall": recall, "f1": f1},
                                support)
    return MetricsReport(cm.class_names, precision, recall, f1, support, macro, weighted)


def percent(value: float) -> str:
    """Whole-percent display with round-half-up, e.g. ``0.895 -> '90%'``."""
    d = (Decimal(repr(float(value))) * 100).quantize(Decimal(1), rounding=ROUND_HALF_UP)
    return f"{d}%"


def fixed4(value: float) -> str:
    return f"{Decimal(repr(float(value))).quantize(Decimal('0.0001'), rounding=ROUND_HALF_UP)}"


def report_rows(report: MetricsReport):
    """(name, precision, recall, f1, support) per class, then macro and weighted."""
    for c, name in enumerate(report.class_names):
        yield (name, report.precision[c], report.recall[c], report.f1[c],
               int(report.support[c]))
    total = int(report.support.sum())
    for name, avg in (("macro", report.macro), ("weighted", report.weighted)):
        yield name, avg["precision"], avg["recall"], avg["f1"], total


def render_report(report: MetricsReport, format: str = "markdown") -> str:
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["class", "precision", "recall", "f1", "support"])
        for name, p, r, f, s in report_rows(report):
            writer.writerow([name, fixed4(p), fixed4(r), fixed4(f), s])
        return buf.getvalue()
    if format == "markdown":
        lines = ["| Class | Precision | Recall | F1 | Support |",
                 "|---|---|---|---|---|"]
        for name, p, r, f, s in report_rows(report):
            lines.append(f"| {name} | {percent(p)} | {percent(r)} | {percent(f)} | {s} |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r}")
