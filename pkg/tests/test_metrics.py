import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparsetext.errors import EmptyMatrix, IndexOutOfRange, LengthMismatch
from sparsetext.metrics import (ConfusionMatrix, confusion, fixed4, percent,
                                precision_recall_f1, render_report)

from oracles import prf_by_counting


@st.composite
def label_pairs(draw, max_classes=6, max_len=60):
    k = draw(st.integers(2, max_classes))
    n = draw(st.integers(1, max_len))
    labels = st.lists(st.integers(0, k - 1), min_size=n, max_size=n)
    return draw(labels), draw(labels), k


class TestConfusion:
    def test_perfect_is_diagonal(self):
        y = [0, 1, 1, 2, 2, 2]
        cm = confusion(y, y, 3)
        np.testing.assert_array_equal(cm.counts, np.diag([1, 2, 3]))

    def test_direct_counting(self):
        cm = confusion([0, 0, 1], [0, 1, 1], 2)
        assert cm.counts.tolist() == [[1, 1], [0, 1]]

    def test_twelve_prediction_hand_tally(self):
        y_true = [0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]
        y_pred = [0, 0, 1, 2, 1, 1, 1, 0, 2, 2, 1, 2]
        cm = confusion(y_true, y_pred, 3)
        # tallied by hand row by row
        assert cm.counts.tolist() == [[2, 1, 1], [1, 3, 0], [0, 1, 3]]
        assert cm.tp.tolist() == [2, 3, 3]
        assert cm.fp.tolist() == [1, 2, 1]
        assert cm.fn.tolist() == [2, 1, 1]
        assert cm.tn.tolist() == [7, 6, 7]

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            confusion([0, 1], [0], 2)

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            confusion([0, 2], [0, 1], 2)
        with pytest.raises(IndexOutOfRange):
            confusion([0, 1], [-1, 1], 2)


class TestPrf:
    def test_perfect(self):
        r = precision_recall_f1(confusion([0, 1, 2, 2], [0, 1, 2, 2], 3))
        assert r.precision.tolist() == r.recall.tolist() == r.f1.tolist() == [1.0] * 3
        assert r.macro == r.weighted == {"precision": 1.0, "recall": 1.0, "f1": 1.0}

    def test_ninety_percent_class(self):
        counts = np.array([[90, 10], [10, 890]])
        r = precision_recall_f1(ConfusionMatrix(counts, ("a", "b")))
        assert r.precision[0] == pytest.approx(0.9, abs=1e-15)
        assert r.recall[0] == pytest.approx(0.9, abs=1e-15)
        assert r.f1[0] == pytest.approx(0.9, abs=1e-15)

    def test_never_predicted_class(self):
        r = precision_recall_f1(confusion([0, 1, 1], [1, 1, 1], 2))
        assert r.precision[0] == 0 and r.recall[0] == 0 and r.f1[0] == 0

    def test_absent_class_counts_in_macro(self):
        # class 2 never appears: its zeros pull the macro mean down, weighted ignores it
        r = precision_recall_f1(confusion([0, 1], [0, 1], 3))
        assert r.macro["recall"] == pytest.approx(2 / 3, abs=1e-15)
        assert r.weighted["recall"] == 1.0

    def test_empty(self):
        with pytest.raises(EmptyMatrix):
            precision_recall_f1(confusion([], [], 2))

    def test_matches_counting_on_random_vectors(self):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            k = int(rng.integers(2, 7))
            n = int(rng.integers(1, 80))
            y_true = rng.integers(0, k, n).tolist()
            y_pred = rng.integers(0, k, n).tolist()
            r = precision_recall_f1(confusion(y_true, y_pred, k))
            rows = prf_by_counting(y_true, y_pred, k)
            for c, (p, rec, f, s) in enumerate(rows):
                assert abs(r.precision[c] - p) <= 1e-12
                assert abs(r.recall[c] - rec) <= 1e-12
                assert abs(r.f1[c] - f) <= 1e-12
                assert r.support[c] == s
            for j, name in enumerate(("precision", "recall", "f1")):
                macro = sum(row[j] for row in rows) / k
                weighted = sum(row[j] * row[3] for row in rows) / n
                assert abs(r.macro[name] - macro) <= 1e-12
                assert abs(r.weighted[name] - weighted) <= 1e-12


# invariants, module level so the acceptance suite can call them directly

@settings(max_examples=200)
@given(label_pairs())
def test_micro_consistency(data):
    y_true, y_pred, k = data
    cm = confusion(y_true, y_pred, k)
    assert cm.tp.sum() == np.trace(cm.counts)
    assert (cm.tp + cm.fn).sum() == len(y_true) == cm.total
    assert np.all(cm.counts >= 0)


@settings(max_examples=200)
@given(label_pairs())
def test_f1_between_precision_and_recall(data):
    r = precision_recall_f1(confusion(*data))
    for p, rec, f in zip(r.precision, r.recall, r.f1):
        assert min(p, rec) <= f <= max(p, rec)
        if p == rec:
            assert f == p


@settings(max_examples=200)
@given(label_pairs())
def test_values_in_unit_interval_and_weighted_bounded(data):
    r = precision_recall_f1(confusion(*data))
    for name in ("precision", "recall", "f1"):
        per = getattr(r, name)
        assert np.all((per >= 0) & (per <= 1))
        present = per[r.support > 0]
        assert present.min() - 1e-15 <= r.weighted[name] <= present.max() + 1e-15


@settings(max_examples=200)
@given(st.integers(2, 6), st.integers(1, 15), st.data())
def test_equal_supports_weighted_equals_macro(k, per_class, data):
    y_true = [c for c in range(k) for _ in range(per_class)]
    y_pred = data.draw(st.lists(st.integers(0, k - 1), min_size=len(y_true),
                                max_size=len(y_true)))
    r = precision_recall_f1(confusion(y_true, y_pred, k))
    assert r.weighted == r.macro


@settings(max_examples=200)
@given(label_pairs(), st.randoms())
def test_class_permutation(data, rnd):
    y_true, y_pred, k = data
    perm = list(range(k))
    rnd.shuffle(perm)
    a = precision_recall_f1(confusion(y_true, y_pred, k))
    b = precision_recall_f1(confusion([perm[t] for t in y_true],
                                      [perm[p] for p in y_pred], k))
    for name in ("precision", "recall", "f1"):
        np.testing.assert_array_equal(getattr(b, name)[perm], getattr(a, name))
        assert b.macro[name] == pytest.approx(a.macro[name], abs=1e-15)
        assert b.weighted[name] == pytest.approx(a.weighted[name], abs=1e-15)


class TestRender:
    def test_half_up_rounding(self):
        assert percent(0.896) == "90%"
        assert percent(0.895) == "90%"
        assert percent(0.885) == "89%"
        assert percent(1.0) == "100%"
        assert percent(0.0) == "0%"
        assert fixed4(0.12345) == "0.1235"

    def test_markdown_structure(self):
        r = precision_recall_f1(confusion([0, 0, 1, 1], [0, 1, 1, 1], 2, ["neg", "pos"]))
        lines = render_report(r, "markdown").strip().splitlines()
        assert len(lines) == 2 + 2 + 2
        names = [ln.split("|")[1].strip() for ln in lines[2:]]
        assert names == ["neg", "pos", "macro", "weighted"]
        assert lines[2] == "| neg | 100% | 50% | 67% | 2 |"

    def test_csv_round_trip(self):
        rng = np.random.default_rng(3)
        y_true, y_pred = rng.integers(0, 3, 40), rng.integers(0, 3, 40)
        r = precision_recall_f1(confusion(y_true, y_pred, 3, ["a", "b", "c"]))
        rows = list(csv.DictReader(io.StringIO(render_report(r, "csv"))))
        assert [row["class"] for row in rows] == ["a", "b", "c", "macro", "weighted"]
        for c, row in enumerate(rows[:3]):
            assert float(row["precision"]) == round(float(r.precision[c]), 4)
            assert row["recall"] == fixed4(r.recall[c])
            assert int(row["support"]) == r.support[c]
        assert rows[3]["f1"] == fixed4(r.macro["f1"])
        assert rows[4]["support"] == "40"

    def test_deterministic(self):
        r = precision_recall_f1(confusion([0, 1, 1], [0, 0, 1], 2))
        assert render_report(r, "csv") == render_report(r, "csv")

    def test_unknown_format(self):
        r = precision_recall_f1(confusion([0], [0], 1))
        with pytest.raises(ValueError):
            render_report(r, "html")
