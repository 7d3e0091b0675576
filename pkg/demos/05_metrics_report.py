"""Confusion matrix, per-class scores and the two averaging schemes."""

from sparsetext.metrics import confusion, percent, precision_recall_f1, render_report

names = ["age", "ethnicity", "gender", "religion"]
y_true = [0] * 10 + [1] * 10 + [2] * 5 + [3] * 25
y_pred = ([0] * 9 + [2]) + ([1] * 8 + [3] * 2) + ([2] * 2 + [0] * 3) + ([3] * 24 + [1])

cm = confusion(y_true, y_pred, 4, names)
print("rows are true classes, columns predictions:\n", cm.counts)
report = precision_recall_f1(cm)
print(render_report(report, "markdown"))

# the small, poorly recalled gender class drags the macro average down,
# while the weighted average is dominated by the large religion class
for avg in ("macro", "weighted"):
    print(f"{avg:>8} recall {percent(report.summary(avg, 'recall'))}")

print("\nCSV keeps four decimals:\n" + render_report(report, "csv"))
