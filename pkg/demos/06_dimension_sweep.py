"""The full experiment: vocabulary sizes x four algorithms, written as tables.

Pass a CSV path to use real data, e.g. the tweet corpus:

    python demos/06_dimension_sweep.py tweets.csv tweet_text cyberbullying_type
"""

import sys
import tempfile
from pathlib import Path

from sparsetext import ExperimentConfig, emit_tables, generate_synthetic_corpus, run_experiment

out = Path(tempfile.mkdtemp(prefix="sweep_"))
if len(sys.argv) > 1:
    cfg = ExperimentConfig(data=sys.argv[1], text_column=sys.argv[2], label_column=sys.argv[3],
                           subsample=4000, out=str(out))
    record = run_experiment(cfg)
else:
    # half of every document comes from 50 shared noise words; those have the
    # highest document frequency, so the 10 and 50 term vocabularies hold
    # almost nothing but noise and scores stay near chance
    corpus = generate_synthetic_corpus(80, 4, vocab_per_class=40, noise_rate=0.5, seed=1)
    cfg = ExperimentConfig(dimensions=(10, 50, 100, 200), seed=1, out=str(out))
    record = run_experiment(cfg, corpus)

emit_tables(record, out)
print((out / "macro_precision.md").read_text())
print((out / "f1.md").read_text())
print("timings:\n" + (out / "timings.csv").read_text())
print("all outputs in", out)
