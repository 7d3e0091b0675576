"""Command-line entry point: ``sparsetext run | gen-synthetic | predict``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .corpus import Document, read_csv_columns, remove_stopwords, tokenize
from .errors import SparseTextError
from .harness import (config_from_mapping, emit_tables, load_config, predict_matrix,
                      run_experiment, write_synthetic_csv)
from .persist import load_bundle
from .vectorize import SparseMatrix, tfidf_row

log = logging.getLogger("sparsetext")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsetext",
        description="TF-IDF text classification with LDA, Naive Bayes, CART and SVM.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    # accept -v after the subcommand too without clobbering the top-level value
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common],
                            help="sweep dimensions x algorithms and write tables")
    run.add_argument("--config", help="key=value config file; flags below override it")
    run.add_argument("--data", help="labelled CSV corpus")
    run.add_argument("--text-column")
    run.add_argument("--label-column")
    run.add_argument("--labels", help="comma-separated classes to keep")
    run.add_argument("--stopwords", help="stop-word file, or 'none' to disable filtering")
    run.add_argument("--dims", help="comma-separated vocabulary sizes, e.g. 50,100,500")
    run.add_argument("--algos", help="comma-separated subset of lda,nb,tree,svm")
    run.add_argument("--seed", type=int)
    run.add_argument("--test-fraction", type=float)
    run.add_argument("--subsample", type=int, help="max documents kept before the split")
    run.add_argument("--workers", type=int, help="cells trained concurrently")
    run.add_argument("--save-models", action="store_true", default=None,
                     help="write every fitted model under OUT/models")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="hyperparameter override such as svm.C=10 (repeatable)")
    run.add_argument("--out", help="output directory for tables")

    gen = sub.add_parser("gen-synthetic", parents=[common],
                            help="write a keyword-separable CSV corpus")
    gen.add_argument("--classes", type=int, default=4)
    gen.add_argument("--per-class", type=int, default=250)
    gen.add_argument("--vocab-per-class", type=int, default=20)
    gen.add_argument("--noise", type=float, default=0.1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    pred = sub.add_parser("predict", parents=[common],
                            help="label a CSV of texts with a saved model")
    pred.add_argument("--model", required=True)
    pred.add_argument("--input", required=True)
    pred.add_argument("--text-column", default="text")
    pred.add_argument("--out", required=True)
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else None
    overrides = {k: getattr(args, k) for k in
                 ("data", "text_column", "label_column", "labels", "stopwords", "dims",
                  "algos", "seed", "test_fraction", "subsample", "workers", "save_models",
                  "out")}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise SparseTextError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    cfg = config_from_mapping(overrides, cfg)
    if cfg.out is None:
        cfg.out = "results"
    record = run_experiment(cfg)
    for path in emit_tables(record, cfg.out):
        print(path)
    for cell in record.failed:
        print(f"failed: dim={cell.dimension} {cell.algorithm}: {cell.error}", file=sys.stderr)
    return EXIT_PARTIAL if record.failed else EXIT_OK


def _cmd_gen(args) -> int:
    path = write_synthetic_csv(args.out, args.per_class, args.classes, args.vocab_per_class,
                               args.noise, args.seed)
    print(path)
    return EXIT_OK


def _cmd_predict(args) -> int:
    bundle = load_bundle(args.model)
    if bundle.vocabulary is None:
        raise SparseTextError(f"{args.model} carries no vocabulary; cannot vectorize text")
    (texts,) = read_csv_columns(args.input, [args.text_column])
    idf = bundle.vocabulary.idf_vector()
    rows = []
    for i, text in enumerate(texts):
        tokens = tokenize(text)
        if bundle.stopwords is not None:
            tokens = remove_stopwords(tokens, bundle.stopwords)
        rows.append(tfidf_row(Document(i, tokens, 0), bundle.vocabulary, idf))
    X = SparseMatrix(tuple(rows), len(bundle.vocabulary))
    pred = predict_matrix(bundle.model, X) if rows else []
    out = Path(args.out)
    with out.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row", "prediction"])
        for i, c in enumerate(pred):
            writer.writerow([i + 1, bundle.class_names[int(c)]])
    print(out)
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "gen-synthetic": _cmd_gen, "predict": _cmd_predict}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (SparseTextError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
