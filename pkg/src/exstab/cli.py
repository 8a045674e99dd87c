"""Command line interface: train, explain, compare, conditioning, version."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .blackbox import EmbeddingClassifier, train, training_accuracy
from .conditioning import run_simulation, write_bins_csv, write_kappa_csv
from .corpus import RawExample, Vocabulary, encode
from .harness import ExperimentConfig, emit_results, prepare_documents, run_comparison


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.from_json(args.config)
    if args.out is not None:
        config.out_dir = args.out
    if args.seed is not None:
        config.sample_seed = args.seed
    return config


def _cmd_train(args) -> int:
    config = _load_config(args)
    train_docs, _, vocab = prepare_documents(config)
    model = train(
        train_docs,
        epochs=config.model_epochs,
        lr=config.model_lr,
        seed=config.model_seed,
        dim=config.model_dim,
        vocab_size=len(vocab),
        embedding_decay=config.embedding_decay,
    )
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model.save(out / "model.npz")
    vocab.dump(out / "vocab.tsv")
    print(f"trained on {len(train_docs)} documents, accuracy {training_accuracy(model, train_docs):.3f}")
    print(f"wrote {out / 'model.npz'} and {out / 'vocab.tsv'}")
    return 0


def _cmd_explain(args) -> int:
    from .attribution import explain_kernel_shap, explain_lime, explain_sample_shapley

    model = EmbeddingClassifier.load(args.model)
    vocab = Vocabulary.load(args.vocab)
    doc = encode(RawExample(label=0, text=args.text), vocab, args.max_length)
    ids = np.asarray(doc.token_ids)
    target = args.target if args.target is not None else int(np.argmax(model.predict_proba(ids)))

    if args.method == "lime":
        explanation = explain_lime(model, doc, target, m=args.m, seed=args.seed)
    elif args.method == "kernel_shap":
        explanation = explain_kernel_shap(model, doc, target, m=args.m, seed=args.seed)
    else:
        explanation = explain_sample_shapley(
            model, doc, target, permutations=args.permutations, seed=args.seed
        )

    print(f"method={args.method} target_class={target}")
    for pos in explanation.ranking:
        print(f"{explanation.scores[pos]:+.6f}\t{doc.tokens[pos]}")
    return 0


def _cmd_compare(args) -> int:
    config = _load_config(args)
    table = run_comparison(config)
    paths = emit_results(table, config.out_dir, config)
    print(
        f"{len(table.records)} records "
        f"({table.skipped_undefined_tau} skipped, {table.flagged_short_docs} short-doc flags)"
    )
    for path in paths:
        print(f"wrote {path}")
    return 0


def _cmd_conditioning(args) -> int:
    lengths = tuple(int(x) for x in args.lengths.split(","))
    report = run_simulation(lengths=lengths, iterations=args.iters, m=args.m, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_kappa_csv(report, out / "kappa.csv")
    write_bins_csv(report, out / "kappa_bins.csv")
    for l in report.lengths:
        print(
            f"l={l}: mean kappa {report.mean_kappa(l):.3f}, "
            f"{report.fraction_below(l, 30.0):.1%} below 30"
        )
    print(f"wrote {out / 'kappa.csv'} and {out / 'kappa_bins.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exstab", description="explanation stability lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train the built-in classifier")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--out", default=None)
    p_train.add_argument("--seed", type=int, default=None)
    p_train.set_defaults(func=_cmd_train)

    p_explain = sub.add_parser("explain", help="explain one document")
    p_explain.add_argument("--model", required=True)
    p_explain.add_argument("--vocab", required=True)
    p_explain.add_argument("--method", choices=("lime", "kernel_shap", "sample_shapley"), default="lime")
    p_explain.add_argument("--text", required=True)
    p_explain.add_argument("--target", type=int, default=None)
    p_explain.add_argument("--m", type=int, default=200)
    p_explain.add_argument("--permutations", type=int, default=200)
    p_explain.add_argument("--seed", type=int, default=0)
    p_explain.add_argument("--max-length", type=int, default=50)
    p_explain.set_defaults(func=_cmd_explain)

    p_compare = sub.add_parser("compare", help="run the full comparison experiment")
    p_compare.add_argument("--config", required=True)
    p_compare.add_argument("--out", default=None)
    p_compare.add_argument("--seed", type=int, default=None)
    p_compare.set_defaults(func=_cmd_compare)

    p_cond = sub.add_parser("conditioning", help="kernel matrix condition number study")
    p_cond.add_argument("--lengths", default="20,30,40")
    p_cond.add_argument("--iters", type=int, default=500)
    p_cond.add_argument("--m", type=int, default=200)
    p_cond.add_argument("--seed", type=int, default=0)
    p_cond.add_argument("--out", default="results")
    p_cond.set_defaults(func=_cmd_conditioning)

    p_version = sub.add_parser("version", help="print version")
    p_version.set_defaults(func=lambda args: (print(f"exstab {__version__}"), 0)[1])

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
