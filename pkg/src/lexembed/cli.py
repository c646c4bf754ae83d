"""Command-line pipeline: vocab -> cooc -> train -> export -> eval/sweep.

Every command writes a `<output>.manifest` file recording the effective
parameters, input file checksums, and tool version, so any run can be
reproduced exactly from its manifest.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import tempfile

from . import __version__
from .corpus import (
    Vocabulary,
    build_cooccurrence,
    build_vocab,
    load_cooc,
    read_lines,
    save_cooc,
)
from .embeddings import EmbeddingTable
from .errors import LexembedError
from .evaluation import (
    eval_analogy,
    eval_similarity,
    load_analogy_dataset,
    load_similarity_dataset,
)
from .lexicon import load_relations, symmetrize
from .trainer import (
    Hyperparams,
    compose_embeddings,
    load_model,
    save_model,
    train,
)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(output_path, command: str, params: dict, inputs: dict) -> None:
    lines = [f"tool_version={__version__}", f"command={command}"]
    for key in sorted(params):
        lines.append(f"{key}={params[key]}")
    for name in sorted(inputs):
        path = inputs[name]
        lines.append(f"input.{name}={path}")
        lines.append(f"input.{name}.sha256={_sha256(path)}")
    _atomic_write_text(str(output_path) + ".manifest", "\n".join(lines) + "\n")


def _atomic_write_text(path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)) or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_output(path, write_fn) -> None:
    """Run write_fn against a temp path, then rename over the target."""
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)) or ".")
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _hyperparams(args) -> Hyperparams:
    return Hyperparams(
        dim=args.dim,
        reg_weight=getattr(args, "lambda_"),
        alpha=args.alpha,
        t_max=args.tmax,
        learning_rate=args.lr,
        epochs=args.epochs,
        seed=args.seed,
        adagrad_eps=args.adagrad_eps,
    )


def _load_relation_set(args, vocab: Vocabulary):
    if args.relations is None:
        return None
    rel = load_relations(args.relations, args.relation, vocab)
    if rel.skipped:
        print(f"skipped {rel.skipped} out-of-vocabulary relation pairs", file=sys.stderr)
    if args.symmetric:
        rel = symmetrize(rel)
    return rel


def _add_hyper_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, default=300)
    p.add_argument("--alpha", type=float, default=0.75)
    p.add_argument("--tmax", type=float, default=100.0)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lambda", dest="lambda_", type=float, default=10000.0)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--adagrad-eps", type=float, default=1e-8)


def _add_relation_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--relations", help="relation-pair TSV file")
    p.add_argument("--relation", help="relation label to keep")
    p.add_argument("--symmetric", action="store_true", help="symmetrize loaded pairs")
    p.add_argument("--reg-schedule", choices=["cooc-only", "union"], default="union")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexembed",
        description="Train and evaluate lexicon-regularized word embeddings.",
    )
    parser.add_argument("--version", action="version", version=f"lexembed {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vocab", help="build the frequency-thresholded vocabulary")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True, help="output vocabulary file")
    p.add_argument("--min-count", type=int, default=20)

    p = sub.add_parser("cooc", help="build the sparse co-occurrence matrix")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--cooc", required=True, help="output binary matrix file")
    p.add_argument("--window", type=int, default=10)

    p = sub.add_parser("train", help="train the joint embedding model")
    p.add_argument("--cooc", required=True)
    p.add_argument("--vocab", help="required when --relations is given")
    p.add_argument("--model", required=True, help="output checkpoint file")
    _add_relation_flags(p)
    _add_hyper_flags(p)

    p = sub.add_parser("export", help="export composed embeddings as text")
    p.add_argument("--model", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("eval-sim", help="score a similarity benchmark")
    p.add_argument("--vectors", required=True, help="embedding text file")
    p.add_argument("--dataset", required=True, help="word1<TAB>word2<TAB>score file")
    p.add_argument("--output", help="report TSV (default: stdout)")

    p = sub.add_parser("eval-analogy", help="score an analogy benchmark")
    p.add_argument("--vectors", required=True)
    p.add_argument("--dataset", required=True, help="Google-format analogy file")
    p.add_argument("--output", help="report TSV (default: stdout)")

    p = sub.add_parser("sweep", help="train/evaluate across one hyperparameter axis")
    p.add_argument("--corpus", required=True)
    p.add_argument("--dataset", required=True, help="validation similarity dataset")
    p.add_argument("--output", required=True, help="output TSV of value<TAB>metric")
    p.add_argument("--axis", required=True, choices=["dim", "corpus-fraction", "lambda"])
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--min-count", type=int, default=20)
    _add_relation_flags(p)
    _add_hyper_flags(p)

    return parser


def _check_flag_conflicts(parser, args) -> None:
    if getattr(args, "symmetric", False) and not getattr(args, "relations", None):
        parser.error("--symmetric requires --relations")
    if getattr(args, "relations", None) and not getattr(args, "relation", None):
        parser.error("--relations requires --relation")
    if args.command == "train" and args.relations and not args.vocab:
        parser.error("--relations requires --vocab to map words to ids")


def _params_of(args, skip=("command",)) -> dict:
    params = {}
    for key, value in sorted(vars(args).items()):
        if key in skip or value is None:
            continue
        params[key.replace("lambda_", "lambda")] = value
    return params


def _cmd_vocab(args) -> int:
    vocab = build_vocab(read_lines(args.corpus), min_count=args.min_count)
    _atomic_output(args.vocab, lambda tmp: vocab.save(tmp))
    _write_manifest(args.vocab, "vocab", _params_of(args), {"corpus": args.corpus})
    print(f"vocabulary: {len(vocab)} words", file=sys.stderr)
    return 0


def _cmd_cooc(args) -> int:
    vocab = Vocabulary.load(args.vocab)
    matrix = build_cooccurrence(read_lines(args.corpus), vocab, window=args.window)
    _atomic_output(args.cooc, lambda tmp: save_cooc(matrix, tmp))
    _write_manifest(
        args.cooc, "cooc", _params_of(args), {"corpus": args.corpus, "vocab": args.vocab}
    )
    print(f"co-occurrence matrix: {matrix.nnz} entries", file=sys.stderr)
    return 0


def _cmd_train(args) -> int:
    cooc = load_cooc(args.cooc)
    rel = None
    inputs = {"cooc": args.cooc}
    if args.relations:
        vocab = Vocabulary.load(args.vocab)
        rel = _load_relation_set(args, vocab)
        inputs["vocab"] = args.vocab
        inputs["relations"] = args.relations
    hp = _hyperparams(args)
    model = train(
        cooc,
        rel,
        hp,
        reg_schedule=args.reg_schedule,
        threads=args.threads,
        diagnostics=sys.stderr,
    )
    _atomic_output(args.model, lambda tmp: save_model(model, tmp))
    _write_manifest(args.model, "train", _params_of(args), inputs)
    return 0


def _cmd_export(args) -> int:
    model = load_model(args.model)
    vocab = Vocabulary.load(args.vocab)
    if len(vocab) != model.vocab_size:
        raise LexembedError(
            f"vocabulary size {len(vocab)} does not match checkpoint {model.vocab_size}"
        )
    table = compose_embeddings(model, vocab)
    _atomic_output(args.output, lambda tmp: table.save_text(tmp))
    _write_manifest(
        args.output, "export", _params_of(args), {"model": args.model, "vocab": args.vocab}
    )
    return 0


def _emit_report(args, report, inputs) -> int:
    header = "dataset\tmetric\tvalue\tn_scored\tn_total\tz\tp"
    text = header + "\n" + report.tsv_row() + "\n"
    if args.output:
        _atomic_write_text(args.output, text)
        _write_manifest(args.output, args.command, _params_of(args), inputs)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_eval_sim(args) -> int:
    emb = EmbeddingTable.load_text(args.vectors)
    ds = load_similarity_dataset(args.dataset)
    report = eval_similarity(emb, ds)
    return _emit_report(args, report, {"vectors": args.vectors, "dataset": args.dataset})


def _cmd_eval_analogy(args) -> int:
    emb = EmbeddingTable.load_text(args.vectors)
    ds = load_analogy_dataset(args.dataset)
    report = eval_analogy(emb, ds)
    if report.sections:
        for label, (acc, scored, total) in report.sections.items():
            print(f"section {label}: accuracy={acc:.4f} ({scored}/{total} scored)", file=sys.stderr)
    return _emit_report(args, report, {"vectors": args.vectors, "dataset": args.dataset})


def _subsample_lines(lines: list[str], fraction: float, seed: int) -> list[str]:
    import numpy as np

    if not 0 < fraction <= 1:
        raise ValueError(f"corpus fraction must be in (0, 1], got {fraction}")
    if fraction == 1.0:
        return lines
    rng = np.random.default_rng(seed)
    n = max(1, int(round(fraction * len(lines))))
    keep = sorted(rng.choice(len(lines), size=n, replace=False))
    return [lines[k] for k in keep]


def _cmd_sweep(args) -> int:
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise LexembedError("--values must list at least one value")
    all_lines = list(read_lines(args.corpus))
    ds = load_similarity_dataset(args.dataset)
    base_hp = _hyperparams(args)

    def run_once(lines, hp) -> float:
        vocab = build_vocab(lines, min_count=args.min_count)
        cooc = build_cooccurrence(lines, vocab, window=args.window)
        rel = None
        if args.relations:
            rel = load_relations(args.relations, args.relation, vocab)
            if args.symmetric:
                rel = symmetrize(rel)
        model = train(cooc, rel, hp, reg_schedule=args.reg_schedule, threads=args.threads)
        return eval_similarity(compose_embeddings(model, vocab), ds).value

    rows = []
    for raw in values:
        hp = base_hp
        lines = all_lines
        if args.axis == "dim":
            hp = Hyperparams(**{**vars(base_hp), "dim": int(raw)})
        elif args.axis == "lambda":
            hp = Hyperparams(**{**vars(base_hp), "reg_weight": float(raw)})
        else:
            lines = _subsample_lines(all_lines, float(raw), args.seed)
        metric = run_once(lines, hp)
        rows.append(f"{raw}\t{metric:.6g}")
        print(f"sweep {args.axis}={raw}: spearman={metric:.4f}", file=sys.stderr)

    _atomic_write_text(args.output, "\n".join(rows) + "\n")
    inputs = {"corpus": args.corpus, "dataset": args.dataset}
    if args.relations:
        inputs["relations"] = args.relations
    _write_manifest(args.output, "sweep", _params_of(args), inputs)
    return 0


_COMMANDS = {
    "vocab": _cmd_vocab,
    "cooc": _cmd_cooc,
    "train": _cmd_train,
    "export": _cmd_export,
    "eval-sim": _cmd_eval_sim,
    "eval-analogy": _cmd_eval_analogy,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_flag_conflicts(parser, args)
    try:
        return _COMMANDS[args.command](args)
    except (LexembedError, OSError, ValueError) as exc:
        print(f"lexembed {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
