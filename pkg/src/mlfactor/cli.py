"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 domain error, 3 no factor found.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import kernels
from .encode import EncodingError, build_feature_matrix, encode_one, rat_base
from .fermat import DomainError, factor_fermat, factor_lawrence
from .neuralnet import CheckpointError, TrainConfig, classify, load_checkpoint_with_meta, train
from .numtheory import format_rational, next_prime, parse_rational
from .search import SearchConfig, Status, estimate_success_probability, factor_ml_binary_search
from .semigen import CorpusFormatError, RatioInterval, generate_training_semiprimes, load_dataset

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NO_FACTOR = 0, 1, 2, 3

DEFAULT_FRACTIONS = "0.0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}")


def _bigint(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal integer: {text!r}")


def _emit(args, text: str) -> None:
    if args.out and args.command not in ("gen", "train"):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------


def cmd_gen(args) -> int:
    if not args.out:
        raise UsageError("gen needs --out")
    ds = generate_training_semiprimes(
        args.bits, args.ratio_min, args.ratio_max, args.delta_scale, args.count,
        seed=args.seed, workers=args.workers or args.threads, threads=args.threads,
        with_ground_truth=args.with_ground_truth,
    )
    side = ds.save(args.out)
    neg, pos = ds.class_counts()
    print(f"wrote {len(ds)} samples to {args.out} (metadata {side})")
    print(f"label 1: {pos}")
    print(f"label 0: {neg}")
    return EXIT_OK


def cmd_train(args) -> int:
    ds = load_dataset(args.corpus)
    fm = build_feature_matrix(ds, args.base)
    cfg = TrainConfig(seed=args.seed)
    if args.epochs is not None:
        cfg.max_epochs = args.epochs
    if args.batch_size is not None:
        cfg.batch_size = args.batch_size
    if args.patience is not None:
        cfg.patience = args.patience
    model, report = train(fm, cfg, checkpoint_path=args.checkpoint_out)
    doc = {
        "corpus": str(args.corpus),
        "base": format_rational(fm.base),
        "width": fm.width,
        "train_config": cfg.to_json(),
        **report.to_json(),
    }
    report_path = Path(args.out) if args.out else Path(args.checkpoint_out).with_suffix(".report.json")
    report_path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"epochs run: {report.epochs_run} (best epoch {report.best_epoch})")
    print(f"in-sample accuracy = {report.in_sample_accuracy:.4f}")
    print(f"accuracy = {report.out_of_sample_accuracy:.4f}")
    cm = report.confusion
    print("confusion (rows actual T/F, cols predicted T/F):")
    print(f"  {cm[0][0]:.3f} {cm[0][1]:.3f}")
    print(f"  {cm[1][0]:.3f} {cm[1][1]:.3f}")
    print(f"checkpoint: {args.checkpoint_out}")
    print(f"report: {report_path}")
    return EXIT_OK


def cmd_classify(args) -> int:
    model, meta = load_checkpoint_with_meta(args.checkpoint)
    base = args.base if args.base is not None else parse_rational(meta.get("base") or "2")
    digits = rat_base(args.n, base).digits
    if len(digits) > model.input_width:
        raise EncodingError(f"n has {len(digits)} digits in base {base}; model width is {model.input_width}")
    label, prob = classify(model, encode_one(args.n, base, model.input_width))
    if args.format == "json":
        _emit(args, json.dumps({"n": str(args.n), "label": label, "prob": prob}) + "\n")
    else:
        _emit(args, f"label = {label}\nprob = {prob!r}\n")
    return EXIT_OK


def _factor_lines(n, res) -> dict:
    out = {"n": str(n), "succeeded": res.succeeded, "iterations": res.iterations}
    if res.succeeded:
        out["factor"] = str(res.factor)
        out["cofactor"] = str(n // res.factor)
    if res.ratio is not None:
        out["ratio"] = format_rational(res.ratio)
    return out


def cmd_factor(args) -> int:
    n = args.n
    if args.method == "fermat":
        res = factor_fermat(n, args.max_iter or 65536)
        doc = _factor_lines(n, res)
    elif args.method == "lawrence":
        if args.ratio is None:
            raise UsageError("--method lawrence needs --ratio u/v")
        res = factor_lawrence(n, args.ratio, args.max_iter or 100000)
        doc = _factor_lines(n, res)
    else:
        tcfg = TrainConfig(seed=args.seed)
        if args.epochs is not None:
            tcfg.max_epochs = args.epochs
        if args.batch_size is not None:
            tcfg.batch_size = args.batch_size
        cfg = SearchConfig(
            initial_interval=RatioInterval(args.ratio_min, args.ratio_max),
            n_train=args.n_train,
            p_min=args.p_min,
            max_iter_lawrence=args.max_iter or 100000,
            max_depth=args.max_depth,
            train_cfg=tcfg,
            seed=args.seed,
            base=args.base if args.base is not None else Fraction(2),
            threads=args.threads,
        )
        outcome = factor_ml_binary_search(n, cfg)
        doc = {"n": str(n), **outcome.to_json()}
        if outcome.factor is not None:
            doc["cofactor"] = str(n // outcome.factor)
        if args.trace_out:
            Path(args.trace_out).write_text(outcome.dumps() + "\n", encoding="utf-8")
        if args.format == "json":
            _emit(args, json.dumps(doc, indent=2) + "\n")
        else:
            lines = [f"status = {outcome.status.value}", f"depths = {len(outcome.trace)}"]
            if outcome.factor is not None:
                lines += [f"factor = {outcome.factor}", f"cofactor = {n // outcome.factor}"]
            _emit(args, "\n".join(lines) + "\n")
        return EXIT_OK if outcome.status is Status.FACTORED else EXIT_NO_FACTOR

    if args.format == "json":
        _emit(args, json.dumps(doc, indent=2) + "\n")
    else:
        lines = []
        if res.succeeded:
            lines += [f"factor = {doc['factor']}", f"cofactor = {doc['cofactor']}"]
        else:
            lines.append("no factor found")
        if res.ratio is not None and args.method == "lawrence":
            lines.append(f"ratio = {doc['ratio']}")
        lines.append(f"iterations = {res.iterations}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if res.succeeded else EXIT_NO_FACTOR


def sweep_rows(bits_list, fractions, max_iter):
    """Iteration counts for p = next_prime(2**k + 2**j), q = next_prime(2**k), j = round(f*k)."""
    rows = []
    for k in bits_list:
        q = next_prime(2**k)
        for f in fractions:
            j = int(f * k + Fraction(1, 2))
            p = next_prime(2**k + 2**j)
            res = factor_fermat(p * q, max_iter)
            rows.append({
                "n_bits": k,
                "fraction": f,
                "n_lsb_bits": j,
                "iterations": res.iterations,
                "censored": 0 if res.succeeded else 1,
            })
    return rows


def cmd_sweep(args) -> int:
    try:
        bits_list = [int(b) for b in args.bits_list.split(",") if b.strip()]
        fractions = [Fraction(f.strip()) for f in args.fractions.split(",") if f.strip()]
    except ValueError as exc:
        raise UsageError(str(exc))
    for f in fractions:
        if not 0 <= f <= 1:
            raise UsageError(f"fraction out of [0, 1]: {f}")
    rows = sweep_rows(bits_list, fractions, args.max_iter)
    for r in rows:
        r["fraction"] = _decimal(r["fraction"])
    if args.format == "json":
        _emit(args, json.dumps({"max_iter": args.max_iter, "rows": rows}, indent=2) + "\n")
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["n_bits", "fraction", "n_lsb_bits", "iterations", "censored"],
                           lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        _emit(args, buf.getvalue())
    return EXIT_OK


def _decimal(f: Fraction) -> str:
    s = f"{float(f):.6f}".rstrip("0")
    return s + "0" if s.endswith(".") else s


def cmd_estimate(args) -> int:
    if args.n is not None:
        n_bits = args.n.bit_length()
    elif args.bits is not None:
        n_bits = args.bits
    else:
        raise UsageError("estimate needs --bits or --n")
    prob = estimate_success_probability(args.p_bar, n_bits)
    if args.format == "json":
        _emit(args, json.dumps({"p_bar": args.p_bar, "n_bits": n_bits, "probability": prob}) + "\n")
    else:
        _emit(args, f"n_bits = {n_bits}\nprobability = {prob:.6g}\n")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--out", default=None, help="output file (default: standard output)")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("-v", "--verbose", action="count", default=0)

    parser = _Parser(prog="mlfactor", description="Fermat/Lawrence factoring and ML ratio search.")
    parser.add_argument("--version", action="version", version=f"%(prog)s 0.1.0 ({kernels.BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common], help="generate a labelled semiprime corpus")
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--ratio-min", type=_rational, required=True)
    p.add_argument("--ratio-max", type=_rational, required=True)
    p.add_argument("--delta-scale", type=_rational, default=Fraction(1, 2))
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--workers", type=int, default=None,
                   help="number of independent generator streams (default: --threads)")
    p.add_argument("--with-ground-truth", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", parents=[common], help="train a classifier on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--base", type=_rational, default=Fraction(2))
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--checkpoint-out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", parents=[common], help="classify one integer with a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--n", type=_bigint, required=True)
    p.add_argument("--base", type=_rational, default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("factor", parents=[common], help="factor an integer")
    p.add_argument("--n", type=_bigint, required=True)
    p.add_argument("--method", choices=("fermat", "lawrence", "ml-search"), default="fermat")
    p.add_argument("--ratio", type=_rational, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    s = p.add_argument_group("ml-search options")
    s.add_argument("--ratio-min", type=_rational, default=Fraction(1))
    s.add_argument("--ratio-max", type=_rational, default=Fraction(16))
    s.add_argument("--n-train", type=int, default=10_000)
    s.add_argument("--p-min", type=float, default=0.5)
    s.add_argument("--max-depth", type=int, default=None)
    s.add_argument("--base", type=_rational, default=None)
    s.add_argument("--epochs", type=int, default=None)
    s.add_argument("--batch-size", type=int, default=None)
    s.add_argument("--trace-out", default=None)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("sweep", parents=[common], help="Fermat iteration counts vs. prime gap")
    p.add_argument("--bits-list", default="100,300,500,700,900")
    p.add_argument("--fractions", default=DEFAULT_FRACTIONS)
    p.add_argument("--max-iter", type=int, default=200_000)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("estimate", parents=[common], help="success probability p_bar**(bits/2)")
    p.add_argument("--p-bar", type=float, required=True)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--bits", type=int)
    grp.add_argument("--n", type=_bigint)
    p.set_defaults(func=cmd_estimate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mlfactor: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, EncodingError, CorpusFormatError, CheckpointError, ValueError) as exc:
        print(f"mlfactor: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
