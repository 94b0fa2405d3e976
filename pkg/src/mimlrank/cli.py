"""Command line interface.

Subcommands: train, predict, eval, inspect, synth.  Exit codes: 0 on
success, 1 on data or model errors, 2 on usage errors.  Machine-readable
outputs are JSON-lines so downstream plotting needs no UI here.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io as dataio
from .config import TrainConfig, Variant
from .io import DatasetFormatError
from .metrics import evaluate_model, sub_concept_report
from .model import ModelFormatError, load_model, save_model
from .scoring import bag_score, predict_labels, rank_labels
from .synth import SynthSpec, generate_synthetic
from .training import train

_VARIANTS = {v.value: v for v in Variant}


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, default=100, help="shared space width (candidates: 50, 100, 200)")
    p.add_argument("--K", type=int, default=5, help="sub-concepts per label (candidates: 1, 5, 10, 15)")
    p.add_argument("--C", type=float, default=1.0, help="norm bound (candidates: 1, 5, 10)")
    p.add_argument("--gamma0", type=float, default=1e-3,
                   help="initial step size (candidates: 1e-4, 5e-4, 1e-3, 5e-3)")
    p.add_argument("--eta", type=float, default=1e-5,
                   help="step decay: gamma0/(1+eta*gamma0*t) (candidates: 1e-5, 1e-6)")
    p.add_argument("--max-iters", type=int, default=100_000)
    p.add_argument("--eval-every", type=int, default=5_000)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", choices=sorted(_VARIANTS), default="full")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimlrank", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write it to disk")
    p.add_argument("--data", required=True, help="training dataset (JSON-lines)")
    p.add_argument("--out", required=True, help="model output path")
    p.add_argument("--history", help="optional JSON-lines training history output")
    _add_train_flags(p)

    p = sub.add_parser("predict", help="rank labels and select relevant ones per bag")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="-", help="JSON-lines output ('-' for stdout)")

    p = sub.add_parser("eval", help="compute the ranking criteria on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--with-key-instances", action="store_true",
                   help="also score key-instance detection (needs instance labels)")
    p.add_argument("--format", choices=["text", "records"], default="text")
    p.add_argument("--out", default="-")

    p = sub.add_parser("inspect", help="key instance and sub-concept per (bag, label)")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="-", help="JSON-lines rows ('-' for stdout)")

    p = sub.add_parser("synth", help="generate a planted-model synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=2000, help="number of bags")
    p.add_argument("--z", type=int, default=5, help="instances per bag")
    p.add_argument("--d", type=int, default=20, help="feature dimension")
    p.add_argument("--L", type=int, default=5, help="number of labels")
    p.add_argument("--K-true", type=int, default=2, help="planted sub-concepts per label")
    p.add_argument("--m-true", type=int, default=10, help="planted shared-space width")
    p.add_argument("--noise-sigma", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--antipodal-labels", default="",
                   help="comma-separated label ids given two opposing modes")
    return parser


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _cmd_train(args, parser: argparse.ArgumentParser) -> int:
    try:
        cfg = TrainConfig(
            m=args.m,
            K=args.K,
            C=args.C,
            gamma0=args.gamma0,
            eta=args.eta,
            max_iters=args.max_iters,
            eval_every=args.eval_every,
            patience=args.patience,
            validation_fraction=args.val_fraction,
            rng_seed=args.seed,
            variant=_VARIANTS[args.variant],
        )
    except ValueError as exc:
        parser.error(str(exc))  # bad hyperparameter values are usage errors
    dataset = dataio.load(args.data)
    model, state = train(dataset, cfg)
    save_model(model, args.out)
    if args.history:
        with open(args.history, "w", encoding="utf-8") as fh:
            for t, val_rl, cum in state.history:
                fh.write(json.dumps({
                    "iteration": t,
                    "val_ranking_loss": val_rl,
                    "cumulative_loss": cum,
                }) + "\n")
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    dataset = dataio.load(args.data)
    if dataset.feature_dim != model.feature_dim:
        raise DatasetFormatError(
            f"data feature_dim {dataset.feature_dim} != model feature_dim {model.feature_dim}"
        )
    out, close = _open_out(args.out)
    try:
        for bag in dataset.bags:
            out.write(json.dumps({
                "id": bag.id,
                "ranking": [[l, s] for l, s in rank_labels(model, bag)],
                "relevant": sorted(predict_labels(model, bag)),
            }) + "\n")
    finally:
        if close:
            out.close()
    return 0


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    dataset = dataio.load(args.data)
    report = evaluate_model(model, dataset, with_key_instances=args.with_key_instances)
    out, close = _open_out(args.out)
    try:
        if args.format == "records":
            out.write(json.dumps(report.to_record()) + "\n")
        else:
            out.write(report.to_text() + "\n")
    finally:
        if close:
            out.close()
    return 0


def _cmd_inspect(args) -> int:
    model = load_model(args.model)
    dataset = dataio.load(args.data)
    out, close = _open_out(args.out)
    try:
        for bag in dataset.bags:
            for l in bag.labels:
                found = bag_score(model, bag, l)
                out.write(json.dumps({
                    "id": bag.id,
                    "label": l,
                    "key_instance": found.key_instance,
                    "sub_concept": found.sub_concept,
                }) + "\n")
    finally:
        if close:
            out.close()
    histogram = sub_concept_report(model, dataset)
    print(json.dumps({"sub_concept_histogram": histogram.tolist()}))
    return 0


def _cmd_synth(args, parser: argparse.ArgumentParser) -> int:
    try:
        antipodal = tuple(int(x) for x in args.antipodal_labels.split(",") if x.strip())
        spec = SynthSpec(
            n_bags=args.n,
            z=args.z,
            d=args.d,
            L=args.L,
            K_true=args.K_true,
            m_true=args.m_true,
            noise_sigma=args.noise_sigma,
            rng_seed=args.seed,
            antipodal_labels=antipodal,
        )
    except ValueError as exc:
        parser.error(str(exc))  # invalid spec is a usage error
    dataio.save(generate_synthetic(spec), args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            return _cmd_train(args, parser)
        if args.command == "predict":
            return _cmd_predict(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "inspect":
            return _cmd_inspect(args)
        if args.command == "synth":
            return _cmd_synth(args, parser)
        parser.error(f"unknown command {args.command!r}")
    except (DatasetFormatError, ModelFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
