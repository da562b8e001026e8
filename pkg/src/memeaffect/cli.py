"""Command-line front end.

Exit codes: 0 success, 1 validation error (bad input files, labels or
options), 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .classifier import TrainConfig
from .corpus import (
    BINARY_SCHEMAS,
    CATEGORIES,
    FULL_SCHEMAS,
    Dataset,
    collapse_to_binary,
    distribution_report,
    load_dataset,
)
from .errors import ValidationError
from .evaluation import (
    ablation,
    annotator_report,
    confusion_matrix,
    cross_validate,
    load_ratings,
    randolph_kappa,
    score,
)
from .fixtures import generate_fixtures, table1_dataset, write_dataset_csv
from .image import load_emotion_table
from .pipeline import DenseFeatures, PipelineConfig, Resources, TrainedPipeline, train_pipeline
from .rebalance import load_paraphrases
from .text import load_pos_lexicon, load_synonyms

log = logging.getLogger("memeaffect")

_DEFAULT_PIPE = PipelineConfig()
_DEFAULT_TRAIN = TrainConfig()


def write_atomic(path, content: str) -> None:
    """Write ``content`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(args, payload: dict, table: Optional[str] = None) -> None:
    if table:
        print(table)
    if args.out:
        write_atomic(args.out, _dump(payload))
        if table:
            write_atomic(Path(args.out).with_suffix(".txt"), table + "\n")
    elif not table:
        sys.stdout.write(_dump(payload))


# -- argument groups ---------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, out_help: str = "output JSON path") -> None:
    p.add_argument("--config", help="JSON file of option values; command-line flags take precedence")
    p.add_argument("--seed", type=int, default=0, help="master seed for every random choice")
    p.add_argument("--out", help=out_help)


def _add_data(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", help="corpus CSV (id,image,text,sentiment,humour,sarcasm,offensive,motivational)")
    p.add_argument("--images", help="directory holding the image files named in the corpus")
    p.add_argument("--emotions", help="emotion table CSV (id,angry,...,surprised)")
    p.add_argument("--synonyms", help="synonym lexicon TSV (default: bundled)")
    p.add_argument("--pos-lexicon", help="POS lexicon TSV (default: bundled)")
    p.add_argument("--paraphrases", help="paraphrase lexicon TSV (default: bundled)")
    p.add_argument("--binary", action="store_true", help="collapse humour/sarcasm/offensive to present/absent")


def _add_pipeline(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("features and rebalancing")
    bool_opt = argparse.BooleanOptionalAction
    for name in ("tfidf", "stylistic", "ambiguity", "image", "emotion", "balanced", "smote", "augment"):
        g.add_argument(f"--{name}", action=bool_opt, default=getattr(_DEFAULT_PIPE, name), help=f"enable {name}")
    g.add_argument("--smote-k", type=int, default=_DEFAULT_PIPE.smote_k, help="SMOTE neighbours")
    g.add_argument("--smote-dense-only", action=bool_opt, default=_DEFAULT_PIPE.smote_dense_only,
                   help="measure SMOTE neighbour distance on dense columns only")
    g.add_argument("--p-replace", type=float, default=_DEFAULT_PIPE.p_replace, help="paraphrase replacement probability")
    g.add_argument("--copies", type=int, default=_DEFAULT_PIPE.copies, help="augmented copies per training sample")
    g.add_argument("--min-df", type=int, default=_DEFAULT_PIPE.min_df, help="minimum document frequency for n-grams")
    t = p.add_argument_group("classifier")
    t.add_argument("--lam", type=float, default=_DEFAULT_TRAIN.lam, help="L2 strength")
    t.add_argument("--learning-rate", type=float, default=_DEFAULT_TRAIN.learning_rate, help="initial step size")
    t.add_argument("--max-iters", type=int, default=_DEFAULT_TRAIN.max_iters, help="maximum accepted steps")
    t.add_argument("--tol", type=float, default=_DEFAULT_TRAIN.tol, help="relative loss-change stop")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="memeaffect", description=__doc__.splitlines()[0], formatter_class=fmt)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    parser.subcommands = sub.choices

    p = sub.add_parser("stats", help="label distribution report", formatter_class=fmt)
    _add_common(p)
    _add_data(p)

    p = sub.add_parser("featurize", help="dump per-sample dense features", formatter_class=fmt)
    _add_common(p, "output CSV path")
    _add_data(p)

    p = sub.add_parser("train", help="fit features and model on a whole corpus", formatter_class=fmt)
    _add_common(p, "output model JSON path")
    _add_data(p)
    p.add_argument("--category", choices=CATEGORIES, default="sentiment")
    _add_pipeline(p)

    p = sub.add_parser("eval", help="score a trained model on a corpus", formatter_class=fmt)
    _add_common(p)
    _add_data(p)
    p.add_argument("--model", help="model JSON written by 'train'")

    p = sub.add_parser("cv", help="stratified k-fold cross-validation", formatter_class=fmt)
    _add_common(p)
    _add_data(p)
    p.add_argument("--category", choices=CATEGORIES, default="sentiment")
    p.add_argument("--k", type=int, default=10, help="number of folds")
    p.add_argument("--jobs", type=int, default=1, help="folds run concurrently")
    _add_pipeline(p)

    p = sub.add_parser("ablate", help="balanced x augmentation x image ablation grid", formatter_class=fmt)
    _add_common(p)
    _add_data(p)
    p.add_argument("--categories", nargs="+", choices=CATEGORIES, default=list(CATEGORIES))
    p.add_argument("--k", type=int, default=10, help="number of folds")
    p.add_argument("--jobs", type=int, default=1, help="folds run concurrently")
    _add_pipeline(p)

    p = sub.add_parser("kappa", help="free-marginal multirater kappa of a ratings file", formatter_class=fmt)
    _add_common(p)
    p.add_argument("--ratings", help="CSV item_id,gold,rater1,...,raterN")
    p.add_argument("--category", choices=CATEGORIES, default="sentiment")
    p.add_argument("--binary", action="store_true", help="labels use the present/absent schema")

    p = sub.add_parser("annotator-report", help="annotators and model scored against gold", formatter_class=fmt)
    _add_common(p)
    p.add_argument("--ratings", help="CSV item_id,gold,rater1,...,raterN")
    p.add_argument("--preds", help="CSV item_id,label with the model's predictions")
    p.add_argument("--category", choices=CATEGORIES, default="sentiment")
    p.add_argument("--binary", action="store_true", help="labels use the present/absent schema")

    p = sub.add_parser("gen-fixtures", help="write a synthetic corpus, images and lexicons", formatter_class=fmt)
    p.add_argument("--config", help="JSON file of option values")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="fixtures", help="output directory")
    p.add_argument("--n-samples", type=int, default=40)
    p.add_argument("--table1", action="store_true", help="also write table1.csv (7001 text-only rows)")
    return parser


_REQUIRED = {
    "stats": ("data",),
    "featurize": ("data", "out"),
    "train": ("data", "out"),
    "eval": ("data", "model"),
    "cv": ("data",),
    "ablate": ("data",),
    "kappa": ("ratings",),
    "annotator-report": ("ratings", "preds"),
    "gen-fixtures": (),
}


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        raise ValidationError("a subcommand is required")
    if getattr(args, "config", None):
        try:
            values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(values, dict):
            raise ValidationError("config file must hold a JSON object")
        values = {k.replace("-", "_"): v for k, v in values.items()}
        unknown = sorted(set(values) - set(vars(args)) - {"command"})
        if unknown:
            raise ValidationError(f"unknown config key(s): {', '.join(unknown)}")
        parser.subcommands[args.command].set_defaults(**values)
        args = parser.parse_args(argv)
    missing = [f"--{a.replace('_', '-')}" for a in _REQUIRED[args.command] if getattr(args, a) in (None, "")]
    if missing:
        raise ValidationError(f"{args.command}: missing required option(s) {', '.join(missing)}")
    return args


# -- helpers -----------------------------------------------------------------


def _existing(path, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"{what} not found: {path}")
    return p


def _dataset(args) -> Dataset:
    images = _existing(args.images, "image directory") if args.images else None
    d = load_dataset(_existing(args.data, "corpus"), images)
    return collapse_to_binary(d) if args.binary else d


def _resources(args) -> Resources:
    return Resources(
        pos_lexicon=load_pos_lexicon(_existing(args.pos_lexicon, "POS lexicon") if args.pos_lexicon else None),
        synonyms=load_synonyms(_existing(args.synonyms, "synonym lexicon") if args.synonyms else None),
        paraphrases=load_paraphrases(_existing(args.paraphrases, "paraphrase lexicon") if args.paraphrases else None),
        emotions=load_emotion_table(_existing(args.emotions, "emotion table")) if args.emotions else {},
    )


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        tfidf=args.tfidf,
        stylistic=args.stylistic,
        ambiguity=args.ambiguity,
        image=args.image,
        emotion=args.emotion,
        balanced=args.balanced,
        smote=args.smote,
        smote_k=args.smote_k,
        smote_dense_only=args.smote_dense_only,
        augment=args.augment,
        p_replace=args.p_replace,
        copies=args.copies,
        min_df=args.min_df,
        train=TrainConfig(args.lam, args.learning_rate, args.max_iters, args.tol),
    )


def _schema_for(args):
    return (BINARY_SCHEMAS if args.binary else FULL_SCHEMAS)[args.category]


# -- subcommands ---------------------------------------------------------------


def cmd_stats(args) -> None:
    rep = distribution_report(_dataset(args))
    payload = {"n_samples": rep.n_samples, "distribution": rep.to_dict(), "by_level": rep.by_level()}
    _emit(args, payload, rep.to_text())


def cmd_featurize(args) -> None:
    d = _dataset(args)
    dense = DenseFeatures(_resources(args))
    blocks = ["stylistic", "ambiguity", "image", "emotion"]
    X = dense.matrix(d.samples, blocks)
    rows = [["id"] + dense.names(blocks)]
    rows += [[s.id] + [repr(float(v)) for v in x] for s, x in zip(d.samples, X)]
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    write_atomic(args.out, buf.getvalue())
    print(f"wrote {len(d)} rows x {X.shape[1]} features to {args.out}")


def cmd_train(args) -> None:
    d = _dataset(args)
    dense = DenseFeatures(_resources(args))
    trained = train_pipeline(d, np.arange(len(d)), args.category, _pipeline_config(args), dense, args.seed)
    write_atomic(args.out, json.dumps(trained.to_dict()) + "\n")
    m = trained.model
    print(f"trained {args.category}: k={m.k} d={m.d} steps={len(m.trace) - 1} final_loss={m.final_loss:.6f}")


def cmd_eval(args) -> None:
    try:
        trained = TrainedPipeline.from_dict(json.loads(_existing(args.model, "model").read_text(encoding="utf-8")))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed model file {args.model}: {exc}") from None
    d = _dataset(args)
    schema = d.schemas[trained.category]
    if tuple(schema.levels) != tuple(trained.levels):
        raise ValidationError(f"model levels {trained.levels} do not match the corpus schema {schema.levels}")
    pred = trained.predict(d.samples, DenseFeatures(_resources(args)))
    gold = d.labels(trained.category)
    m = score(gold, pred, schema.k)
    payload = {"category": trained.category, "levels": list(schema.levels), "n": len(d), **m.to_dict(),
               "confusion_matrix": confusion_matrix(gold, pred, schema.k).tolist()}
    _emit(args, payload, f"{trained.category}: macro-F1 {100 * m.macro_f1:.2f}%  accuracy {100 * m.accuracy:.2f}%")


def cmd_cv(args) -> None:
    d = _dataset(args)
    rep = cross_validate(d, args.category, _pipeline_config(args), args.k, args.seed,
                         resources=_resources(args), jobs=args.jobs)
    _emit(args, rep.to_dict(), rep.to_text())


def cmd_ablate(args) -> None:
    d = _dataset(args)
    start = time.perf_counter()
    rep = ablation(d, args.categories, args.k, args.seed, _pipeline_config(args), _resources(args), args.jobs)
    log.info("ablation finished in %.1f s", time.perf_counter() - start)
    _emit(args, rep.to_dict(), rep.to_text())


def cmd_kappa(args) -> None:
    schema = _schema_for(args)
    _, _, ratings = load_ratings(_existing(args.ratings, "ratings file"), schema)
    kappa = randolph_kappa(ratings, schema.k)
    payload = {"category": schema.category, "items": int(ratings.shape[0]), "raters": int(ratings.shape[1]), "kappa": kappa}
    _emit(args, payload, f"{schema.category}: free-marginal kappa {kappa:.4f} ({ratings.shape[0]} items, {ratings.shape[1]} raters)")


def _load_preds(path, schema) -> Dict[str, int]:
    out = {}
    with open(_existing(path, "predictions file"), newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"item_id", "label"} <= set(reader.fieldnames):
            raise ValidationError(f"{path}: header must contain item_id,label")
        for row in reader:
            try:
                out[row["item_id"]] = schema.index(row["label"].strip())
            except ValueError:
                raise ValidationError(f"{path}: unknown {schema.category} label {row['label']!r}") from None
    return out


def cmd_annotator_report(args) -> None:
    schema = _schema_for(args)
    ids, gold, ratings = load_ratings(_existing(args.ratings, "ratings file"), schema)
    preds = _load_preds(args.preds, schema)
    missing = [i for i in ids if i not in preds]
    if missing:
        raise ValidationError(f"no prediction for {len(missing)} item(s), e.g. {missing[0]!r}")
    rep = annotator_report(ratings, gold, [preds[i] for i in ids], schema.k, schema.category)
    _emit(args, rep.to_dict(), rep.to_text())


def cmd_gen_fixtures(args) -> None:
    paths = generate_fixtures(args.out, args.n_samples, args.seed)
    if args.table1:
        paths["table1"] = Path(args.out) / "table1.csv"
        write_dataset_csv(table1_dataset(args.seed), paths["table1"])
    for role, path in sorted(paths.items()):
        print(f"{role:<12}{path}")


COMMANDS = {
    "stats": cmd_stats,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "eval": cmd_eval,
    "cv": cmd_cv,
    "ablate": cmd_ablate,
    "kappa": cmd_kappa,
    "annotator-report": cmd_annotator_report,
    "gen-fixtures": cmd_gen_fixtures,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ValidationError, FileNotFoundError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - anything else is a runtime failure
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
