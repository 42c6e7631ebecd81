"""Command-line interface: train, predict, evaluate, sweep, export-eigenfaces, synth."""
from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from . import __version__
from .classifier import ClassifierRule, knn_classify, image_coords, centroid_classify, train_model
from .dataset import (
    DEFAULT_SIZE,
    SyntheticSpec,
    align_classes,
    generate_synthetic,
    load_image,
    load_manifest,
    save_pgm,
    write_dataset,
)
from .eigenspace import mean_face, reconstruct_eigenface
from .errors import EigenclassError, EmptyInput, IndexOutOfRange, InvalidSpec
from .evaluation import evaluate, sweep_dct, sweep_raw
from .features import DCT, RAW, FeatureConfig
from .persistence import load_model, save_model

DEFAULT_TRAIN_COEFFS = 133
DEFAULT_SWEEP_COEFFS = "10..200"


class UsageError(EigenclassError):
    pass


def parse_size(text: str) -> tuple[int, int]:
    match = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not match:
        raise argparse.ArgumentTypeError(f"size must look like WxH, got {text!r}")
    w, h = int(match.group(1)), int(match.group(2))
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("size must be positive")
    return w, h


def parse_coeffs(text: str) -> list[int]:
    """``N`` or an inclusive range ``lo..hi``."""
    match = re.fullmatch(r"\s*(\d+)\s*(?:\.\.\s*(\d+)\s*)?", text)
    if not match:
        raise argparse.ArgumentTypeError(f"coefficients must be N or lo..hi, got {text!r}")
    lo = int(match.group(1))
    hi = int(match.group(2)) if match.group(2) else lo
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad coefficient range {text!r}")
    return list(range(lo, hi + 1))


def parse_k_list(text: str) -> list[int]:
    try:
        ks = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"k list must be comma-separated integers, got {text!r}") from None
    if any(k < 1 for k in ks):
        raise argparse.ArgumentTypeError("k values must be >= 1")
    return ks


def parse_rule(text: str) -> ClassifierRule:
    try:
        return ClassifierRule.parse(text)
    except EigenclassError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _out(*args):
    print(*args, file=sys.stdout)


def _feature_config(args, size) -> FeatureConfig:
    if args.feature == RAW:
        return FeatureConfig(RAW, *size)
    coeffs = args.coeffs if args.coeffs is not None else [DEFAULT_TRAIN_COEFFS]
    if len(coeffs) != 1:
        raise UsageError("train takes a single coefficient count, not a range")
    return FeatureConfig(DCT, *size, coeffs[0])


def cmd_train(args) -> int:
    ds = load_manifest(args.manifest, root=args.root, size=args.size)
    train = ds.train
    counts = train.class_counts()
    empty = [name for name, n in zip(ds.class_names, counts) if n == 0]
    if empty:
        raise EmptyInput(f"no training images for class(es) {empty}")
    config = _feature_config(args, args.size)
    model = train_model(train, config, args.max_components)
    save_model(model, args.out)
    for name, n in zip(ds.class_names, counts):
        _out(f"class {name}: {n} training images")
    _out(f"features: {config.describe()} (dimension {config.dim})")
    _out(f"retained components: {model.eigenspace.n_components}")
    _out(f"model written to {args.out}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    rule = args.rule or model.default_rule()
    image = load_image(args.image)
    coords = image_coords(model, image)
    if rule.is_centroid:
        _out(model.class_names[centroid_classify(model, coords)])
        return 0
    result = knn_classify(model, coords, rule.k)
    _out(model.class_names[result.label])
    for rank, nb in enumerate(result.neighbors, start=1):
        _out(f"{rank}\ttrain#{nb.index}\t{model.class_names[nb.label]}\t{nb.distance:.6f}")
    return 0


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    rule = args.rule or model.default_rule()
    cfg = model.feature_config
    ds = load_manifest(args.manifest, root=args.root, size=(cfg.image_w, cfg.image_h))
    test = align_classes(ds.subset(args.split), model.class_names)
    if len(test) == 0:
        raise EmptyInput(f"{args.manifest}: {args.split} split is empty")
    if args.out is not None and not Path(args.out).parent.is_dir():
        raise UsageError(f"output directory {Path(args.out).parent} does not exist")
    rate, cm = evaluate(model, test, rule)
    if args.out is not None:
        Path(args.out).write_text(cm.to_csv(), encoding="utf-8", newline="\n")
    _out(f"rule {rule.name}: recognition rate {rate:.4f} ({cm.correct}/{cm.total})")
    return 0


def _confusion_cells(specs, default_n):
    cells = []
    for spec in specs or []:
        n_text, _, rule_text = spec.partition(":")
        if not rule_text:
            raise UsageError(f"confusion cell must be N:rule, got {spec!r}")
        n = default_n if n_text in ("", "raw") else int(n_text)
        cells.append((n, ClassifierRule.parse(rule_text)))
    return cells


def cmd_sweep(args) -> int:
    out = Path(args.out)
    if not out.parent.is_dir():
        raise UsageError(f"output directory {out.parent} does not exist")
    conf_dir = Path(args.confusion_dir) if args.confusion_dir else out.parent
    if args.confusion and not conf_dir.is_dir():
        raise UsageError(f"confusion directory {conf_dir} does not exist")
    ds = load_manifest(args.manifest, root=args.root, size=args.size)
    k_values = args.k if args.k is not None else [1, 3, 5, 7, 9]
    keep = bool(args.confusion)
    if args.feature == RAW:
        result = sweep_raw(ds.train, ds.test, k_values, args.centroid, keep_confusion=keep,
                           max_components=args.max_components)
    else:
        coeffs = args.coeffs if args.coeffs is not None else parse_coeffs(DEFAULT_SWEEP_COEFFS)
        result = sweep_dct(ds.train, ds.test, coeffs, k_values, args.centroid, jobs=args.jobs,
                           keep_confusion=keep, max_components=args.max_components)
    out.write_text(result.to_csv(), encoding="utf-8", newline="\n")
    for n, rule in _confusion_cells(args.confusion, args.size[0] * args.size[1]):
        if (n, rule) not in result.confusions:
            raise UsageError(f"confusion cell {n}:{rule.name} is not part of the sweep")
        dest = conf_dir / f"confusion_{n}_{rule.name}.csv"
        dest.write_text(result.confusions[(n, rule)].to_csv(), encoding="utf-8", newline="\n")
    n, rule, rate = result.best()
    _out(f"{len(result.coeff_counts) * len(result.rules)} cells written to {out}")
    _out(f"best: n_coeffs={n} rule={rule.name} rate={rate:.4f}")
    return 0


def cmd_export_eigenfaces(args) -> int:
    model = load_model(args.model)
    es = model.eigenspace
    cfg = model.feature_config
    if args.count < 0 or args.count > es.n_components:
        raise IndexOutOfRange(f"requested {args.count} eigenfaces, model retains {es.n_components}")
    if cfg.kind != RAW:
        raise InvalidSpec("eigenfaces can only be reshaped to images for raw-pixel models")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    w, h = cfg.image_w, cfg.image_h
    save_pgm(mean_face(es, w, h), out / "mean.pgm")
    for i in range(args.count):
        save_pgm(reconstruct_eigenface(es, i, w, h), out / f"eigenface_{i}.pgm")
    _out(f"wrote mean.pgm and {args.count} eigenfaces to {out}")
    return 0


def cmd_synth(args) -> int:
    w, h = args.size
    spec = SyntheticSpec(n_classes=args.classes, n_train=args.train, n_test=args.test,
                         width=w, height=h, noise=args.noise, contrast=args.contrast)
    ds = generate_synthetic(spec, seed=args.seed)
    manifest = write_dataset(ds, args.out)
    _out(f"wrote {len(ds)} images and {manifest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eigenclass", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_flags(p, size_default=DEFAULT_SIZE):
        p.add_argument("--root", help="directory that manifest paths are relative to (default: manifest's directory)")
        p.add_argument("--size", type=parse_size, default=size_default, metavar="WxH",
                       help="normalized face size (default %(default)s)")

    p = sub.add_parser("train", help="fit a model from the train split of a manifest")
    p.add_argument("manifest")
    data_flags(p)
    p.add_argument("--feature", choices=[RAW, DCT], default=DCT)
    p.add_argument("--coeffs", type=parse_coeffs, help=f"DCT coefficient count (default {DEFAULT_TRAIN_COEFFS})")
    p.add_argument("--max-components", type=int, help="cap on retained principal components")
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify one image")
    p.add_argument("model")
    p.add_argument("image")
    p.add_argument("--rule", type=parse_rule, help="knn<k> or centroid (default knn5 for 2 classes, knn7 otherwise)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="recognition rate and confusion matrix on a manifest split")
    p.add_argument("model")
    p.add_argument("manifest")
    p.add_argument("--root")
    p.add_argument("--rule", type=parse_rule)
    p.add_argument("--split", choices=["train", "test"], default="test")
    p.add_argument("--out", help="confusion-matrix CSV to write")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="recognition rates over coefficient counts and rules")
    p.add_argument("manifest")
    data_flags(p)
    p.add_argument("--feature", choices=[RAW, DCT], default=DCT)
    p.add_argument("--coeffs", type=parse_coeffs, help=f"N or lo..hi (default {DEFAULT_SWEEP_COEFFS})")
    p.add_argument("--k", type=parse_k_list, help="comma-separated k values (default 1,3,5,7,9)")
    p.add_argument("--centroid", action="store_true", help="add the nearest-centroid rule")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-components", type=int)
    p.add_argument("--confusion", action="append", metavar="N:RULE",
                   help="also write the confusion matrix of this cell (repeatable)")
    p.add_argument("--confusion-dir", help="directory for confusion CSVs (default: next to --out)")
    p.add_argument("--out", required=True, help="sweep CSV to write")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export-eigenfaces", help="write the mean face and leading eigenfaces as PGM")
    p.add_argument("model")
    p.add_argument("--count", type=int, default=6)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_export_eigenfaces)

    p = sub.add_parser("synth", help="generate a synthetic labeled face dataset")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--train", type=int, default=100, help="training images per class")
    p.add_argument("--test", type=int, default=50, help="test images per class")
    p.add_argument("--size", type=parse_size, default=(64, 64), metavar="WxH")
    p.add_argument("--noise", type=int, default=SyntheticSpec.noise)
    p.add_argument("--contrast", type=int, default=SyntheticSpec.contrast)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EigenclassError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc.strerror or exc}: {exc.filename or ''}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
