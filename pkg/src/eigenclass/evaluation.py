"""Recognition rates, confusion matrices and parameter sweeps."""
from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .classifier import ClassifierRule, TrainedModel, classify_coords, fit_model
from .dataset import LabeledDataset
from .eigenspace import project
from .errors import (
    CoefficientCountOutOfRange,
    DimensionMismatch,
    EigenclassError,
    EmptyInput,
    EmptyMatrix,
    LengthMismatch,
    UnknownLabel,
)
from .features import DCT, RAW, FeatureConfig, extract, raw_pixel_vector, zigzag_dct


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes."""

    counts: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        c = len(self.class_names)
        if counts.shape != (c, c):
            raise LengthMismatch(f"counts shape {counts.shape} does not match {c} classes")
        if (counts < 0).any():
            raise ValueError("confusion counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.class_names == other.class_names and np.array_equal(self.counts, other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("," + ",".join(self.class_names) + "\n")
        for name, row in zip(self.class_names, self.counts):
            buf.write(name + "," + ",".join(str(int(v)) for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ConfusionMatrix":
        lines = [ln for ln in text.split("\n") if ln]
        names = tuple(lines[0].split(",")[1:])
        rows = [[int(v) for v in ln.split(",")[1:]] for ln in lines[1:]]
        return cls(np.array(rows, dtype=np.int64).reshape(len(names), len(names)), names)


def _label_indices(labels, class_names: Sequence[str]) -> np.ndarray:
    index = {name: i for i, name in enumerate(class_names)}
    out = np.empty(len(labels), dtype=np.intp)
    for i, lab in enumerate(labels):
        if isinstance(lab, str):
            if lab not in index:
                raise UnknownLabel(f"label {lab!r} is not one of {tuple(class_names)}")
            out[i] = index[lab]
        else:
            if not 0 <= int(lab) < len(class_names):
                raise UnknownLabel(f"class index {lab} out of range for {len(class_names)} classes")
            out[i] = int(lab)
    return out


def recognition_rate(predicted: Sequence, truth: Sequence) -> float:
    """Correctly recognized test samples over total tested samples."""
    if len(predicted) != len(truth):
        raise LengthMismatch(f"{len(predicted)} predictions for {len(truth)} labels")
    if len(truth) == 0:
        raise EmptyInput("no test samples")
    correct = sum(1 for p, t in zip(predicted, truth) if p == t)
    return correct / len(truth)


def confusion_matrix(predicted: Sequence, truth: Sequence, class_names: Sequence[str]) -> ConfusionMatrix:
    if len(predicted) != len(truth):
        raise LengthMismatch(f"{len(predicted)} predictions for {len(truth)} labels")
    p = _label_indices(predicted, class_names)
    t = _label_indices(truth, class_names)
    c = len(class_names)
    counts = np.bincount(t * c + p, minlength=c * c).reshape(c, c)
    return ConfusionMatrix(counts, tuple(class_names))


def rate_from_confusion(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EmptyMatrix("confusion matrix holds no samples")
    return cm.correct / cm.total


def exact_rate(cm: ConfusionMatrix) -> Fraction:
    if cm.total == 0:
        raise EmptyMatrix("confusion matrix holds no samples")
    return Fraction(cm.correct, cm.total)


def _evaluate_coords(model: TrainedModel, coords: np.ndarray, truth: np.ndarray,
                     rule: ClassifierRule) -> tuple[float, ConfusionMatrix]:
    predicted = classify_coords(model, coords, rule)
    cm = confusion_matrix(predicted, truth, model.class_names)
    return rate_from_confusion(cm), cm


def evaluate(model: TrainedModel, test: LabeledDataset, rule: ClassifierRule) -> tuple[float, ConfusionMatrix]:
    """Classify every sample of ``test``; returns (rate, confusion matrix)."""
    if len(test) == 0:
        raise EmptyInput("test split is empty")
    if tuple(test.class_names) != model.class_names:
        raise UnknownLabel(f"test classes {test.class_names} differ from model classes {model.class_names}")
    feats = []
    for i, img in enumerate(test.images):
        try:
            feats.append(extract(img, model.feature_config))
        except EigenclassError as exc:
            raise type(exc)(f"test sample {i}: {exc}") from exc
    coords = project(model.eigenspace, np.vstack(feats))
    return _evaluate_coords(model, coords, test.labels, rule)


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SweepResult:
    """Recognition-rate grid: one row per coefficient count, one column per rule."""

    coeff_counts: tuple[int, ...]
    rules: tuple[ClassifierRule, ...]
    correct: np.ndarray
    total: int
    confusions: dict = field(default_factory=dict)

    @property
    def rates(self) -> np.ndarray:
        return self.correct / self.total

    def rate(self, n_coeffs: int, rule: ClassifierRule) -> float:
        i = self.coeff_counts.index(n_coeffs)
        j = self.rules.index(rule)
        return float(self.correct[i, j] / self.total)

    def best(self) -> tuple[int, ClassifierRule, float]:
        """Best cell; ties go to the earliest (coefficient count, rule) in grid order."""
        flat = int(np.argmax(self.correct))
        i, j = divmod(flat, len(self.rules))
        return self.coeff_counts[i], self.rules[j], float(self.correct[i, j] / self.total)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n_coeffs,rule,rate\n")
        for i, n in enumerate(self.coeff_counts):
            for j, rule in enumerate(self.rules):
                buf.write(f"{n},{rule.name},{self.correct[i, j] / self.total:.6f}\n")
        return buf.getvalue()

    def __eq__(self, other):
        if not isinstance(other, SweepResult):
            return NotImplemented
        return (self.coeff_counts == other.coeff_counts and self.rules == other.rules
                and self.total == other.total and np.array_equal(self.correct, other.correct))


def make_rules(k_values: Iterable[int], include_centroid: bool) -> tuple[ClassifierRule, ...]:
    rules = [ClassifierRule.knn(int(k)) for k in k_values]
    if include_centroid:
        rules.append(ClassifierRule.centroid())
    if not rules:
        raise EmptyInput("no classifier rules requested")
    return tuple(rules)


def _check_splits(train: LabeledDataset, test: LabeledDataset):
    if len(train) == 0:
        raise EmptyInput("training split is empty")
    if len(test) == 0:
        raise EmptyInput("test split is empty")
    if train.class_names != test.class_names:
        raise UnknownLabel("train and test splits use different class lists")
    sizes = {img.size for img in train.images} | {img.size for img in test.images}
    if len(sizes) != 1:
        raise DimensionMismatch(f"images have mixed sizes {sorted(sizes)}")
    return sizes.pop()


def _run_cell(train_feats, train_labels, test_feats, test_labels, class_names, config, rules,
              keep_confusion, max_components, backend):
    try:
        model = fit_model(train_feats, train_labels, class_names, config, max_components, backend=backend)
    except EigenclassError as exc:
        raise type(exc)(f"cell {config.describe()}: {exc}") from exc
    coords = project(model.eigenspace, test_feats)
    correct, confusions = [], {}
    for rule in rules:
        try:
            _, cm = _evaluate_coords(model, coords, test_labels, rule)
        except EigenclassError as exc:
            raise type(exc)(f"cell ({config.describe()}, {rule.name}): {exc}") from exc
        correct.append(cm.correct)
        if keep_confusion:
            confusions[rule] = cm
    return correct, confusions


def sweep_dct(train: LabeledDataset, test: LabeledDataset, coeff_range: Iterable[int],
              k_values: Iterable[int], include_centroid: bool = True, *, jobs: int = 1,
              keep_confusion: bool = False, max_components: int | None = None,
              backend: str | None = None) -> SweepResult:
    """Recognition rate for every (coefficient count, rule) pair.

    The full zigzag DCT of every image is computed once; each coefficient
    count then fits its own eigenspace on the leading coefficients. Cells run
    on up to ``jobs`` threads and are assembled in grid order.
    """
    counts = tuple(int(n) for n in coeff_range)
    if not counts:
        raise EmptyInput("empty coefficient range")
    rules = make_rules(k_values, include_centroid)
    w, h = _check_splits(train, test)
    if min(counts) < 1 or max(counts) > w * h:
        raise CoefficientCountOutOfRange(f"coefficient counts must lie in [1, {w * h}], got {min(counts)}..{max(counts)}")

    train_zz = np.vstack([zigzag_dct(img) for img in train.images])
    test_zz = np.vstack([zigzag_dct(img) for img in test.images])
    train_labels, test_labels = train.labels, test.labels

    def cell(n):
        config = FeatureConfig(DCT, w, h, n)
        return _run_cell(np.ascontiguousarray(train_zz[:, :n]), train_labels,
                         np.ascontiguousarray(test_zz[:, :n]), test_labels, train.class_names,
                         config, rules, keep_confusion, max_components, backend)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(cell, counts))
    else:
        results = [cell(n) for n in counts]

    correct = np.array([r[0] for r in results], dtype=np.int64)
    confusions = {}
    for n, (_, cms) in zip(counts, results):
        for rule, cm in cms.items():
            confusions[(n, rule)] = cm
    return SweepResult(counts, rules, correct, len(test), confusions)


def sweep_raw(train: LabeledDataset, test: LabeledDataset, k_values: Iterable[int],
              include_centroid: bool = True, *, keep_confusion: bool = False,
              max_components: int | None = None, backend: str | None = None) -> SweepResult:
    """Single-row sweep on full raw-pixel vectors; the row is keyed by the pixel count."""
    rules = make_rules(k_values, include_centroid)
    w, h = _check_splits(train, test)
    config = FeatureConfig(RAW, w, h)
    train_feats = np.vstack([raw_pixel_vector(img).values for img in train.images])
    test_feats = np.vstack([raw_pixel_vector(img).values for img in test.images])
    correct, cms = _run_cell(train_feats, train.labels, test_feats, test.labels, train.class_names,
                             config, rules, keep_confusion, max_components, backend)
    confusions = {(w * h, rule): cm for rule, cm in cms.items()}
    return SweepResult((w * h,), rules, np.array([correct], dtype=np.int64), len(test), confusions)
