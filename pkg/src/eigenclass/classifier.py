"""k-NN and nearest-centroid classification in the eigenspace."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .dataset import GrayImage, LabeledDataset
from .eigenspace import Eigenspace, fit_eigenspace, project
from .errors import (
    DimensionMismatch,
    EmptyClass,
    EmptyInput,
    EmptyModel,
    InvalidSpec,
    KOutOfRange,
)
from .features import FeatureConfig, extract, extract_matrix


@dataclass(frozen=True)
class ClassifierRule:
    """``k=None`` selects the nearest-centroid rule, otherwise k-NN."""

    k: int | None = None

    def __post_init__(self):
        if self.k is not None and self.k < 1:
            raise KOutOfRange(f"k must be >= 1, got {self.k}")

    @classmethod
    def knn(cls, k: int) -> "ClassifierRule":
        return cls(k)

    @classmethod
    def centroid(cls) -> "ClassifierRule":
        return cls(None)

    @classmethod
    def parse(cls, text: str) -> "ClassifierRule":
        text = text.strip().lower()
        if text == "centroid":
            return cls.centroid()
        match = re.fullmatch(r"knn(\d+)", text)
        if not match:
            raise InvalidSpec(f"rule must be 'knn<k>' or 'centroid', got {text!r}")
        return cls.knn(int(match.group(1)))

    @property
    def is_centroid(self) -> bool:
        return self.k is None

    @property
    def name(self) -> str:
        return "centroid" if self.k is None else f"knn{self.k}"

    def __str__(self):
        return self.name


class Neighbor(NamedTuple):
    index: int
    label: int
    distance: float


class KnnResult(NamedTuple):
    label: int
    neighbors: list[Neighbor]


@dataclass(frozen=True, eq=False)
class TrainedModel:
    eigenspace: Eigenspace
    train_coords: np.ndarray
    train_labels: np.ndarray
    centroids: np.ndarray
    feature_config: FeatureConfig
    class_names: tuple[str, ...]

    def __post_init__(self):
        coords = np.array(self.train_coords, dtype=np.float64).reshape(len(self.train_labels), -1)
        labels = np.array(self.train_labels, dtype=np.intp)
        coords.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "train_coords", coords)
        object.__setattr__(self, "train_labels", labels)
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if labels.size and (labels.min() < 0 or labels.max() >= len(self.class_names)):
            raise InvalidSpec("training label outside class_names")
        if coords.shape[1] != self.eigenspace.n_components:
            raise DimensionMismatch("training coordinates do not match the eigenspace")

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def n_train(self) -> int:
        return len(self.train_labels)

    def default_rule(self) -> ClassifierRule:
        # best configurations reported for 2-class gender / 4-class age groups
        k = 5 if self.n_classes <= 2 else 7
        return ClassifierRule.knn(min(k, self.n_train))


def euclidean_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vectors have shapes {a.shape} and {b.shape}")
    d = a - b
    return math.sqrt(float(d @ d)) if d.ndim == 1 else math.sqrt(float(np.sum(d * d)))


def _vote(labels: np.ndarray, dists: np.ndarray, n_classes: int) -> int:
    counts = np.bincount(labels, minlength=n_classes)
    tied = np.flatnonzero(counts == counts.max())
    if len(tied) == 1:
        return int(tied[0])
    # majority tie: smallest summed distance, then lowest class index
    sums = [math.fsum(dists[labels == c]) for c in tied]
    return int(tied[int(np.argmin(sums))])


def knn_search(train_coords: np.ndarray, train_labels: np.ndarray, query, k: int,
               n_classes: int | None = None) -> KnnResult:
    """Majority vote among the k nearest training points.

    Neighbors are ordered by (distance, training index) and cut at exactly k.
    """
    train_coords = np.asarray(train_coords, dtype=np.float64)
    train_labels = np.asarray(train_labels, dtype=np.intp)
    m = len(train_labels)
    if m == 0:
        raise EmptyModel("model has no training points")
    if not 1 <= k <= m:
        raise KOutOfRange(f"k must lie in [1, {m}], got {k}")
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (train_coords.shape[1],):
        raise DimensionMismatch(f"query has shape {query.shape}, expected ({train_coords.shape[1]},)")
    diff = train_coords - query
    sq = np.einsum("ij,ij->i", diff, diff)
    order = np.lexsort((np.arange(m), sq))[:k]
    dists = np.sqrt(sq[order])
    labels = train_labels[order]
    if n_classes is None:
        n_classes = int(train_labels.max()) + 1
    label = _vote(labels, dists, n_classes)
    neighbors = [Neighbor(int(i), int(l), float(d)) for i, l, d in zip(order, labels, dists)]
    return KnnResult(label, neighbors)


def knn_classify(model: TrainedModel, query, k: int) -> KnnResult:
    return knn_search(model.train_coords, model.train_labels, query, k, model.n_classes)


def fit_centroids(coords, labels, n_classes: int, class_names: Sequence[str] | None = None) -> np.ndarray:
    """Per-class mean of the projected training points (one row per class)."""
    coords = np.asarray(coords, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.intp)
    centroids = np.empty((n_classes, coords.shape[1]))
    for c in range(n_classes):
        members = coords[labels == c]
        if len(members) == 0:
            name = class_names[c] if class_names is not None else str(c)
            raise EmptyClass(f"class {name!r} has no training points")
        centroids[c] = members.mean(axis=0)
    return centroids


def nearest_centroid(centroids: np.ndarray, query) -> int:
    centroids = np.asarray(centroids, dtype=np.float64)
    if centroids.size == 0 or len(centroids) == 0:
        raise EmptyModel("no centroids fitted")
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (centroids.shape[1],):
        raise DimensionMismatch(f"query has shape {query.shape}, expected ({centroids.shape[1]},)")
    diff = centroids - query
    # argmin returns the first minimum: lowest class index wins ties
    return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))


def centroid_classify(model: TrainedModel, query) -> int:
    return nearest_centroid(model.centroids, query)


def apply_rule(model: TrainedModel, coords, rule: ClassifierRule) -> int:
    if rule.is_centroid:
        return centroid_classify(model, coords)
    return knn_classify(model, coords, rule.k).label


def fit_model(features: np.ndarray, labels, class_names: Sequence[str], config: FeatureConfig,
              max_components: int | None = None, *, backend: str | None = None) -> TrainedModel:
    """Fit eigenspace, projections and centroids from a precomputed feature matrix."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.intp)
    if len(features) == 0:
        raise EmptyInput("no training samples")
    if features.shape[1] != config.dim:
        raise DimensionMismatch(f"features have {features.shape[1]} columns, config expects {config.dim}")
    es = fit_eigenspace(features, max_components, backend=backend)
    coords = project(es, features)
    centroids = fit_centroids(coords, labels, len(class_names), class_names)
    return TrainedModel(es, coords, labels, centroids, config, tuple(class_names))


def train_model(train: LabeledDataset, config: FeatureConfig, max_components: int | None = None,
                *, backend: str | None = None) -> TrainedModel:
    """Extract features from every sample in ``train`` and fit a model."""
    if len(train) == 0:
        raise EmptyInput("training split is empty")
    return fit_model(extract_matrix(train.images, config), train.labels, train.class_names, config,
                     max_components, backend=backend)


def image_coords(model: TrainedModel, image: GrayImage) -> np.ndarray:
    return project(model.eigenspace, extract(image, model.feature_config))


def classify(model: TrainedModel, image: GrayImage, rule: ClassifierRule) -> int:
    """Features -> eigenspace projection -> rule; returns a class index."""
    return apply_rule(model, image_coords(model, image), rule)


def classify_coords(model: TrainedModel, coords: np.ndarray, rule: ClassifierRule) -> np.ndarray:
    return np.array([apply_rule(model, c, rule) for c in coords], dtype=np.intp)


def classify_batch(model: TrainedModel, images: Sequence[GrayImage], rule: ClassifierRule) -> np.ndarray:
    if not len(images):
        return np.empty(0, dtype=np.intp)
    feats = extract_matrix(images, model.feature_config)
    return classify_coords(model, project(model.eigenspace, feats), rule)
