"""Model files: a readable text header followed by little-endian float64 blocks.

Layout::

    EIGC 1
    feature dct 133          (or: feature raw)
    image 128 128            (width height)
    n 133                    (feature dimension)
    components 57
    train 200
    classes 2
    class male
    class female
    end
    <mean: n> <components: components*n> <eigenvalues: components>
    <projected points: train*components> <labels: train> <centroids: classes*components>
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .classifier import TrainedModel
from .eigenspace import Eigenspace
from .errors import ModelFormatError
from .features import DCT, RAW, FeatureConfig

MAGIC = "EIGC"
VERSION = 1
_F8 = np.dtype("<f8")


def dumps(model: TrainedModel) -> bytes:
    es = model.eigenspace
    cfg = model.feature_config
    lines = [f"{MAGIC} {VERSION}"]
    lines.append(f"feature dct {cfg.n_coeffs}" if cfg.kind == DCT else "feature raw")
    lines.append(f"image {cfg.image_w} {cfg.image_h}")
    lines.append(f"n {es.n}")
    lines.append(f"components {es.n_components}")
    lines.append(f"train {model.n_train}")
    lines.append(f"classes {model.n_classes}")
    for name in model.class_names:
        if "\n" in name or "\r" in name:
            raise ModelFormatError(f"class name {name!r} contains a line break")
        lines.append(f"class {name}")
    lines.append("end")
    header = ("\n".join(lines) + "\n").encode("utf-8")
    blocks = [
        es.mean,
        es.components,
        es.eigenvalues,
        model.train_coords,
        model.train_labels.astype(np.float64),
        model.centroids,
    ]
    return header + b"".join(np.ascontiguousarray(b, dtype=_F8).tobytes() for b in blocks)


def save_model(model: TrainedModel, path) -> None:
    Path(path).write_bytes(dumps(model))


def _expect(line: str, key: str, n_values: int) -> list[str]:
    parts = line.split(" ")
    if parts[0] != key or len(parts) != n_values + 1:
        raise ModelFormatError(f"expected '{key}' header line, got {line!r}")
    return parts[1:]


def loads(data: bytes, source="<model>") -> TrainedModel:
    pos = 0
    header = []
    while True:
        nl = data.find(b"\n", pos)
        if nl < 0:
            raise ModelFormatError(f"{source}: header is not terminated by 'end'")
        line = data[pos:nl].decode("utf-8", errors="strict")
        pos = nl + 1
        header.append(line)
        if line == "end":
            break
        if len(header) == 1:
            parts = line.split(" ")
            if parts[0] != MAGIC:
                raise ModelFormatError(f"{source}: not a model file (bad magic)")
            if len(parts) != 2 or parts[1] != str(VERSION):
                raise ModelFormatError(f"{source}: unsupported model version {parts[1:]} (expected {VERSION})")

    try:
        it = iter(header[1:])
        feat = next(it).split(" ")
        if feat[:2] == ["feature", "raw"] and len(feat) == 2:
            kind, n_coeffs = RAW, None
        elif feat[:2] == ["feature", "dct"] and len(feat) == 3:
            kind, n_coeffs = DCT, int(feat[2])
        else:
            raise ModelFormatError(f"bad feature line {' '.join(feat)!r}")
        w, h = (int(v) for v in _expect(next(it), "image", 2))
        n = int(_expect(next(it), "n", 1)[0])
        k = int(_expect(next(it), "components", 1)[0])
        m = int(_expect(next(it), "train", 1)[0])
        c = int(_expect(next(it), "classes", 1)[0])
        names = []
        for _ in range(c):
            line = next(it)
            if not line.startswith("class "):
                raise ModelFormatError(f"expected 'class' line, got {line!r}")
            names.append(line[len("class "):])
        if next(it) != "end":
            raise ModelFormatError("unexpected header line before 'end'")
        config = FeatureConfig(kind, w, h, n_coeffs)
    except StopIteration:
        raise ModelFormatError(f"{source}: truncated header") from None
    except ValueError as exc:
        raise ModelFormatError(f"{source}: {exc}") from None
    if config.dim != n:
        raise ModelFormatError(f"{source}: feature dimension {n} disagrees with {config.describe()}")

    sizes = [n, k * n, k, m * k, m, c * k]
    expected = sum(sizes) * _F8.itemsize
    if len(data) - pos != expected:
        raise ModelFormatError(f"{source}: payload is {len(data) - pos} bytes, expected {expected}")
    flat = np.frombuffer(data, dtype=_F8, offset=pos).astype(np.float64)
    parts = np.split(flat, np.cumsum(sizes)[:-1])
    mean, comps, eigvals, coords, labels, centroids = parts
    es = Eigenspace(mean, comps.reshape(k, n), eigvals, m)
    return TrainedModel(es, coords.reshape(m, k), labels.astype(np.intp), centroids.reshape(c, k),
                        config, tuple(names))


def load_model(path) -> TrainedModel:
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise ModelFormatError(f"{path}: model file not found") from None
    return loads(data, source=str(path))
