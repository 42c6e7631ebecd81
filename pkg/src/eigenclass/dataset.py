"""Image I/O, face normalization, manifests and the synthetic face generator."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CorruptImage,
    EmptyImage,
    ImageFileNotFound,
    InvalidSpec,
    ManifestParseError,
    UnknownLabel,
    UnsupportedFormat,
)

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
SPLITS = ("train", "test")
DEFAULT_SIZE = (128, 128)

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Grayscale image; ``pixels`` has shape (height, width), values in [0, 255]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.float64)
        if px.ndim != 2:
            raise ValueError(f"pixels must be 2-D, got shape {px.shape}")
        if px.size and (not np.all(np.isfinite(px)) or px.min() < 0 or px.max() > 255):
            raise ValueError("pixel values must be finite and within [0, 255]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def size(self) -> tuple[int, int]:
        return self.width, self.height

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


# --------------------------------------------------------------------------
# Image files
# --------------------------------------------------------------------------

def _read_pnm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        ch = data[pos:pos + 1]
        if ch == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ValueError("truncated header")
    return data[start:pos], pos


def _decode_pgm(data: bytes, path) -> np.ndarray:
    try:
        magic, pos = _read_pnm_token(data, 0)
        width_tok, pos = _read_pnm_token(data, pos)
        height_tok, pos = _read_pnm_token(data, pos)
        maxval_tok, pos = _read_pnm_token(data, pos)
        width, height, maxval = int(width_tok), int(height_tok), int(maxval_tok)
    except ValueError as exc:
        raise CorruptImage(f"{path}: bad PGM header ({exc})") from None
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise CorruptImage(f"{path}: bad PGM header values {width}x{height} maxval {maxval}")

    if magic == b"P5":
        pos += 1  # exactly one whitespace byte before the raster
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        nbytes = width * height * dtype.itemsize
        raster = data[pos:pos + nbytes]
        if len(raster) < nbytes:
            raise CorruptImage(f"{path}: truncated raster ({len(raster)} of {nbytes} bytes)")
        values = np.frombuffer(raster, dtype=dtype).astype(np.float64)
    else:
        try:
            values = np.array([int(t) for t in data[pos:].split()[: width * height]], dtype=np.float64)
        except ValueError:
            raise CorruptImage(f"{path}: non-numeric ASCII raster") from None
        if values.size < width * height:
            raise CorruptImage(f"{path}: truncated raster")
    if values.max(initial=0) > maxval:
        raise CorruptImage(f"{path}: sample exceeds maxval {maxval}")
    values = values.reshape(height, width)
    if maxval != 255:
        values = values * (255.0 / maxval)
    return values


def rgb_to_luma(rgb: np.ndarray) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = LUMA_WEIGHTS
    return r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]


def _decode_png(path) -> np.ndarray:
    from PIL import Image

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(im, dtype=np.float64)
                return np.clip(arr * (255.0 / 65535.0), 0, 255)
            if mode == "L":
                return np.asarray(im, dtype=np.float64)
            if mode == "LA":
                return np.asarray(im, dtype=np.float64)[..., 0]
            if mode == "1":
                return np.asarray(im.convert("L"), dtype=np.float64)
            if mode not in ("RGB", "RGBA"):
                im = im.convert("RGB")
            return rgb_to_luma(np.asarray(im)[..., :3])
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImage(f"{path}: {exc}") from None


def load_image(path) -> GrayImage:
    """Load a PGM (P5/P2) or PNG file as a grayscale image.

    Color PNGs are reduced to luminance with the 0.299/0.587/0.114 weights.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise ImageFileNotFound(f"{path}: no such file") from None
    except IsADirectoryError:
        raise ImageFileNotFound(f"{path}: is a directory") from None
    if data[:2] in (b"P5", b"P2"):
        pixels = _decode_pgm(data, path)
    elif data[:8] == _PNG_SIGNATURE:
        pixels = _decode_png(path)
    else:
        raise UnsupportedFormat(f"{path}: not a PGM (P5/P2) or PNG file")
    if pixels.size == 0:
        raise EmptyImage(f"{path}: image has no pixels")
    return GrayImage(pixels)


def save_pgm(img: GrayImage | np.ndarray, path) -> None:
    """Write a binary (P5, maxval 255) PGM, rounding and clamping to bytes."""
    pixels = img.pixels if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)
    raster = np.clip(np.rint(pixels), 0, 255).astype(np.uint8)
    h, w = raster.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(raster.tobytes())


# --------------------------------------------------------------------------
# Normalization
# --------------------------------------------------------------------------

def _bilinear_axis(n_in: int, n_out: int):
    # pixel-center alignment, edge-clamped
    pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = pos - lo
    return lo, hi, frac


def normalize_face(img: GrayImage, target_w: int, target_h: int) -> GrayImage:
    """Resize to ``target_w`` x ``target_h`` by bilinear interpolation."""
    if img.pixels.size == 0:
        raise EmptyImage("cannot normalize an empty image")
    if target_w < 1 or target_h < 1:
        raise InvalidSpec(f"target size must be positive, got {target_w}x{target_h}")
    if (img.width, img.height) == (target_w, target_h):
        return img
    src = img.pixels
    y0, y1, fy = _bilinear_axis(img.height, target_h)
    x0, x1, fx = _bilinear_axis(img.width, target_w)
    fy = fy[:, None]
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bottom = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    out = top * (1 - fy) + bottom * fy
    # convex combinations can overshoot by an ulp
    out = np.clip(out, src.min(), src.max())
    return GrayImage(out)


# --------------------------------------------------------------------------
# Datasets and manifests
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    split: str

    def __post_init__(self):
        if not self.path:
            raise ValueError("empty path")
        if not self.label:
            raise ValueError("empty label")
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")


@dataclass(frozen=True)
class Sample:
    image: GrayImage
    class_id: int
    split: str


@dataclass(frozen=True)
class LabeledDataset:
    samples: tuple[Sample, ...]
    class_names: tuple[str, ...]
    sources: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if not self.class_names:
            raise InvalidSpec("class_names must be non-empty")
        if len(set(self.class_names)) != len(self.class_names):
            raise InvalidSpec(f"duplicate class names in {self.class_names}")
        for s in self.samples:
            if not 0 <= s.class_id < len(self.class_names):
                raise InvalidSpec(f"class_id {s.class_id} out of range")
            if s.split not in SPLITS:
                raise InvalidSpec(f"bad split {s.split!r}")

    def __len__(self):
        return len(self.samples)

    @property
    def images(self) -> list[GrayImage]:
        return [s.image for s in self.samples]

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.class_id for s in self.samples], dtype=np.intp)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, split: str) -> "LabeledDataset":
        keep = [i for i, s in enumerate(self.samples) if s.split == split]
        sources = tuple(self.sources[i] for i in keep) if self.sources else ()
        return LabeledDataset(tuple(self.samples[i] for i in keep), self.class_names, sources)

    @property
    def train(self) -> "LabeledDataset":
        return self.subset("train")

    @property
    def test(self) -> "LabeledDataset":
        return self.subset("test")

    def class_counts(self) -> list[int]:
        counts = [0] * self.n_classes
        for s in self.samples:
            counts[s.class_id] += 1
        return counts


def parse_manifest(lines: Iterable[str], source="<manifest>") -> list[tuple[int, ManifestEntry]]:
    entries = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ManifestParseError(
                f"{source}:{lineno}: expected 3 tab-separated fields (path, label, split), got {len(fields)}"
            )
        path, label, split = (f.strip() for f in fields)
        try:
            entries.append((lineno, ManifestEntry(path, label, split)))
        except ValueError as exc:
            raise ManifestParseError(f"{source}:{lineno}: {exc}") from None
    return entries


def load_manifest(path, root=None, size: tuple[int, int] = DEFAULT_SIZE) -> LabeledDataset:
    """Load every manifest entry, normalized to ``size`` = (width, height).

    Relative image paths resolve against ``root`` (default: the manifest's directory).
    """
    path = Path(path)
    root = Path(root) if root is not None else path.parent
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ImageFileNotFound(f"{path}: manifest not found") from None
    except UnicodeDecodeError as exc:
        raise ManifestParseError(f"{path}: not UTF-8 ({exc})") from None
    entries = parse_manifest(text.split("\n"), source=str(path))

    class_names: list[str] = []
    index: dict[str, int] = {}
    samples = []
    for lineno, entry in entries:
        if entry.label not in index:
            index[entry.label] = len(class_names)
            class_names.append(entry.label)
        img_path = root / entry.path
        try:
            img = normalize_face(load_image(img_path), *size)
        except (ImageFileNotFound, UnsupportedFormat, CorruptImage, EmptyImage) as exc:
            raise type(exc)(f"{path}:{lineno}: {exc}") from exc
        samples.append(Sample(img, index[entry.label], entry.split))
    if not class_names:
        raise ManifestParseError(f"{path}: manifest has no entries")
    return LabeledDataset(tuple(samples), tuple(class_names), tuple(e.path for _, e in entries))


def write_manifest(entries: Sequence[ManifestEntry], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in entries:
            fh.write(f"{e.path}\t{e.label}\t{e.split}\n")


# --------------------------------------------------------------------------
# Synthetic faces
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticSpec:
    n_classes: int = 2
    n_train: int = 100
    n_test: int = 50
    width: int = 64
    height: int = 64
    noise: int = 90
    contrast: int = 5
    base_level: int = 128

    def validate(self):
        if self.n_classes < 1 or self.n_train < 1 or self.n_test < 1:
            raise InvalidSpec("class and per-class sample counts must be >= 1")
        if self.width < 8 or self.height < 8:
            raise InvalidSpec(f"image size must be at least 8x8, got {self.width}x{self.height}")
        if self.noise < 0 or self.contrast < 0:
            raise InvalidSpec("noise and contrast must be non-negative")
        if not 0 <= self.base_level <= 255:
            raise InvalidSpec("base_level must lie in [0, 255]")


def _template_modes(n_classes: int) -> list[tuple[int, int]]:
    # lowest-frequency cosine modes, DC excluded, one per class
    modes = []
    s = 1
    while len(modes) < n_classes:
        for u in range(s + 1):
            modes.append((u, s - u))
        s += 1
    return modes[:n_classes]


def class_template(spec: SyntheticSpec, class_id: int) -> np.ndarray:
    """Smooth integer-valued template of one class (before noise)."""
    u, v = _template_modes(class_id + 1)[class_id]
    y = (np.arange(spec.height) + 0.5) * np.pi / spec.height
    x = (np.arange(spec.width) + 0.5) * np.pi / spec.width
    pattern = np.outer(np.cos(u * y), np.cos(v * x))
    # oval face mask shared by every class
    yy, xx = np.meshgrid(np.linspace(-1, 1, spec.height), np.linspace(-1, 1, spec.width), indexing="ij")
    face = np.where(xx**2 / 0.64 + yy**2 / 0.9 <= 1.0, 20.0, -20.0)
    return np.rint(spec.base_level + face + spec.contrast * pattern).astype(np.int64)


def generate_synthetic(spec: SyntheticSpec = SyntheticSpec(), seed: int = 42) -> LabeledDataset:
    """Deterministic labeled dataset: per-class cosine templates plus integer noise.

    Samples are ordered class by class, train samples before test samples.
    Noise is drawn as integers from a PCG64 stream so output is identical on
    every platform.
    """
    spec.validate()
    rng = np.random.Generator(np.random.PCG64(seed))
    shape = (spec.height, spec.width)
    samples = []
    sources = []
    for c in range(spec.n_classes):
        template = class_template(spec, c)
        for split, count in (("train", spec.n_train), ("test", spec.n_test)):
            for i in range(count):
                noise = rng.integers(-spec.noise, spec.noise + 1, size=shape, dtype=np.int64)
                px = np.clip(template + noise, 0, 255).astype(np.float64)
                samples.append(Sample(GrayImage(px), c, split))
                sources.append(f"{split}/class{c}_{i:04d}.pgm")
    names = tuple(f"class{c}" for c in range(spec.n_classes))
    return LabeledDataset(tuple(samples), names, tuple(sources))


def write_dataset(ds: LabeledDataset, out_dir, manifest_name: str = "manifest.tsv") -> Path:
    """Save every sample as PGM under ``out_dir`` and write a manifest next to them."""
    out_dir = Path(out_dir)
    if not ds.sources:
        raise InvalidSpec("dataset has no source paths to write")
    entries = []
    for sample, rel in zip(ds.samples, ds.sources):
        dest = out_dir / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        save_pgm(sample.image, dest)
        entries.append(ManifestEntry(rel, ds.class_names[sample.class_id], sample.split))
    manifest = out_dir / manifest_name
    write_manifest(entries, manifest)
    return manifest


def align_classes(ds: LabeledDataset, class_names: Sequence[str]) -> LabeledDataset:
    """Re-index ``ds`` onto another class list (e.g. a trained model's)."""
    index = {name: i for i, name in enumerate(class_names)}
    missing = [name for name in ds.class_names if name not in index]
    if missing:
        raise UnknownLabel(f"labels {missing} are not among the model classes {tuple(class_names)}")
    samples = tuple(Sample(s.image, index[ds.class_names[s.class_id]], s.split) for s in ds.samples)
    return LabeledDataset(samples, tuple(class_names), ds.sources)
